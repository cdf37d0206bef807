"""Forecasting high-dimensional non-stationary series with embedded fuzzy rules.

The pipeline embeds an M-channel series to one scalar per step (PCA or
RBF-kernel PCA), trains a first-order fuzzy forecaster on the embedded
training prefix, and keeps the fuzzy sets adapting online from a short
window of forecast residuals, so mean and variance drifts in the stream
are tracked without retraining.
"""

from .backtest import (
    EvaluationReport,
    ForecasterConfig,
    WindowSpec,
    grid_search,
    report_to_dict,
    sliding_window_eval,
    write_grid_csv,
    write_report_json,
    write_window_csv,
)
from .data import (
    SyntheticSpec,
    TimeSeriesFrame,
    generate_synthetic,
    load_csv,
    sensor_frame,
    split_train_test,
    synthetic_frame,
    write_csv,
)
from .embedding import (
    EmbeddedSeries,
    KpcaModel,
    PcaModel,
    StandardizationStats,
    apply_standardization,
    center_kernel,
    embed_series,
    fit_kpca,
    fit_pca,
    project_kpca,
    project_pca,
    rbf_kernel_matrix,
    standardize,
)
from .errors import (
    DegenerateEmbedding,
    DriftcastError,
    IngestError,
    InvalidInput,
    LoadError,
    NumericalFailure,
)
from .fts import (
    FuzzySet,
    NsftsModel,
    Universe,
    build_partitions,
    build_universe,
    extract_rules,
    membership,
    perturb,
    train,
)
from .linalg import covariance_matrix, leading_eigenpair, sym_eigen
from .metrics import MetricSet, compute_metrics, persistence_forecast, skill_score
from .serialize import load_model, save_model

__version__ = "0.1.0"
