"""PCA and RBF-kernel PCA maps that reduce M-channel observations to one scalar.

Both models are fitted on a training prefix and are immutable afterwards,
so they are safe to share between threads.  Columns are z-scored with the
training statistics before any distance or covariance computation; sensor
channels routinely differ by orders of magnitude in scale.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEmbedding, InvalidInput
from .linalg import as_matrix, covariance_matrix, leading_eigenpair, sym_eigen

# fit_kpca switches from the full Jacobi decomposition to the dedicated
# leading-eigenpair routine above this many training rows; both routes are
# deterministic and agree to solver tolerance.
DENSE_EIGEN_MAX_N = 256

# Cap on elements of the (rows x rows x features) difference block built
# while assembling a kernel matrix; bounds transient memory to ~128 MB.
_KERNEL_BLOCK_ELEMENTS = 1 << 24


@dataclass(frozen=True)
class StandardizationStats:
    """Per-column means and population standard deviations of the fit data."""

    means: np.ndarray
    std_devs: np.ndarray


def standardize(data) -> tuple[np.ndarray, StandardizationStats]:
    """Z-score each column; constant columns map to all zeros.

    Returns the transformed matrix and the fitted statistics for reuse
    on out-of-sample rows.
    """
    arr = as_matrix(data)
    means = arr.mean(axis=0)
    stds = arr.std(axis=0)  # population (ddof=0)
    stats = StandardizationStats(means=means, std_devs=stds)
    return apply_standardization(arr, stats), stats


def apply_standardization(data, stats: StandardizationStats) -> np.ndarray:
    """Apply previously fitted column statistics to new rows."""
    arr = np.asarray(data, dtype=np.float64)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr.reshape(1, -1)
    if arr.shape[1] != stats.means.shape[0]:
        raise InvalidInput(
            f"point has {arr.shape[1]} features, model expects {stats.means.shape[0]}"
        )
    safe = np.where(stats.std_devs > 0.0, stats.std_devs, 1.0)
    out = (arr - stats.means) / safe
    return out[0] if squeeze else out


def _fix_sign(component: np.ndarray) -> np.ndarray:
    # Reproducible eigenvector orientation: largest-magnitude entry is
    # positive, first occurrence winning ties.
    idx = int(np.argmax(np.abs(component)))
    return -component if component[idx] < 0.0 else component


@dataclass(frozen=True)
class PcaModel:
    """First principal component of the standardized training data."""

    stats: StandardizationStats
    component: np.ndarray
    eigenvalue: float
    n_components: int = 1


def fit_pca(data, n_components: int = 1) -> PcaModel:
    """Fit a one-component PCA on standardized data.

    ``n_components`` is reserved for future use; only 1 is supported.
    """
    if n_components != 1:
        raise InvalidInput("only n_components=1 is supported")
    std_data, stats = standardize(data)
    cov = covariance_matrix(std_data)
    eigenvalues, eigenvectors = sym_eigen(cov)
    component = _fix_sign(eigenvectors[:, 0].copy())
    return PcaModel(stats=stats, component=component, eigenvalue=float(eigenvalues[0]))


def project_pca(model: PcaModel, point) -> float:
    """Project one M-vector to its first-component score."""
    z = apply_standardization(point, model.stats)
    if z.ndim != 1:
        raise InvalidInput("project_pca expects a single point")
    return float(model.component @ z)


def rbf_kernel_matrix(a, b, gamma: float) -> np.ndarray:
    """Gaussian kernel matrix ``exp(-gamma * ||a_i - b_j||^2)``.

    Built in row blocks so the transient difference tensor stays bounded;
    the returned matrix itself is dense ``len(a) x len(b)`` (the dominant
    memory cost: 8 bytes per entry).
    """
    if gamma <= 0.0:
        raise InvalidInput(f"gamma must be positive, got {gamma}")
    am = as_matrix(a, "a")
    bm = as_matrix(b, "b")
    if am.shape[1] != bm.shape[1]:
        raise InvalidInput(
            f"column count mismatch: {am.shape[1]} vs {bm.shape[1]}"
        )
    n_a, n_b = am.shape[0], bm.shape[0]
    block = max(1, _KERNEL_BLOCK_ELEMENTS // max(1, n_b * am.shape[1]))
    out = np.empty((n_a, n_b))
    for start in range(0, n_a, block):
        stop = min(start + block, n_a)
        diff = am[start:stop, None, :] - bm[None, :, :]
        np.exp(-gamma * np.einsum("ijk,ijk->ij", diff, diff), out=out[start:stop])
    return out


def center_kernel(k) -> np.ndarray:
    """Center a square kernel matrix in feature space.

    Output rows and columns sum to zero; centering is idempotent.
    """
    km = as_matrix(k, "kernel")
    if km.shape[0] != km.shape[1]:
        raise InvalidInput(f"kernel must be square, got {km.shape[0]}x{km.shape[1]}")
    row_means = km.mean(axis=1, keepdims=True)
    col_means = km.mean(axis=0, keepdims=True)
    return km - row_means - col_means + km.mean()


@dataclass(frozen=True)
class KpcaModel:
    """Leading centered-kernel component of the standardized training data.

    ``alpha`` is scaled so the implicit feature-space component has unit
    norm (``alpha' K~ alpha = 1``); ``eigenvalue`` is the leading eigenvalue
    of the centered training kernel.  The uncentered kernel row means and
    grand mean are kept for centering out-of-sample kernel rows.
    """

    stats: StandardizationStats
    training_points: np.ndarray
    gamma: float
    alpha: np.ndarray
    eigenvalue: float
    row_means: np.ndarray
    grand_mean: float

    def training_scores(self) -> np.ndarray:
        """Fit-time projections of the training rows."""
        return self.eigenvalue * self.alpha


def fit_kpca(data, gamma: float, max_dense_n: int = DENSE_EIGEN_MAX_N) -> KpcaModel:
    """Fit a one-component RBF kernel PCA on standardized data.

    The training kernel is ``N x N``; fitting cost and memory grow
    quadratically with the number of training rows (see ``embed_series``
    for the subsampling cap).
    """
    std_data, stats = standardize(data)
    n = std_data.shape[0]
    if n < 3:
        raise InvalidInput(f"kernel PCA needs at least 3 rows, got {n}")
    kernel = rbf_kernel_matrix(std_data, std_data, gamma)
    row_means = kernel.mean(axis=1)
    grand_mean = float(kernel.mean())
    centered = center_kernel(kernel)
    if n <= max_dense_n:
        eigenvalues, eigenvectors = sym_eigen(centered)
        lam, vec = float(eigenvalues[0]), eigenvectors[:, 0].copy()
    else:
        lam, vec = leading_eigenpair(centered)
    if lam <= 1e-12:
        raise DegenerateEmbedding(
            "leading kernel eigenvalue is zero: all points coincide in feature space"
        )
    alpha = vec / np.sqrt(lam)
    # Same orientation rule as PCA, applied to the training projections
    # (lam * alpha), which share alpha's sign pattern since lam > 0.
    alpha = _fix_sign(alpha)
    return KpcaModel(
        stats=stats,
        training_points=std_data,
        gamma=gamma,
        alpha=alpha,
        eigenvalue=lam,
        row_means=row_means,
        grand_mean=grand_mean,
    )


def _kpca_scores(model: KpcaModel, std_points: np.ndarray) -> np.ndarray:
    kernel_rows = rbf_kernel_matrix(std_points, model.training_points, model.gamma)
    centered = (
        kernel_rows
        - kernel_rows.mean(axis=1, keepdims=True)
        - model.row_means[None, :]
        + model.grand_mean
    )
    return centered @ model.alpha


def project_kpca(model: KpcaModel, point) -> float:
    """Project one M-vector to its leading kernel-component score."""
    z = apply_standardization(point, model.stats)
    if z.ndim != 1:
        raise InvalidInput("project_kpca expects a single point")
    return float(_kpca_scores(model, z.reshape(1, -1))[0])


@dataclass
class EmbeddedSeries:
    """Univariate embedding of a multivariate series.

    ``norm_min``/``norm_max`` hold the training-portion score range used
    for percentage-scale evaluation.
    """

    values: np.ndarray
    source: str
    norm_min: float | None = None
    norm_max: float | None = None

    def __len__(self) -> int:
        return len(self.values)

    def normalized(self, scale: float = 100.0) -> np.ndarray:
        """Map values onto [0, scale] using the training-portion range."""
        if self.norm_min is None or self.norm_max is None:
            raise InvalidInput("series has no recorded normalization range")
        span = self.norm_max - self.norm_min
        if span <= 0.0:
            warnings.warn("degenerate normalization range; emitting zeros")
            return np.zeros_like(self.values)
        return (self.values - self.norm_min) * (scale / span)


def embed_series(
    data,
    method: str,
    train_size: int,
    gamma: float | None = None,
    subsample: int | None = None,
) -> tuple[EmbeddedSeries, PcaModel | KpcaModel]:
    """Fit an embedding on the training prefix and project every row.

    Parameters
    ----------
    data : array-like or object with a ``values`` matrix
        N x M multivariate series.
    method : {"pca", "kpca"}
    train_size : int
        Rows of the training prefix the model is fitted on.
    gamma : float, optional
        Kernel coefficient, required for "kpca".
    subsample : int, optional
        Cap on training rows used to fit kernel PCA; evenly spaced rows
        are kept.  Default: no cap.
    """
    values = as_matrix(getattr(data, "values", data))
    n = values.shape[0]
    if not 2 <= train_size <= n:
        raise InvalidInput(f"train_size {train_size} out of range for {n} rows")
    train = values[:train_size]

    if method == "pca":
        model: PcaModel | KpcaModel = fit_pca(train)
        std_all = apply_standardization(values, model.stats)
        scores = std_all @ model.component
    elif method == "kpca":
        if gamma is None:
            raise InvalidInput("kpca requires a gamma value")
        fit_rows = train
        if subsample is not None and 3 <= subsample < train_size:
            idx = np.unique(np.linspace(0, train_size - 1, subsample).round().astype(int))
            fit_rows = train[idx]
        model = fit_kpca(fit_rows, gamma)
        std_all = apply_standardization(values, model.stats)
        scores = _kpca_scores(model, std_all)
    else:
        raise InvalidInput(f"unknown embedding method: {method!r}")

    train_scores = scores[:train_size]
    return (
        EmbeddedSeries(
            values=scores,
            source=method,
            norm_min=float(train_scores.min()),
            norm_max=float(train_scores.max()),
        ),
        model,
    )
