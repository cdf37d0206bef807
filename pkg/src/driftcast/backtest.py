"""Sliding-window evaluation and grid search over the forecasting pipeline.

Windows are consecutive, non-overlapping, and independent: each fits its
own embedding on the window's training prefix, trains a fresh fuzzy model
on the embedded prefix, and scores one-step-ahead forecasts over the
window's test portion against a persistence baseline on the same targets.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .data import TimeSeriesFrame
from .embedding import PcaModel, embed_series
from .errors import DriftcastError, InvalidInput
from .fts import train
from .linalg import as_matrix
from .metrics import MetricSet, compute_metrics, persistence_forecast, skill_score

logger = logging.getLogger(__name__)

EVAL_SPACES = ("normalized", "reconstructed")
NORMALIZED_SCALE = 100.0


@dataclass(frozen=True)
class WindowSpec:
    """Length and train share of each backtest window."""

    window_length: int
    train_fraction: float = 0.75


@dataclass(frozen=True)
class ForecasterConfig:
    """Full parameterization of the embed-then-forecast pipeline."""

    method: str = "kpca"
    kappa: int = 5
    w_e: int = 3
    gamma: float | None = 0.1
    margin_ratio: float = 0.1
    adapt_online: bool = True
    eval_space: str = "normalized"
    kpca_subsample: int | None = None


@dataclass
class WindowScore:
    """Scores of one backtest window."""

    index: int
    model: MetricSet
    persistence: MetricSet
    skill_rmse: float | None


@dataclass
class EvaluationReport:
    """Per-window and aggregate accuracy plus skill versus references."""

    windows: list[WindowScore]
    aggregate: MetricSet
    persistence_aggregate: MetricSet
    skill: dict
    config: dict
    n_windows: int
    dropped_rows: int


def _mean_or_none(values) -> float | None:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def _aggregate(metric_sets: list[MetricSet]) -> MetricSet:
    return MetricSet(
        rmse=float(np.mean([m.rmse for m in metric_sets])),
        mae=float(np.mean([m.mae for m in metric_sets])),
        mape=_mean_or_none(m.mape for m in metric_sets),
        r2=_mean_or_none(m.r2 for m in metric_sets),
        n_mape_excluded=sum(m.n_mape_excluded for m in metric_sets),
    )


def _validate(spec: WindowSpec, config: ForecasterConfig, target_index: int | None) -> int:
    if config.method not in ("pca", "kpca"):
        raise InvalidInput(f"unknown method {config.method!r}")
    if config.eval_space not in EVAL_SPACES:
        raise InvalidInput(f"unknown eval_space {config.eval_space!r}")
    if config.method == "kpca" and (config.gamma is None or config.gamma <= 0.0):
        raise InvalidInput("kpca needs a positive gamma")
    if config.kappa < 3:
        raise InvalidInput(f"kappa must be at least 3, got {config.kappa}")
    if config.w_e < 1:
        raise InvalidInput(f"w_e must be at least 1, got {config.w_e}")
    if not 0.0 < config.margin_ratio < 1.0:
        raise InvalidInput(f"margin_ratio must be in (0, 1), got {config.margin_ratio}")
    if not 0.0 < spec.train_fraction < 1.0:
        raise InvalidInput(f"train_fraction must be in (0, 1), got {spec.train_fraction}")
    if config.eval_space == "reconstructed":
        if config.method != "pca":
            raise InvalidInput("reconstructed evaluation is only defined for pca")
        if target_index is None:
            raise InvalidInput("reconstructed evaluation needs a frame with a target column")
    train_size = int(spec.window_length * spec.train_fraction)
    min_train = max(config.w_e + 2, 3 if config.method == "kpca" else 2)
    if train_size < min_train:
        raise InvalidInput(
            f"window too short: train portion {train_size} < {min_train} "
            f"required for w_e={config.w_e}"
        )
    if spec.window_length - train_size < 1:
        raise InvalidInput("window leaves no test rows")
    return train_size


def _evaluate_window(
    window: np.ndarray,
    train_size: int,
    config: ForecasterConfig,
    target_index: int | None,
) -> tuple[MetricSet, MetricSet, float | None]:
    emb, emb_model = embed_series(
        window,
        config.method,
        train_size,
        gamma=config.gamma,
        subsample=config.kpca_subsample,
    )
    forecaster = train(
        emb.values[:train_size], config.kappa, config.w_e, config.margin_ratio
    )
    prior_raw = float(emb.values[train_size - 1])
    forecasts = forecaster.predict_series(
        emb.values[train_size:], adapt_online=config.adapt_online, prior=prior_raw
    )

    if config.eval_space == "normalized":
        span = emb.norm_max - emb.norm_min
        if span <= 0.0:
            warnings.warn("degenerate embedding range; scoring raw scores")
            scale, offset = 1.0, 0.0
        else:
            scale, offset = NORMALIZED_SCALE / span, emb.norm_min
        actual_eval = (emb.values[train_size:] - offset) * scale
        forecast_eval = (forecasts - offset) * scale
        prior_eval = (prior_raw - offset) * scale
    else:
        assert isinstance(emb_model, PcaModel)
        loading = emb_model.component[target_index]
        std = emb_model.stats.std_devs[target_index]
        mean = emb_model.stats.means[target_index]
        actual_eval = window[train_size:, target_index]
        forecast_eval = forecasts * loading * std + mean
        prior_eval = float(window[train_size - 1, target_index])

    model_metrics = compute_metrics(actual_eval, forecast_eval)
    baseline = persistence_forecast(np.concatenate([[prior_eval], actual_eval]))
    persistence_metrics = compute_metrics(actual_eval, baseline)
    skill = (
        skill_score(model_metrics.rmse, persistence_metrics.rmse)
        if persistence_metrics.rmse > 0.0
        else None
    )
    return model_metrics, persistence_metrics, skill


def sliding_window_eval(
    data,
    spec: WindowSpec,
    config: ForecasterConfig,
    reference_metrics: dict[str, float] | None = None,
) -> EvaluationReport:
    """Backtest the pipeline over consecutive windows of ``data``.

    Trailing rows beyond the last full window are dropped (the count is
    reported).  Aggregates are unweighted means over windows; skill
    versus persistence is emitted both from aggregate metrics and as the
    mean of per-window skills, since the two differ in general.
    """
    target_index = None
    if isinstance(data, TimeSeriesFrame) and data.target_column is not None:
        target_index = data.column_index(data.target_column)
    values = as_matrix(getattr(data, "values", data))
    if spec.window_length < 2:
        raise InvalidInput(f"window_length must be >= 2, got {spec.window_length}")
    train_size = _validate(spec, config, target_index)

    n_windows = values.shape[0] // spec.window_length
    if n_windows < 1:
        raise InvalidInput(
            f"{values.shape[0]} rows cannot fill one window of {spec.window_length}"
        )
    dropped = values.shape[0] - n_windows * spec.window_length
    if dropped:
        logger.info("dropping %d trailing rows beyond the last full window", dropped)

    windows: list[WindowScore] = []
    for k in range(n_windows):
        segment = values[k * spec.window_length : (k + 1) * spec.window_length]
        model_metrics, persistence_metrics, skill = _evaluate_window(
            segment, train_size, config, target_index
        )
        windows.append(
            WindowScore(
                index=k,
                model=model_metrics,
                persistence=persistence_metrics,
                skill_rmse=skill,
            )
        )

    aggregate = _aggregate([w.model for w in windows])
    persistence_aggregate = _aggregate([w.persistence for w in windows])
    skill_block: dict = {"persistence": {}, "references": {}}
    for name in ("rmse", "mae", "mape"):
        fval = getattr(aggregate, name)
        rval = getattr(persistence_aggregate, name)
        skill_block["persistence"][f"{name}_aggregate"] = (
            skill_score(fval, rval) if fval is not None and rval not in (None, 0.0) else None
        )
    skill_block["persistence"]["rmse_mean_per_window"] = _mean_or_none(
        w.skill_rmse for w in windows
    )
    for name, ref_rmse in (reference_metrics or {}).items():
        skill_block["references"][name] = (
            skill_score(aggregate.rmse, ref_rmse) if ref_rmse > 0.0 else None
        )

    return EvaluationReport(
        windows=windows,
        aggregate=aggregate,
        persistence_aggregate=persistence_aggregate,
        skill=skill_block,
        config={"window": asdict(spec), "forecaster": asdict(config)},
        n_windows=n_windows,
        dropped_rows=dropped,
    )


def report_to_dict(report: EvaluationReport) -> dict:
    """Plain-data view of a report, ready for JSON."""
    return {
        "config": report.config,
        "n_windows": report.n_windows,
        "dropped_rows": report.dropped_rows,
        "aggregate": asdict(report.aggregate),
        "persistence_aggregate": asdict(report.persistence_aggregate),
        "skill": report.skill,
        "windows": [
            {
                "index": w.index,
                "model": asdict(w.model),
                "persistence": asdict(w.persistence),
                "skill_rmse": w.skill_rmse,
            }
            for w in report.windows
        ],
    }


def write_report_json(report: EvaluationReport, path) -> None:
    Path(path).write_text(
        json.dumps(report_to_dict(report), indent=1), encoding="utf-8"
    )


_WINDOW_CSV_FIELDS = [
    "window",
    "rmse",
    "mae",
    "mape",
    "r2",
    "mape_excluded",
    "persistence_rmse",
    "persistence_mae",
    "persistence_mape",
    "persistence_r2",
    "skill_rmse",
]


def write_window_csv(report: EvaluationReport, path) -> None:
    """Flat per-window metric table for spreadsheet inspection."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(_WINDOW_CSV_FIELDS)
        for w in report.windows:
            writer.writerow(
                [
                    w.index,
                    w.model.rmse,
                    w.model.mae,
                    _blank(w.model.mape),
                    _blank(w.model.r2),
                    w.model.n_mape_excluded,
                    w.persistence.rmse,
                    w.persistence.mae,
                    _blank(w.persistence.mape),
                    _blank(w.persistence.r2),
                    _blank(w.skill_rmse),
                ]
            )


def _blank(value):
    return "" if value is None else value


def grid_search(
    data,
    spec: WindowSpec,
    base_config: ForecasterConfig,
    kappa_values,
    w_e_values,
    gamma_values=None,
    reference_metrics: dict[str, float] | None = None,
) -> tuple[dict, list[dict]]:
    """Evaluate every parameter combination and rank by accuracy.

    Combinations are ranked by aggregate RMSE ascending, ties broken by
    MAE and then by smaller kappa.  A combination that raises a library
    error is reported as failed without aborting the run.  Returns the
    winning row and the full table (ranked successes, then failures).
    """
    kappas = list(kappa_values)
    windows_w_e = list(w_e_values)
    gammas = list(gamma_values) if gamma_values is not None else [base_config.gamma]
    if not kappas or not windows_w_e or (base_config.method == "kpca" and not gammas):
        raise InvalidInput("grid lists must be non-empty")
    if base_config.method == "pca":
        gammas = [None]

    rows: list[dict] = []
    for kappa, w_e, gamma in itertools.product(kappas, windows_w_e, gammas):
        config = ForecasterConfig(
            method=base_config.method,
            kappa=kappa,
            w_e=w_e,
            gamma=gamma,
            margin_ratio=base_config.margin_ratio,
            adapt_online=base_config.adapt_online,
            eval_space=base_config.eval_space,
            kpca_subsample=base_config.kpca_subsample,
        )
        row = {
            "method": config.method,
            "kappa": kappa,
            "w_e": w_e,
            "gamma": gamma,
            "status": "ok",
            "error": "",
            "rmse": None,
            "mae": None,
            "mape": None,
            "r2": None,
            "skill_rmse_vs_persistence": None,
        }
        try:
            report = sliding_window_eval(data, spec, config, reference_metrics)
        except DriftcastError as exc:
            row["status"] = "failed"
            row["error"] = str(exc)
            logger.warning("grid combination %s failed: %s", (kappa, w_e, gamma), exc)
        else:
            row["rmse"] = report.aggregate.rmse
            row["mae"] = report.aggregate.mae
            row["mape"] = report.aggregate.mape
            row["r2"] = report.aggregate.r2
            row["skill_rmse_vs_persistence"] = report.skill["persistence"][
                "rmse_aggregate"
            ]
        rows.append(row)

    ok = [r for r in rows if r["status"] == "ok"]
    failed = [r for r in rows if r["status"] != "ok"]
    ok.sort(key=lambda r: (r["rmse"], r["mae"], r["kappa"]))
    if not ok:
        raise DriftcastError("every grid combination failed")
    return ok[0], ok + failed


_GRID_CSV_FIELDS = [
    "rank",
    "method",
    "kappa",
    "w_e",
    "gamma",
    "rmse",
    "mae",
    "mape",
    "r2",
    "skill_rmse_vs_persistence",
    "status",
    "error",
]


def write_grid_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(_GRID_CSV_FIELDS)
        for rank, row in enumerate(rows, start=1):
            writer.writerow(
                [rank if row["status"] == "ok" else ""]
                + [_blank(row[f]) for f in _GRID_CSV_FIELDS[1:]]
            )
