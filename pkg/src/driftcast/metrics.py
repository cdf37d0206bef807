"""Forecast accuracy metrics, skill scores, and the persistence baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

MAPE_FLOOR = 1e-12


@dataclass(frozen=True)
class MetricSet:
    """Accuracy summary of one forecast/actual pairing.

    ``mape`` skips targets with magnitude below ``MAPE_FLOOR`` and reports
    how many were excluded; ``r2`` is None when the actuals are constant
    (zero total sum of squares).
    """

    rmse: float
    mae: float
    mape: float | None
    r2: float | None
    n_mape_excluded: int = 0


def compute_metrics(actual, predicted) -> MetricSet:
    """RMSE, MAE, MAPE (percent) and R^2 of a forecast."""
    act = np.asarray(actual, dtype=np.float64).ravel()
    pred = np.asarray(predicted, dtype=np.float64).ravel()
    if act.size == 0:
        raise InvalidInput("cannot score empty series")
    if act.size != pred.size:
        raise InvalidInput(f"length mismatch: {act.size} actuals vs {pred.size} forecasts")
    if not (np.isfinite(act).all() and np.isfinite(pred).all()):
        raise InvalidInput("metrics require finite inputs")

    err = pred - act
    rmse = float(np.sqrt(np.mean(err * err)))
    mae = float(np.mean(np.abs(err)))

    valid = np.abs(act) > MAPE_FLOOR
    n_excluded = int(act.size - valid.sum())
    mape = (
        float(np.mean(np.abs(err[valid] / act[valid])) * 100.0) if valid.any() else None
    )

    sst = float(np.sum((act - act.mean()) ** 2))
    r2 = None if sst == 0.0 else 1.0 - float(np.sum(err * err)) / sst
    return MetricSet(rmse=rmse, mae=mae, mape=mape, r2=r2, n_mape_excluded=n_excluded)


def skill_score(metric_forecast: float, metric_reference: float) -> float:
    """Fractional improvement over a reference: ``1 - forecast / reference``.

    Positive means better than the reference; 1 is a perfect forecast.
    """
    if metric_reference <= 0.0:
        raise InvalidInput(f"reference metric must be positive, got {metric_reference}")
    return 1.0 - metric_forecast / metric_reference


def persistence_forecast(series) -> np.ndarray:
    """Naive baseline: each value is forecast by its predecessor.

    Returns forecasts for ``series[1:]``; the first point has no
    predecessor and is excluded from scoring.
    """
    arr = np.asarray(series, dtype=np.float64).ravel()
    if arr.size < 2:
        raise InvalidInput("persistence needs at least 2 points")
    return arr[:-1].copy()
