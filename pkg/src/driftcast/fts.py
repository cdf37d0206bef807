"""Non-stationary fuzzy time series engine for univariate forecasting.

A model partitions a padded universe of discourse into uniform triangular
sets with 50% overlap, learns first-order transition rules between the
sets, and keeps forecasting adaptive by perturbing every set (shift delta,
stretch rho) from the running statistics of a short residual window.
"""

from __future__ import annotations

import copy
import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput

DEFAULT_MARGIN_RATIO = 0.1
_CONSTANT_SERIES_EPS = 1e-6


@dataclass(frozen=True)
class Universe:
    """Bounded interval the fuzzy sets partition."""

    lb: float
    ub: float
    margin_ratio: float


@dataclass
class FuzzySet:
    """Triangular set (l, c, u) with perturbation state (delta, rho)."""

    index: int
    l: float
    c: float
    u: float
    delta: float = 0.0
    rho: float = 0.0
    label: str = ""


def build_universe(values, margin_ratio: float = DEFAULT_MARGIN_RATIO) -> Universe:
    """Pad [min, max] of the training series proportionally to each bound.

    A constant series is widened by an absolute epsilon instead, with a
    warning, so degenerate inputs do not abort a run.
    """
    arr = _as_series(values)
    if not 0.0 < margin_ratio < 1.0:
        raise InvalidInput(f"margin_ratio must be in (0, 1), got {margin_ratio}")
    mn, mx = float(arr.min()), float(arr.max())
    if mn == mx:
        warnings.warn("constant series: widening universe by epsilon")
        return Universe(mn - _CONSTANT_SERIES_EPS, mx + _CONSTANT_SERIES_EPS, margin_ratio)
    return Universe(
        mn - margin_ratio * abs(mn),
        mx + margin_ratio * abs(mx),
        margin_ratio,
    )


def build_partitions(universe: Universe, kappa: int) -> list[FuzzySet]:
    """Uniform 50%-overlap triangular sets with midpoints spanning the universe.

    Boundary sets extend one step beyond the universe so edge memberships
    behave like interior ones.
    """
    if kappa < 3:
        raise InvalidInput(f"kappa must be at least 3, got {kappa}")
    lb, ub = universe.lb, universe.ub
    mids = [lb + i * (ub - lb) / (kappa - 1) for i in range(kappa)]
    sets = []
    for i, c in enumerate(mids):
        l = mids[i - 1] if i > 0 else lb - (mids[1] - mids[0])
        u = mids[i + 1] if i < kappa - 1 else ub + (mids[-1] - mids[-2])
        sets.append(FuzzySet(index=i, l=l, c=c, u=u, label=f"A{i}"))
    return sets


def perturb(fs: FuzzySet, printed_form: bool = False) -> tuple[float, float, float]:
    """Perturbed (l, c, u) of a set; the stored parameters are not touched.

    The default form shifts all three points by delta and widens the
    support symmetrically by rho.  ``printed_form`` selects the variant
    whose lower bound is ``rho/2 - (l + delta)``, kept for comparison.
    """
    if printed_form:
        return (
            fs.rho / 2.0 - (fs.l + fs.delta),
            fs.c + fs.delta,
            fs.rho / 2.0 + (fs.u + fs.delta),
        )
    return (
        (fs.l + fs.delta) - fs.rho / 2.0,
        fs.c + fs.delta,
        (fs.u + fs.delta) + fs.rho / 2.0,
    )


def membership(fs: FuzzySet, y: float, printed_form: bool = False) -> float:
    """Triangular membership grade of ``y``, evaluated on perturbed parameters."""
    l, c, u = perturb(fs, printed_form)
    if y < l or y > u:
        return 0.0
    if y <= c:
        return 1.0 if c == l else (y - l) / (c - l)
    return 1.0 if u == c else (u - y) / (u - c)


def extract_rules(labels) -> dict[int, list[int]]:
    """First-order transition rules from a crisp label sequence.

    Consecutive pairs ``labels[t-1] -> labels[t]`` are grouped by
    precedent; each group keeps its consequents in first-seen order
    without duplicates.
    """
    rules: dict[int, list[int]] = {}
    for prev, curr in zip(labels[:-1], labels[1:]):
        group = rules.setdefault(int(prev), [])
        if int(curr) not in group:
            group.append(int(curr))
    return rules


def _as_series(values) -> np.ndarray:
    arr = np.asarray(getattr(values, "values", values), dtype=np.float64).ravel()
    if arr.size == 0:
        raise InvalidInput("series is empty")
    if not np.isfinite(arr).all():
        raise InvalidInput("series contains non-finite values")
    return arr


@dataclass
class NsftsModel:
    """Trained fuzzy forecaster over one univariate stream.

    The model mutates while adapting; run exactly one adaptation stream
    per instance and use :meth:`copy` to fan out over parallel windows.
    """

    universe: Universe
    sets: list[FuzzySet]
    rules: dict[int, list[int]]
    kappa: int
    w_e: int
    margin_ratio: float
    residuals: deque = field(default_factory=deque)
    order: int = 1
    printed_form: bool = False
    last_train_value: float = 0.0
    reorder_events: int = 0

    def copy(self) -> "NsftsModel":
        return copy.deepcopy(self)

    def perturbed_midpoints(self) -> np.ndarray:
        return np.array([perturb(fs, self.printed_form)[1] for fs in self.sets])

    def fuzzify(self, y: float) -> np.ndarray:
        """Membership grades of ``y`` against all perturbed sets."""
        return np.array([membership(fs, y, self.printed_form) for fs in self.sets])

    def forecast_step(self, y: float) -> float:
        """One-step-ahead forecast from the latest observed value ``y``.

        Matched rules contribute their consequent midpoint averages
        weighted by the precedent membership (weights normalized so the
        forecast stays inside the perturbed midpoint range); with no
        matching rule the nearest perturbed midpoint is returned.
        """
        grades = self.fuzzify(y)
        mids = self.perturbed_midpoints()
        total = 0.0
        weight = 0.0
        for i, grade in enumerate(grades):
            if grade <= 0.0 or i not in self.rules:
                continue
            consequents = self.rules[i]
            mp = float(np.mean([mids[j] for j in consequents]))
            total += grade * mp
            weight += grade
        if weight == 0.0:
            nearest = int(np.argmin(np.abs(mids - y)))
            return float(mids[nearest])
        return total / weight

    def update_residuals(self, actual: float, predicted: float) -> None:
        """Push the newest forecast error, evicting beyond the window size."""
        self.residuals.append(actual - predicted)

    def adapt(self, y: float) -> None:
        """Re-derive every set's (delta, rho) from the residual window and ``y``.

        Out-of-universe values contribute a displacement range on top of
        the residual mean/deviation spread.
        """
        if not self.residuals:
            raise InvalidInput("adapt requires a non-empty residual window")
        d_l = self.universe.lb - y if y < self.universe.lb else 0.0
        d_u = y - self.universe.ub if y > self.universe.ub else 0.0
        window = np.fromiter(self.residuals, dtype=np.float64)
        e_mean = float(window.mean())
        e_std = float(window.std())  # population
        disp_range = d_u - d_l
        disp_mid = disp_range / 2.0
        k = self.kappa
        deltas = [
            e_mean
            + (i * disp_range / (k + 1) - disp_mid)
            + (i * 2.0 * e_std / (k - 1) - e_std)
            for i in range(k)
        ]
        for i, fs in enumerate(self.sets):
            lo = deltas[max(i - 1, 0)]
            hi = deltas[min(i + 1, k - 1)]
            fs.delta = deltas[i]
            fs.rho = abs(lo - hi)
        self._restore_midpoint_order()

    def _restore_midpoint_order(self) -> None:
        # Extreme displacements can reorder the perturbed midpoints; keep
        # the partition usable by re-sorting the perturbed positions.
        mids = self.perturbed_midpoints()
        if np.all(np.diff(mids) > 0.0):
            return
        self.reorder_events += 1
        warnings.warn("perturbation reordered midpoints; re-sorting")
        for fs, target in zip(self.sets, np.sort(mids)):
            fs.delta = float(target - fs.c)

    def predict_series(
        self,
        test,
        adapt_online: bool = True,
        prior: float | None = None,
    ) -> np.ndarray:
        """One-step-ahead forecasts aligned to the test series.

        Each forecast is made from the previous observation; afterwards
        (when ``adapt_online``) the revealed actual updates the residual
        window and the sets adapt.  Forecasts never see their own target.
        ``prior`` is the observation preceding ``test[0]`` and defaults to
        the final training value.
        """
        arr = np.asarray(getattr(test, "values", test), dtype=np.float64).ravel()
        if arr.size == 0:
            return np.empty(0)
        prev = self.last_train_value if prior is None else float(prior)
        out = np.empty(arr.size)
        for t, actual in enumerate(arr):
            predicted = self.forecast_step(prev)
            out[t] = predicted
            if adapt_online:
                self.update_residuals(float(actual), predicted)
                self.adapt(float(actual))
            prev = float(actual)
        return out


def train(
    series,
    kappa: int,
    w_e: int,
    margin_ratio: float = DEFAULT_MARGIN_RATIO,
    printed_form: bool = False,
) -> NsftsModel:
    """Train a first-order model on a univariate series.

    Builds the universe and partitions, extracts max-membership transition
    rules from consecutive pairs, then seeds the residual window by
    forecasting the last ``w_e`` training points with the frozen model.
    """
    arr = _as_series(series)
    if w_e < 1:
        raise InvalidInput(f"w_e must be at least 1, got {w_e}")
    if arr.size < w_e + 2:
        raise InvalidInput(
            f"series of length {arr.size} is too short for w_e={w_e} (needs {w_e + 2})"
        )
    universe = build_universe(arr, margin_ratio)
    sets = build_partitions(universe, kappa)
    model = NsftsModel(
        universe=universe,
        sets=sets,
        rules={},
        kappa=kappa,
        w_e=w_e,
        margin_ratio=margin_ratio,
        residuals=deque(maxlen=w_e),
        printed_form=printed_form,
        last_train_value=float(arr[-1]),
    )
    labels = [int(np.argmax(model.fuzzify(float(y)))) for y in arr]
    model.rules = extract_rules(labels)
    for t in range(arr.size - w_e, arr.size):
        predicted = model.forecast_step(float(arr[t - 1]))
        model.update_residuals(float(arr[t]), predicted)
    return model
