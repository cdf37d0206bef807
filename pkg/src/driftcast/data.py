"""Dataset ingestion, train/test splitting, and synthetic test fixtures."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from .errors import IngestError, InvalidInput

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"
SYNTHETIC_KINDS = ("mean_shift", "variance_ramp", "sine_drift")


@dataclass
class TimeSeriesFrame:
    """Timestamped N x M numeric table; immutable after construction.

    Row numbers in error messages are 1-based data rows (the header is
    not counted).
    """

    timestamps: list[datetime]
    columns: list[str]
    values: np.ndarray
    target_column: str | None = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise InvalidInput("frame values must be 2-dimensional")
        if self.values.shape[0] < 2:
            raise InvalidInput("frame needs at least 2 rows")
        if self.values.shape[0] != len(self.timestamps):
            raise InvalidInput("timestamp count does not match row count")
        if self.values.shape[1] != len(self.columns):
            raise InvalidInput("column-name count does not match value columns")
        if self.target_column is not None and self.target_column not in self.columns:
            raise InvalidInput(f"target column {self.target_column!r} not in frame")
        self.values.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise InvalidInput(f"no column named {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.column_index(name)]

    def drop(self, names) -> "TimeSeriesFrame":
        """New frame without the named columns."""
        names = set(names)
        missing = names - set(self.columns)
        if missing:
            raise InvalidInput(f"cannot drop unknown columns: {sorted(missing)}")
        keep = [i for i, c in enumerate(self.columns) if c not in names]
        target = self.target_column if self.target_column not in names else None
        return TimeSeriesFrame(
            timestamps=list(self.timestamps),
            columns=[self.columns[i] for i in keep],
            values=self.values[:, keep].copy(),
            target_column=target,
        )


def load_csv(path, timestamp_column: str = "date", drop_columns=(), target_column=None) -> TimeSeriesFrame:
    """Parse a headered CSV into a frame.

    The timestamp column is parsed as ``YYYY-MM-DD hh:mm:ss`` and used for
    ordering and reporting only.  Dropped columns are removed after
    parsing the header; rows with missing cells are rejected, reporting
    their row numbers.  Non-monotonic timestamps warn but do not fail.
    """
    drop_set = set(drop_columns)
    if timestamp_column in drop_set:
        raise InvalidInput(
            f"{timestamp_column!r} is the timestamp column; "
            "designate it instead of dropping it"
        )
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        if timestamp_column not in header:
            raise IngestError(f"no {timestamp_column!r} column in {path}")
        ts_idx = header.index(timestamp_column)
        keep = [
            i
            for i, name in enumerate(header)
            if i != ts_idx and name not in drop_set
        ]
        unknown = drop_set - set(header)
        if unknown:
            raise InvalidInput(f"drop columns not in file: {sorted(unknown)}")

        timestamps: list[datetime] = []
        rows: list[list[float]] = []
        gap_rows: list[int] = []
        for row_no, row in enumerate(reader, start=1):
            if len(row) != len(header):
                gap_rows.append(row_no)
                continue
            raw_ts = row[ts_idx].strip().strip('"')
            try:
                ts = datetime.strptime(raw_ts, TIMESTAMP_FORMAT)
            except ValueError:
                raise IngestError(
                    f"row {row_no}, column {timestamp_column!r}: "
                    f"cannot parse timestamp {raw_ts!r}"
                ) from None
            parsed = []
            gap = False
            for i in keep:
                cell = row[i].strip().strip('"')
                if cell == "":
                    gap = True
                    break
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise IngestError(
                        f"row {row_no}, column {header[i]!r}: "
                        f"cannot parse number {cell!r}"
                    ) from None
            if gap:
                gap_rows.append(row_no)
                continue
            timestamps.append(ts)
            rows.append(parsed)

    if gap_rows:
        shown = ", ".join(str(r) for r in gap_rows[:10])
        more = "" if len(gap_rows) <= 10 else f" (+{len(gap_rows) - 10} more)"
        raise IngestError(f"rows with missing values rejected: {shown}{more}")
    if len(rows) < 2:
        raise IngestError(f"{path} has {len(rows)} data rows; need at least 2")
    if any(b < a for a, b in zip(timestamps[:-1], timestamps[1:])):
        warnings.warn(f"{path}: timestamps are not monotonically increasing")

    return TimeSeriesFrame(
        timestamps=timestamps,
        columns=[header[i] for i in keep],
        values=np.asarray(rows, dtype=np.float64),
        target_column=target_column,
    )


def write_csv(frame: TimeSeriesFrame, path, timestamp_column: str = "date") -> None:
    """Write a frame back to CSV; numeric values round-trip exactly."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow([timestamp_column] + list(frame.columns))
        for ts, row in zip(frame.timestamps, frame.values):
            writer.writerow([ts.strftime(TIMESTAMP_FORMAT)] + [repr(float(v)) for v in row])


def split_train_test(data, fraction: float):
    """Contiguous prefix/suffix split with ``floor(N * fraction)`` training rows."""
    if not 0.0 < fraction < 1.0:
        raise InvalidInput(f"fraction must be in (0, 1), got {fraction}")
    if isinstance(data, TimeSeriesFrame):
        n = data.n_rows
        cut = int(n * fraction)
        if cut == 0 or cut == n:
            raise InvalidInput(f"split of {n} rows at {fraction} leaves an empty side")
        head = TimeSeriesFrame(
            timestamps=data.timestamps[:cut],
            columns=list(data.columns),
            values=data.values[:cut].copy(),
            target_column=data.target_column,
        )
        tail = TimeSeriesFrame(
            timestamps=data.timestamps[cut:],
            columns=list(data.columns),
            values=data.values[cut:].copy(),
            target_column=data.target_column,
        )
        return head, tail
    arr = np.asarray(getattr(data, "values", data))
    n = arr.shape[0]
    cut = int(n * fraction)
    if cut == 0 or cut == n:
        raise InvalidInput(f"split of {n} rows at {fraction} leaves an empty side")
    return arr[:cut].copy(), arr[cut:].copy()


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a seeded univariate drift fixture."""

    length: int
    kind: str
    shift_at: int
    magnitude: float
    seed: int


def generate_synthetic(spec: SyntheticSpec) -> np.ndarray:
    """Unit-variance noise with a deterministic drift injected at ``shift_at``.

    mean_shift adds ``magnitude`` to every point from ``shift_at`` on;
    variance_ramp scales the noise linearly from 1x to ``magnitude``x over
    the remaining points; sine_drift superposes one slow sinusoid cycle of
    amplitude ``magnitude`` across the whole series.
    """
    if spec.kind not in SYNTHETIC_KINDS:
        raise InvalidInput(f"unknown synthetic kind {spec.kind!r}")
    if spec.length < 2:
        raise InvalidInput("synthetic series needs length >= 2")
    if not 0 <= spec.shift_at < spec.length:
        raise InvalidInput(f"shift_at {spec.shift_at} outside series of {spec.length}")
    rng = np.random.default_rng(spec.seed)
    series = rng.normal(0.0, 1.0, spec.length)
    if spec.kind == "mean_shift":
        series[spec.shift_at:] += spec.magnitude
    elif spec.kind == "variance_ramp":
        tail = spec.length - spec.shift_at
        ramp = np.linspace(1.0, spec.magnitude, tail) if tail > 1 else [spec.magnitude]
        series[spec.shift_at:] *= ramp
    else:  # sine_drift
        t = np.arange(spec.length)
        series += spec.magnitude * np.sin(2.0 * np.pi * t / spec.length)
    return series


def synthetic_frame(spec: SyntheticSpec, features: int = 1) -> TimeSeriesFrame:
    """Multichannel frame driven by one synthetic latent series.

    Each channel is an independent positive loading on the latent plus
    small noise, so embedding methods can recover the drift; with one
    feature the latent is emitted as-is under the column name "value".
    """
    if features < 1:
        raise InvalidInput("features must be >= 1")
    latent = generate_synthetic(spec)
    start = datetime(2020, 1, 1)
    timestamps = [start + timedelta(minutes=10 * i) for i in range(spec.length)]
    if features == 1:
        return TimeSeriesFrame(
            timestamps=timestamps,
            columns=["value"],
            values=latent.reshape(-1, 1),
            target_column="value",
        )
    rng = np.random.default_rng(spec.seed + 1)
    loadings = rng.uniform(0.5, 1.5, features)
    noise = rng.normal(0.0, 0.2, (spec.length, features))
    values = latent[:, None] * loadings[None, :] + noise
    columns = [f"ch{i}" for i in range(features)]
    return TimeSeriesFrame(
        timestamps=timestamps, columns=columns, values=values, target_column="ch0"
    )


def sensor_frame(rows: int, features: int, seed: int = 0) -> TimeSeriesFrame:
    """Surrogate smart-home style frame at a 10-minute cadence.

    Channels mix a daily cycle, a weekly cycle, and a random-walk drift
    (so the series is non-stationary), plus one spiky consumption-like
    target column.  Deterministic for a given seed.
    """
    if rows < 2 or features < 2:
        raise InvalidInput("sensor frame needs rows >= 2 and features >= 2")
    rng = np.random.default_rng(seed)
    t = np.arange(rows)
    daily = np.sin(2.0 * np.pi * t / 144.0)
    weekly = np.sin(2.0 * np.pi * t / 1008.0)
    drift = np.cumsum(rng.normal(0.0, 0.05, rows))
    n_smooth = features - 1
    loadings = rng.uniform(-1.0, 1.0, (3, n_smooth))
    smooth = (
        loadings[0] * daily[:, None]
        + loadings[1] * weekly[:, None]
        + loadings[2] * drift[:, None]
        + rng.normal(0.0, 0.15, (rows, n_smooth))
    )
    spikes = rng.exponential(30.0, rows) * (rng.random(rows) < 0.12)
    target = 60.0 + 25.0 * np.clip(daily, 0.0, None) + 5.0 * drift + spikes
    values = np.column_stack([target, smooth])
    columns = ["consumption"] + [f"sensor{i}" for i in range(n_smooth)]
    start = datetime(2020, 1, 1)
    timestamps = [start + timedelta(minutes=10 * i) for i in range(rows)]
    return TimeSeriesFrame(
        timestamps=timestamps,
        columns=columns,
        values=values,
        target_column="consumption",
    )
