"""Command-line front door wiring ingestion, embedding, forecasting, and scoring.

Subcommands: evaluate, gridsearch, embed, forecast, synth.  Every flag can
also come from a JSON config file (``--config``), with command-line values
taking precedence.  Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .backtest import (
    ForecasterConfig,
    WindowSpec,
    grid_search,
    sliding_window_eval,
    write_grid_csv,
    write_report_json,
    write_window_csv,
)
from .data import SyntheticSpec, load_csv, synthetic_frame, write_csv
from .embedding import embed_series
from .errors import DriftcastError, InvalidInput
from .fts import train
from .metrics import compute_metrics, persistence_forecast, skill_score
from .serialize import save_model

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


@dataclass
class RunConfig:
    """One reproducible run; echoed verbatim into every report."""

    input: str | None = None
    timestamp_column: str = "date"
    drop_columns: tuple = ()
    target_column: str | None = None
    exclude_target: bool = False
    method: str = "kpca"
    gamma: float = 0.1
    kappa: int = 5
    w_e: int = 3
    margin_ratio: float = 0.1
    window_length: int = 657
    train_fraction: float = 0.75
    adapt_online: bool = True
    eval_space: str = "normalized"
    kpca_subsample: int | None = None
    report: str = "report.json"
    window_csv: str | None = None
    output: str | None = None
    seed: int = 0

    def validate(self) -> None:
        if self.method not in ("pca", "kpca"):
            raise InvalidInput(f"method must be pca or kpca, got {self.method!r}")
        if self.eval_space not in ("normalized", "reconstructed"):
            raise InvalidInput(f"unknown eval_space {self.eval_space!r}")
        if self.kappa < 3:
            raise InvalidInput(f"kappa must be at least 3, got {self.kappa}")
        if self.w_e < 1:
            raise InvalidInput(f"w_e must be at least 1, got {self.w_e}")
        if self.method == "kpca" and self.gamma <= 0.0:
            raise InvalidInput(f"gamma must be positive, got {self.gamma}")
        if not 0.0 < self.margin_ratio < 1.0:
            raise InvalidInput(f"margin_ratio must be in (0, 1), got {self.margin_ratio}")
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidInput(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )
        if self.window_length < 2:
            raise InvalidInput(f"window_length must be >= 2, got {self.window_length}")
        if self.exclude_target and self.target_column is None:
            raise InvalidInput("exclude_target requires target_column")
        if self.eval_space == "reconstructed":
            if self.method != "pca":
                raise InvalidInput("reconstructed evaluation is only defined for pca")
            if self.target_column is None or self.exclude_target:
                raise InvalidInput(
                    "reconstructed evaluation needs target_column kept in the frame"
                )

    def forecaster(self) -> ForecasterConfig:
        return ForecasterConfig(
            method=self.method,
            kappa=self.kappa,
            w_e=self.w_e,
            gamma=self.gamma if self.method == "kpca" else None,
            margin_ratio=self.margin_ratio,
            adapt_online=self.adapt_online,
            eval_space=self.eval_space,
            kpca_subsample=self.kpca_subsample,
        )


class StageFailure(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(str(cause))
        self.stage = stage


@contextmanager
def _stage(name: str):
    try:
        yield
    except (DriftcastError, OSError) as exc:
        raise StageFailure(name, exc) from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(text: str) -> tuple:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _float_list(text: str) -> tuple:
    return tuple(float(part) for part in _csv_list(text))


def _int_list(text: str) -> tuple:
    return tuple(int(part) for part in _csv_list(text))


_CONFIG_FIELDS = {f.name for f in fields(RunConfig)}


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    # Defaults stay None here so config-file values are only overridden
    # by flags the user actually passed.
    parser.add_argument("--config", help="JSON file supplying any of the run options")
    parser.add_argument("--input", help="input CSV path")
    parser.add_argument("--timestamp-column", dest="timestamp_column")
    parser.add_argument(
        "--drop-columns",
        dest="drop_columns",
        type=_csv_list,
        help="comma-separated columns to drop (e.g. rv1,rv2)",
    )
    parser.add_argument("--target-column", dest="target_column")
    parser.add_argument(
        "--exclude-target",
        dest="exclude_target",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="drop the target column from the embedded features",
    )
    parser.add_argument("--method", choices=("pca", "kpca"))
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--kappa", type=int)
    parser.add_argument("--we", dest="w_e", type=int, help="residual window length")
    parser.add_argument("--margin-ratio", dest="margin_ratio", type=float)
    parser.add_argument("--window-length", dest="window_length", type=int)
    parser.add_argument("--train-fraction", dest="train_fraction", type=float)
    parser.add_argument(
        "--adapt-online",
        dest="adapt_online",
        action=argparse.BooleanOptionalAction,
        default=None,
    )
    parser.add_argument("--eval-space", dest="eval_space", choices=("normalized", "reconstructed"))
    parser.add_argument("--kpca-subsample", dest="kpca_subsample", type=int)
    parser.add_argument("--report", help="report JSON output path")
    parser.add_argument("--window-csv", dest="window_csv", help="per-window CSV output path")
    parser.add_argument("--output", help="primary output path for this subcommand")
    parser.add_argument("--seed", type=int)


def _merge_config(args: argparse.Namespace) -> RunConfig:
    merged: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read config file {config_path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise InvalidInput(f"config file {config_path} must hold a JSON object")
        unknown = set(loaded) - _CONFIG_FIELDS
        if unknown:
            raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
        if "drop_columns" in loaded:
            loaded["drop_columns"] = tuple(loaded["drop_columns"])
        merged.update(loaded)
    for name in _CONFIG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    config = RunConfig(**merged)
    config.validate()
    return config


def _load_frame(config: RunConfig):
    if not config.input:
        raise InvalidInput("an --input CSV is required")
    frame = load_csv(
        config.input,
        timestamp_column=config.timestamp_column,
        drop_columns=config.drop_columns,
        target_column=config.target_column,
    )
    if config.exclude_target:
        frame = frame.drop([config.target_column])
    return frame


def _parse_references(pairs) -> dict[str, float]:
    refs: dict[str, float] = {}
    for pair in pairs or ():
        name, _, value = pair.partition("=")
        if not name or not value:
            raise InvalidInput(f"--reference must look like NAME=RMSE, got {pair!r}")
        try:
            refs[name] = float(value)
        except ValueError:
            raise InvalidInput(f"--reference value must be numeric, got {pair!r}") from None
    return refs


def _print_metrics(label: str, metrics) -> None:
    mape = "n/a" if metrics.mape is None else f"{metrics.mape:.4f}"
    r2 = "n/a" if metrics.r2 is None else f"{metrics.r2:.4f}"
    print(
        f"{label}: rmse={metrics.rmse:.4f} mae={metrics.mae:.4f} "
        f"mape={mape} r2={r2}"
    )


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    references = _parse_references(args.reference)
    with _stage("load"):
        frame = _load_frame(config)
    spec = WindowSpec(config.window_length, config.train_fraction)
    with _stage("evaluate"):
        report = sliding_window_eval(frame, spec, config.forecaster(), references)
    report.config["run"] = asdict(config)
    with _stage("write"):
        write_report_json(report, config.report)
        if config.window_csv:
            write_window_csv(report, config.window_csv)
    print(f"windows: {report.n_windows} (dropped {report.dropped_rows} trailing rows)")
    _print_metrics("aggregate", report.aggregate)
    _print_metrics("persistence", report.persistence_aggregate)
    skill = report.skill["persistence"]
    agg = skill["rmse_aggregate"]
    per = skill["rmse_mean_per_window"]
    print(
        "skill vs persistence (rmse): "
        f"aggregate={'n/a' if agg is None else f'{agg:.4f}'} "
        f"mean-per-window={'n/a' if per is None else f'{per:.4f}'}"
    )
    for name, value in report.skill["references"].items():
        print(f"skill vs {name} (rmse): {'n/a' if value is None else f'{value:.4f}'}")
    print(f"report written to {config.report}")
    return EXIT_OK


def cmd_gridsearch(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    spec = WindowSpec(config.window_length, config.train_fraction)
    with _stage("load"):
        frame = _load_frame(config)
    with _stage("gridsearch"):
        best, rows = grid_search(
            frame,
            spec,
            config.forecaster(),
            kappa_values=args.kappa_grid,
            w_e_values=args.we_grid,
            gamma_values=args.gamma_grid if config.method == "kpca" else None,
        )
    table_path = config.output or "grid.csv"
    with _stage("write"):
        write_grid_csv(rows, table_path)
        if args.best_config:
            winner = asdict(config)
            winner.update(
                kappa=best["kappa"], w_e=best["w_e"],
                gamma=best["gamma"] if best["gamma"] is not None else config.gamma,
            )
            winner["drop_columns"] = list(winner["drop_columns"])
            Path(args.best_config).write_text(
                json.dumps(winner, indent=1), encoding="utf-8"
            )
    n_ok = sum(1 for r in rows if r["status"] == "ok")
    n_failed = len(rows) - n_ok
    print(f"evaluated {len(rows)} combinations ({n_ok} ok, {n_failed} failed)")
    print(
        f"best: method={best['method']} kappa={best['kappa']} w_e={best['w_e']} "
        f"gamma={best['gamma']} rmse={best['rmse']:.4f}"
    )
    print(f"table written to {table_path}")
    return EXIT_OK


def cmd_embed(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    with _stage("load"):
        frame = _load_frame(config)
    train_size = int(frame.n_rows * config.train_fraction)
    with _stage("embed"):
        emb, model = embed_series(
            frame,
            config.method,
            train_size,
            gamma=config.gamma if config.method == "kpca" else None,
            subsample=config.kpca_subsample,
        )
        normalized = emb.normalized()
    out_path = config.output or "embedded.csv"
    with _stage("write"):
        with open(out_path, "w", newline="", encoding="utf-8") as handle:
            handle.write("index,timestamp,embedded,normalized\n")
            for i, (ts, raw, norm) in enumerate(
                zip(frame.timestamps, emb.values, normalized)
            ):
                handle.write(f"{i},{ts},{float(raw)!r},{float(norm)!r}\n")
    print(
        f"embedded {len(emb)} rows with {config.method} "
        f"(train prefix {train_size}); written to {out_path}"
    )
    return EXIT_OK


def cmd_forecast(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    with _stage("load"):
        frame = _load_frame(config)
    train_size = int(frame.n_rows * config.train_fraction)
    if train_size < 2 or train_size >= frame.n_rows:
        raise StageFailure(
            "load", InvalidInput(f"train fraction leaves no usable split of {frame.n_rows} rows")
        )
    with _stage("embed"):
        emb, _ = embed_series(
            frame,
            config.method,
            train_size,
            gamma=config.gamma if config.method == "kpca" else None,
            subsample=config.kpca_subsample,
        )
    with _stage("train"):
        model = train(emb.values[:train_size], config.kappa, config.w_e, config.margin_ratio)
    with _stage("forecast"):
        forecasts = model.predict_series(
            emb.values[train_size:],
            adapt_online=config.adapt_online,
            prior=float(emb.values[train_size - 1]),
        )
        actual = emb.values[train_size:]
        metrics = compute_metrics(actual, forecasts)
        baseline = persistence_forecast(
            np.concatenate([[emb.values[train_size - 1]], actual])
        )
        persistence = compute_metrics(actual, baseline)
    out_path = config.output or "forecast.csv"
    with _stage("write"):
        with open(out_path, "w", newline="", encoding="utf-8") as handle:
            handle.write("index,timestamp,actual,forecast\n")
            for i, (act, pred) in enumerate(zip(actual, forecasts)):
                ts = frame.timestamps[train_size + i]
                handle.write(f"{i},{ts},{float(act)!r},{float(pred)!r}\n")
        if args.save_model:
            save_model(args.save_model, model)
    _print_metrics("test (embedded space)", metrics)
    _print_metrics("persistence", persistence)
    if persistence.rmse > 0:
        print(f"skill vs persistence (rmse): {skill_score(metrics.rmse, persistence.rmse):.4f}")
    print(f"forecasts written to {out_path}")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SyntheticSpec(
        length=args.length,
        kind=args.kind,
        shift_at=args.shift_at,
        magnitude=args.magnitude,
        seed=args.seed if args.seed is not None else 0,
    )
    with _stage("generate"):
        frame = synthetic_frame(spec, features=args.features)
    out_path = args.output or "synthetic.csv"
    with _stage("write"):
        write_csv(frame, out_path)
    print(
        f"wrote {frame.n_rows}x{frame.n_cols} {args.kind} fixture "
        f"(shift at {args.shift_at}, magnitude {args.magnitude}) to {out_path}"
    )
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="driftcast", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("evaluate", help="sliding-window backtest with a report")
    _add_run_options(p_eval)
    p_eval.add_argument(
        "--reference",
        action="append",
        help="extra skill reference as NAME=RMSE (repeatable)",
    )
    p_eval.set_defaults(handler=cmd_evaluate)

    p_grid = sub.add_parser("gridsearch", help="rank parameter combinations")
    _add_run_options(p_grid)
    p_grid.add_argument(
        "--kappa-grid", dest="kappa_grid", type=_int_list, default=(5, 15, 30, 45, 60)
    )
    p_grid.add_argument("--we-grid", dest="we_grid", type=_int_list, default=(3, 4, 5))
    p_grid.add_argument(
        "--gamma-grid", dest="gamma_grid", type=_float_list, default=(0.1, 10.0, 0.5)
    )
    p_grid.add_argument("--best-config", dest="best_config", help="write winner as a reusable config JSON")
    p_grid.set_defaults(handler=cmd_gridsearch)

    p_embed = sub.add_parser("embed", help="dump the embedded series to CSV")
    _add_run_options(p_embed)
    p_embed.set_defaults(handler=cmd_embed)

    p_fc = sub.add_parser("forecast", help="single train/test run")
    _add_run_options(p_fc)
    p_fc.add_argument("--save-model", dest="save_model", help="persist the trained model as JSON")
    p_fc.set_defaults(handler=cmd_forecast)

    p_synth = sub.add_parser("synth", help="emit a synthetic drift fixture CSV")
    p_synth.add_argument("--kind", choices=("mean_shift", "variance_ramp", "sine_drift"), required=True)
    p_synth.add_argument("--length", type=int, required=True)
    p_synth.add_argument("--shift-at", dest="shift_at", type=int, required=True)
    p_synth.add_argument("--magnitude", type=float, required=True)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--features", type=int, default=1)
    p_synth.add_argument("--output")
    p_synth.set_defaults(handler=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except StageFailure as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
