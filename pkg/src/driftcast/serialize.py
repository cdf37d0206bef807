"""Versioned JSON persistence for fitted models.

Floats survive a save/load cycle exactly (shortest-repr serialization),
so a restored model forecasts bit-identically to the original.
"""

from __future__ import annotations

import json
from collections import deque
from pathlib import Path

import numpy as np

from .embedding import KpcaModel, PcaModel, StandardizationStats
from .errors import LoadError
from .fts import FuzzySet, NsftsModel, Universe

FORMAT = "driftcast-model"
VERSION = 1


def _pca_payload(model: PcaModel) -> dict:
    return {
        "means": model.stats.means.tolist(),
        "std_devs": model.stats.std_devs.tolist(),
        "component": model.component.tolist(),
        "eigenvalue": model.eigenvalue,
        "n_components": model.n_components,
    }


def _pca_restore(payload: dict) -> PcaModel:
    return PcaModel(
        stats=StandardizationStats(
            means=np.asarray(payload["means"], dtype=np.float64),
            std_devs=np.asarray(payload["std_devs"], dtype=np.float64),
        ),
        component=np.asarray(payload["component"], dtype=np.float64),
        eigenvalue=float(payload["eigenvalue"]),
        n_components=int(payload["n_components"]),
    )


def _kpca_payload(model: KpcaModel) -> dict:
    return {
        "means": model.stats.means.tolist(),
        "std_devs": model.stats.std_devs.tolist(),
        "training_points": model.training_points.tolist(),
        "gamma": model.gamma,
        "alpha": model.alpha.tolist(),
        "eigenvalue": model.eigenvalue,
        "row_means": model.row_means.tolist(),
        "grand_mean": model.grand_mean,
    }


def _kpca_restore(payload: dict) -> KpcaModel:
    return KpcaModel(
        stats=StandardizationStats(
            means=np.asarray(payload["means"], dtype=np.float64),
            std_devs=np.asarray(payload["std_devs"], dtype=np.float64),
        ),
        training_points=np.asarray(payload["training_points"], dtype=np.float64),
        gamma=float(payload["gamma"]),
        alpha=np.asarray(payload["alpha"], dtype=np.float64),
        eigenvalue=float(payload["eigenvalue"]),
        row_means=np.asarray(payload["row_means"], dtype=np.float64),
        grand_mean=float(payload["grand_mean"]),
    )


def _nsfts_payload(model: NsftsModel) -> dict:
    return {
        "universe": {
            "lb": model.universe.lb,
            "ub": model.universe.ub,
            "margin_ratio": model.universe.margin_ratio,
        },
        "sets": [
            {
                "index": fs.index,
                "l": fs.l,
                "c": fs.c,
                "u": fs.u,
                "delta": fs.delta,
                "rho": fs.rho,
                "label": fs.label,
            }
            for fs in model.sets
        ],
        "rules": {str(k): v for k, v in model.rules.items()},
        "kappa": model.kappa,
        "w_e": model.w_e,
        "margin_ratio": model.margin_ratio,
        "residuals": list(model.residuals),
        "order": model.order,
        "printed_form": model.printed_form,
        "last_train_value": model.last_train_value,
        "reorder_events": model.reorder_events,
    }


def _nsfts_restore(payload: dict) -> NsftsModel:
    universe = Universe(
        lb=float(payload["universe"]["lb"]),
        ub=float(payload["universe"]["ub"]),
        margin_ratio=float(payload["universe"]["margin_ratio"]),
    )
    sets = [
        FuzzySet(
            index=int(fs["index"]),
            l=float(fs["l"]),
            c=float(fs["c"]),
            u=float(fs["u"]),
            delta=float(fs["delta"]),
            rho=float(fs["rho"]),
            label=str(fs["label"]),
        )
        for fs in payload["sets"]
    ]
    model = NsftsModel(
        universe=universe,
        sets=sets,
        rules={int(k): [int(i) for i in v] for k, v in payload["rules"].items()},
        kappa=int(payload["kappa"]),
        w_e=int(payload["w_e"]),
        margin_ratio=float(payload["margin_ratio"]),
        residuals=deque(payload["residuals"], maxlen=int(payload["w_e"])),
        order=int(payload["order"]),
        printed_form=bool(payload["printed_form"]),
        last_train_value=float(payload["last_train_value"]),
        reorder_events=int(payload["reorder_events"]),
    )
    return model


_KINDS = {
    PcaModel: ("pca", _pca_payload),
    KpcaModel: ("kpca", _kpca_payload),
    NsftsModel: ("nsfts", _nsfts_payload),
}
_RESTORERS = {"pca": _pca_restore, "kpca": _kpca_restore, "nsfts": _nsfts_restore}


def save_model(path, model) -> None:
    """Write any fitted model as a versioned JSON document."""
    try:
        kind, to_payload = _KINDS[type(model)]
    except KeyError:
        raise LoadError(f"cannot serialize object of type {type(model).__name__}") from None
    document = {
        "format": FORMAT,
        "version": VERSION,
        "kind": kind,
        "payload": to_payload(model),
    }
    Path(path).write_text(json.dumps(document, indent=1), encoding="utf-8")


def load_model(path):
    """Restore a model written by :func:`save_model`.

    Raises :class:`LoadError` for truncated files, foreign documents, or
    version tags this build does not understand.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path} is truncated or not valid JSON: {exc}") from exc
    if not isinstance(document, dict) or document.get("format") != FORMAT:
        raise LoadError(f"{path} is not a {FORMAT} document")
    version = document.get("version")
    if version != VERSION:
        raise LoadError(f"unsupported model version {version!r} (expected {VERSION})")
    kind = document.get("kind")
    if kind not in _RESTORERS:
        raise LoadError(f"unknown model kind {kind!r}")
    try:
        return _RESTORERS[kind](document["payload"])
    except (KeyError, TypeError, ValueError) as exc:
        raise LoadError(f"{path} payload is malformed: {exc}") from exc
