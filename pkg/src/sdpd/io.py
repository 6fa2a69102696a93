"""Panel CSV files and JSON model descriptors.

Panel CSV: ``T`` rows by ``p`` columns, optionally preceded by a header
``loc_1,...,loc_p``.

Model descriptor (JSON)::

    {
      "W": {"kind": "W1", "p": 10, "seed": 1, "normalization": "l2"},
      "lambda0": [...], "lambda1": [...],
      "error": {"sigma": [...], "cross_mode": "common_factor",
                "factor_loading": -0.7, "factor_index": 2, "seed": 3},
      "seed": 5
    }

``W`` may instead be ``{"path": "w.csv"}``. Missing ``lambda0``/``lambda1``
or ``error.sigma`` are drawn from ``seed`` with the simulation-study
settings; a missing ``error.seed`` is derived from ``seed`` too.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import BadSpec, DataError
from .process_sim import CrossMode, ErrorSpec, PanelSeries, SdpdModel, gen_coefficients, gen_sigma
from .spatial_weights import SpatialWeightMatrix, gen_spatial_matrix, read_weights_csv

__all__ = ["read_panel_csv", "write_panel_csv", "load_model", "model_descriptor"]


def read_panel_csv(path: str | Path) -> PanelSeries:
    try:
        with open(path) as fh:
            first = fh.readline()
        skip = 1 if first.strip().lower().startswith("loc") else 0
        y = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read panel {path}: {exc}") from exc
    return PanelSeries(y)


def write_panel_csv(Y: PanelSeries, path: str | Path, header: bool = True) -> None:
    head = ",".join(f"loc_{i + 1}" for i in range(Y.p)) if header else ""
    np.savetxt(path, Y.values, delimiter=",", fmt="%.17g", header=head, comments="")


def _weights(spec: dict, base: Path | None) -> SpatialWeightMatrix:
    if "path" in spec:
        p = Path(spec["path"])
        if base is not None and not p.is_absolute():
            p = base / p
        return read_weights_csv(p, spec.get("normalization"))
    if "entries" in spec:
        return SpatialWeightMatrix(np.asarray(spec["entries"], dtype=float), spec.get("normalization", "none"))
    try:
        return gen_spatial_matrix(spec["kind"], int(spec["p"]), int(spec.get("seed", 0)),
                                  spec.get("normalization", "l2"))
    except KeyError as exc:
        raise BadSpec(f"W spec needs 'path' or 'kind' and 'p' (missing {exc})") from None


def load_model(desc: dict | str | Path, seed: int | None = None) -> tuple[SdpdModel, dict]:
    """Build a model from a descriptor; returns the model and the resolved descriptor.

    ``seed`` overrides the descriptor's top-level seed.
    """
    base = None
    if not isinstance(desc, dict):
        base = Path(desc).parent
        try:
            desc = json.loads(Path(desc).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise BadSpec(f"cannot read model descriptor: {exc}") from exc
    if "W" not in desc:
        raise BadSpec("model descriptor needs a 'W' entry")
    master = int(desc.get("seed", 0) if seed is None else seed)
    s_coef, s_sigma, s_err = np.random.SeedSequence(master).spawn(3)
    W = _weights(desc["W"], base)

    if "lambda0" in desc and "lambda1" in desc:
        lam0 = np.asarray(desc["lambda0"], dtype=float)
        lam1 = np.asarray(desc["lambda1"], dtype=float)
    else:
        lam0, lam1 = gen_coefficients(W.p, s_coef, W=W)
    err = dict(desc.get("error", {}))
    sigma = np.asarray(err["sigma"], dtype=float) if "sigma" in err else gen_sigma(W.p, s_sigma)
    spec = ErrorSpec(
        sigma=sigma,
        cross_mode=CrossMode(err.get("cross_mode", "common_factor")),
        factor_loading=float(err.get("factor_loading", -0.7)),
        factor_index=int(err.get("factor_index", 2)),
        seed=int(err.get("seed", s_err.generate_state(1, np.uint64)[0])),
    )
    model = SdpdModel(W, lam0, lam1, spec)
    resolved = model_descriptor(model, w_spec=desc["W"])
    resolved["seed"] = master
    return model, resolved


def model_descriptor(model: SdpdModel, w_spec: dict | None = None) -> dict:
    es = model.error_spec
    return {
        "W": w_spec if w_spec is not None else {
            "entries": model.W.entries.tolist(),
            "normalization": model.W.normalization.value,
        },
        "lambda0": model.lambda0.tolist(),
        "lambda1": model.lambda1.tolist(),
        "error": {
            "sigma": es.sigma.tolist(),
            "cross_mode": es.cross_mode.value,
            "factor_loading": es.factor_loading,
            "factor_index": es.factor_index,
            "seed": es.seed,
        },
    }
