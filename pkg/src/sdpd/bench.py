"""Error metrics and the Monte Carlo harness.

Every replication ``r`` derives its randomness from
``numpy.random.SeedSequence([master_seed, r])``, so runs are reproducible
and replications can be executed in any order or in parallel. The spatial
matrix is drawn once per study from ``master_seed``.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BadSpec, EmptySet, SdpdError
from .estimator import estimate_from_covariances
from .moments import sample_covariances
from .process_sim import CrossMode, ErrorSpec, SdpdModel, random_model, simulate
from .reduced_form import TransitionMatrix, build_reduced, sdpd_transition_estimator, var_yule_walker
from .spatial_weights import Normalization, SpatialWeightMatrix, gen_spatial_matrix, read_weights_csv

__all__ = [
    "ae",
    "ase",
    "ase_row1",
    "McConfig",
    "McSummary",
    "MetricSummary",
    "replication_seed",
    "run_replication",
    "run_monte_carlo",
    "ESTIMATORS",
]

ESTIMATORS = ("sdpd_known_w", "sdpd_estimated_w", "var")
FIXED_MODEL_KEY = 2**32


def _included(est, truth, exclude=None):
    est = np.asarray(est, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if est.shape != truth.shape:
        raise ValueError(f"length mismatch: {est.shape} vs {truth.shape}")
    keep = np.isfinite(est)
    if exclude is not None:
        keep &= ~np.asarray(exclude, dtype=bool)
    if not keep.any():
        raise EmptySet("no location left after excluding degenerate ones")
    return est[keep] - truth[keep]


def ae(est, truth, exclude=None) -> float:
    """Mean signed error over included locations (NaN and ``exclude`` dropped)."""
    return float(np.mean(_included(est, truth, exclude)))


def ase(est, truth, exclude=None) -> float:
    """Mean squared error over included locations."""
    d = _included(est, truth, exclude)
    return float(np.mean(d * d))


def ase_row1(A_hat: TransitionMatrix | np.ndarray, A_true: TransitionMatrix | np.ndarray) -> float:
    """Mean squared error over the first row of the transition matrix."""
    a = A_hat.entries if isinstance(A_hat, TransitionMatrix) else np.asarray(A_hat)
    b = A_true.entries if isinstance(A_true, TransitionMatrix) else np.asarray(A_true)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    d = a[0] - b[0]
    return float(np.mean(d * d))


@dataclass
class McConfig:
    """Monte Carlo study definition (JSON-serializable).

    Exactly one of ``w_kind`` / ``w_path`` is used; ``w_path`` wins.
    """

    p: int
    T: int
    replications: int = 100
    w_kind: str = "W1"
    w_path: str | None = None
    normalization: str = "l2"
    master_seed: int = 0
    cross_mode: str = "common_factor"
    estimators: list[str] = field(default_factory=lambda: ["sdpd_known_w"])
    fixed_lambda: bool = False
    burn_in: int = 200
    threads: int = 1
    summary_csv: str | None = None
    raw_csv: str | None = None

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise BadSpec("replications must be >= 1")
        if not self.estimators:
            raise BadSpec("estimator set must be nonempty")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise BadSpec(f"unknown estimators {sorted(unknown)}; choose from {ESTIMATORS}")
        if self.p < 1 or self.T < 1:
            raise BadSpec("p and T must be positive")
        CrossMode(self.cross_mode)
        Normalization.parse(self.normalization)

    @classmethod
    def from_dict(cls, d: dict) -> McConfig:
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise BadSpec(f"unknown config keys {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise BadSpec(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path) -> McConfig:
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise BadSpec(f"cannot read config {path}: {exc}") from exc

    def weight_matrix(self) -> SpatialWeightMatrix:
        if self.w_path:
            return read_weights_csv(self.w_path)
        return gen_spatial_matrix(self.w_kind, self.p, self.master_seed, self.normalization)


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    sd: float
    n: int
    n_fail: int


@dataclass
class McSummary:
    config: McConfig
    metrics: dict[str, MetricSummary]
    raw: list[dict]
    degenerate_locations: int
    wall_clock: float

    def values(self, metric: str) -> np.ndarray:
        """Raw per-replication values of ``metric`` (NaN where it failed)."""
        return np.array([row.get(metric, np.nan) for row in self.raw], dtype=float)

    def write_summary_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["metric", "mean", "sd", "n_fail", "note"])
            for name, m in self.metrics.items():
                out.writerow([name, f"{m.mean:.6g}", f"{m.sd:.6g}", m.n_fail, self.note(name)])

    def note(self, metric: str) -> str:
        """Error classes behind a metric's failures, e.g. ``NotComputable``."""
        if self.metrics[metric].n_fail == 0:
            return ""
        est = _metric_estimator(metric)
        kinds = sorted({row["errors"][est].split(":", 1)[0] for row in self.raw if est in row["errors"]})
        return ";".join(kinds) or "degenerate"

    def write_raw_csv(self, path: str | Path) -> None:
        cols = ["replication"] + list(self.metrics)
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(cols)
            for row in self.raw:
                out.writerow([row["replication"]] + [_fmt(row.get(c, np.nan)) for c in cols[1:]])


def _fmt(x) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def replication_seed(master_seed: int, r: int) -> np.random.SeedSequence:
    """Seed of replication ``r``; a pure function of ``(master_seed, r)``."""
    return np.random.SeedSequence([int(master_seed), int(r)])


def _model_for(cfg: McConfig, W: SpatialWeightMatrix, r: int) -> SdpdModel:
    ss = replication_seed(cfg.master_seed, r)
    if not cfg.fixed_lambda:
        return random_model(W, ss, cfg.cross_mode)
    base = random_model(W, replication_seed(cfg.master_seed, FIXED_MODEL_KEY), cfg.cross_mode)
    spec = ErrorSpec(
        sigma=base.error_spec.sigma,
        cross_mode=base.error_spec.cross_mode,
        seed=int(ss.generate_state(1, np.uint64)[0]),
    )
    return SdpdModel(W, base.lambda0, base.lambda1, spec)


def run_replication(cfg: McConfig, W: SpatialWeightMatrix, r: int) -> dict:
    """Simulate one panel and evaluate every requested estimator on it.

    Estimator failures are recorded as NaN metrics plus an ``errors``
    entry; they never abort the study.
    """
    model = _model_for(cfg, W, r)
    y = simulate(model, cfg.T, cfg.burn_in)
    cov = sample_covariances(y)
    A_true = build_reduced(W, model.lambda0, model.lambda1)
    row: dict = {"replication": r, "errors": {}}

    if "sdpd_known_w" in cfg.estimators:
        try:
            res = estimate_from_covariances(cov, W)
            bad = res.degenerate
            row["n_degenerate"] = res.n_degenerate
            row["residual_optimal"] = float(res.residual_optimal())
            for j, (est, truth) in enumerate(((res.lambda0_hat, model.lambda0), (res.lambda1_hat, model.lambda1))):
                row[f"ae_lambda{j}"] = ae(est, truth, bad)
                row[f"ase_lambda{j}"] = ase(est, truth, bad)
            A_hat, _, _ = sdpd_transition_estimator(cov, W)
            row["ase_A_sdpd_known_w"] = ase_row1(A_hat, A_true)
        except SdpdError as exc:
            row["errors"]["sdpd_known_w"] = f"{type(exc).__name__}: {exc}"
    if "sdpd_estimated_w" in cfg.estimators:
        try:
            A_hat, _, _ = sdpd_transition_estimator(cov, None)
            row["ase_A_sdpd_estimated_w"] = ase_row1(A_hat, A_true)
        except SdpdError as exc:
            row["errors"]["sdpd_estimated_w"] = f"{type(exc).__name__}: {exc}"
    if "var" in cfg.estimators:
        try:
            row["ase_A_var"] = ase_row1(var_yule_walker(y), A_true)
        except SdpdError as exc:
            row["errors"]["var"] = f"{type(exc).__name__}: {exc}"
    return row


def _metric_names(estimators: Sequence[str]) -> list[str]:
    names = []
    if "sdpd_known_w" in estimators:
        names += ["ae_lambda0", "ase_lambda0", "ae_lambda1", "ase_lambda1",
                  "n_degenerate", "residual_optimal", "ase_A_sdpd_known_w"]
    if "sdpd_estimated_w" in estimators:
        names.append("ase_A_sdpd_estimated_w")
    if "var" in estimators:
        names.append("ase_A_var")
    return names


def _metric_estimator(metric: str) -> str:
    if metric == "ase_A_var":
        return "var"
    if metric == "ase_A_sdpd_estimated_w":
        return "sdpd_estimated_w"
    return "sdpd_known_w"


def _aggregate(values: np.ndarray) -> MetricSummary:
    ok = values[np.isfinite(values)]
    n_fail = int(values.size - ok.size)
    if ok.size == 0:
        return MetricSummary(float("nan"), float("nan"), 0, n_fail)
    sd = float(np.std(ok, ddof=1)) if ok.size > 1 else 0.0
    return MetricSummary(float(np.mean(ok)), sd, int(ok.size), n_fail)


def run_monte_carlo(cfg: McConfig) -> McSummary:
    """Run ``cfg.replications`` independent replications and aggregate.

    Results are folded in replication order regardless of thread count.
    """
    start = time.perf_counter()
    W = cfg.weight_matrix()
    if W.p != cfg.p:
        raise BadSpec(f"weight matrix has p={W.p}, config says p={cfg.p}")
    reps = range(cfg.replications)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            raw = list(pool.map(lambda r: run_replication(cfg, W, r), reps))
    else:
        raw = [run_replication(cfg, W, r) for r in reps]

    names = _metric_names(cfg.estimators)
    metrics = {
        n: _aggregate(np.array([row.get(n, np.nan) for row in raw], dtype=float)) for n in names
    }
    degenerate = int(sum(row.get("n_degenerate", 0) for row in raw))
    summary = McSummary(cfg, metrics, raw, degenerate, time.perf_counter() - start)
    if cfg.summary_csv:
        summary.write_summary_csv(cfg.summary_csv)
    if cfg.raw_csv:
        summary.write_raw_csv(cfg.raw_csv)
    return summary


def config_dict(cfg: McConfig) -> dict:
    return asdict(cfg)
