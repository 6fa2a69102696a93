"""Reduced-form transition matrices and their estimators.

``A* = (I - D(lambda0) W)^{-1} D(lambda1) (I - D(lambda0) W)`` is the VAR(1)
coefficient of the model. It can be estimated by plugging SDPD estimates
into that formula, with a known ``W`` or with ``W`` replaced by the
zero-diagonal, row-normalized lag-0 sample correlation matrix, or by the
classic Yule-Walker VAR estimator.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, NearSingular, NotComputable, ZeroRow
from .estimator import EstimationResult, estimate_from_covariances
from .moments import LagCovariancePair, sample_covariances
from .process_sim import PanelSeries, spatial_filter
from .spatial_weights import Normalization, SpatialWeightMatrix

__all__ = [
    "Provenance",
    "TransitionMatrix",
    "RepresentabilityReport",
    "build_reduced",
    "sdpd_transition_estimator",
    "estimate_latent_w",
    "var_yule_walker",
    "check_representable",
    "read_transition_csv",
]

INV_COND_LIMIT = 1e12
DIAG_COND_LIMIT = 1e10


class Provenance(str, enum.Enum):
    TRUE_MODEL = "true_model"
    SDPD_KNOWN_W = "sdpd_known_w"
    SDPD_ESTIMATED_W = "sdpd_estimated_w"
    VAR_YULE_WALKER = "var_yule_walker"


@dataclass(frozen=True)
class TransitionMatrix:
    entries: np.ndarray
    provenance: Provenance

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=float, ndmin=2, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DataError("transition matrix must be square")
        if not np.all(np.isfinite(a)):
            raise DataError("transition matrix has non-finite entries")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @property
    def p(self) -> int:
        return self.entries.shape[0]

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.entries))))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# provenance: {self.provenance.value}\n")
            np.savetxt(fh, self.entries, delimiter=",", fmt="%.17g")


def read_transition_csv(path: str | Path) -> TransitionMatrix:
    prov = Provenance.TRUE_MODEL
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("#") and "provenance:" in first:
        prov = Provenance(first.split("provenance:", 1)[1].strip())
    try:
        a = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read transition matrix {path}: {exc}") from exc
    return TransitionMatrix(a, prov)


def build_reduced(
    W: SpatialWeightMatrix | np.ndarray,
    lambda0: np.ndarray,
    lambda1: np.ndarray,
    provenance: Provenance | str = Provenance.TRUE_MODEL,
) -> TransitionMatrix:
    """``S^{-1} D(lambda1) S`` with ``S = I - D(lambda0) W``.

    Raises
    ------
    NearSingular
        If ``cond(S)`` exceeds 1e12.
    """
    S = spatial_filter(W, lambda0)
    if np.linalg.cond(S) > INV_COND_LIMIT:
        raise NearSingular("I - D(lambda0) W is numerically singular")
    lam1 = np.asarray(lambda1, dtype=float)
    return TransitionMatrix(np.linalg.solve(S, lam1[:, None] * S), provenance)


def estimate_latent_w(Y: PanelSeries | np.ndarray | LagCovariancePair) -> SpatialWeightMatrix:
    """Zero-diagonal, L2 row-normalized lag-0 sample correlation matrix.

    Full rank is not enforced; check ``.rank`` on the result.
    """
    cov = Y if isinstance(Y, LagCovariancePair) else sample_covariances(Y)
    s0 = cov.sigma0
    var = np.diag(s0)
    if np.any(var <= 0.0):
        raise DataError("every location needs positive sample variance")
    sd = np.sqrt(var)
    r = s0 / np.outer(sd, sd)
    np.fill_diagonal(r, 0.0)
    norms = np.linalg.norm(r, axis=1)
    if np.any(norms < 1e-12):
        raise ZeroRow("a location is uncorrelated with all others; latent W has a zero row")
    return SpatialWeightMatrix(r / norms[:, None], Normalization.L2)


def sdpd_transition_estimator(
    Y: PanelSeries | np.ndarray | LagCovariancePair,
    W: SpatialWeightMatrix | None = None,
) -> tuple[TransitionMatrix, EstimationResult, SpatialWeightMatrix]:
    """Plug-in ``A*`` from SDPD estimates.

    Uses ``W`` when given, otherwise :func:`estimate_latent_w`. Flagged
    locations contribute their fallback values; a NaN estimate is
    replaced by 0 (no spatial or temporal dependence) so that the
    matrix is always formed.

    Returns the transition matrix, the underlying estimation result and
    the weight matrix used.
    """
    cov = Y if isinstance(Y, LagCovariancePair) else sample_covariances(Y)
    if W is None:
        W_used = estimate_latent_w(cov)
        prov = Provenance.SDPD_ESTIMATED_W
    else:
        W_used = W
        prov = Provenance.SDPD_KNOWN_W
    res = estimate_from_covariances(cov, W_used)
    lam0 = np.nan_to_num(res.lambda0_hat, nan=0.0)
    lam1 = np.nan_to_num(res.lambda1_hat, nan=0.0)
    return build_reduced(W_used, lam0, lam1, prov), res, W_used


def var_yule_walker(Y: PanelSeries | np.ndarray | LagCovariancePair) -> TransitionMatrix:
    """Yule-Walker VAR(1) estimate ``sigma1 sigma0^{-1}``.

    Oriented so that ``y_t = A y_{t-1} + e_t``.

    Raises
    ------
    NotComputable
        If ``T <= p`` or ``sigma0`` is numerically singular.
    """
    if isinstance(Y, LagCovariancePair):
        cov = Y
    else:
        y = Y.values if isinstance(Y, PanelSeries) else np.asarray(Y, dtype=float)
        if y.shape[0] <= y.shape[1]:
            raise NotComputable(f"VAR Yule-Walker needs T > p (T={y.shape[0]}, p={y.shape[1]})")
        cov = sample_covariances(y)
    if np.linalg.cond(cov.sigma0) > INV_COND_LIMIT:
        raise NotComputable("sample sigma0 is numerically singular")
    # A sigma0 = sigma1  <=>  sigma0 A^T = sigma1^T (sigma0 symmetric)
    return TransitionMatrix(np.linalg.solve(cov.sigma0, cov.sigma1.T).T, Provenance.VAR_YULE_WALKER)


@dataclass(frozen=True)
class RepresentabilityReport:
    diagonalizable: bool
    eigen_real: bool
    distinct: bool
    eigenvalues: np.ndarray
    eigvec_condition: float
    # (eigenvalue, algebraic multiplicity, geometric multiplicity)
    multiplicities: list[tuple[complex, int, int]] = field(default_factory=list)

    @property
    def representable(self) -> bool:
        return self.diagonalizable and self.eigen_real


def check_representable(A: TransitionMatrix | np.ndarray, cluster_tol: float = 1e-6) -> RepresentabilityReport:
    """Can ``A`` be written as the reduced form of a stationary SDPD model?

    Needs real eigenvalues and a full set of eigenvectors. Eigenvalues
    closer than ``cluster_tol`` (relative to the spectral radius) are
    treated as one when counting multiplicities.
    """
    a = A.entries if isinstance(A, TransitionMatrix) else np.asarray(A, dtype=float)
    if not np.all(np.isfinite(a)):
        raise DataError("matrix has non-finite entries")
    p = a.shape[0]
    vals, vecs = np.linalg.eig(a)
    rho = float(np.max(np.abs(vals))) if p else 0.0
    ref = max(rho, np.finfo(float).tiny)
    eigen_real = bool(np.max(np.abs(vals.imag)) < 1e-8 * ref) if rho > 0 else True
    vcond = float(np.linalg.cond(vecs))

    groups: list[list[int]] = []
    for k, v in enumerate(vals):
        for g in groups:
            if abs(vals[g[0]] - v) <= cluster_tol * ref:
                g.append(k)
                break
        else:
            groups.append([k])
    profile = []
    geo_total = 0
    for g in groups:
        mu = complex(np.mean(vals[g]))
        M = a - mu * np.eye(p)
        s = np.linalg.svd(M, compute_uv=False)
        null = int(np.sum(s <= max(cluster_tol * ref, p * np.finfo(float).eps * max(s[0], 1.0))))
        geo = max(1, min(null, len(g)))
        geo_total += geo
        profile.append((mu, len(g), geo))
    diagonalizable = vcond < DIAG_COND_LIMIT and geo_total == p
    return RepresentabilityReport(
        diagonalizable=bool(diagonalizable),
        eigen_real=eigen_real,
        distinct=len(groups) == p,
        eigenvalues=vals,
        eigvec_condition=vcond,
        multiplicities=profile,
    )
