"""Per-location generalized Yule-Walker estimation of ``(lambda0_i, lambda1_i)``.

For each location ``i`` with unit vector ``e_i`` and weight row ``w_i``
the latent series ``z_i(l) = (e_i - l w_i)^T y_t`` has lag-1 slope

    rho_i(l) = (a1 + b1 l + c1 l^2) / (a0 + b0 l + c0 l^2)

where the ``a, b, c`` are bilinear forms in ``sigma0`` and ``sigma1``.
The true ``lambda0_i`` is a root of the quadratic
``t0 + t1 l + t2 l^2 = 0``; of the two roots, the one whose residual

    v_ij^T = (e_i - l_j w_i)^T sigma1 - rho_i(l_j) (e_i - l_j w_i)^T sigma0

has the smaller squared norm is selected, and ``lambda1_i = rho_i``
evaluated there. ``I - D(lambda0) W`` is never inverted.

Everything is vectorized over locations; the ``location_*`` helpers and
:func:`select_root` expose the same computation for a single location.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, DegenerateVariance, NoRealRoot, Unidentified
from .moments import LagCovariancePair, sample_covariances
from .process_sim import PanelSeries
from .spatial_weights import SpatialWeightMatrix

__all__ = [
    "LocationMoments",
    "QuadraticCoefficients",
    "EstimationResult",
    "moment_arrays",
    "location_moments",
    "quadratic_coefficients",
    "solve_quadratic",
    "lambda1_given_lambda0",
    "residual_vector",
    "select_root",
    "estimate",
    "estimate_from_covariances",
    "stationary_points",
    "correlation_profile",
    "Flag",
]

UNIDENTIFIED_TOL = 1e-14
LINEAR_TOL = 1e-14
DENOM_TOL = 1e-14
TIE_RTOL = 1e-12


class Flag:
    OK = "ok"
    UNIDENTIFIED = "unidentified"
    NO_REAL_ROOT = "no_real_root"
    DEGENERATE_VARIANCE = "degenerate_variance"


@dataclass(frozen=True)
class LocationMoments:
    a0: float
    a1: float
    a2: float
    b0: float
    b1: float
    b2: float
    c0: float
    c1: float

    @property
    def scale(self) -> float:
        return max(abs(self.a0), abs(self.a1), abs(self.a2), abs(self.b0),
                   abs(self.b1), abs(self.b2), abs(self.c0), abs(self.c1))


@dataclass(frozen=True)
class QuadraticCoefficients:
    t0: float
    t1: float
    t2: float
    scale: float = 1.0

    def __call__(self, x):
        return self.t0 + self.t1 * x + self.t2 * x * x


def _unpack(cov: LagCovariancePair, W: SpatialWeightMatrix | np.ndarray):
    w = W.entries if isinstance(W, SpatialWeightMatrix) else np.asarray(W, dtype=float)
    if w.shape != cov.sigma0.shape:
        raise DataError(f"W is {w.shape}, covariances are {cov.sigma0.shape}")
    return cov.sigma0, cov.sigma1, w


def moment_arrays(cov: LagCovariancePair, W: SpatialWeightMatrix | np.ndarray) -> dict[str, np.ndarray]:
    """All location moments at once, as length-``p`` arrays keyed by name."""
    s0, s1, w = _unpack(cov, W)
    ws0 = w @ s0
    ws1 = w @ s1
    # e_i^T M w_i == sum_k M[i, k] w[i, k]
    return {
        "a0": np.diag(s0).copy(),
        "a1": np.diag(s1).copy(),
        "a2": np.sum((s1.T - s1) * w, axis=1),
        "b0": -2.0 * np.sum(s0 * w, axis=1),
        "b1": -np.sum((s1 + s1.T) * w, axis=1),
        "b2": -2.0 * np.sum(s1 * w, axis=1),
        "c0": np.sum(ws0 * w, axis=1),
        "c1": np.sum(ws1 * w, axis=1),
    }


def location_moments(cov: LagCovariancePair, W: SpatialWeightMatrix | np.ndarray, i: int) -> LocationMoments:
    """Moments of location ``i`` (0-based)."""
    s0, s1, w = _unpack(cov, W)
    if not 0 <= i < s0.shape[0]:
        raise IndexError(f"location {i} out of range")
    e = np.zeros(s0.shape[0])
    e[i] = 1.0
    wi = w[i]
    return LocationMoments(
        a0=float(e @ s0 @ e),
        a1=float(e @ s1 @ e),
        a2=float(e @ (s1.T - s1) @ wi),
        b0=float(-2.0 * e @ s0 @ wi),
        b1=float(-e @ (s1 + s1.T) @ wi),
        b2=float(-2.0 * e @ s1 @ wi),
        c0=float(wi @ s0 @ wi),
        c1=float(wi @ s1 @ wi),
    )


def _coef_arrays(m):
    t0 = m["b1"] * m["a0"] - m["b0"] * m["a1"] + m["a0"] * m["a2"]
    t1 = 2.0 * (m["a0"] * m["c1"] - m["c0"] * m["a1"]) + m["a2"] * m["b0"]
    t2 = m["c1"] * m["b0"] - m["c0"] * m["b1"] + m["a2"] * m["c0"]
    return t0, t1, t2


def quadratic_coefficients(m: LocationMoments) -> QuadraticCoefficients:
    """Coefficients of the quadratic whose roots are candidate ``lambda0_i``.

    Raises
    ------
    Unidentified
        If all three coefficients vanish relative to ``scale**2``
        (e.g. a constant ``lambda1``).
    """
    t0, t1, t2 = _coef_arrays(m.__dict__)
    scale = m.scale
    if max(abs(t0), abs(t1), abs(t2)) < UNIDENTIFIED_TOL * scale * scale:
        raise Unidentified("quadratic coefficients vanish; location is not identified")
    return QuadraticCoefficients(float(t0), float(t1), float(t2), scale)


def _roots(t0: float, t1: float, t2: float) -> tuple[float, ...]:
    tmax = max(abs(t0), abs(t1), abs(t2))
    if abs(t2) < LINEAR_TOL * tmax:
        if t1 == 0.0:
            return ()
        return (-t0 / t1,)
    disc = t1 * t1 - 4.0 * t2 * t0
    if disc < 0.0:
        return ()
    # cancellation-free pair: q/t2 and t0/q
    q = -0.5 * (t1 + math.copysign(math.sqrt(disc), t1))
    if q == 0.0:
        return (0.0, 0.0)
    return tuple(sorted((q / t2, t0 / q)))


def solve_quadratic(q: QuadraticCoefficients) -> tuple[float, ...]:
    """Real roots of ``t0 + t1 x + t2 x^2``, ascending.

    A vanishing ``t2`` degrades to the single linear root.

    Raises
    ------
    NoRealRoot
        If the discriminant is negative.
    """
    roots = _roots(q.t0, q.t1, q.t2)
    if not roots:
        raise NoRealRoot(f"no real root for t = ({q.t0:.3g}, {q.t1:.3g}, {q.t2:.3g})")
    return roots


def _filter_row(p: int, i: int, wi: np.ndarray, lam0: float) -> np.ndarray:
    a = -lam0 * wi
    a[i] += 1.0
    return a


def lambda1_given_lambda0(cov: LagCovariancePair, W, i: int, lambda0: float) -> float:
    """Lag-1 slope of ``z_i = (e_i - lambda0 w_i)^T y``.

    Raises
    ------
    DegenerateVariance
        If the variance of ``z_i`` is numerically zero.
    """
    s0, s1, w = _unpack(cov, W)
    a = _filter_row(s0.shape[0], i, np.array(w[i]), lambda0)
    den = float(a @ s0 @ a)
    if abs(den) <= DENOM_TOL * max(1.0, abs(s0[i, i])):
        raise DegenerateVariance(f"zero variance of the filtered series at location {i}")
    return float(a @ s1 @ a) / den


def residual_vector(cov: LagCovariancePair, W, i: int, lambda0: float, lambda1: float) -> np.ndarray:
    """``(e_i - lambda0 w_i)^T (sigma1 - lambda1 sigma0)`` as a length-``p`` vector."""
    s0, s1, w = _unpack(cov, W)
    a = _filter_row(s0.shape[0], i, np.array(w[i]), lambda0)
    return a @ s1 - lambda1 * (a @ s0)


def _pick(res: Sequence[float], roots: Sequence[float]) -> int:
    if len(roots) == 1:
        return 0
    r0, r1 = res
    if abs(r0 - r1) <= TIE_RTOL * max(abs(r0), abs(r1)):
        return 0 if abs(roots[0]) <= abs(roots[1]) else 1
    return 0 if r0 < r1 else 1


@dataclass(frozen=True)
class RootDiagnostics:
    roots: tuple[float, ...]
    lambda1_candidates: tuple[float, ...]
    residual_norms: tuple[float, ...]
    selected: int


def select_root(cov: LagCovariancePair, W, i: int, roots: Sequence[float]) -> tuple[float, float, RootDiagnostics]:
    """Choose the candidate ``lambda0`` with the smallest squared residual.

    Ties (relative 1e-12) go to the root of smaller absolute value.
    """
    if len(roots) == 0:
        raise NoRealRoot("empty root set")
    lam1 = [lambda1_given_lambda0(cov, W, i, r) for r in roots]
    res = [float(np.sum(residual_vector(cov, W, i, r, l1) ** 2)) for r, l1 in zip(roots, lam1)]
    j = _pick(res, roots)
    diag = RootDiagnostics(tuple(float(r) for r in roots), tuple(lam1), tuple(res), j)
    return float(roots[j]), lam1[j], diag


@dataclass
class EstimationResult:
    """Per-location estimates and root diagnostics.

    ``roots``, ``lambda1_candidates`` and ``residual_norms`` are ``p x 2``
    with NaN where a candidate does not exist; ``selected`` is the index
    of the chosen column (-1 if none). ``flags`` holds one of the
    :class:`Flag` values per location.
    """

    lambda0_hat: np.ndarray
    lambda1_hat: np.ndarray
    roots: np.ndarray
    lambda1_candidates: np.ndarray
    residual_norms: np.ndarray
    discriminant: np.ndarray
    selected: np.ndarray
    flags: list[str]
    coefficients: np.ndarray = field(repr=False)

    @property
    def p(self) -> int:
        return self.lambda0_hat.size

    @property
    def degenerate(self) -> np.ndarray:
        return np.array([f != Flag.OK for f in self.flags])

    @property
    def n_degenerate(self) -> int:
        return int(self.degenerate.sum())

    def residual_optimal(self) -> bool:
        """Selected residual <= rejected residual at every ok two-root location."""
        for i in np.flatnonzero(~self.degenerate):
            j = self.selected[i]
            other = self.residual_norms[i, 1 - j]
            if np.isfinite(other) and self.residual_norms[i, j] > other:
                return False
        return True

    def to_dict(self) -> dict:
        def clean(a):
            return [None if not np.isfinite(x) else float(x) for x in np.ravel(a)]

        return {
            "p": self.p,
            "lambda0_hat": clean(self.lambda0_hat),
            "lambda1_hat": clean(self.lambda1_hat),
            "locations": [
                {
                    "i": i + 1,
                    "roots": clean(self.roots[i]),
                    "lambda1_candidates": clean(self.lambda1_candidates[i]),
                    "residual_norms": clean(self.residual_norms[i]),
                    "discriminant": float(self.discriminant[i]),
                    "selected": int(self.selected[i]),
                    "flag": self.flags[i],
                }
                for i in range(self.p)
            ],
        }

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["i", "lambda0_hat", "lambda1_hat", "root1", "root2", "res1", "res2", "flag"])
            for i in range(self.p):
                out.writerow([
                    i + 1,
                    repr(float(self.lambda0_hat[i])),
                    repr(float(self.lambda1_hat[i])),
                    repr(float(self.roots[i, 0])),
                    repr(float(self.roots[i, 1])),
                    repr(float(self.residual_norms[i, 0])),
                    repr(float(self.residual_norms[i, 1])),
                    self.flags[i],
                ])


def estimate_from_covariances(cov: LagCovariancePair, W: SpatialWeightMatrix | np.ndarray) -> EstimationResult:
    """Run the per-location procedure on given lag covariances.

    Locations whose quadratic has no real root, is identically zero, or
    whose filtered variance vanishes are flagged instead of failing the
    whole estimate. For them ``lambda0`` falls back to the vertex of the
    quadratic (or 0 when unidentified) and ``lambda1`` is still evaluated
    there when possible.
    """
    s0, s1, w = _unpack(cov, W)
    p = s0.shape[0]
    m = moment_arrays(cov, w)
    t0, t1, t2 = _coef_arrays(m)
    scale = np.max(np.abs(np.stack(list(m.values()))), axis=0)
    disc = t1 * t1 - 4.0 * t2 * t0

    roots = np.full((p, 2), np.nan)
    flags = [Flag.OK] * p
    for i in range(p):
        if max(abs(t0[i]), abs(t1[i]), abs(t2[i])) < UNIDENTIFIED_TOL * scale[i] ** 2:
            flags[i] = Flag.UNIDENTIFIED
            roots[i, 0] = 0.0
            continue
        r = _roots(t0[i], t1[i], t2[i])
        if not r:
            flags[i] = Flag.NO_REAL_ROOT
            roots[i, 0] = -t1[i] / (2.0 * t2[i]) if t2[i] != 0.0 else 0.0
            continue
        roots[i, : len(r)] = r

    # lambda1 and residuals for both candidate columns, all locations at once
    lam1c = np.full((p, 2), np.nan)
    resn = np.full((p, 2), np.nan)
    den_tol = DENOM_TOL * np.maximum(1.0, np.abs(m["a0"]))
    for j in range(2):
        lam = roots[:, j]
        have = np.isfinite(lam)
        l = np.where(have, lam, 0.0)
        F = -l[:, None] * w
        F[np.arange(p), np.arange(p)] += 1.0
        Fs0 = F @ s0
        Fs1 = F @ s1
        den = np.sum(Fs0 * F, axis=1)
        num = np.sum(Fs1 * F, axis=1)
        ok = have & (np.abs(den) > den_tol)
        with np.errstate(divide="ignore", invalid="ignore"):
            l1 = np.where(ok, num / np.where(ok, den, 1.0), np.nan)
        V = Fs1 - l1[:, None] * Fs0
        lam1c[:, j] = l1
        resn[:, j] = np.where(ok, np.sum(V * V, axis=1), np.nan)

    lam0_hat = np.full(p, np.nan)
    lam1_hat = np.full(p, np.nan)
    selected = np.full(p, -1, dtype=int)
    for i in range(p):
        valid = [j for j in range(2) if np.isfinite(resn[i, j])]
        if not valid:
            if np.isfinite(roots[i, 0]):
                lam0_hat[i] = roots[i, 0]
                if flags[i] == Flag.OK:
                    flags[i] = Flag.DEGENERATE_VARIANCE
            continue
        if len(valid) == 1:
            j = valid[0]
            if flags[i] == Flag.OK and np.isfinite(roots[i, 1 - j]):
                flags[i] = Flag.DEGENERATE_VARIANCE
        else:
            j = _pick(resn[i], roots[i])
        selected[i] = j
        lam0_hat[i] = roots[i, j]
        lam1_hat[i] = lam1c[i, j]

    return EstimationResult(
        lambda0_hat=lam0_hat,
        lambda1_hat=lam1_hat,
        roots=roots,
        lambda1_candidates=lam1c,
        residual_norms=resn,
        discriminant=disc,
        selected=selected,
        flags=flags,
        coefficients=np.stack([t0, t1, t2], axis=1),
    )


def estimate(Y: PanelSeries | np.ndarray, W: SpatialWeightMatrix | np.ndarray) -> EstimationResult:
    """Estimate ``(lambda0, lambda1)`` from a panel and a known weight matrix."""
    cov = sample_covariances(Y)
    return estimate_from_covariances(cov, W)


def stationary_points(cov: LagCovariancePair, W, i: int) -> tuple[float, ...]:
    """Extrema of the slope profile ``rho_i``: roots of the quadratic with ``a2 = 0``."""
    m = location_moments(cov, W, i)
    return _roots(m.b1 * m.a0 - m.b0 * m.a1,
                  2.0 * (m.a0 * m.c1 - m.c0 * m.a1),
                  m.c1 * m.b0 - m.c0 * m.b1)


@dataclass
class Profile:
    grid: np.ndarray
    lambda1: np.ndarray
    stationary: list[tuple[float, float]]
    selected: tuple[float, float]

    def rows(self):
        for x, y in zip(self.grid, self.lambda1):
            yield "grid", float(x), float(y)
        for x, y in self.stationary:
            yield "stationary", x, y
        yield "selected", self.selected[0], self.selected[1]


def correlation_profile(cov: LagCovariancePair, W, i: int, grid: Sequence[float]) -> Profile:
    """``rho_i(lambda0)`` over ``grid`` plus the stationary points and the estimate.

    Grid points where the filtered variance vanishes are NaN.
    """
    grid = np.asarray(grid, dtype=float)
    if not np.all(np.isfinite(grid)):
        raise DataError("grid must be finite")
    vals = np.empty_like(grid)
    for k, x in enumerate(grid):
        try:
            vals[k] = lambda1_given_lambda0(cov, W, i, x)
        except DegenerateVariance:
            vals[k] = np.nan
    stat = []
    for x in stationary_points(cov, W, i):
        try:
            stat.append((float(x), lambda1_given_lambda0(cov, W, i, x)))
        except DegenerateVariance:
            stat.append((float(x), float("nan")))
    res = estimate_from_covariances(cov, W)
    return Profile(grid, vals, stat, (float(res.lambda0_hat[i]), float(res.lambda1_hat[i])))
