"""Coefficients, error processes and trajectories of the stationary SDPD model.

The model is

    (I - D(lambda0) W) y_t = D(lambda1) (I - D(lambda0) W) y_{t-1} + eps_t

and is simulated through its reduced form ``y_t = A* y_{t-1} + S^{-1} eps_t``
with ``S = I - D(lambda0) W`` and ``A* = S^{-1} D(lambda1) S``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import BadSpec, DataError, DegenerateModel, Explosion
from .spatial_weights import SpatialWeightMatrix, is_full_rank

__all__ = [
    "CrossMode",
    "ErrorSpec",
    "SdpdModel",
    "PanelSeries",
    "spatial_filter",
    "gen_coefficients",
    "gen_sigma",
    "gen_errors",
    "population_error_cov",
    "simulate",
    "random_model",
]

EXPLOSION_BOUND = 1e12
MAX_REDRAWS = 100


class CrossMode(str, enum.Enum):
    INDEPENDENT = "independent"
    COMMON_FACTOR = "common_factor"


@dataclass(frozen=True)
class ErrorSpec:
    """Gaussian innovation law.

    In ``common_factor`` mode every location with (1-based) index above
    ``factor_index`` receives ``factor_loading`` times the base noise of
    location ``factor_index``: with the defaults,
    ``eps_i = e_i - 0.7 e_2`` for ``i = 3, ..., p``.
    """

    sigma: np.ndarray
    cross_mode: CrossMode = CrossMode.INDEPENDENT
    factor_loading: float = -0.7
    factor_index: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        sigma = np.array(self.sigma, dtype=float, ndmin=1, copy=True)
        if sigma.ndim != 1 or np.any(~np.isfinite(sigma)) or np.any(sigma <= 0):
            raise BadSpec("sigma must be a vector of positive finite reals")
        mode = CrossMode(self.cross_mode)
        if not np.isfinite(self.factor_loading):
            raise BadSpec("factor_loading must be finite")
        if mode is CrossMode.COMMON_FACTOR:
            if sigma.size < 3:
                raise BadSpec("common_factor errors need p >= 3")
            if not 1 <= self.factor_index <= sigma.size:
                raise BadSpec(f"factor_index {self.factor_index} out of range")
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "cross_mode", mode)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def p(self) -> int:
        return self.sigma.size

    def mixing_matrix(self) -> np.ndarray:
        """``L`` such that ``eps_t = L e_t`` with independent base noise ``e_t``."""
        L = np.eye(self.p)
        if self.cross_mode is CrossMode.COMMON_FACTOR:
            f = self.factor_index - 1
            L[f + 1 :, f] = self.factor_loading
        return L


def spatial_filter(W: SpatialWeightMatrix | np.ndarray, lambda0: np.ndarray) -> np.ndarray:
    """``I - D(lambda0) W``."""
    w = W.entries if isinstance(W, SpatialWeightMatrix) else np.asarray(W, dtype=float)
    lam = np.asarray(lambda0, dtype=float)
    return np.eye(w.shape[0]) - lam[:, None] * w


def _is_constant(v: np.ndarray) -> bool:
    return bool(np.ptp(v) <= np.finfo(float).eps * max(1.0, float(np.max(np.abs(v)))))


@dataclass(frozen=True)
class SdpdModel:
    """Stationary SDPD model ``(W, lambda0, lambda1, error_spec)``.

    Construction checks ``|lambda1_i| < 1``, that ``lambda1`` is not
    constant, and that ``I - D(lambda0) W`` has full rank.
    """

    W: SpatialWeightMatrix
    lambda0: np.ndarray
    lambda1: np.ndarray
    error_spec: ErrorSpec
    p: int = field(init=False)

    def __post_init__(self) -> None:
        p = self.W.p
        lam0 = np.array(self.lambda0, dtype=float, ndmin=1, copy=True)
        lam1 = np.array(self.lambda1, dtype=float, ndmin=1, copy=True)
        if lam0.shape != (p,) or lam1.shape != (p,):
            raise DataError(f"lambda vectors must have length p={p}")
        if self.error_spec.p != p:
            raise DataError(f"error spec has p={self.error_spec.p}, model has p={p}")
        if not (np.all(np.isfinite(lam0)) and np.all(np.isfinite(lam1))):
            raise DataError("lambda vectors must be finite")
        if np.any(np.abs(lam1) >= 1.0):
            raise DegenerateModel("all |lambda1_i| must be < 1")
        if _is_constant(lam1):
            raise DegenerateModel("lambda1 must not be a constant vector")
        if not is_full_rank(spatial_filter(self.W, lam0)):
            raise DegenerateModel("I - D(lambda0) W is rank deficient")
        lam0.setflags(write=False)
        lam1.setflags(write=False)
        object.__setattr__(self, "lambda0", lam0)
        object.__setattr__(self, "lambda1", lam1)
        object.__setattr__(self, "p", p)

    @property
    def filter_matrix(self) -> np.ndarray:
        return spatial_filter(self.W, self.lambda0)

    @property
    def transition(self) -> np.ndarray:
        """Reduced-form matrix ``A* = S^{-1} D(lambda1) S``."""
        S = self.filter_matrix
        return np.linalg.solve(S, self.lambda1[:, None] * S)


@dataclass(frozen=True)
class PanelSeries:
    """``T x p`` panel; row ``t`` is ``y_t``, column ``i`` is location ``i``."""

    values: np.ndarray

    def __post_init__(self) -> None:
        y = np.array(self.values, dtype=float, ndmin=2, copy=True)
        if y.ndim != 2:
            raise DataError("panel must be a 2-D array")
        if not np.all(np.isfinite(y)):
            raise DataError("panel has non-finite entries")
        y.setflags(write=False)
        object.__setattr__(self, "values", y)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def gen_coefficients(
    p: int,
    seed: int | np.random.SeedSequence,
    low: float = -0.7,
    high: float = 0.7,
    W: SpatialWeightMatrix | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``lambda0, lambda1`` i.i.d. uniform on ``[low, high]``.

    ``lambda1`` is redrawn while constant; ``lambda0`` is redrawn while
    ``I - D(lambda0) W`` is rank deficient (only when ``W`` is given).
    """
    if not low < high:
        raise DataError("need low < high")
    if max(abs(low), abs(high)) > 1:
        raise DataError("coefficient bounds must lie in [-1, 1]")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_REDRAWS):
        lam1 = rng.uniform(low, high, size=p)
        if not _is_constant(lam1) and np.all(np.abs(lam1) < 1.0):
            break
    else:
        raise DegenerateModel("could not draw a non-constant lambda1")
    for _ in range(MAX_REDRAWS):
        lam0 = rng.uniform(low, high, size=p)
        if W is None or is_full_rank(spatial_filter(W, lam0)):
            break
    else:
        raise DegenerateModel("could not draw lambda0 with I - D(lambda0) W of full rank")
    return lam0, lam1


def gen_sigma(p: int, seed: int | np.random.SeedSequence, low: float = 0.5, high: float = 1.5) -> np.ndarray:
    """Per-location innovation standard deviations, uniform on ``[low, high]``."""
    return np.random.default_rng(seed).uniform(low, high, size=p)


def gen_errors(spec: ErrorSpec, T: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """``T x p`` matrix of serially independent Gaussian innovations."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    e = rng.standard_normal((T, spec.p)) * spec.sigma
    if spec.cross_mode is CrossMode.COMMON_FACTOR:
        f = spec.factor_index - 1
        e[:, f + 1 :] += spec.factor_loading * e[:, [f]]
    return e


def population_error_cov(spec: ErrorSpec) -> np.ndarray:
    """Exact ``Var(eps_t)`` implied by ``spec``."""
    L = spec.mixing_matrix()
    return (L * spec.sigma**2) @ L.T


def simulate(model: SdpdModel, T: int, burn_in: int = 200, rng: np.random.Generator | None = None) -> PanelSeries:
    """Iterate the reduced form from ``y_0 = 0`` and keep the last ``T`` steps.

    Innovations come from ``model.error_spec`` (its seed, unless ``rng``
    is passed).

    Raises
    ------
    Explosion
        If any entry exceeds 1e12 in absolute value.
    """
    if T < 1 or burn_in < 0:
        raise DataError("need T >= 1 and burn_in >= 0")
    n = T + burn_in
    S = model.filter_matrix
    eps_star = np.linalg.solve(S, gen_errors(model.error_spec, n, rng).T).T
    At = model.transition.T
    y = np.empty((n, model.p))
    prev = np.zeros(model.p)
    for t in range(n):
        prev = prev @ At + eps_star[t]
        y[t] = prev
    if not np.all(np.abs(y) < EXPLOSION_BOUND):
        raise Explosion("trajectory exceeded 1e12; the configuration is not stationary")
    return PanelSeries(y[burn_in:])


def random_model(
    W: SpatialWeightMatrix,
    seed: int | np.random.SeedSequence,
    cross_mode: CrossMode | str = CrossMode.COMMON_FACTOR,
    coef_bounds: tuple[float, float] = (-0.7, 0.7),
    sigma_bounds: tuple[float, float] = (0.5, 1.5),
) -> SdpdModel:
    """Draw a model on ``W`` with the simulation-study settings.

    ``seed`` is split into independent streams for the coefficients,
    the standard deviations and the innovations.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    s_coef, s_sigma, s_err = ss.spawn(3)
    lam0, lam1 = gen_coefficients(W.p, s_coef, *coef_bounds, W=W)
    sigma = gen_sigma(W.p, s_sigma, *sigma_bounds)
    err_seed = int(s_err.generate_state(1, np.uint64)[0])
    spec = ErrorSpec(sigma=sigma, cross_mode=CrossMode(cross_mode), seed=err_seed)
    return SdpdModel(W, lam0, lam1, spec)
