"""Lag-0 / lag-1 covariance matrices: sample estimates and the exact
stationary values from the discrete Lyapunov equation."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, NearSingular, TooShort
from .process_sim import PanelSeries, SdpdModel, population_error_cov

__all__ = [
    "CovSource",
    "LagCovariancePair",
    "sample_covariances",
    "population_covariances",
    "solve_discrete_lyapunov",
    "KRON_MAX_P",
]

KRON_MAX_P = 60
COND_LIMIT = 1e12


class CovSource(str, enum.Enum):
    SAMPLE = "sample"
    POPULATION = "population"


@dataclass(frozen=True)
class LagCovariancePair:
    """``sigma0 = E[y_t y_t^T]`` and ``sigma1 = E[y_t y_{t-1}^T]``."""

    sigma0: np.ndarray
    sigma1: np.ndarray
    source: CovSource = CovSource.SAMPLE

    def __post_init__(self) -> None:
        s0 = np.array(self.sigma0, dtype=float, ndmin=2, copy=True)
        s1 = np.array(self.sigma1, dtype=float, ndmin=2, copy=True)
        if s0.shape != s1.shape or s0.shape[0] != s0.shape[1]:
            raise DataError("sigma0 and sigma1 must be square and of equal shape")
        if np.max(np.abs(s0 - s0.T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(s0), initial=0.0)):
            raise DataError("sigma0 must be symmetric")
        s0.setflags(write=False)
        s1.setflags(write=False)
        object.__setattr__(self, "sigma0", s0)
        object.__setattr__(self, "sigma1", s1)
        object.__setattr__(self, "source", CovSource(self.source))

    @property
    def p(self) -> int:
        return self.sigma0.shape[0]

    def to_csv(self, path: str | Path) -> None:
        """Debug dump: ``sigma0`` block, a blank line, then ``sigma1``."""
        with open(path, "w") as fh:
            fh.write(f"# sigma0 ({self.source.value})\n")
            np.savetxt(fh, self.sigma0, delimiter=",", fmt="%.17g")
            fh.write("# sigma1\n")
            np.savetxt(fh, self.sigma1, delimiter=",", fmt="%.17g")


def sample_covariances(Y: PanelSeries | np.ndarray, center: bool = False) -> LagCovariancePair:
    """Moment estimates with divisors ``T - 1`` and ``T - 2``.

    ``sigma0 = sum_{t=1..T} y_t y_t^T / (T - 1)`` and
    ``sigma1 = sum_{t=2..T} y_t y_{t-1}^T / (T - 2)``. The data are taken
    as mean zero unless ``center`` is set.
    """
    y = Y.values if isinstance(Y, PanelSeries) else np.asarray(Y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    T = y.shape[0]
    if T < 3:
        raise TooShort(f"need T >= 3 observations, got {T}")
    if center:
        y = y - y.mean(axis=0)
    s0 = y.T @ y / (T - 1)
    s0 = 0.5 * (s0 + s0.T)
    s1 = y[1:].T @ y[:-1] / (T - 2)
    return LagCovariancePair(s0, s1, CovSource.SAMPLE)


def solve_discrete_lyapunov(A: np.ndarray, Q: np.ndarray, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Solve ``X = A X A^T + Q``.

    For ``p <= 60`` the vectorized system ``(I - A kron A) vec X = vec Q``
    is solved directly. Larger problems use the doubling form of the
    fixed-point iteration ``X <- A X A^T + Q``, which needs spectral
    radius below one.

    Raises
    ------
    NearSingular
        If the vectorized system's condition number exceeds 1e12, or the
        iteration fails to converge.
    """
    A = np.asarray(A, dtype=float)
    Q = np.asarray(Q, dtype=float)
    p = A.shape[0]
    if p <= KRON_MAX_P:
        M = np.eye(p * p) - np.kron(A, A)
        if np.linalg.cond(M) > COND_LIMIT:
            raise NearSingular("Lyapunov system is ill-conditioned (unit-root transition?)")
        x = np.linalg.solve(M, Q.reshape(-1))
        X = x.reshape(p, p)
    else:
        X = Q.copy()
        Ak = A.copy()
        scale = max(1.0, float(np.max(np.abs(Q))))
        for _ in range(max_iter):
            step = Ak @ X @ Ak.T
            X = X + step
            Ak = Ak @ Ak
            if np.max(np.abs(step)) <= tol * scale:
                break
        else:
            raise NearSingular("Lyapunov iteration did not converge")
    return 0.5 * (X + X.T)


def population_covariances(model: SdpdModel) -> LagCovariancePair:
    """Exact stationary ``(sigma0, sigma1)`` of ``model``.

    ``sigma0`` solves ``sigma0 = A* sigma0 A*^T + S^{-1} V S^{-T}`` with
    ``V = Var(eps_t)``; ``sigma1 = A* sigma0``.
    """
    S = model.filter_matrix
    A = model.transition
    Sinv = np.linalg.inv(S)
    Q = Sinv @ population_error_cov(model.error_spec) @ Sinv.T
    s0 = solve_discrete_lyapunov(A, 0.5 * (Q + Q.T))
    return LagCovariancePair(s0, A @ s0, CovSource.POPULATION)
