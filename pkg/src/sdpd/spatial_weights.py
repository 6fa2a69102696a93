"""Spatial weight matrices: construction, validation and row normalization.

A weight matrix ``W`` is a ``p x p`` real matrix with zero main diagonal
and no zero rows. Row ``i`` (``w_i``) holds the weights linking location
``i`` to the others. Three random families are provided for simulation:

* ``W1`` -- full and symmetric (before normalization), built as ``M M^T``
  from a standard normal ``M``; entries may be negative.
* ``W2`` -- sparse 0/1 with exactly four nonzeros per row.
* ``W3`` -- sparse 0/1 with ``ceil(2 sqrt(p))`` nonzeros per row.

Rows are rescaled to unit L2 norm by default.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, DegenerateMatrix, ZeroRow

__all__ = [
    "Normalization",
    "SpatialWeightMatrix",
    "gen_spatial_matrix",
    "renormalize",
    "is_full_rank",
    "read_weights_csv",
    "write_weights_csv",
]

NORM_TOL = 1e-12
ZERO_ROW_TOL = 1e-14
MAX_RETRIES = 100


class Normalization(str, enum.Enum):
    NONE = "none"
    L1 = "l1"
    L2 = "l2"

    @classmethod
    def parse(cls, value: str | Normalization) -> Normalization:
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-row", "").replace("_row", "")
        try:
            return cls(key)
        except ValueError:
            raise DataError(f"unknown normalization {value!r}") from None


def _row_norms(entries: np.ndarray, mode: Normalization) -> np.ndarray:
    if mode is Normalization.L1:
        return np.abs(entries).sum(axis=1)
    return np.sqrt((entries * entries).sum(axis=1))


def is_full_rank(a: np.ndarray) -> bool:
    """Singular-value rank test with threshold ``p * eps * s_max``."""
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return False
    tol = max(a.shape) * np.finfo(float).eps * s[0]
    return bool(np.all(s > tol))


@dataclass(frozen=True)
class SpatialWeightMatrix:
    """Immutable ``p x p`` weight matrix with zero diagonal.

    The constructor validates the zero diagonal, the absence of zero rows
    and, when ``normalization`` is L1 or L2, that every row has unit norm.
    The stored array is read-only.
    """

    entries: np.ndarray
    normalization: Normalization = Normalization.NONE
    p: int = field(init=False)

    def __post_init__(self) -> None:
        mode = Normalization.parse(self.normalization)
        w = np.array(self.entries, dtype=float, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DataError(f"weight matrix must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise DataError("weight matrix has non-finite entries")
        if np.any(np.diag(w) != 0.0):
            raise DataError("weight matrix must have an exactly zero main diagonal")
        if np.any(_row_norms(w, Normalization.L2) < ZERO_ROW_TOL):
            raise ZeroRow("weight matrix has a zero row")
        if mode is not Normalization.NONE:
            dev = np.max(np.abs(_row_norms(w, mode) - 1.0))
            if dev > NORM_TOL:
                raise DataError(
                    f"rows are not {mode.value}-normalized (max deviation {dev:.3g})"
                )
        w.setflags(write=False)
        object.__setattr__(self, "entries", w)
        object.__setattr__(self, "normalization", mode)
        object.__setattr__(self, "p", w.shape[0])

    def row(self, i: int) -> np.ndarray:
        """Row ``w_i`` (0-based index)."""
        return self.entries[i]

    @property
    def nonzeros_per_row(self) -> np.ndarray:
        return np.count_nonzero(self.entries, axis=1)

    @property
    def rank(self) -> int:
        s = np.linalg.svd(self.entries, compute_uv=False)
        tol = self.p * np.finfo(float).eps * s[0]
        return int(np.sum(s > tol))

    def is_full_rank(self) -> bool:
        return is_full_rank(self.entries)


def _normalize_rows(w: np.ndarray, mode: Normalization) -> tuple[np.ndarray, np.ndarray]:
    norms = _row_norms(w, mode)
    if np.any(norms < ZERO_ROW_TOL):
        bad = np.flatnonzero(norms < ZERO_ROW_TOL)
        raise ZeroRow(f"rows {bad.tolist()} have (near) zero norm")
    return w / norms[:, None], norms


def _draw(kind: str, p: int, rng: np.random.Generator) -> np.ndarray:
    if kind == "W1":
        m = rng.standard_normal((p, p))
        w = m @ m.T
    else:
        k = 4 if kind == "W2" else math.ceil(2.0 * math.sqrt(p))
        w = np.zeros((p, p))
        for i in range(p):
            others = np.delete(np.arange(p), i)
            w[i, rng.choice(others, size=k, replace=False)] = 1.0
    np.fill_diagonal(w, 0.0)
    return w


def gen_spatial_matrix(
    kind: str,
    p: int,
    seed: int,
    normalization: Normalization | str = Normalization.L2,
    max_retries: int = MAX_RETRIES,
) -> SpatialWeightMatrix:
    """Draw a random weight matrix from one of the ``W1``/``W2``/``W3`` families.

    The diagonal is zeroed before rows are normalized. Draws that are not
    of full rank are rejected and redrawn from a seed perturbed by the
    attempt number.

    Raises
    ------
    DegenerateMatrix
        If no full-rank draw is found within ``max_retries`` attempts.
    """
    kind = kind.upper()
    mode = Normalization.parse(normalization)
    if kind not in ("W1", "W2", "W3"):
        raise DataError(f"unknown weight-matrix kind {kind!r}")
    if p < 5:
        raise DataError(f"p must be >= 5, got {p}")
    if kind == "W3" and p <= math.ceil(2.0 * math.sqrt(p)):
        raise DataError(f"W3 needs p > ceil(2 sqrt(p)), got p={p}")

    for attempt in range(max_retries):
        rng = np.random.default_rng(np.random.SeedSequence([seed, attempt]))
        w = _draw(kind, p, rng)
        if mode is not Normalization.NONE:
            w, _ = _normalize_rows(w, mode)
        if is_full_rank(w):
            return SpatialWeightMatrix(w, mode)
    raise DegenerateMatrix(
        f"no full-rank {kind} matrix of order {p} after {max_retries} attempts"
    )


def renormalize(
    W: SpatialWeightMatrix, target: Normalization | str
) -> tuple[SpatialWeightMatrix, np.ndarray]:
    """Rescale every row of ``W`` to unit norm.

    Returns the new matrix and the factors ``delta`` with
    ``new_row_i = old_row_i / delta_i``. The model is preserved when the
    spatial coefficients are multiplied by ``delta``.
    """
    mode = Normalization.parse(target)
    if mode is Normalization.NONE:
        raise DataError("renormalize needs an L1 or L2 target")
    w, delta = _normalize_rows(W.entries, mode)
    return SpatialWeightMatrix(w, mode), delta


def read_weights_csv(path: str | Path, normalization: Normalization | str | None = None) -> SpatialWeightMatrix:
    """Read a headerless ``p x p`` CSV.

    The diagonal must be zero within 1e-12; it is then set exactly to zero.
    When ``normalization`` is omitted it is inferred from the row norms.
    """
    try:
        w = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read weight matrix {path}: {exc}") from exc
    if w.shape[0] != w.shape[1]:
        raise DataError(f"weight matrix in {path} is not square: {w.shape}")
    diag = np.abs(np.diag(w))
    if np.any(diag > NORM_TOL):
        raise DataError(
            f"weight matrix in {path} has nonzero diagonal (max |w_ii| = {diag.max():.3g})"
        )
    np.fill_diagonal(w, 0.0)
    if normalization is None:
        normalization = Normalization.NONE
        for mode in (Normalization.L2, Normalization.L1):
            if np.all(np.abs(_row_norms(w, mode) - 1.0) <= NORM_TOL):
                normalization = mode
                break
    return SpatialWeightMatrix(w, normalization)


def write_weights_csv(W: SpatialWeightMatrix, path: str | Path) -> None:
    np.savetxt(path, W.entries, delimiter=",", fmt="%.17g")
