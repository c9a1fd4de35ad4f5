"""Basic data types: design matrices, index sets, the normalized norm,
CSV ingestion and seeded Gaussian noise.

Conventions used throughout the package:

* vectors and matrices are plain ``numpy`` float64 arrays,
* the inner product on observation space is ``v.T @ w / n`` and the
  matching norm is :func:`normalized_norm`,
* index sets are 1-based in every user-facing interface (CLI flags, JSON
  files, :class:`IndexSet`); 0-based positions exist only internally.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DesignMatrix",
    "IndexSet",
    "NoiseModel",
    "CsvParseError",
    "DimensionError",
    "normalized_norm",
    "restrict",
    "support",
    "load_matrix",
    "load_vector",
    "draw_noise",
]


class DimensionError(ValueError):
    """Raised when a vector or matrix has an incompatible shape."""


class CsvParseError(ValueError):
    """Raised on malformed CSV input; carries the 1-based row/column."""

    def __init__(self, message, row=None, col=None):
        self.row = row
        self.col = col
        loc = ""
        if row is not None:
            loc = f" (row {row}" + (f", column {col})" if col is not None else ")")
        super().__init__(message + loc)


def normalized_norm(v) -> float:
    """The normalized Euclidean norm sqrt(v'v / n) of an n-vector."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError("normalized_norm expects a nonempty 1-d vector")
    # np.dot accumulates pairwise through BLAS, which keeps the sum stable
    return float(np.sqrt(np.dot(v, v) / v.size))


@dataclass(frozen=True)
class IndexSet:
    """A sorted, duplicate-free subset of {1..p} (1-based indices)."""

    indices: tuple
    p: int

    def __post_init__(self):
        idx = tuple(sorted(set(int(j) for j in self.indices)))
        if len(idx) != len(self.indices):
            idx = tuple(sorted(set(int(j) for j in self.indices)))
        object.__setattr__(self, "indices", idx)
        if self.p < 0:
            raise ValueError("p must be nonnegative")
        for j in idx:
            if not 1 <= j <= self.p:
                raise IndexError(f"index {j} out of range [1, {self.p}]")

    def __len__(self):
        return len(self.indices)

    def __contains__(self, j):
        return j in set(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def mask(self) -> np.ndarray:
        """Boolean membership mask of length p."""
        m = np.zeros(self.p, dtype=bool)
        if self.indices:
            m[np.array(self.indices) - 1] = True
        return m

    def positions(self) -> np.ndarray:
        """0-based positions of the members, sorted."""
        return np.array(self.indices, dtype=int) - 1

    def complement(self) -> "IndexSet":
        here = set(self.indices)
        return IndexSet(tuple(j for j in range(1, self.p + 1) if j not in here), self.p)

    def union(self, other: "IndexSet") -> "IndexSet":
        if other.p != self.p:
            raise DimensionError("index sets live on different dimensions")
        return IndexSet(tuple(set(self.indices) | set(other.indices)), self.p)

    def issuperset(self, other: "IndexSet") -> bool:
        return set(self.indices) >= set(other.indices)


def restrict(beta, S: IndexSet) -> np.ndarray:
    """Zero out every entry of beta outside S, keeping the length."""
    beta = np.asarray(beta, dtype=float)
    if beta.ndim != 1 or beta.size != S.p:
        raise DimensionError(f"expected a vector of length {S.p}, got shape {beta.shape}")
    out = np.zeros_like(beta)
    m = S.mask()
    out[m] = beta[m]
    return out


def support(beta, p=None) -> IndexSet:
    """Exact nonzero pattern of beta as a 1-based IndexSet.

    Comparison is exact; pass vectors produced by solvers that emit true
    zeros (soft thresholding does).  Use an explicit threshold upstream
    for approximate supports.
    """
    beta = np.asarray(beta, dtype=float)
    p = beta.size if p is None else p
    nz = tuple(int(j) + 1 for j in np.flatnonzero(beta != 0.0))
    return IndexSet(nz, p)


@dataclass(frozen=True)
class DesignMatrix:
    """An n-by-p design with the normalized inner product v'w/n."""

    X: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DimensionError("design matrix must be 2-d with n >= 1, p >= 1")
        if not np.all(np.isfinite(X)):
            raise ValueError("design matrix contains non-finite entries")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    def column(self, j: int) -> np.ndarray:
        """Column by 1-based index."""
        if not 1 <= j <= self.p:
            raise IndexError(f"column {j} out of range [1, {self.p}]")
        return self.X[:, j - 1]


def load_matrix(path) -> DesignMatrix:
    """Read a headerless comma-separated matrix, one row per observation."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        width = None
        for i, row in enumerate(reader, start=1):
            if not row:
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise CsvParseError(
                    f"ragged row: expected {width} columns, found {len(row)}", row=i
                )
            parsed = []
            for k, cell in enumerate(row, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise CsvParseError(f"non-numeric cell {cell!r}", row=i, col=k) from None
            rows.append(parsed)
    if not rows:
        raise CsvParseError("empty file")
    return DesignMatrix(np.array(rows, dtype=float))


def load_vector(path) -> np.ndarray:
    """Read a vector stored as a one-column (or one-row) CSV."""
    M = load_matrix(path).X
    if 1 not in M.shape:
        raise CsvParseError(f"expected a vector, got shape {M.shape}")
    return M.reshape(-1)


@dataclass(frozen=True)
class NoiseModel:
    """Seeded Gaussian noise: identical seeds give bitwise-identical draws."""

    sigma: float
    seed: int = 0
    distribution: str = "gaussian"

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.distribution != "gaussian":
            raise ValueError(f"unsupported noise distribution {self.distribution!r}")

    def draw(self, n: int) -> np.ndarray:
        if n < 1:
            raise DimensionError("n must be >= 1")
        rng = np.random.default_rng(self.seed)
        return self.sigma * rng.standard_normal(n)


def draw_noise(model: NoiseModel, n: int) -> np.ndarray:
    return model.draw(n)
