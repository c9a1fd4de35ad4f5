"""Cone-structured sparsity norms.

For a convex cone A inside the nonnegative orthant that contains a
strictly positive vector, the penalty

    omega(b; A) = min_{a in A} (1/2) sum_j (b_j^2 / a_j + a_j)

(with the convention 0/0 = 0) is a norm.  The full orthant recovers the
l1 norm, a group-constant cone recovers the group norm, and the
monotone cone a_1 >= ... >= a_p >= 0 yields a penalty that prefers
trailing zeros and evaluates in closed form through a contiguous
partition found by pool-adjacent-violators.

The dual norm is max_{a in A, ||a||_1 = 1} sqrt(sum_j a_j w_j^2); since
the objective is linear in a, the maximum sits at an extreme point of
the l1 section, which every cone here can enumerate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .core import DimensionError, IndexSet

__all__ = [
    "Cone",
    "FullOrthantCone",
    "MonotoneCone",
    "GroupConstantCone",
    "RayCone",
    "ConeNormResult",
    "cone_norm_eval",
    "cone_dual_eval",
    "monotone_contiguous_partition",
    "residual_cone",
    "pontil_maurer_bound",
    "cone_from_json",
]

_ZERO = 1e-300  # guard for the 0/0 = 0 convention


@dataclass(frozen=True)
class ConeNormResult:
    value: float
    minimizer: np.ndarray
    partition: Optional[tuple] = None  # contiguous blocks, monotone cone only


def _penalty_objective(beta, a):
    """(1/2) sum (b^2/a + a) with 0/0 = 0; +inf when a_j = 0 but b_j != 0."""
    beta = np.asarray(beta, float)
    a = np.asarray(a, float)
    dead = a <= _ZERO
    if np.any(dead & (beta != 0.0)):
        return np.inf
    ratio = np.zeros_like(beta)
    live = ~dead
    ratio[live] = beta[live] ** 2 / a[live]
    return 0.5 * float(np.sum(ratio) + np.sum(a))


class Cone:
    """Base class; subclasses fix the cone geometry."""

    p: int

    def minimizer(self, beta) -> np.ndarray:
        """The a in the cone minimizing the penalty objective at beta."""
        raise NotImplementedError

    def evaluate(self, beta) -> ConeNormResult:
        a = self.minimizer(beta)
        return ConeNormResult(value=_penalty_objective(beta, a), minimizer=a)

    def dual(self, w) -> float:
        w = self._check(w)
        best = 0.0
        for a in self.extreme_points():
            best = max(best, float(np.sqrt(np.dot(a, w**2))))
        return best

    def extreme_points(self):
        """Extreme points of {a in cone : ||a||_1 = 1}, as an iterable."""
        raise NotImplementedError

    def extreme_point_count(self) -> int:
        raise NotImplementedError

    def is_allowed(self, S: IndexSet) -> bool:
        """Whether the coordinate projection of the cone onto S stays inside it."""
        raise NotImplementedError

    def project_complement(self, S: IndexSet) -> "Cone":
        """The projected cone on the complement coordinates of an allowed S."""
        raise NotImplementedError

    def contains_indicator(self, S: IndexSet) -> bool:
        """Whether the 0/1 indicator vector of S belongs to the cone."""
        raise NotImplementedError

    def prox_scale(self, v, t: float) -> np.ndarray:
        """argmin over the cone of sum_j (v_j^2/(a_j + t) + a_j).

        This is the cone's part of the norm's proximal map: minimizing
        the prox objective over z first leaves exactly this separable
        convex program, and the prox is then z_j = v_j a_j / (a_j + t).
        The shift by t removes the 0/0 pole, so every family solves it
        either in closed form or by a smooth bounded minimization.
        """
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def _check(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.size != self.p:
            raise DimensionError(f"expected a vector of length {self.p}")
        return v


class FullOrthantCone(Cone):
    """A = [0, inf)^p; the induced norm is exactly l1."""

    def __init__(self, p: int):
        if p < 0:
            raise ValueError("p must be nonnegative")
        self.p = p

    def minimizer(self, beta):
        return np.abs(self._check(beta))

    def dual(self, w):
        w = self._check(w)
        return float(np.max(np.abs(w))) if self.p else 0.0

    def extreme_points(self):
        return list(np.eye(self.p))

    def extreme_point_count(self):
        return self.p

    def is_allowed(self, S):
        return True

    def project_complement(self, S):
        return FullOrthantCone(S.p - len(S))

    def contains_indicator(self, S):
        return True

    def prox_scale(self, v, t):
        return np.maximum(np.abs(self._check(v)) - t, 0.0)

    def to_json(self):
        return {"cone": "full_orthant", "p": self.p}


class MonotoneCone(Cone):
    """A = {a_1 >= a_2 >= ... >= a_p >= 0}."""

    def __init__(self, p: int):
        if p < 0:
            raise ValueError("p must be nonnegative")
        self.p = p

    def minimizer(self, beta):
        beta = self._check(beta)
        blocks, _ = monotone_contiguous_partition(beta)
        a = np.zeros(self.p)
        for lo, hi in blocks:
            seg = beta[lo - 1 : hi]
            a[lo - 1 : hi] = np.sqrt(np.mean(seg**2))
        return a

    def evaluate(self, beta):
        beta = self._check(beta)
        blocks, value = monotone_contiguous_partition(beta)
        a = np.zeros(self.p)
        for lo, hi in blocks:
            seg = beta[lo - 1 : hi]
            a[lo - 1 : hi] = np.sqrt(np.mean(seg**2))
        return ConeNormResult(value=value, minimizer=a, partition=blocks)

    def dual(self, w):
        # extreme points of the l1 section are (1/k, ..., 1/k, 0, ..., 0)
        w = self._check(w)
        if self.p == 0:
            return 0.0
        cums = np.cumsum(w**2)
        k = np.arange(1, self.p + 1)
        return float(np.sqrt(np.max(cums / k)))

    def extreme_points(self):
        pts = []
        for k in range(1, self.p + 1):
            a = np.zeros(self.p)
            a[:k] = 1.0 / k
            pts.append(a)
        return pts

    def extreme_point_count(self):
        return self.p

    def is_allowed(self, S):
        # only index prefixes {1..s} project back into the cone
        return tuple(S.indices) == tuple(range(1, len(S) + 1))

    def project_complement(self, S):
        if not self.is_allowed(S):
            raise ValueError(
                f"{tuple(S.indices)} is not a prefix of 1..{self.p}; the projection "
                "of the monotone cone onto it leaves the cone"
            )
        return MonotoneCone(S.p - len(S))

    def contains_indicator(self, S):
        return self.is_allowed(S)

    def prox_scale(self, v, t):
        # The per-block optimum of sum (v_j^2/(c+t) + c) is rms(v_G) - t,
        # so the pooling order (hence the partition) matches the t = 0
        # case; afterwards negative block values clip to the boundary.
        v = self._check(v)
        blocks, _ = monotone_contiguous_partition(v)
        a = np.zeros(self.p)
        for lo, hi in blocks:
            seg = v[lo - 1 : hi]
            a[lo - 1 : hi] = max(np.sqrt(np.mean(seg**2)) - t, 0.0)
        return a

    def to_json(self):
        return {"cone": "monotone", "p": self.p}


class GroupConstantCone(Cone):
    """Nonnegative vectors constant within each group of a partition."""

    def __init__(self, groups, p: Optional[int] = None):
        groups = tuple(tuple(sorted(int(j) for j in g)) for g in groups)
        flat = [j for g in groups for j in g]
        if p is None:
            p = max(flat) if flat else 0
        if sorted(flat) != list(range(1, p + 1)):
            raise ValueError("groups must partition {1..p}")
        self.p = p
        self.groups = groups
        self._masks = []
        for g in groups:
            m = np.zeros(p, dtype=bool)
            m[np.array(g) - 1] = True
            self._masks.append(m)

    def minimizer(self, beta):
        beta = self._check(beta)
        a = np.zeros(self.p)
        for m in self._masks:
            a[m] = np.sqrt(np.mean(beta[m] ** 2))
        return a

    def dual(self, w):
        w = self._check(w)
        return max(
            (float(np.linalg.norm(w[m]) / np.sqrt(m.sum())) for m in self._masks),
            default=0.0,
        )

    def extreme_points(self):
        pts = []
        for m in self._masks:
            a = np.zeros(self.p)
            a[m] = 1.0 / m.sum()
            pts.append(a)
        return pts

    def extreme_point_count(self):
        return len(self.groups)

    def is_allowed(self, S):
        members = set(S.indices)
        return all(set(g) <= members or not (set(g) & members) for g in self.groups)

    def project_complement(self, S):
        if not self.is_allowed(S):
            raise ValueError(
                f"{tuple(S.indices)} is not a union of groups; the projection of a "
                "group-constant cone onto it leaves the cone"
            )
        members = set(S.indices)
        comp = [j for j in range(1, self.p + 1) if j not in members]
        pos = {j: i + 1 for i, j in enumerate(comp)}
        kept = [tuple(pos[j] for j in g) for g in self.groups if not (set(g) & members)]
        return GroupConstantCone(kept, p=len(comp))

    def contains_indicator(self, S):
        return self.is_allowed(S)

    def prox_scale(self, v, t):
        v = self._check(v)
        a = np.zeros(self.p)
        for m in self._masks:
            a[m] = max(np.sqrt(np.mean(v[m] ** 2)) - t, 0.0)
        return a

    def to_json(self):
        return {"cone": "group_constant", "groups": [list(g) for g in self.groups]}


class RayCone(Cone):
    """Finitely generated cone: nonnegative combinations of fixed rays."""

    def __init__(self, rays):
        R = np.atleast_2d(np.asarray(rays, dtype=float))
        if R.size == 0:
            raise ValueError("at least one ray is required")
        if np.any(R < 0) or np.any(~np.isfinite(R)):
            raise ValueError("rays must be nonnegative and finite")
        if np.any(np.all(R == 0, axis=1)):
            raise ValueError("rays must be nonzero")
        if np.any(R.sum(axis=0) <= 0):
            raise ValueError("cone contains no strictly positive vector")
        self.rays = R
        self.p = R.shape[1]

    def minimizer(self, beta, tol=1e-10, max_iter=100_000):
        beta = self._check(beta)
        R = self.rays
        m = R.shape[0]

        def obj_and_grad(c):
            a = R.T @ c
            val = _penalty_objective(beta, np.maximum(a, 1e-14))
            da = 0.5 * (1.0 - beta**2 / np.maximum(a, 1e-14) ** 2)
            return val, R @ da

        starts = [np.full(m, max(np.max(np.abs(beta)), 1.0) / m)]
        c_ls, _ = optimize.nnls(R.T, np.abs(beta))
        starts.append(np.maximum(c_ls, 1e-8))
        best_c, best_val = None, np.inf
        for c0 in starts:
            res = optimize.minimize(
                obj_and_grad,
                c0,
                jac=True,
                method="L-BFGS-B",
                bounds=[(0.0, None)] * m,
                options={"maxiter": min(max_iter, 20_000), "ftol": 1e-16, "gtol": tol},
            )
            if res.fun < best_val:
                best_val, best_c = res.fun, res.x
        return R.T @ best_c

    def dual(self, w):
        w = self._check(w)
        R = self.rays
        sec = R / R.sum(axis=1, keepdims=True)
        return float(np.sqrt(np.max(sec @ (w**2))))

    def extreme_points(self):
        return list(self.rays / self.rays.sum(axis=1, keepdims=True))

    def extreme_point_count(self):
        return self.rays.shape[0]

    def _member(self, v, tol=1e-9):
        coef, resid = optimize.nnls(self.rays.T, np.asarray(v, float))
        return resid <= tol * max(1.0, float(np.linalg.norm(v)))

    def is_allowed(self, S):
        m = S.mask()
        for r in self.rays:
            rs = np.where(m, r, 0.0)
            if not self._member(rs):
                return False
        return True

    def project_complement(self, S):
        if not self.is_allowed(S):
            raise ValueError(
                "some ray, restricted to the candidate set and zero-padded, "
                "falls outside the cone; the set is not allowed"
            )
        keep = ~S.mask()
        proj = self.rays[:, keep]
        proj = proj[~np.all(proj == 0, axis=1)]
        if proj.size == 0:
            # projection is {0}; keep a degenerate all-ones ray on dim 0
            return RayCone(np.ones((1, max(int(keep.sum()), 1))))
        return RayCone(proj)

    def contains_indicator(self, S):
        return self._member(S.mask().astype(float))

    def prox_scale(self, v, t):
        # smooth once shifted by t > 0, so a bounded quasi-Newton run is exact
        v = self._check(v)
        R = self.rays
        m = R.shape[0]
        v2 = v**2

        def obj_and_grad(c):
            shifted = R.T @ c + t
            val = float(np.sum(v2 / shifted) + np.sum(R.T @ c))
            da = 1.0 - v2 / shifted**2
            return val, R @ da

        c_ls, _ = optimize.nnls(R.T, np.maximum(np.abs(v) - t, 0.0))
        best_c, best_val = None, np.inf
        for c0 in (np.maximum(c_ls, 0.0), np.full(m, max(np.max(np.abs(v)), t) / m)):
            res = optimize.minimize(
                obj_and_grad,
                c0,
                jac=True,
                method="L-BFGS-B",
                bounds=[(0.0, None)] * m,
                options={"maxiter": 20_000, "ftol": 1e-18, "gtol": 1e-14},
            )
            if res.fun < best_val:
                best_val, best_c = res.fun, res.x
        return R.T @ best_c

    def to_json(self):
        return {"cone": "rays", "rays": self.rays.tolist()}


def monotone_contiguous_partition(beta):
    """Contiguous blocks pooling beta under the nonincreasing constraint.

    Pool-adjacent-violators with root-mean-square pooling: the optimal
    constant for a block G of the separable objective sum (b_j^2/c + c)
    is c = sqrt(mean of b_j^2 over G).  Ties merge into one block, which
    yields the coarsest partition.  Returns ([(lo, hi)], value) with
    1-based inclusive block bounds and the induced norm value
    sum sqrt(|G|) * ||beta_G||_2.
    """
    beta = np.asarray(beta, dtype=float)
    p = beta.size
    if p == 0:
        return ((), 0.0)
    # stack of [start, end, sum of squares]; pooled value = sqrt(ss / len)
    stack = []
    for j in range(p):
        lo, hi, ss = j, j, beta[j] ** 2
        while stack and stack[-1][2] / (stack[-1][1] - stack[-1][0] + 1) <= ss / (hi - lo + 1):
            plo, phi, pss = stack.pop()
            lo, ss = plo, ss + pss
        stack.append([lo, hi, ss])
    blocks = tuple((lo + 1, hi + 1) for lo, hi, _ in stack)
    value = float(sum(np.sqrt((hi - lo + 1) * ss) for lo, hi, ss in stack))
    return blocks, value


def cone_norm_eval(cone: Cone, beta) -> ConeNormResult:
    return cone.evaluate(beta)


def cone_dual_eval(cone: Cone, w) -> float:
    return cone.dual(w)


def residual_cone(cone: Cone, S: IndexSet) -> Cone:
    return cone.project_complement(S)


def pontil_maurer_bound(X, cone: Cone) -> float:
    """Expectation bound for the dual norm of the noise-design correlation.

    For standard Gaussian noise, E dual(eps' X) / n is at most
    sqrt(8/n) * (2 + sqrt(log M)) * sqrt(mean_i dual(x_i)^2) where M
    counts the extreme points of the cone's l1 section and x_i are rows.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if p != cone.p:
        raise DimensionError(f"cone dimension {cone.p} != matrix width {p}")
    M = cone.extreme_point_count()
    if not np.isfinite(M) or M < 1:
        raise ValueError("extreme-point count must be finite and positive")
    row_term = np.sqrt(np.mean([cone.dual(X[i]) ** 2 for i in range(n)]))
    return float(np.sqrt(8.0 / n) * (2.0 + np.sqrt(np.log(M))) * row_term)


def cone_from_json(obj) -> Cone:
    """Build a cone from its JSON description."""
    kind = obj.get("cone")
    if kind == "full_orthant":
        return FullOrthantCone(int(obj["p"]))
    if kind == "monotone":
        return MonotoneCone(int(obj["p"]))
    if kind == "group_constant":
        return GroupConstantCone([tuple(g) for g in obj["groups"]])
    if kind == "rays":
        return RayCone(obj["rays"])
    raise ValueError(f"unknown cone kind {kind!r}")
