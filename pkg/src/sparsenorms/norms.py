"""Penalty norms: evaluation, duals, proximal maps, residual norms on the
complement of an allowed set, and weak-decomposability checks.

Four families are provided:

* ``L1Norm`` -- sum of absolute values, decomposable for every set,
* ``GroupNorm`` -- sum over a partition of sqrt(|G_t|) * ||b_{G_t}||_2,
  decomposable exactly for unions of whole groups,
* ``TrivialGroupNorm`` -- sqrt(|G|) ||b_G||_2 + ||b_{G^c}||_1,
  decomposable for supersets of G with an l1 residual norm,
* ``ConeStructuredNorm`` -- the cone-induced norm of :mod:`.cones`,
  decomposable whenever the coordinate projection of the cone onto the
  set stays inside the cone.

A norm is weakly decomposable for S when omega(b) is at least
omega(b_S) + omega_res(b_{S^c}) for some norm omega_res on the
complement coordinates; ``residual(S)`` always returns the largest
natural such norm for the family.
"""

from __future__ import annotations

import json

import numpy as np

from . import cones as _cones
from .core import DimensionError, IndexSet, restrict

__all__ = [
    "Norm",
    "L1Norm",
    "GroupNorm",
    "TrivialGroupNorm",
    "ConeStructuredNorm",
    "NotAllowedSetError",
    "norm_from_json",
    "norm_from_file",
    "weak_decomposability_slack",
]


class NotAllowedSetError(ValueError):
    """The candidate set admits no residual norm for this family.

    Carries a counterexample vector when the structural rule can
    exhibit one.
    """

    def __init__(self, message, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample


def _soft(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


class Norm:
    """Common interface of all penalty families."""

    p: int

    def value(self, beta) -> float:
        raise NotImplementedError

    def dual(self, w) -> float:
        raise NotImplementedError

    def prox(self, v, t: float) -> np.ndarray:
        """argmin_z (1/2)||z - v||_2^2 + t * value(z), with exact zeros."""
        raise NotImplementedError

    def is_allowed(self, S: IndexSet) -> bool:
        raise NotImplementedError

    def residual(self, S: IndexSet) -> "Norm":
        """The residual norm on the complement coordinates of an allowed S."""
        raise NotImplementedError

    def smallest_allowed_superset(self, S: IndexSet) -> IndexSet:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    # ---- shared helpers -------------------------------------------------

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.size != self.p:
            raise DimensionError(f"expected a vector of length {self.p}, got {v.shape}")
        return v

    def _check_t(self, t):
        if not t > 0:
            raise ValueError("prox step must be positive")

    def _require_allowed(self, S):
        if S.p != self.p:
            raise DimensionError(f"index set lives on p={S.p}, norm on p={self.p}")
        if not self.is_allowed(S):
            raise NotAllowedSetError(
                f"{tuple(S.indices)} is not an allowed set for {self.to_json()}",
                counterexample=self._allowedness_counterexample(S),
            )

    def _allowedness_counterexample(self, S):
        return None


class L1Norm(Norm):
    def __init__(self, p: int):
        if p < 0:
            raise ValueError("p must be nonnegative")
        self.p = p

    def value(self, beta):
        return float(np.sum(np.abs(self._check(beta))))

    def dual(self, w):
        w = self._check(w)
        return float(np.max(np.abs(w))) if self.p else 0.0

    def prox(self, v, t):
        self._check_t(t)
        return _soft(self._check(v), t)

    def is_allowed(self, S):
        return True

    def residual(self, S):
        self._require_allowed(S)
        return L1Norm(self.p - len(S))

    def smallest_allowed_superset(self, S):
        return S

    def to_json(self):
        return {"family": "l1", "p": self.p}

    def __repr__(self):
        return f"L1Norm(p={self.p})"


class GroupNorm(Norm):
    """sum_t w_t ||beta_{G_t}||_2 over a partition of {1..p}.

    Weights default to sqrt(|G_t|); the unit-weight variant exists only
    for the overlapping-group reformulation and is not part of the JSON
    schema.
    """

    def __init__(self, groups, p=None, weights=None):
        groups = tuple(tuple(sorted(int(j) for j in g)) for g in groups)
        flat = [j for g in groups for j in g]
        if p is None:
            p = max(flat) if flat else 0
        if sorted(flat) != list(range(1, p + 1)):
            raise ValueError("groups must be disjoint with union {1..p}")
        self.p = p
        self.groups = groups
        self._masks = [np.isin(np.arange(1, p + 1), g) for g in groups]
        if weights is None:
            self.weights = tuple(float(np.sqrt(len(g))) for g in groups)
            self._default_weights = True
        else:
            self.weights = tuple(float(w) for w in weights)
            self._default_weights = False
            if len(self.weights) != len(groups) or any(w <= 0 for w in self.weights):
                raise ValueError("need one positive weight per group")

    def value(self, beta):
        beta = self._check(beta)
        return float(sum(w * np.linalg.norm(beta[m]) for w, m in zip(self.weights, self._masks)))

    def dual(self, w):
        w = self._check(w)
        return max(
            (float(np.linalg.norm(w[m]) / wt) for wt, m in zip(self.weights, self._masks)),
            default=0.0,
        )

    def prox(self, v, t):
        self._check_t(t)
        v = self._check(v)
        out = np.zeros_like(v)
        for wt, m in zip(self.weights, self._masks):
            nrm = np.linalg.norm(v[m])
            if nrm > t * wt:
                out[m] = (1.0 - t * wt / nrm) * v[m]
        return out

    def is_allowed(self, S):
        members = set(S.indices)
        return all(set(g) <= members or not (set(g) & members) for g in self.groups)

    def residual(self, S):
        self._require_allowed(S)
        members = set(S.indices)
        comp = [j for j in range(1, self.p + 1) if j not in members]
        pos = {j: i + 1 for i, j in enumerate(comp)}
        kept = [
            (tuple(pos[j] for j in g), wt)
            for g, wt in zip(self.groups, self.weights)
            if not (set(g) & members)
        ]
        return GroupNorm(
            [g for g, _ in kept],
            p=len(comp),
            weights=None if self._default_weights else [wt for _, wt in kept],
        )

    def smallest_allowed_superset(self, S):
        hit = set()
        for g in self.groups:
            if set(g) & set(S.indices):
                hit |= set(g)
        return IndexSet(tuple(hit), self.p)

    def _allowedness_counterexample(self, S):
        # a vector cut through a straddled group witnesses strict inequality
        members = set(S.indices)
        for g, m in zip(self.groups, self._masks):
            inside = set(g) & members
            if inside and not set(g) <= members:
                beta = np.zeros(self.p)
                beta[m] = 1.0
                return beta
        return None

    def to_json(self):
        return {"family": "group", "groups": [list(g) for g in self.groups]}

    def __repr__(self):
        return f"GroupNorm(groups={self.groups})"


class TrivialGroupNorm(Norm):
    """sqrt(|G|) ||beta_G||_2 + ||beta_{G^c}||_1 for a fixed block G."""

    def __init__(self, g, p):
        self.p = int(p)
        self.g = tuple(sorted(set(int(j) for j in g)))
        for j in self.g:
            if not 1 <= j <= self.p:
                raise IndexError(f"index {j} out of range [1, {self.p}]")
        self._mask = np.isin(np.arange(1, self.p + 1), self.g)

    def value(self, beta):
        beta = self._check(beta)
        k = len(self.g)
        block = np.sqrt(k) * np.linalg.norm(beta[self._mask]) if k else 0.0
        return float(block + np.sum(np.abs(beta[~self._mask])))

    def dual(self, w):
        w = self._check(w)
        cands = [0.0]
        if self.g:
            cands.append(float(np.linalg.norm(w[self._mask]) / np.sqrt(len(self.g))))
        if len(self.g) < self.p:
            cands.append(float(np.max(np.abs(w[~self._mask]))))
        return max(cands)

    def prox(self, v, t):
        self._check_t(t)
        v = self._check(v)
        out = np.zeros_like(v)
        if self.g:
            wt = np.sqrt(len(self.g))
            nrm = np.linalg.norm(v[self._mask])
            if nrm > t * wt:
                out[self._mask] = (1.0 - t * wt / nrm) * v[self._mask]
        out[~self._mask] = _soft(v[~self._mask], t)
        return out

    def is_allowed(self, S):
        return len(S) == 0 or set(S.indices) >= set(self.g)

    def residual(self, S):
        self._require_allowed(S)
        if len(S) == 0:
            return self
        return L1Norm(self.p - len(S))

    def smallest_allowed_superset(self, S):
        if len(S) == 0:
            return S
        return IndexSet(tuple(set(S.indices) | set(self.g)), self.p)

    def _allowedness_counterexample(self, S):
        if len(S) and not set(S.indices) >= set(self.g):
            beta = np.zeros(self.p)
            beta[self._mask] = 1.0
            return beta
        return None

    def to_json(self):
        return {"family": "trivial", "g": list(self.g), "p": self.p}

    def __repr__(self):
        return f"TrivialGroupNorm(g={self.g}, p={self.p})"


class ConeStructuredNorm(Norm):
    """The cone-induced norm; delegates geometry to :mod:`.cones`."""

    def __init__(self, cone: _cones.Cone):
        self.cone = cone
        self.p = cone.p

    def value(self, beta):
        return self.cone.evaluate(self._check(beta)).value

    def evaluate(self, beta) -> _cones.ConeNormResult:
        return self.cone.evaluate(self._check(beta))

    def dual(self, w):
        return self.cone.dual(self._check(w))

    def prox(self, v, t):
        """Exact proximal map through the cone's shifted program.

        Minimizing the prox objective over z at a fixed cone element a
        gives z_j = v_j a_j / (a_j + t); substituting back leaves the
        separable convex program solved by ``Cone.prox_scale``, which is
        smooth because the shift by t removes the 0/0 pole.
        """
        self._check_t(t)
        v = self._check(v)
        if t == 0.0:
            return v.copy()
        if self.cone.dual(v) <= t:
            return np.zeros_like(v)
        a = self.cone.prox_scale(v, t)
        return v * a / (a + t)

    def is_allowed(self, S):
        return self.cone.is_allowed(S)

    def residual(self, S):
        self._require_allowed(S)
        return ConeStructuredNorm(self.cone.project_complement(S))

    def smallest_allowed_superset(self, S):
        if isinstance(self.cone, _cones.FullOrthantCone):
            return S
        if isinstance(self.cone, _cones.MonotoneCone):
            if len(S) == 0:
                return S
            return IndexSet(tuple(range(1, max(S.indices) + 1)), self.p)
        if isinstance(self.cone, _cones.GroupConstantCone):
            hit = set()
            for g in self.cone.groups:
                if set(g) & set(S.indices):
                    hit |= set(g)
            return IndexSet(tuple(hit), self.p)
        # general ray cones have no cheap structural rule; the full set
        # is always allowed
        return IndexSet(tuple(range(1, self.p + 1)), self.p)

    def to_json(self):
        return {"family": "cone", "cone": self.cone.to_json()}

    def __repr__(self):
        return f"ConeStructuredNorm({self.cone.to_json()})"


def weak_decomposability_slack(norm: Norm, S: IndexSet, beta) -> float:
    """value(beta) - value(beta_S) - residual(beta_{S^c}); >= 0 up to solver noise."""
    beta = np.asarray(beta, dtype=float)
    res = norm.residual(S)  # raises NotAllowedSetError when S is not allowed
    comp = ~S.mask()
    return norm.value(beta) - norm.value(restrict(beta, S)) - res.value(beta[comp])


def norm_from_json(obj, p=None) -> Norm:
    """Build a norm from its JSON description.

    Schemas: {"family": "l1", "p": 3},
    {"family": "group", "groups": [[1, 2], [3, 4]]},
    {"family": "trivial", "g": [1, 2], "p": 3},
    {"family": "cone", "cone": {"cone": "monotone", "p": 4}}.
    A ``p`` argument fills in the dimension when the JSON omits it.
    """
    fam = obj.get("family")
    if fam == "l1":
        dim = obj.get("p", p)
        if dim is None:
            raise ValueError("l1 norm needs a dimension p")
        return L1Norm(int(dim))
    if fam == "group":
        return GroupNorm([tuple(g) for g in obj["groups"]], p=obj.get("p", p))
    if fam == "trivial":
        dim = obj.get("p", p)
        if dim is None:
            raise ValueError("trivial norm needs a dimension p")
        return TrivialGroupNorm(obj["g"], int(dim))
    if fam == "cone":
        spec = dict(obj["cone"])
        if "p" not in spec and p is not None:
            spec["p"] = p
        return ConeStructuredNorm(_cones.cone_from_json(spec))
    raise ValueError(f"unknown norm family {fam!r}")


def norm_from_file(path, p=None) -> Norm:
    with open(path) as fh:
        return norm_from_json(json.load(fh), p=p)
