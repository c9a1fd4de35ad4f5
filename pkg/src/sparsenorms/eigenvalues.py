"""Eigenvalue-type constants of a design matrix.

For an index set S and constant L > 0 the l1-eigenvalue is

    delta(L, S) = min { ||X b_S - X b_{S^c}||_n :
                        ||b_S||_1 = 1, ||b_{S^c}||_1 <= L },

the distance between the convex hull of {±X_j, j in S} and the scaled
hull of the complement columns.  The compatibility constant is
|S| delta^2 and the effective sparsity its inverse 1 / delta^2.  The
same quantities generalize to any weakly decomposable norm by replacing
the two l1 constraints with the norm and its residual norm.

The l1 sphere constraint is nonconvex, but restricted to one sign
orthant it is a linear equality over a convex set, so enumerating sign
patterns (2^{|S|-1} after symmetry) and solving one convex QP each is
exact.  General norms get a multistart projected-gradient upper bound
plus a certified lower bound obtained by sandwiching the norm between
scaled l1 norms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import cvxpy as cp
import numpy as np
from scipy import optimize

from .core import DimensionError, IndexSet, restrict
from .norms import ConeStructuredNorm, GroupNorm, L1Norm, Norm, TrivialGroupNorm

__all__ = [
    "EigenvalueResult",
    "l1_eigenvalue",
    "compatibility",
    "effective_sparsity",
    "omega_eigenvalue",
    "omega_eigenvalue_lower_bound",
    "adaptive_restricted_eigenvalue",
    "brute_force_eigenvalue",
    "multistart_eigenvalue",
]

#: below this, an eigenvalue is reported as an exact zero
ZERO_TOL = 1e-10


@dataclass(frozen=True)
class EigenvalueResult:
    """Value (or bounds) for an eigenvalue problem with a feasible witness.

    The witness uses the definition's sign convention: its value is
    ||X w_S - X w_{S^c}||_n.  ``certified`` means the exact orthant
    enumeration (or a closed form) produced the value, in which case the
    two bounds coincide with it.
    """

    value: float
    witness: np.ndarray
    certified: bool
    lower_bound: float
    upper_bound: float

    def as_dict(self):
        return {
            "value": self.value,
            "witness": self.witness.tolist(),
            "certified": self.certified,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
        }


def _split(X, S):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionError("X must be a 2-d array")
    if S.p != X.shape[1]:
        raise DimensionError(f"index set on p={S.p} but X has {X.shape[1]} columns")
    pos = S.positions()
    cpos = S.complement().positions()
    return X, X[:, pos], X[:, cpos], pos, cpos


def l1_eigenvalue(X, S: IndexSet, L: float, orthant_cap: int = 12) -> EigenvalueResult:
    """Exact l1-eigenvalue by sign-orthant enumeration.

    Each orthant gives the convex QP ``min ||Xs v - Xc g||_n^2`` over
    sign-consistent v on the simplex slice and ||g||_1 <= L; flipping
    every sign mirrors the problem, so the first sign is pinned.  Above
    ``orthant_cap`` active coordinates the nonconvex sphere is handled
    by the multistart path instead (certified=False).
    """
    if len(S) == 0:
        raise ValueError("S must be nonempty")
    if not L > 0:
        raise ValueError("L must be positive")
    X, Xs, Xc, pos, cpos = _split(X, S)
    n, p = X.shape
    k, kc = len(pos), len(cpos)
    if k > orthant_cap:
        return multistart_eigenvalue(X, S, L, L1Norm(p))

    v = cp.Variable(k)
    s_par = cp.Parameter(k)
    constraints = [cp.multiply(s_par, v) >= 0, s_par @ v == 1]
    if kc:
        g = cp.Variable(kc)
        constraints.append(cp.norm1(g) <= L)
        resid = Xs @ v - Xc @ g
    else:
        resid = Xs @ v
    problem = cp.Problem(cp.Minimize(cp.sum_squares(resid) / n), constraints)

    best_val = np.inf
    best_witness = None
    for tail in itertools.product((1.0, -1.0), repeat=k - 1):
        s = np.array((1.0,) + tail)
        s_par.value = s
        problem.solve(
            solver=cp.CLARABEL,
            tol_gap_abs=1e-14,
            tol_gap_rel=1e-14,
            tol_feas=1e-12,
            max_iter=200,
        )
        if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            raise RuntimeError(f"orthant QP failed with status {problem.status}")
        val = max(float(problem.value), 0.0)
        if val < best_val:
            best_val = val
            witness = np.zeros(p)
            witness[pos] = v.value
            if kc:
                witness[cpos] = g.value
            best_witness = witness
    # clean the witness: exact simplex normalization on the S block
    w = best_witness
    bs = w[pos]
    nrm1 = np.sum(np.abs(bs))
    if nrm1 > 0:
        w[pos] = bs / nrm1
    delta = float(np.sqrt(best_val))
    if delta < ZERO_TOL:
        delta = 0.0
    return EigenvalueResult(
        value=delta, witness=w, certified=True, lower_bound=delta, upper_bound=delta
    )


def compatibility(X, S: IndexSet, L: float, **kw) -> float:
    """|S| times the squared l1-eigenvalue."""
    res = l1_eigenvalue(X, S, L, **kw)
    return len(S) * res.value**2


def effective_sparsity(X, S: IndexSet, L: float, norm: Optional[Norm] = None, **kw) -> float:
    """1 / delta^2, or +inf when the eigenvalue vanishes."""
    if norm is None or isinstance(norm, L1Norm):
        res = l1_eigenvalue(X, S, L, **kw)
    else:
        res = omega_eigenvalue(X, S, L, norm, **kw)
    if res.value <= ZERO_TOL:
        return np.inf
    return 1.0 / res.value**2


# ---------------------------------------------------------------------------
# general norms: multistart projected gradient on the homogeneous form
# ---------------------------------------------------------------------------


def _norm_subgradient(norm: Norm, v: np.ndarray) -> np.ndarray:
    """A subgradient of the norm at v (any selection works for descent)."""
    if isinstance(norm, L1Norm):
        return np.sign(v)
    if isinstance(norm, GroupNorm):
        g = np.zeros_like(v)
        for wt, m in zip(norm.weights, norm._masks):
            nrm = np.linalg.norm(v[m])
            if nrm > 0:
                g[m] = wt * v[m] / nrm
        return g
    if isinstance(norm, TrivialGroupNorm):
        g = np.zeros_like(v)
        m = norm._mask
        nrm = np.linalg.norm(v[m])
        if nrm > 0 and norm.g:
            g[m] = np.sqrt(len(norm.g)) * v[m] / nrm
        g[~m] = np.sign(v[~m])
        return g
    if isinstance(norm, ConeStructuredNorm):
        a = norm.cone.minimizer(v)
        out = np.zeros_like(v)
        live = a > 0
        out[live] = v[live] / a[live]
        return out
    raise TypeError(f"no subgradient rule for {type(norm).__name__}")


def _project_norm_ball(norm: Norm, v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto {norm <= radius} via bisection on the prox."""
    if radius <= 0:
        return np.zeros_like(v)
    if norm.value(v) <= radius:
        return v.copy()
    hi = 1.0
    while norm.value(norm.prox(v, hi)) > radius:
        hi *= 2.0
        if hi > 1e18:
            return np.zeros_like(v)
    lo = 0.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if norm.value(norm.prox(v, mid)) > radius:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(hi, 1.0):
            break
    return norm.prox(v, hi)


def multistart_eigenvalue(
    X,
    S: IndexSet,
    L: float,
    norm: Norm,
    restarts: int = 64,
    max_iter: int = 400,
    seed: int = 0,
) -> EigenvalueResult:
    """Witness-backed upper bound on the norm eigenvalue.

    Works on the homogeneous form min ||X D b||_n / omega(b_S) over the
    cone { omega_res(b_{S^c}) <= L omega(b_S) } where D flips the signs
    of the complement block so the witness lands in the definition's
    convention.  Each restart runs backtracking projected gradient on
    the ratio, then polishes the complement block by solving its convex
    subproblem (projection onto the residual-norm ball via the prox).
    The companion lower bound comes from
    :func:`omega_eigenvalue_lower_bound`.
    """
    if len(S) == 0:
        raise ValueError("S must be nonempty")
    X, Xs, Xc, pos, cpos = _split(X, S)
    n, p = X.shape
    res_norm = norm.residual(S)
    d = np.ones(p)
    d[cpos] = -1.0
    Xd = X * d[None, :]
    G = Xd.T @ Xd / n  # gradient kernel of ||Xd b||_n^2

    def omega_s(b):
        return norm.value(restrict(b, S))

    def omega_c(b):
        return res_norm.value(b[cpos]) if len(cpos) else 0.0

    def feasible(b):
        o = omega_s(b)
        if o <= 0:
            return None
        b = b / o
        if len(cpos):
            oc = omega_c(b)
            if oc > L:
                b = b.copy()
                b[cpos] *= L / oc
        return b

    def ratio(b):
        return float(np.sqrt(max(b @ G @ b, 0.0)))  # omega_s(b) == 1 after feasible()

    def polish_complement(b):
        # convex subproblem in the complement block at fixed b_S
        if not len(cpos):
            return b
        r0 = Xs @ b[pos]
        A = Xd[:, cpos]
        lip = np.linalg.norm(A, 2) ** 2 * 2.0 / n
        if lip <= 0:
            return b
        step = 1.0 / lip
        gamma = b[cpos].copy()
        zeta, tk = gamma.copy(), 1.0
        for _ in range(200):
            grad = 2.0 * A.T @ (r0 + A @ zeta) / n
            nxt = _project_norm_ball(res_norm, zeta - step * grad, L)
            tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk**2))
            zeta = nxt + (tk - 1.0) / tn * (nxt - gamma)
            moved = np.linalg.norm(nxt - gamma)
            gamma, tk = nxt, tn
            if moved <= 1e-12 * (1.0 + np.linalg.norm(gamma)):
                break
        out = b.copy()
        out[cpos] = gamma
        return out

    rng = np.random.default_rng(seed)
    starts = []
    for j in pos:
        for sign in (1.0, -1.0):
            e = np.zeros(p)
            e[j] = sign
            starts.append(e)
    while len(starts) < restarts:
        starts.append(rng.standard_normal(p))

    best_val, best_w = np.inf, None
    for b0 in starts[:max(restarts, len(starts))]:
        b = feasible(b0)
        if b is None:
            continue
        step = 1.0
        val = ratio(b)
        for _ in range(max_iter):
            q = np.sqrt(max(b @ G @ b, 0.0))
            if q <= 0:
                val = 0.0
                break
            grad_q = (G @ b) / q  # note omega_s(b) == 1 here
            sub = _norm_subgradient(norm, restrict(b, S))
            grad = grad_q - q * sub
            accepted = False
            for _ in range(40):
                cand = feasible(b - step * grad)
                if cand is not None:
                    cval = ratio(cand)
                    if cval < val - 1e-15:
                        b, val = cand, cval
                        step *= 1.4
                        accepted = True
                        break
                step *= 0.5
            if not accepted:
                break
        b = polish_complement(b)
        b = feasible(b)
        if b is None:
            continue
        val = ratio(b)
        if val < best_val:
            best_val, best_w = val, b
    witness = best_w if best_w is not None else np.zeros(p)
    value = float(best_val) if np.isfinite(best_val) else np.inf
    if value < ZERO_TOL:
        value = 0.0
    return EigenvalueResult(
        value=value, witness=witness, certified=False, lower_bound=0.0, upper_bound=value
    )


def _l1_envelope_constant(norm: Norm, S: IndexSet):
    """Smallest c with omega(b_S) <= c ||b_S||_1 when available, else None.

    All residual norms in this package dominate the l1 norm on the
    complement, so together with this constant the norm's feasible cone
    embeds into an l1 cone with stretched constant, giving
    delta_omega(L, S) >= delta(c L, S) / c.
    """
    if isinstance(norm, L1Norm):
        return 1.0
    if isinstance(norm, GroupNorm):
        members = set(S.indices)
        ws = [wt for g, wt in zip(norm.groups, norm.weights) if set(g) <= members]
        if not norm._default_weights and any(w < 1 for w in norm.weights):
            return None  # residual no longer dominates l1
        return max(ws, default=1.0)
    if isinstance(norm, TrivialGroupNorm):
        return max(np.sqrt(len(norm.g)), 1.0) if norm.g else 1.0
    if isinstance(norm, ConeStructuredNorm):
        if norm.cone.contains_indicator(S):
            return float(np.sqrt(len(S)))
        return None
    return None


def omega_eigenvalue_lower_bound(
    X, S: IndexSet, L: float, norm: Norm, orthant_cap: int = 12
) -> float:
    """Certified lower bound on the norm eigenvalue via l1 sandwiching."""
    c = _l1_envelope_constant(norm, S)
    if c is None or len(S) > orthant_cap:
        return 0.0
    base = l1_eigenvalue(X, S, c * L, orthant_cap=orthant_cap)
    return base.value / c


def omega_eigenvalue(
    X,
    S: IndexSet,
    L: float,
    norm: Norm,
    restarts: int = 64,
    seed: int = 0,
    orthant_cap: int = 12,
) -> EigenvalueResult:
    """Eigenvalue for a general weakly decomposable norm.

    The l1 family routes to the exact orthant solver; everything else
    gets the multistart upper bound together with the sandwich lower
    bound.  S must be allowed for the norm.
    """
    norm._require_allowed(S)
    if isinstance(norm, L1Norm) and len(S) <= orthant_cap:
        return l1_eigenvalue(X, S, L, orthant_cap=orthant_cap)
    upper = multistart_eigenvalue(X, S, L, norm, restarts=restarts, seed=seed)
    lower = omega_eigenvalue_lower_bound(X, S, L, norm, orthant_cap=orthant_cap)
    return EigenvalueResult(
        value=upper.value,
        witness=upper.witness,
        certified=False,
        lower_bound=min(lower, upper.value),
        upper_bound=upper.value,
    )


# ---------------------------------------------------------------------------
# adaptive restricted eigenvalue
# ---------------------------------------------------------------------------


def _min_quadratic_on_sphere(H, g, r):
    """Exact min of u'Hu - 2g'u over ||u||_2 = r (H symmetric PSD).

    Lagrange stationarity gives u = (H + mu I)^{-1} g with mu at least
    minus the smallest eigenvalue; the radius equation is solved on the
    eigenbasis (secular equation), including the hard case where g has
    no component on the bottom eigenspace.
    """
    lam, Q = np.linalg.eigh(H)
    gt = Q.T @ g
    lam0 = lam[0]
    scale = max(1.0, float(np.linalg.norm(g)), float(lam[-1]))

    def u_of(mu):
        return gt / (lam + mu)

    bottom = lam - lam0 <= 1e-12 * scale
    g_bottom = np.linalg.norm(gt[bottom])
    if g_bottom <= 1e-13 * scale:
        # hard case candidate: solve on the complement, pad radius with
        # a bottom-eigenspace direction
        rest = ~bottom
        u_perp = np.zeros_like(gt)
        if np.any(rest):
            u_perp[rest] = gt[rest] / (lam[rest] - lam0)
        nrm = np.linalg.norm(u_perp)
        if nrm <= r:
            tau = np.sqrt(max(r**2 - nrm**2, 0.0))
            ut = u_perp.copy()
            ut[np.argmax(bottom)] += tau
            u = Q @ ut
            val = float(u @ H @ u - 2 * g @ u)
            return u, val
    # regular case: ||u(mu)|| decreases from +inf to 0 on (-lam0, inf)
    lo = -lam0
    hi = max(np.linalg.norm(g) / r - lam0, lo + 1.0)
    while np.linalg.norm(u_of(hi)) > r:
        hi = 2.0 * (hi - lo) + lo + 1.0
    eps = 1e-14 * scale + 1e-300
    shift = max(abs(lo), 1.0) * 1e-13
    while np.linalg.norm(u_of(lo + shift)) < r and shift > 1e-290:
        shift *= 0.5
    mu = optimize.brentq(
        lambda m: np.linalg.norm(u_of(m)) - r, lo + shift, hi, xtol=1e-15, rtol=1e-15
    )
    u = Q @ u_of(mu)
    # rescale exactly onto the sphere to absorb root-finding slack
    nrm = np.linalg.norm(u)
    if nrm > 0:
        u = u * (r / nrm)
    val = float(u @ H @ u - 2 * g @ u)
    return u, val


def _project_l1(v, radius):
    """Euclidean projection onto the l1 ball of the given radius."""
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, a.size + 1)
    rho = np.max(np.where(u - css / idx > 0, idx, 0))
    theta = css[rho - 1] / rho
    return np.sign(v) * np.maximum(a - theta, 0.0)


def adaptive_restricted_eigenvalue(
    X, S: IndexSet, L: float, restarts: int = 32, max_iter: int = 400, seed: int = 0
) -> EigenvalueResult:
    """Eigenvalue of the mixed norm sqrt(|S|)||b_S||_2 + ||b_{S^c}||_1.

    The inner minimization over the sphere ||b_S||_2^2 = 1/|S| is solved
    exactly through the secular equation; the outer minimization over
    the l1 ball of radius L uses multistart projected gradient, so the
    result is exact for L = 0 (a bottom Rayleigh quotient) and a
    witness-backed upper bound otherwise.
    """
    if len(S) == 0:
        raise ValueError("S must be nonempty")
    X, Xs, Xc, pos, cpos = _split(X, S)
    n, p = X.shape
    k = len(pos)
    r = 1.0 / np.sqrt(k)
    H = Xs.T @ Xs / n

    def inner(gamma):
        c = Xc @ gamma if len(cpos) else np.zeros(n)
        g = Xs.T @ c / n
        u, quad = _min_quadratic_on_sphere(H, g, r)
        val_sq = quad + float(c @ c) / n
        return u, max(val_sq, 0.0)

    if L == 0 or not len(cpos):
        lam = np.linalg.eigvalsh(H)
        value = float(np.sqrt(max(lam[0], 0.0)) * r)
        u, _ = _min_quadratic_on_sphere(H, np.zeros(k), r)
        witness = np.zeros(p)
        witness[pos] = u
        if value < ZERO_TOL:
            value = 0.0
        return EigenvalueResult(value, witness, True, value, value)

    rng = np.random.default_rng(seed)
    starts = [np.zeros(len(cpos))]
    for j in range(min(len(cpos), 8)):
        e = np.zeros(len(cpos))
        e[j] = L
        starts.append(e)
        starts.append(-e)
    while len(starts) < restarts:
        z = rng.standard_normal(len(cpos))
        starts.append(_project_l1(z * L, L))

    best_val, best_gamma, best_u = np.inf, None, None
    for gamma0 in starts:
        gamma = _project_l1(gamma0, L)
        u, val = inner(gamma)
        step = 1.0
        for _ in range(max_iter):
            resid = Xs @ u - (Xc @ gamma)
            grad = -2.0 * Xc.T @ resid / n
            accepted = False
            for _ in range(40):
                cand = _project_l1(gamma - step * grad, L)
                cu, cval = inner(cand)
                if cval < val - 1e-16:
                    gamma, u, val = cand, cu, cval
                    step *= 1.4
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
        if val < best_val:
            best_val, best_gamma, best_u = val, gamma, u
    witness = np.zeros(p)
    witness[pos] = best_u
    witness[cpos] = best_gamma
    value = float(np.sqrt(best_val))
    if value < ZERO_TOL:
        value = 0.0
    return EigenvalueResult(value, witness, False, 0.0, value)


# ---------------------------------------------------------------------------
# sampling oracle
# ---------------------------------------------------------------------------


def brute_force_eigenvalue(
    X, S: IndexSet, L: float, norm: Optional[Norm] = None, resolution: int = 100_000, seed: int = 0
) -> float:
    """Dense random sampling of the feasible set; always an upper bound.

    Intended as a test oracle for small p.  The l1 family is fully
    vectorized; other norms evaluate sample by sample, so keep the
    resolution moderate for them.
    """
    if len(S) == 0:
        raise ValueError("S must be nonempty")
    X, Xs, Xc, pos, cpos = _split(X, S)
    n, p = X.shape
    rng = np.random.default_rng(seed)
    k, kc = len(pos), len(cpos)
    if norm is None or isinstance(norm, L1Norm):
        best = np.inf
        batch = 50_000
        left = resolution
        while left > 0:
            m = min(batch, left)
            left -= m
            Bs = rng.standard_normal((m, k))
            Bs /= np.sum(np.abs(Bs), axis=1, keepdims=True)
            R = Bs @ Xs.T
            if kc:
                Bc = rng.standard_normal((m, kc))
                Bc /= np.sum(np.abs(Bc), axis=1, keepdims=True)
                radius = L * rng.random((m, 1))
                R = R - (radius * Bc) @ Xc.T
            vals = np.sqrt(np.sum(R**2, axis=1) / n)
            best = min(best, float(np.min(vals)))
        return best
    res_norm = norm.residual(S)
    best = np.inf
    for _ in range(resolution):
        z = np.zeros(p)
        z[pos] = rng.standard_normal(k)
        o = norm.value(z)
        if o <= 0:
            continue
        bs = z / o
        val_vec = Xs @ bs[pos]
        if kc:
            gdir = rng.standard_normal(kc)
            oc = res_norm.value(gdir)
            if oc > 0:
                gamma = gdir / oc * (L * rng.random())
                val_vec = val_vec - Xc @ gamma
        best = min(best, float(np.sqrt(np.dot(val_vec, val_vec) / n)))
    return best
