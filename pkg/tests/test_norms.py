import numpy as np
import pytest

from sparsenorms.cones import FullOrthantCone, GroupConstantCone, MonotoneCone
from sparsenorms.core import IndexSet, restrict
from sparsenorms.norms import (
    ConeStructuredNorm,
    GroupNorm,
    L1Norm,
    NotAllowedSetError,
    TrivialGroupNorm,
    norm_from_json,
    weak_decomposability_slack,
)


def all_families(p, seed=0):
    rng = np.random.default_rng(seed)
    half = p // 2
    return [
        L1Norm(p),
        GroupNorm([tuple(range(1, half + 1)), tuple(range(half + 1, p + 1))], p=p),
        TrivialGroupNorm(tuple(range(1, half + 1)), p=p),
        ConeStructuredNorm(MonotoneCone(p)),
        ConeStructuredNorm(GroupConstantCone([tuple(range(1, half + 1)), tuple(range(half + 1, p + 1))])),
    ]


def test_value_examples():
    assert L1Norm(2).value([3.0, -4.0]) == 7.0
    assert GroupNorm([(1, 2)]).value([3.0, 4.0]) == pytest.approx(np.sqrt(2.0) * 5.0)
    assert TrivialGroupNorm((1, 2), 3).value([3.0, 4.0, -2.0]) == pytest.approx(
        np.sqrt(2.0) * 5.0 + 2.0
    )


def test_dual_examples():
    assert L1Norm(2).dual([3.0, -4.0]) == 4.0
    assert GroupNorm([(1, 2)]).dual([3.0, 4.0]) == pytest.approx(5.0 / np.sqrt(2.0))
    for norm in all_families(6):
        assert norm.dual(np.zeros(6)) == 0.0


def test_norm_axioms_by_sampling():
    rng = np.random.default_rng(0)
    p = 6
    for norm in all_families(p):
        for _ in range(500):
            b, bb = rng.standard_normal(p), rng.standard_normal(p)
            c = float(rng.standard_normal())
            vb = norm.value(b)
            assert norm.value(c * b) == pytest.approx(abs(c) * vb, abs=1e-9 * max(vb, 1.0))
            assert norm.value(b + bb) <= vb + norm.value(bb) + 1e-9


def test_generalized_cauchy_schwarz():
    rng = np.random.default_rng(1)
    p = 6
    for norm in all_families(p):
        for _ in range(500):
            w, b = rng.standard_normal(p), rng.standard_normal(p)
            assert abs(w @ b) <= norm.dual(w) * norm.value(b) * (1.0 + 1e-9)


def brute_dual(norm, w, samples=20000, seed=0):
    """Sampling sup of |w'b| over the unit ball, with a simplex polish."""
    from scipy import optimize

    rng = np.random.default_rng(seed)
    p = w.size
    B = rng.standard_normal((samples, p))
    vals = np.array([norm.value(b) for b in B])
    keep = vals > 0
    B, vals = B[keep], vals[keep]
    scores = np.abs(B @ w) / vals
    best = float(np.max(scores))
    top = B[np.argsort(scores)[-5:]]

    def neg(b):
        v = norm.value(b)
        return 0.0 if v <= 0 else -abs(b @ w) / v

    for b0 in top:
        res = optimize.minimize(neg, b0, method="Nelder-Mead",
                                options={"maxiter": 3000, "fatol": 1e-12, "xatol": 1e-10})
        best = max(best, -res.fun)
    return best


def test_dual_vs_brute_force_small_p():
    rng = np.random.default_rng(2)
    p = 3
    norms = [
        L1Norm(p),
        GroupNorm([(1, 2), (3,)], p=p),
        TrivialGroupNorm((1, 2), p=p),
        ConeStructuredNorm(MonotoneCone(p)),
    ]
    for norm in norms:
        for k in range(3):
            w = rng.standard_normal(p)
            assert norm.dual(w) == pytest.approx(brute_dual(norm, w, seed=k), abs=1e-4)


def test_prox_examples():
    np.testing.assert_allclose(L1Norm(2).prox([3.0, -0.5], 1.0), [2.0, 0.0])
    got = GroupNorm([(1, 2)]).prox([3.0, 4.0], 1.0)
    np.testing.assert_allclose(got, np.array([3.0, 4.0]) * (1.0 - np.sqrt(2.0) / 5.0), rtol=1e-12)
    for norm in all_families(6):
        np.testing.assert_array_equal(norm.prox(np.zeros(6), 0.7), np.zeros(6))


def test_prox_optimality_under_perturbation():
    rng = np.random.default_rng(3)
    p = 6
    for norm in all_families(p):
        for _ in range(25):
            v = rng.standard_normal(p) * 2.0
            t = float(rng.uniform(0.1, 1.5))
            z = norm.prox(v, t)
            base = 0.5 * np.sum((z - v) ** 2) + t * norm.value(z)
            for _ in range(40):
                zp = z + rng.standard_normal(p) * rng.choice([1e-4, 1e-2, 0.3])
                other = 0.5 * np.sum((zp - v) ** 2) + t * norm.value(zp)
                assert base <= other + 1e-8


def test_prox_produces_exact_zeros():
    rng = np.random.default_rng(4)
    p = 6
    for norm in all_families(p):
        v = 0.01 * rng.standard_normal(p)
        big_t = norm.dual(v) * 1.5 + 0.1
        np.testing.assert_array_equal(norm.prox(v, big_t), np.zeros(p))


def test_allowed_sets():
    g = GroupNorm([(1, 2), (3,)], p=3)
    assert g.is_allowed(IndexSet((1, 2), 3))
    assert not g.is_allowed(IndexSet((1,), 3))
    assert g.is_allowed(IndexSet((1, 2, 3), 3))
    t = TrivialGroupNorm((1, 2), 4)
    assert t.is_allowed(IndexSet((), 4))
    assert t.is_allowed(IndexSet((1, 2, 4), 4))
    assert not t.is_allowed(IndexSet((1,), 4))
    for norm in all_families(6):
        assert norm.is_allowed(IndexSet(tuple(range(1, 7)), 6))


def test_not_allowed_counterexample():
    g = GroupNorm([(1, 2), (3,)], p=3)
    S = IndexSet((1,), 3)
    with pytest.raises(NotAllowedSetError) as exc:
        g.residual(S)
    beta = exc.value.counterexample
    assert beta is not None
    # the counterexample genuinely breaks decomposability for the natural
    # candidate residual norm (restriction of the group norm)
    comp_val = GroupNorm([(1,), (2,)], p=2).value(beta[[1, 2]])
    assert g.value(beta) < g.value(restrict(beta, S)) + comp_val - 1e-9


def test_residual_norms():
    assert isinstance(L1Norm(4).residual(IndexSet((2,), 4)), L1Norm)
    g = GroupNorm([(1, 2), (3, 4)], p=4)
    res = g.residual(IndexSet((1, 2), 4))
    assert isinstance(res, GroupNorm) and res.groups == ((1, 2),)
    t = TrivialGroupNorm((1, 2), 4)
    assert isinstance(t.residual(IndexSet((1, 2), 4)), L1Norm)
    c = ConeStructuredNorm(MonotoneCone(4))
    res = c.residual(IndexSet((1, 2), 4))
    assert isinstance(res, ConeStructuredNorm) and res.p == 2


def test_weak_decomposability_slack():
    rng = np.random.default_rng(5)
    p = 6
    l1 = L1Norm(p)
    for _ in range(200):
        b = rng.standard_normal(p)
        S = IndexSet(tuple(np.flatnonzero(rng.random(p) < 0.5) + 1), p)
        assert weak_decomposability_slack(l1, S, b) == pytest.approx(0.0, abs=1e-12)
    g = GroupNorm([(1, 2, 3), (4, 5, 6)], p=p)
    for _ in range(200):
        b = rng.standard_normal(p)
        assert abs(weak_decomposability_slack(g, IndexSet((1, 2, 3), p), b)) <= 1e-12
    cone = ConeStructuredNorm(MonotoneCone(p))
    for s in (1, 2, 4):
        S = IndexSet(tuple(range(1, s + 1)), p)
        for _ in range(300):
            b = rng.standard_normal(p)
            assert weak_decomposability_slack(cone, S, b) >= -1e-9


def test_smallest_allowed_superset():
    g = GroupNorm([(1, 2), (3, 4)], p=4)
    assert g.smallest_allowed_superset(IndexSet((1,), 4)).indices == (1, 2)
    c = ConeStructuredNorm(MonotoneCone(4))
    assert c.smallest_allowed_superset(IndexSet((3,), 4)).indices == (1, 2, 3)
    t = TrivialGroupNorm((1, 2), 4)
    assert t.smallest_allowed_superset(IndexSet((4,), 4)).indices == (1, 2, 4)
    assert L1Norm(4).smallest_allowed_superset(IndexSet((2,), 4)).indices == (2,)


def test_json_round_trip():
    rng = np.random.default_rng(6)
    b = rng.standard_normal(6)
    for norm in all_families(6):
        clone = norm_from_json(norm.to_json(), p=6)
        assert clone.value(b) == pytest.approx(norm.value(b), rel=1e-12)
        assert clone.dual(b) == pytest.approx(norm.dual(b), rel=1e-12)
    with pytest.raises(ValueError):
        norm_from_json({"family": "ridge"})
