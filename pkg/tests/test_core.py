import numpy as np
import pytest

from sparsenorms.core import (
    CsvParseError,
    DesignMatrix,
    DimensionError,
    IndexSet,
    NoiseModel,
    load_matrix,
    load_vector,
    normalized_norm,
    restrict,
    support,
)


def test_normalized_norm_zero():
    assert normalized_norm(np.zeros(5)) == 0.0


def test_normalized_norm_all_ones():
    assert normalized_norm(np.ones(4)) == 1.0


def test_normalized_norm_design_column(ex2_first):
    # third column of the 2x3 example design is sqrt(n) * e_1
    assert normalized_norm(ex2_first[:, 2]) == pytest.approx(1.0, abs=1e-15)


def test_normalized_norm_homogeneity():
    rng = np.random.default_rng(0)
    for _ in range(200):
        v = rng.standard_normal(rng.integers(1, 30))
        c = float(rng.standard_normal())
        assert normalized_norm(c * v) == pytest.approx(abs(c) * normalized_norm(v), rel=1e-12)


def test_normalized_norm_rejects_empty_and_2d():
    with pytest.raises(DimensionError):
        normalized_norm(np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        normalized_norm(np.zeros(0))


def test_restrict_examples():
    S = IndexSet((1, 3), 3)
    np.testing.assert_array_equal(restrict(np.array([1.0, 2.0, 3.0]), S), [1.0, 0.0, 3.0])
    full = IndexSet((1, 2, 3), 3)
    b = np.array([4.0, -1.0, 0.5])
    np.testing.assert_array_equal(restrict(b, full), b)
    np.testing.assert_array_equal(restrict(b, IndexSet((), 3)), np.zeros(3))


def test_restrict_idempotent_and_decomposition():
    rng = np.random.default_rng(1)
    for _ in range(100):
        p = int(rng.integers(1, 12))
        b = rng.standard_normal(p)
        S = IndexSet(tuple(np.flatnonzero(rng.random(p) < 0.5) + 1), p)
        bs = restrict(b, S)
        np.testing.assert_array_equal(restrict(bs, S), bs)
        np.testing.assert_array_equal(bs + restrict(b, S.complement()), b)


def test_support_exact_zero_semantics():
    assert support(np.array([0.0, 5.0, 0.0])).indices == (2,)
    assert support(np.zeros(3)).indices == ()
    assert support(np.array([1e-300, 0.0, 1.0])).indices == (1, 3)


def test_index_set_validation():
    with pytest.raises(IndexError):
        IndexSet((0,), 3)
    with pytest.raises(IndexError):
        IndexSet((4,), 3)
    S = IndexSet((3, 1, 3), 4)
    assert S.indices == (1, 3)
    assert len(S) == 2
    assert 3 in S and 2 not in S
    assert S.complement().indices == (2, 4)
    assert S.union(IndexSet((2,), 4)).indices == (1, 2, 3)
    assert S.issuperset(IndexSet((1,), 4))


def test_design_matrix_immutable_and_validated():
    D = DesignMatrix(np.eye(2))
    with pytest.raises(ValueError):
        D.X[0, 0] = 5.0
    with pytest.raises(ValueError):
        DesignMatrix(np.array([[np.nan, 1.0]]))
    with pytest.raises(DimensionError):
        DesignMatrix(np.zeros(3))
    np.testing.assert_array_equal(D.column(2), [0.0, 1.0])
    with pytest.raises(IndexError):
        D.column(0)


def test_load_matrix_round_trip(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("1.5,2\n-3,0.25\n")
    D = load_matrix(path)
    np.testing.assert_array_equal(D.X, [[1.5, 2.0], [-3.0, 0.25]])
    assert (D.n, D.p) == (2, 2)


def test_load_matrix_errors(tmp_path):
    ragged = tmp_path / "r.csv"
    ragged.write_text("1,2\n3\n")
    with pytest.raises(CsvParseError) as exc:
        load_matrix(ragged)
    assert exc.value.row == 2
    bad = tmp_path / "b.csv"
    bad.write_text("1,x\n")
    with pytest.raises(CsvParseError) as exc:
        load_matrix(bad)
    assert (exc.value.row, exc.value.col) == (1, 2)


def test_load_vector(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text("1\n2\n3\n")
    np.testing.assert_array_equal(load_vector(path), [1.0, 2.0, 3.0])
    wide = tmp_path / "w.csv"
    wide.write_text("1,2\n3,4\n")
    with pytest.raises(CsvParseError):
        load_vector(wide)


def test_noise_determinism():
    a = NoiseModel(2.0, seed=7).draw(50)
    b = NoiseModel(2.0, seed=7).draw(50)
    assert np.array_equal(a, b)
    c = NoiseModel(2.0, seed=8).draw(50)
    assert not np.array_equal(a, c)
    assert np.array_equal(NoiseModel(0.0, seed=1).draw(10), np.zeros(10))


def test_noise_validation():
    with pytest.raises(ValueError):
        NoiseModel(-1.0)
    with pytest.raises(ValueError):
        NoiseModel(1.0, distribution="cauchy")
    with pytest.raises(DimensionError):
        NoiseModel(1.0).draw(0)
