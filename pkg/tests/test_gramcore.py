import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from innerbounds.gramcore import (GramError, Instance, VectorFamily, gram_from_matrix, gram_matrix, inner_product,
                                  projection_data)

from conftest import rel_close

cnum = st.complex_numbers(max_magnitude=10.0, allow_nan=False, allow_infinity=False)


@st.composite
def families(draw, max_n=4, max_d=4):
    n = draw(st.integers(1, max_n))
    d = draw(st.integers(1, max_d))
    rows = [draw(st.lists(cnum, min_size=d, max_size=d)) for _ in range(n)]
    return VectorFamily.from_vectors(rows)


def test_inner_product_examples():
    assert inner_product([1, 0], [0, 1]) == 0
    assert inner_product([1 + 1j, 0], [1 + 1j, 0]) == 2
    assert inner_product([1, 2j], [3, 1]) == 3 + 2j


def test_inner_product_rejects_bad_input():
    with pytest.raises(GramError, match="dimension"):
        inner_product([1, 2], [1])
    with pytest.raises(GramError):
        inner_product([1, float("nan")], [1, 1])
    with pytest.raises(GramError):
        inner_product([1, complex(0, float("inf"))], [1, 1])


@given(st.lists(cnum, min_size=1, max_size=5), st.data())
def test_inner_product_conjugate_symmetric(u, data):
    v = data.draw(st.lists(cnum, min_size=len(u), max_size=len(u)))
    assert inner_product(v, u) == inner_product(u, v).conjugate()


def test_inner_product_linear_in_first_argument():
    u, w, v = [1 + 2j, -1j], [0.5, 3], [2 - 1j, 1 + 1j]
    t = 2 - 3j
    lhs = inner_product([t * a + b for a, b in zip(u, w)], v)
    assert abs(lhs - (t * inner_product(u, v) + inner_product(w, v))) < 1e-12


def test_gram_matrix_examples():
    g = gram_matrix(VectorFamily.from_vectors([[1, 0], [0, 1]]))
    assert np.array_equal(g.g, np.eye(2))
    assert g.abs_row_sums.tolist() == [1, 1] and g.total_abs_sum == 2
    g = gram_matrix(VectorFamily.from_vectors([[1, 0], [1, 0]]))
    assert np.array_equal(g.g, np.ones((2, 2)))
    assert g.abs_row_sums.tolist() == [2, 2] and g.total_abs_sum == 4
    g = gram_matrix(VectorFamily.from_vectors([[2, 0]]))
    assert g.g.tolist() == [[4]] and g.abs_row_sums.tolist() == [4] and g.total_abs_sum == 4


def test_family_validation():
    with pytest.raises(GramError):
        VectorFamily.from_vectors([])
    with pytest.raises(GramError):
        VectorFamily.from_vectors([[1, 2], [1]])


def test_gram_from_matrix_examples():
    g = gram_from_matrix(np.eye(3))
    assert g.abs_row_sums.tolist() == [1, 1, 1] and g.total_abs_sum == 3
    g = gram_from_matrix([[1, 0.5], [0.5, 1]])
    assert g.abs_row_sums.tolist() == [1.5, 1.5] and g.total_abs_sum == 3
    g = gram_from_matrix([[1, 1j], [-1j, 1]])
    assert g.abs_row_sums.tolist() == [2, 2] and g.total_abs_sum == 4


def test_gram_from_matrix_errors():
    with pytest.raises(GramError, match="square"):
        gram_from_matrix([[1, 2, 3], [4, 5, 6]])
    with pytest.raises(GramError, match=r"\[0\]\[1\]|\[1\]\[0\]"):
        gram_from_matrix([[1, 0.5], [0.2, 1]])


def test_gram_from_matrix_symmetrizes_small_deviation():
    g = gram_from_matrix([[1, 0.5 + 1e-12], [0.5, 1]])
    assert g.g[0, 1] == g.g[1, 0].conjugate()
    assert np.all(np.isreal(np.diag(g.g)))


def test_projection_examples():
    fam = VectorFamily.from_vectors([[1, 0], [0, 1]])
    pd = projection_data([1, 0], fam)
    assert pd.proj.tolist() == [1, 0] and pd.norm_x_sq == 1
    pd = projection_data([1, 1], fam)
    assert pd.proj.tolist() == [1, 1] and pd.norm_x_sq == 2
    pd = projection_data([0, 0], fam)
    assert pd.proj.tolist() == [0, 0] and pd.norm_x_sq == 0
    with pytest.raises(GramError):
        projection_data([1, 0, 0], fam)


def test_instance_is_immutable():
    inst = Instance.from_coordinates_data([1, 0], [[1, 0], [0, 1]], [1, 2])
    with pytest.raises(ValueError):
        inst.c[0] = 5
    with pytest.raises(ValueError):
        inst.gram.g[0, 0] = 5


@given(families())
def test_gram_hermitian_psd(fam):
    g = gram_matrix(fam)
    assert np.array_equal(g.g, g.g.conj().T)
    assert np.all(np.diag(g.g).imag == 0) and np.all(np.diag(g.g).real >= 0)
    assert np.all(g.abs_row_sums >= np.abs(np.diag(g.g)))
    assert rel_close(g.total_abs_sum, float(np.sum(g.abs_row_sums)), 1e-12, 1e-300)
    eig = np.linalg.eigvalsh(g.g)
    assert eig.min() >= -1e-9 * max(np.trace(g.g).real, 1e-300)


@given(families(), st.integers(0, 2 ** 32 - 1))
def test_row_sums_unitary_invariant(fam, seed):
    rng = np.random.default_rng(seed)
    d = fam.d
    u, _ = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    rotated = VectorFamily.from_vectors([u @ y for y in fam.vectors])
    r0, r1 = gram_matrix(fam).abs_row_sums, gram_matrix(rotated).abs_row_sums
    scale = max(float(r0.max()), 1e-300)
    assert np.all(np.abs(r0 - r1) <= 1e-9 * np.maximum(r0, 1e-6 * scale))


@given(families(), cnum.filter(lambda z: 1e-3 < abs(z)))
def test_scaling_family(fam, u):
    g0 = gram_matrix(fam)
    g1 = gram_matrix(VectorFamily.from_vectors([u * y for y in fam.vectors]))
    s = abs(u) ** 2
    assert rel_close(g1.total_abs_sum, s * g0.total_abs_sum, 1e-9, 1e-300)
    for a, b in zip(g1.abs_row_sums, g0.abs_row_sums):
        assert rel_close(a, s * b, 1e-9, 1e-12 * s * g0.total_abs_sum + 1e-300)


@given(families())
def test_gram_from_matrix_roundtrip(fam):
    g = gram_matrix(fam)
    g2 = gram_from_matrix(g.g)
    assert np.array_equal(g2.abs_row_sums, g.abs_row_sums)
    assert g2.total_abs_sum == g.total_abs_sum
