import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from innerbounds import bounds as bd
from innerbounds.bounds import BoundError, Form
from innerbounds.exponents import BRANCHES, BranchSelector, ConjugatePair, ExponentError, HolderParams, Side
from innerbounds.formulas import Source
from innerbounds.gramcore import (Instance, ProjectionData, VectorFamily, gram_from_matrix, gram_matrix,
                                  projection_data)
from innerbounds.verify import FuzzConfig, random_instance, sample_params

from conftest import orthonormal_instance, rel_close

I2 = gram_from_matrix(np.eye(2))
ONES = gram_from_matrix(np.ones((2, 2)))
HALF = gram_from_matrix([[1, 0.5], [0.5, 1]])
PQ2 = ConjugatePair.from_p(2)
MA, DH, MR = Side.MAX_ALL, Side.DOUBLE_HOLDER, Side.MAX_ROW


def test_norm_squared_expansion_examples():
    assert bd.norm_squared_expansion([1, 1], I2) == 2
    assert bd.norm_squared_expansion([1, -1], ONES) == 0
    assert bd.norm_squared_expansion([1, 1], ONES) == 4


def test_norm_squared_expansion_matches_vector_norm(rng):
    ys = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    a = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    g = gram_matrix(VectorFamily.from_vectors(ys))
    v = (a[:, None] * ys).sum(axis=0)
    assert rel_close(bd.norm_squared_expansion(a, g), float(np.vdot(v, v).real), 1e-12)


def test_norm_squared_expansion_rejects_corrupted_gram():
    bad = bd.GramData._build(np.array([[1, 1j], [1j, 1]]))
    with pytest.raises(BoundError):
        bd.norm_squared_expansion([1, 1], bad)


def test_double_sum_examples():
    assert bd.double_sum_M([1, -1], ONES) == 4
    assert bd.double_sum_M([1, 1], I2) == 2
    assert bd.double_sum_M([0, 0], HALF) == 0


def test_weighted_power_sum_examples():
    assert bd.weighted_power_sum([1, 1], 2, [1, 1]) == 2
    assert bd.weighted_power_sum([2, 0], 3, [1, 5]) == 8
    assert bd.weighted_power_sum([1, 1], 2, [2, 2]) == 4
    with pytest.raises(ExponentError):
        bd.weighted_power_sum([1], 0, [1])


def test_holder_bound_examples():
    assert rel_close(bd.holder_bound([1, 1], I2, PQ2), 2, 1e-15)
    assert rel_close(bd.holder_bound([1, 1], ONES, PQ2), 4, 1e-15)
    one = gram_from_matrix([[4]])
    for p in (1.01, 2, 3.7, 100):
        assert rel_close(bd.holder_bound([1], one, ConjugatePair.from_p(p)), 4, 1e-14)


def test_factor_examples():
    p2 = HolderParams.make(2, 2, 2)
    r2 = math.sqrt(2)
    assert rel_close(bd.factor_p([1, 1], I2, p2, MA), r2, 1e-15)
    assert rel_close(bd.factor_p([1, 1], I2, p2, MR), r2, 1e-15)
    assert rel_close(bd.factor_p([1, 1], I2, p2, DH), 2 ** 0.25 * 2 ** 0.25, 1e-15)
    assert rel_close(bd.factor_q([1, 1], I2, p2, MA), r2, 1e-15)
    assert rel_close(bd.factor_q([1, 3], I2, p2, MR), math.sqrt(10), 1e-15)
    assert rel_close(bd.factor_q([1, 1], I2, p2, DH), r2, 1e-15)
    with pytest.raises(ExponentError):
        bd.factor_p([1, 1], I2, HolderParams.make(2), DH)


def test_branch_bound_examples():
    p2 = HolderParams.make(2, 2, 2)
    assert rel_close(bd.branch_bound([1, 1], I2, p2, BranchSelector(MA, MA)).value, 2, 1e-15)
    assert rel_close(bd.branch_bound([1, 1], I2, p2, BranchSelector(MR, MR)).value, 2, 1e-15)
    v = bd.branch_bound([1, 2], HALF, p2, BranchSelector(DH, MR))
    # direct evaluation of each factor
    r = [1.5, 1.5]
    oracle = (1 + 16) ** 0.25 * (r[0] ** 2 + r[1] ** 2) ** 0.25 * (1 + 4) ** 0.5 * max(r) ** 0.5
    assert rel_close(v.value, oracle, 1e-14)
    assert v.name == "lemma21_branch7" or v.branch == BranchSelector(DH, MR).index
    assert v.form is Form.DERIVED


def test_printed_form_examples():
    coeffs = [1, 2]
    params = HolderParams.make(3, 2, 2)
    for k in (1, 2, 3, 5, 7, 8, 9):
        pv = bd.printed_form_value(Source.LEMMA21, k, coeffs, HALF, params).value
        dv = bd.branch_bound(coeffs, HALF, params, BRANCHES[k - 1]).value
        assert pv == dv
    pv = bd.printed_form_value(Source.LEMMA21, 4, coeffs, HALF, params)
    dv = bd.branch_bound(coeffs, HALF, params, BRANCHES[3])
    assert pv.form is Form.PRINTED and pv.name == "lemma21_branch4_printed"
    # printed (sum r^beta)^(1/(beta q)) against derived ^(1/(beta p)), sum r^2 = 4.5
    s = 1.5 ** 2 * 2
    assert rel_close(pv.value / dv.value, s ** (1 / (2 * 1.5)) / s ** (1 / (2 * 3)), 1e-13)
    t4p = bd.printed_form_value(Source.THM41, 4, coeffs, HALF, params).value
    prof = bd.Profile.of(coeffs, HALF)
    from innerbounds import formulas as fm
    t4d = prof.evaluate(fm.derived(BRANCHES[3], Source.THM41), params)
    assert t4p != t4d


def test_pecaric_examples():
    fam = VectorFamily.from_vectors([[1, 0], [0, 1]])
    pd = projection_data([1, 0], fam)
    g = gram_matrix(fam)
    assert bd.lhs_pecaric(pd, [1, 0]) == 1
    assert bd.pecaric_bound(pd, [1, 0], g) == (1, 1)
    assert bd.pecaric_bound(pd, [0, 0], g) == (0, 0)
    pd = projection_data([1, 1], fam)
    assert bd.lhs_pecaric(pd, [1, 1]) == 4
    assert bd.pecaric_bound(pd, [1, 1], g) == (4, 4)
    assert bd.lhs_pecaric(ProjectionData(np.array([1, 1]), 2), [1, -1]) == 0
    assert rel_close(bd.lhs_pecaric(ProjectionData(np.array([1, 1]), 2), [2, 1j]), 5, 1e-15)


def test_pecaric_self_examples():
    fam = VectorFamily.from_vectors([[1, 0], [0, 1]])
    g = gram_matrix(fam)
    assert bd.pecaric_self(projection_data([1, 0], fam), g) == (1, 1, 1)
    assert bd.pecaric_self(ProjectionData(np.zeros(2), 1.0), g) == (0, 0, 0)
    assert bd.pecaric_self(projection_data([1, 1], fam), g) == (4, 4, 4)


def test_bombieri_examples():
    fam = VectorFamily.from_vectors([[1, 0], [0, 1]])
    g = gram_matrix(fam)
    lhs, b = bd.bombieri_bound(projection_data([0.3, 0.4j], fam), g)
    assert rel_close(b, 0.25, 1e-15) and rel_close(lhs, 0.25, 1e-15)
    assert bd.bombieri_bound(ProjectionData(np.zeros(2), 0.0), g) == (0, 0)
    fam2 = VectorFamily.from_vectors([[1, 0], [1, 0]])
    assert bd.bombieri_bound(projection_data([1, 1], fam2), gram_matrix(fam2)) == (2, 4)


def test_theorem31_examples():
    fam = VectorFamily.from_vectors([[1, 0], [0, 1]])
    g = gram_matrix(fam)
    pd = projection_data([1, 1], fam)
    chain = bd.theorem31_bound(pd, [1, 1], g, HolderParams.make(2), BranchSelector(MR, MR))
    b1, b2 = bd.pecaric_bound(pd, [1, 1], g)
    assert rel_close(chain.branches[0].value, b2, 1e-15)
    assert rel_close(chain.middle, b1, 1e-15)
    zero = bd.theorem31_bound(pd, [0, 0], g, HolderParams.make(3, 2, 2))
    assert zero.lhs == 0 and zero.middle == 0 and all(v.value == 0 for v in zero.branches)
    assert len(zero.branches) == 9


def test_theorem41_examples():
    fam = VectorFamily.from_vectors([[1, 0], [0, 1]])
    g = gram_matrix(fam)
    chain = bd.theorem41_bound(projection_data([1, 0], fam), g, HolderParams.make(2))
    assert rel_close(chain.lhs, 1, 1e-15) and rel_close(chain.middle, 1, 1e-15)
    zero = bd.theorem41_bound(ProjectionData(np.zeros(2), 1.0), g, HolderParams.make(3, 2, 2))
    assert zero.middle == 0 and all(v.value == 0 for v in zero.branches)


def test_remark_examples(rng):
    fam = VectorFamily.from_vectors([[1, 0], [0, 1]])
    g = gram_matrix(fam)
    pd = projection_data([1, 1], fam)
    ratio, bound = bd.remark_ratio(pd, g, ConjugatePair.from_p(3))
    assert rel_close(ratio, 2, 1e-14) and bound == 2
    assert bd.remark_ratio(ProjectionData(np.zeros(2), 3.0), g, PQ2) == (0.0, 3.0)
    inst = random_instance(FuzzConfig(seed=3), 0)
    ratio, _ = bd.remark_ratio(inst.proj, inst.gram, PQ2)
    assert rel_close(ratio, bd.bombieri_bound(inst.proj, inst.gram)[0], 1e-13)


def test_equality_witnesses():
    # orthonormal family, constant-modulus coefficients, p = q = 2: branches 1, 3, 9 are tight
    c = np.exp(1j * np.array([0.3, 1.1, -2.0]))
    g = gram_from_matrix(np.eye(3))
    params = HolderParams.make(2)
    lhs = bd.norm_squared_expansion(c.conj(), g)
    for k in (1, 3, 9):
        assert rel_close(bd.branch_bound(c.conj(), g, params, BRANCHES[k - 1]).value, lhs, 1e-12)


def test_holder_bound_self_conjugate():
    inst = random_instance(FuzzConfig(seed=5), 2)
    for p in (1.3, 2.0, 7.5):
        pair = ConjugatePair.from_p(p)
        assert rel_close(bd.holder_bound(inst.c, inst.gram, pair), bd.holder_bound(inst.c, inst.gram, pair.swapped()),
                         1e-14)


@given(st.integers(0, 10 ** 6), st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False,
                                                   allow_infinity=False))
def test_homogeneity_in_c(seed, t):
    inst = random_instance(FuzzConfig(seed=seed), 0)
    params = sample_params(FuzzConfig(seed=seed), 0)[1]
    scaled = inst.with_c(t * inst.c)
    a = bd.evaluate_ladder(inst, params).as_dict()
    b = bd.evaluate_ladder(scaled, params).as_dict()
    s = abs(t) ** 2
    for name in ("thm31_lhs", "thm31_middle", "pecaric_11a", "pecaric_11b") + tuple(
            f"thm31_branch{k}" for k in range(1, 10)):
        assert rel_close(b[name], s * a[name], 1e-12, 1e-300), name


@given(st.integers(0, 10 ** 6), st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False,
                                                   allow_infinity=False))
def test_homogeneity_in_family(seed, u):
    inst = random_instance(FuzzConfig(seed=seed), 0)
    params = sample_params(FuzzConfig(seed=seed), 0)[2]
    scaled = Instance.from_coordinates_data(inst.x, [u * y for y in inst.family.vectors], inst.c)
    a = bd.evaluate_ladder(inst, params).as_dict()
    b = bd.evaluate_ladder(scaled, params).as_dict()
    s = abs(u) ** 2
    for name in ("thm31_lhs", "thm31_middle", "lemma21_first", "thm41_lhs") + tuple(
            f"lemma21_branch{k}" for k in range(1, 10)):
        assert rel_close(b[name], s * a[name], 1e-9, 1e-300), name
    assert rel_close(b["thm41_middle"], s * a["thm41_middle"], 1e-9, 1e-300)


def test_ladder_without_c_omits_coefficient_entries():
    inst = Instance.from_coordinates_data([1, 0], [[1, 0], [0, 1]])
    lad = bd.evaluate_ladder(inst, HolderParams.make(2, 2, 2))
    names = set(lad.as_dict())
    assert "thm31_middle" not in names and "thm41_middle" in names and "bessel_14" in names
    assert any("coefficients" in note for note in lad.notes)


def test_ladder_notes_non_orthonormal():
    inst = Instance.from_coordinates_data([1, 0], [[1, 0], [1, 1]], [1, 1])
    lad = bd.evaluate_ladder(inst, HolderParams.make(2, 2, 2))
    assert "bessel_14" not in lad.as_dict()
    assert any("orthonormal" in note for note in lad.notes)


def test_ladder_printed_columns():
    inst = random_instance(FuzzConfig(seed=1), 4)
    lad = bd.evaluate_ladder(inst, HolderParams.make(3, 2, 2), printed=True)
    v = lad.as_dict()
    for src in ("lemma21", "thm31", "thm41"):
        for k in range(1, 10):
            assert f"{src}_branch{k}_printed" in v
    assert v["thm31_branch1_printed"] == v["thm31_branch1"]


def test_zero_rows_and_single_vector():
    inst = Instance.from_coordinates_data([1, 2], [[0, 0], [1, 0]], [3, 1j])
    lad = bd.evaluate_ladder(inst, HolderParams.make(1.7, 3, 1.2))
    assert all(math.isfinite(x) and x >= 0 for x in lad.as_dict().values())
    one = Instance.from_coordinates_data([1, 1j], [[0.5, 2j]], [1 - 1j])
    v = bd.evaluate_ladder(one, HolderParams.make(4.2, 1.5, 9)).as_dict()
    target = abs(1 - 1j) ** 2 * one.gram.abs_row_sums[0]
    for k in range(1, 10):
        assert rel_close(v[f"lemma21_branch{k}"], target, 1e-13)


def test_orthonormal_detection(rng):
    inst = orthonormal_instance(rng, 3, 5)
    assert bd.is_orthonormal(inst.gram)
    assert not bd.is_orthonormal(gram_from_matrix([[1, 0.1], [0.1, 1]]))
