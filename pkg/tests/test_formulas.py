from fractions import Fraction

from innerbounds import formulas as fm
from innerbounds.exponents import BRANCHES
from innerbounds.formulas import Atom, Source


def test_exactly_three_printed_forms_differ():
    diff = {k for k, v in fm.discrepancies().items() if v}
    assert diff == {(Source.LEMMA21, 4), (Source.THM41, 4), (Source.THM41, 6)}


def test_coefficient_level_branch4_exponent():
    # printed carries 1/(beta q) on the row-sum power, composition gives 1/(beta p)
    printed = dict(fm.printed(4, Source.LEMMA21))
    derived = dict(fm.derived(BRANCHES[3]))
    assert printed[Atom.RPOW_BETA] == fm.B * fm.Q
    assert derived[Atom.RPOW_BETA] == fm.B * fm.U


def test_thm41_branch6_row_max_exponent():
    printed = dict(fm.printed(6, Source.THM41))
    derived = dict(fm.derived(BRANCHES[5], Source.THM41))
    assert printed[Atom.R] == fm.U * Fraction(1, 2)
    assert derived[Atom.R] == fm.Q * Fraction(1, 2)


def test_thm41_is_half_of_thm31():
    for b in BRANCHES:
        assert fm.derived(b, Source.THM41) == fm.scaled(fm.derived(b, Source.THM31), Fraction(1, 2))


def test_branch1_collapses_to_amax_squared_times_S():
    assert fm.derived(BRANCHES[0]) == fm.formula(((Atom.AMAX, fm.ONE * 2), (Atom.S, fm.ONE)))


def test_needs_secondary_pairs():
    for b in BRANCHES:
        assert fm.needs(fm.derived(b)) == (b.needs_ab, b.needs_gd)


def test_poly_arithmetic():
    assert fm.U + fm.Q == fm.ONE
    assert fm.A * fm.U + fm.B * fm.U == fm.U
    assert str(fm.ONE + fm.U * -1) == "1 + -1*1/p"
    assert fm.Q.evaluate(0.25, 0, 0) == 0.75


def test_compiled_cache_is_shared():
    assert fm.compile_formula(fm.derived(BRANCHES[4])) is fm.derived_compiled(BRANCHES[4])
