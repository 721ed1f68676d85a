from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toricroof.adelic import (
    ARCH,
    Canonical,
    DivisorSpec,
    Place,
    PsiMetric,
    RoofMetric,
    SmoothMetric,
    global_roof,
    psi_S,
    validate,
)
from toricroof.builders import SubtorusData, subtorus_fs
from toricroof.concave import CellwisePA, RoofFn, psi_eval, roof_eval, subdifferential_psi
from toricroof.exactnum import LogValue, value_sign
from toricroof.geometry import hull

F = Fraction
L2, L3 = LogValue.log(2), LogValue.log(3)
ZERO = LogValue()
SEG3 = hull([(0,), (3,)])
SQUARE = hull([(0, 0), (1, 0), (0, 1), (1, 1)])


def roof(pts, hs, dom=None):
    return RoofMetric(RoofFn(list(zip(pts, hs)), dom))


def cubic_spec():
    pts = [(0,), (1,), (2,), (3,)]
    spec = DivisorSpec(1, SEG3)
    spec.add(ARCH, roof(pts, [ZERO, 2 * L2, -L3, -L2]))
    spec.add(Place(2), roof(pts, [ZERO, -2 * L2, ZERO, L2]))
    spec.add(Place(3), roof(pts, [ZERO, ZERO, L3, ZERO]))
    return spec


def quadric_spec():
    pts = [(0, 0), (1, 0), (0, 1), (1, 1)]
    spec = DivisorSpec(2, SQUARE)
    spec.add(ARCH, roof(pts, [ZERO, L2, 2 * L2, ZERO]))
    spec.add(Place(2), roof(pts, [ZERO, -L2, -2 * L2, ZERO]))
    return spec


# -- places -------------------------------------------------------------------


def test_place_labels_and_parse():
    assert Place.parse("inf") == ARCH and ARCH.label() == "inf"
    assert Place.parse("p:7") == Place(7) and Place(7).label() == "p:7"
    with pytest.raises(ValueError):
        Place(6)
    with pytest.raises(ValueError):
        Place.parse("q:2")


def test_local_absolute_values():
    assert Place(2).log_abs(F(1, 4)) == 2 * L2
    assert Place(2).log_abs(F(3, 8)) == 3 * L2
    assert ARCH.log_abs(F(-1, 3)) == -L3
    assert Place(5).log_abs(7) == 0


@given(st.fractions(max_denominator=500).filter(lambda q: q != 0))
def test_product_formula(q):
    from sympy import factorint

    primes = set(factorint(abs(q.numerator))) | set(factorint(q.denominator))
    total = ARCH.log_abs(q)
    for p in primes:
        total = total + Place(p).log_abs(q)
    assert total.is_zero()


# -- validation ---------------------------------------------------------------


def test_canonical_spec_valid():
    spec = DivisorSpec(2, SQUARE).add(ARCH, Canonical())
    assert validate(spec).ok


def test_domain_mismatch():
    spec = DivisorSpec(1, SEG3).add(ARCH, roof([(0,), (2,)], [ZERO, L2]))
    rep = validate(spec)
    assert not rep.ok and any("domain mismatch" in e for e in rep.errors)


def test_smooth_at_finite_place_rejected():
    spec = DivisorSpec(1, hull([(0,), (1,)])).add(Place(2), SmoothMetric(((0,), (1,)), (1, 1)))
    rep = validate(spec)
    assert any("smooth data only at the Archimedean place" in e for e in rep.errors)


def test_duplicate_place_rejected():
    spec = cubic_spec()
    spec.add(Place(3), Canonical())
    assert any("listed twice" in e for e in validate(spec).errors)


def test_semipositive_flag_checked_against_psi():
    psi = CellwisePA.from_1d([0, 99, 100, 101], [1, 0, 1, -1, 0], ZERO)
    spec = DivisorSpec(1, hull([(0,), (1,)])).add(ARCH, PsiMetric(psi))
    assert any("not concave" in e for e in validate(spec).errors)
    spec.semipositive = False
    assert validate(spec).ok


# -- global roof --------------------------------------------------------------


def test_cubic_global_roof():
    th = global_roof(cubic_spec())
    assert [roof_eval(th, (x,)) for x in range(4)] == [ZERO, F(7, 3) * L2 + F(1, 2) * L3, F(7, 6) * L2 + L3, ZERO]


def test_canonical_global_roof_is_zero():
    th = global_roof(DivisorSpec(2, SQUARE))
    assert all(v == 0 for v in th.vertex_values.values())


def test_quadric_global_max():
    assert global_roof(quadric_spec()).max_value() == F(3, 2) * L2


def test_smooth_needs_solver():
    spec = DivisorSpec(1, hull([(0,), (1,)])).add(ARCH, SmoothMetric(((0,), (1,)), (1, 1)))
    with pytest.raises(ValueError, match="smoothsolve"):
        global_roof(spec)


def test_adding_canonical_entry_changes_nothing():
    a = global_roof(cubic_spec())
    spec = cubic_spec().add(Place(5), Canonical())
    b = global_roof(spec)
    assert all(roof_eval(a, (F(k, 2),)) == roof_eval(b, (F(k, 2),)) for k in range(7))


@given(st.sampled_from([F(1, 3), F(1, 2), F(2, 3)]))
def test_splitting_a_place(share):
    th2 = roof([(0,), (1,), (2,), (3,)], [ZERO, -2 * L2, ZERO, L2])
    whole = DivisorSpec(1, SEG3).add(Place(2), th2, 2)
    split = DivisorSpec(1, SEG3).add(Place(2), th2, 2 * share).add(Place(7), th2, 2 - 2 * share)
    a, b = global_roof(whole), global_roof(split)
    for k in range(13):
        x = (F(k, 4),)
        assert roof_eval(a, x) == roof_eval(b, x)


@given(st.integers(-3, 3), st.integers(-2, 2), st.sampled_from([F(1, 2), F(1), F(5, 2)]))
def test_single_place_max_is_minus_psi_at_zero(c, e, w):
    psi = CellwisePA.from_affine_min([((0,), LogValue(c)), ((1,), LogValue(0, {3: e})), ((2,), L2)])
    spec = DivisorSpec(1, hull([(0,), (2,)])).add(Place(3), PsiMetric(psi), w)
    assert global_roof(spec).max_value() == -w * psi((F(0),))


# -- psi_S ----------------------------------------------------------------------


def smooth_curve_spec():
    return subtorus_fs(SubtorusData([(1,), (2,)], [1, F(1, 4), F(1, 2)])).spec


def test_psi_s_of_smooth_curve():
    th = psi_S(smooth_curve_spec())
    for k in range(-12, 13):
        u = F(k, 4) * L2
        cands = [ZERO, u - 2 * L2, 2 * u - L2]
        best = cands[0]
        for c in cands[1:]:
            if value_sign(c - best) < 0:
                best = c
        assert psi_eval(th, (u,)) == best


@pytest.mark.parametrize(
    "u, want",
    [
        (-2 * L2, [(2,)]),
        (-L2, [(1,), (2,)]),
        (F(1, 2) * L2, [(1,)]),
        (2 * L2, [(0,), (1,)]),
        (3 * L2, [(0,)]),
    ],
)
def test_smooth_curve_subdifferential(u, want):
    assert subdifferential_psi(psi_S(smooth_curve_spec()), (u,)) == hull(want)


def test_psi_s_without_finite_places():
    spec = DivisorSpec(2, SQUARE).add(ARCH, SmoothMetric(((0, 0), (1, 0), (0, 1), (1, 1)), (1, 1, 1, 1)))
    th = psi_S(spec)
    for u in [(F(1), F(-2)), (F(0), F(0)), (F(-1), F(3))]:
        assert psi_eval(th, u) == min(sum(a * b for a, b in zip(v, u)) for v in SQUARE.vertices)
