# tests/test_operators.py
import math

import numpy as np
import pytest
from scipy import integrate

from arith_core import CoefficientStream
from multipliers import EvalParams, MultiplierSpec, eval_multiplier
from operators import (
    LatticeFunction,
    SWParams,
    apply_fractional,
    apply_multiplier_operator,
    apply_stein_weiss,
    circulant_l2_norm,
    continuous_majorant,
    family_members,
    fractional_range_holds,
    lp_norm,
    majorization_constant,
    multiplier_range_holds,
    operator_ratio_scan,
    reflect,
    scan_growth,
    stein_weiss_at,
    sw_conditions_check,
    sw_exponent_balance,
    sw_operator,
    twisted_range_holds,
)
from utils.errors import ValidationError


def _point_mass(n=0):
    return LatticeFunction.from_values([1.0], origin=n)


# ---------- lattice functions ----------
def test_lattice_function_geometry():
    f = LatticeFunction.from_values([1, 2, 3], origin=2)
    assert f.box == ((2, 4),)
    assert f.at(3) == 2 and f.at(5) == 0 and f.at(-1) == 0
    padded = f.on_box(((0, 6),))
    assert padded.values.real.tolist() == [0, 0, 1, 2, 3, 0, 0]


def test_reflect():
    g = reflect(LatticeFunction.from_values([1, 2, 3], origin=2))
    assert g.origin == (-4,)
    assert [g.at(n) for n in (-4, -3, -2)] == [3, 2, 1]


def test_lattice_function_validation():
    with pytest.raises(ValidationError):
        LatticeFunction(np.ones((2, 2)), (0, 0), (1,))


@pytest.mark.parametrize("p,expected", [(1, 7.0), (2, 5.0), (math.inf, 4.0)])
def test_lp_norm(p, expected):
    assert lp_norm(LatticeFunction.from_values([3.0, -4.0]), p) == pytest.approx(expected)


def test_lp_norm_edge_cases():
    assert lp_norm(LatticeFunction.from_values([0.0, 0.0]), 2) == 0.0
    assert lp_norm(LatticeFunction.from_values([1e200, 1e200]), 3) == pytest.approx(1e200 * 2 ** (1 / 3))
    with pytest.raises(ValidationError):
        lp_norm(LatticeFunction.from_values([1.0]), 0.5)


# ---------- fractional operators ----------
def test_square_fractional_integral_of_point_mass():
    out = apply_fractional(_point_mass(), CoefficientStream.power(2), 0.6, n_max=20)
    assert out.at(9) == pytest.approx(3 ** -0.6)
    assert out.at(4) == pytest.approx(2 ** -0.6)
    assert out.at(2) == 0 and out.at(0) == 0


def test_pentagonal_and_ideal_norm_operators():
    pent = apply_fractional(_point_mass(), CoefficientStream.pentagonal(), 0.5, n_max=10)
    assert pent.at(2) == pytest.approx(-1 / math.sqrt(2))
    field = apply_fractional(_point_mass(), CoefficientStream.ideal_norm(-4), 0.5, n_max=10)
    assert field.at(2) == pytest.approx(1 / math.sqrt(2))
    assert field.at(3) == 0


def test_fractional_operator_is_a_shifted_convolution():
    f = LatticeFunction.from_values([1.0, -2.0, 0.5], origin=-1)
    out = apply_fractional(f, CoefficientStream.ones(), 0.3, n_max=16)
    for n in range(-1, 18):
        expected = sum(f.at(n - j) * j ** -0.3 for j in range(1, 17))
        assert out.at(n) == pytest.approx(expected, abs=1e-12)


def test_fractional_operator_is_linear():
    f = LatticeFunction.from_values([1.0, 2.0, -1.0], origin=0)
    g = LatticeFunction.from_values([0.5, 0.0, 3.0, 1.0], origin=2)
    stream = CoefficientStream.power(2)
    lhs = apply_fractional(f.combine(g, 2.0, -3.0), stream, 0.7, n_max=30)
    rhs = apply_fractional(f, stream, 0.7, n_max=30).combine(apply_fractional(g, stream, 0.7, n_max=30), 2.0, -3.0)
    for n in range(-2, 40):
        assert lhs.at(n) == pytest.approx(rhs.at(n), abs=1e-12)


def test_twisted_multiplier_operator(chi4):
    out = apply_multiplier_operator(_point_mass(), MultiplierSpec.twisted(0.75, chi4), n_max=30)
    assert out.at(1) == pytest.approx(1.0)
    assert out.at(9) == pytest.approx(-(3 ** -0.75))
    assert out.at(25) == pytest.approx(5 ** -0.75)
    assert out.at(4) == 0


def test_fractional_rejects_nonpositive_s():
    with pytest.raises(ValidationError):
        apply_fractional(_point_mass(), CoefficientStream.ones(), 0.0, n_max=4)


# ---------- circulant norms ----------
def test_circulant_norm_small_cases():
    assert circulant_l2_norm(CoefficientStream.custom([0, 1, 1]), 0.0, 2, EvalParams(n_max=2)) == pytest.approx(2.0)
    assert circulant_l2_norm(CoefficientStream.custom([0, 1]), 0.0, 8, EvalParams(n_max=1)) == pytest.approx(1.0)


@pytest.mark.parametrize("s", [0.6, 0.75])
@pytest.mark.parametrize("name", ["power", "pentagonal", "ideal_norm"])
def test_circulant_norm_is_max_of_multiplier_on_grid(name, s):
    G = 4096
    params = EvalParams(n_max=500)
    if name == "power":
        spec, stream = MultiplierSpec.power(s, 2), CoefficientStream.power(2)
    elif name == "pentagonal":
        spec, stream = MultiplierSpec.pentagonal(s), CoefficientStream.pentagonal()
    else:
        spec, stream = MultiplierSpec.quadratic_field(s, -4), CoefficientStream.ideal_norm(-4)
    expected = max(abs(eval_multiplier(spec, j / G, params)) for j in range(G))
    norm = circulant_l2_norm(stream, s, G, params, phase_power=spec.phase_power)
    assert norm == pytest.approx(expected, abs=1e-9)


# ---------- Stein-Weiss ----------
def test_stein_weiss_one_dimensional_point_mass():
    params = SWParams((0.5,), 0.25, 0.25, 2.0, 2.0)
    f = LatticeFunction.delta(2)
    expected = 4 ** -0.25 * 2 ** -0.25 * 2 ** -0.5
    assert stein_weiss_at(f, params, 4) == pytest.approx(expected)


def test_stein_weiss_product_of_two_lines():
    params = SWParams((0.5, 0.5), 0.0, 0.0, 2.0, 2.0)
    f = LatticeFunction.delta((1, 1))
    assert stein_weiss_at(f, params, (3, 2)) == pytest.approx(2 ** -0.5)
    # equal coordinate in one factor: the term is skipped
    assert stein_weiss_at(f, params, (1, 2)) == 0


def test_stein_weiss_on_a_plane_factor():
    params = SWParams((1.0,), 0.5, 0.0, 2.0, 2.0)
    f = LatticeFunction.delta((1, 1), dims=(2,))
    # |(4, 5) - (1, 1)| = 5 and alpha - N = -1
    assert stein_weiss_at(f, params, (4, 5)) == pytest.approx(0.2 * 41 ** -0.25)


def test_stein_weiss_drops_the_origin():
    params = SWParams((0.5,), 0.0, 0.0, 2.0, 2.0)
    f = LatticeFunction.from_values([5.0, 1.0], origin=0)
    assert stein_weiss_at(f, params, 3) == pytest.approx(2 ** -0.5)
    out = apply_stein_weiss(f, params, eval_box=((-2, 2),))
    assert out.at(0) == 0
    with pytest.raises(ValidationError):
        stein_weiss_at(f, params, 0)


def test_stein_weiss_alpha_must_fit_dimension():
    with pytest.raises(ValidationError):
        apply_stein_weiss(_point_mass(1), SWParams((1.0,), 0.0, 0.0, 2.0, 2.0))
    with pytest.raises(ValidationError):
        SWParams((0.5,), 0.0, 0.0, 3.0, 2.0)


def test_stein_weiss_is_two_sided_fractional_integral():
    f = LatticeFunction.from_values([1.0, 2.0, 0.0, -1.0, 3.0], origin=1)
    out = apply_stein_weiss(f, SWParams((0.4,), 0.0, 0.0, 2.0, 2.0), eval_box=((-6, 12),))
    ones = CoefficientStream.ones()
    right = apply_fractional(f, ones, 0.6, n_max=40)
    left = reflect(apply_fractional(reflect(f), ones, 0.6, n_max=40))
    both = right.combine(left)
    for n in range(-6, 13):
        if n != 0:
            assert out.at(n) == pytest.approx(both.at(n), abs=1e-12)


def test_stein_weiss_factor_permutation():
    rng = np.random.default_rng(5)
    values = rng.normal(size=(3, 4))
    f = LatticeFunction(values.astype(np.complex128), (1, 1), (1, 1))
    g = LatticeFunction(values.T.astype(np.complex128), (1, 1), (1, 1))
    out_f = apply_stein_weiss(f, SWParams((0.3, 0.6), 0.1, 0.2, 2.0, 2.0), eval_box=((-2, 4), (-3, 5)))
    out_g = apply_stein_weiss(g, SWParams((0.6, 0.3), 0.1, 0.2, 2.0, 2.0), eval_box=((-3, 5), (-2, 4)))
    np.testing.assert_allclose(out_g.values, out_f.values.T, atol=1e-12)


def test_sup_norm_weights():
    f = LatticeFunction.delta((2, 1), dims=(2,))
    params = SWParams((1.0,), 0.0, 0.5, 2.0, 2.0)
    euclid = stein_weiss_at(f, params, (5, 5))
    sup = stein_weiss_at(f, params, (5, 5), norm="sup")
    assert sup / euclid == pytest.approx((math.sqrt(5) / 2) ** 0.5)


# ---------- continuous majorant ----------
def test_majorant_closed_form():
    params = SWParams((0.5,), 0.0, 0.0, 2.0, 2.0)
    value = continuous_majorant(LatticeFunction.delta(1), params, 3.0)
    assert value == pytest.approx(2 * (math.sqrt(2.5) - math.sqrt(1.5)), rel=1e-12)
    assert value == pytest.approx(0.712788, abs=1e-6)


def test_majorant_inside_the_singular_cell():
    params = SWParams((0.5,), 0.0, 0.0, 2.0, 2.0)
    value = continuous_majorant(LatticeFunction.delta(1), params, 1.2)
    assert value == pytest.approx(2 * (math.sqrt(0.7) + math.sqrt(0.3)), rel=1e-12)


def test_majorant_with_weights_matches_quadrature():
    params = SWParams((0.5,), 0.2, 0.3, 2.0, 2.0)
    value = continuous_majorant(LatticeFunction.delta(1), params, 3.0)
    ref, _ = integrate.quad(lambda y: abs(y) ** -0.3 * abs(3.0 - y) ** -0.5, 0.5, 1.5, epsabs=1e-14)
    assert value == pytest.approx(3.0 ** -0.2 * ref, rel=1e-9)


def test_majorant_rejects_support_points_and_origin():
    params = SWParams((0.5,), 0.0, 0.0, 2.0, 2.0)
    with pytest.raises(ValidationError):
        continuous_majorant(LatticeFunction.delta(1), params, 1.0)
    with pytest.raises(ValidationError):
        continuous_majorant(LatticeFunction.delta(1), params, 0.0)


def test_majorization_constant_is_finite():
    params = SWParams((0.5,), 0.0, 0.0, 2.0, 2.0)
    C, table = majorization_constant(LatticeFunction.delta(1), params, samples_per_point=3, seed=2,
                                     eval_box=((-3, 3),))
    assert len(table) == 6 * 3
    assert 0 < C < 5


# ---------- conditions and ranges ----------
def test_hardy_littlewood_sobolev_endpoint_holds():
    ok, report = sw_conditions_check(SWParams((0.5,), 0.0, 0.0, 4 / 3, 4.0), (1,))
    assert ok
    assert report["holds"].all()


def test_product_conditions_example():
    ok, _ = sw_conditions_check(SWParams((0.5, 0.5), 0.0, 0.0, 1.3333, 4.0), (1, 1))
    assert ok


def test_negative_weight_sum_fails():
    ok, report = sw_conditions_check(SWParams((0.5,), -0.05, -0.05, 4 / 3, 4.0), (1,))
    assert not ok
    row = report[report["condition"] == "gamma + delta >= 0"].iloc[0]
    assert not row["holds"]


def test_exponent_balance():
    assert sw_exponent_balance((0.5,), 0.0, 0.0, 4 / 3, (1,)) == pytest.approx(4.0)
    with pytest.raises(ValidationError):
        sw_exponent_balance((0.6,), 0.0, 0.0, 2.0, (1,))


@pytest.mark.parametrize("s,p,q,expected", [(0.5, 1.5, 3.0, False), (0.5, 1.25, 4.0, True), (1.2, 1.25, 4.0, False)])
def test_fractional_range(s, p, q, expected):
    assert fractional_range_holds(s, p, q) is expected


def test_twisted_and_multiplier_ranges():
    assert twisted_range_holds(0.4, 2.0, 4.0)
    assert not twisted_range_holds(0.6, 2.0, 4.0)
    assert multiplier_range_holds(8.0, 1.6, 4.0)
    assert not multiplier_range_holds(8.0, 2.0, 2.0)
    assert not multiplier_range_holds(4.0, 2.0, 2.5)


# ---------- boundedness scans ----------
def test_family_members():
    assert len(family_members("delta", 8)) == 1
    box = family_members("box", 8, ndim=2)[0]
    assert box.values.shape == (8, 8) and box.origin == (1, 1)
    signs = family_members("random_signs", 16, members=3, seed=4)
    again = family_members("random_signs", 16, members=3, seed=4)
    assert len(signs) == 3
    assert all(np.array_equal(a.values, b.values) for a, b in zip(signs, again))
    assert all(a.values.any() for a in signs)
    with pytest.raises(ValidationError):
        family_members("gaussian", 8)


def test_identity_scan_has_unit_ratios():
    table = operator_ratio_scan(lambda f: f, 2.0, 2.0, boxes=(8, 16), members=2, threads=1)
    np.testing.assert_allclose(table["ratio_max"], 1.0)
    assert not table["flagged"].any()
    assert scan_growth(table) == 0.0
    assert set(table["family"]) == {"all", "delta", "box", "power_decay", "random_signs"}


def test_scan_is_thread_independent():
    op = sw_operator(SWParams((0.5,), 0.0, 0.0, 4 / 3, 4.0))
    a = operator_ratio_scan(op, 4 / 3, 4.0, boxes=(8, 16), members=2, seed=9, threads=1)
    b = operator_ratio_scan(op, 4 / 3, 4.0, boxes=(8, 16), members=2, seed=9, threads=4)
    assert a.equals(b)


def test_violated_conditions_grow_faster():
    boxes = (8, 16, 32)
    bad = SWParams((0.5,), -0.1, -0.1, 2.0, 2.0)
    good = SWParams((0.5,), 0.0, 0.0, 4 / 3, 4.0)
    assert not sw_conditions_check(bad, (1,))[0]
    bad_scan = operator_ratio_scan(sw_operator(bad), 2.0, 2.0, boxes=boxes, members=2)
    good_scan = operator_ratio_scan(sw_operator(good), 4 / 3, 4.0, boxes=boxes, members=2)
    assert scan_growth(bad_scan) > 0.3
    assert scan_growth(bad_scan) > scan_growth(good_scan)
    assert bad_scan.loc[bad_scan["family"] == "all", "flagged"].any()


PLANE_PASSING = [(0.0, 0.0, 4 / 3, 4.0), (0.2, 0.1, 2.0, 8.0)]


@pytest.mark.parametrize("gamma,delta,p,q", PLANE_PASSING)
def test_plane_scan_stays_flat_when_conditions_hold(gamma, delta, p, q):
    params = SWParams((0.5, 0.5), gamma, delta, p, q)
    assert sw_conditions_check(params, (1, 1))[0]
    table = operator_ratio_scan(sw_operator(params), p, q, families=("delta", "random_signs"),
                                boxes=(8, 16, 32), ndim=2, members=2, seed=3)
    assert scan_growth(table) < 0.05
    assert not table.loc[table["family"] == "all", "flagged"].any()


@pytest.mark.parametrize("gamma,delta,p,q", PLANE_PASSING)
def test_plane_box_ratios_settle_when_conditions_hold(gamma, delta, p, q):
    # the dropped diagonal terms leave box inputs an O(M^{-1/2}) deficit per factor
    params = SWParams((0.5, 0.5), gamma, delta, p, q)
    table = operator_ratio_scan(sw_operator(params), p, q, families=("box",), boxes=(8, 16, 32), ndim=2)
    growth = table.loc[table["family"] == "box", "growth"].tolist()
    assert growth[2] < growth[1]


def test_plane_scan_grows_when_weights_sum_below_zero():
    params = SWParams((0.5, 0.5), -0.1, -0.1, 4 / 3, 4.0)
    assert not sw_conditions_check(params, (1, 1))[0]
    table = operator_ratio_scan(sw_operator(params), 4 / 3, 4.0, families=("box",), boxes=(8, 16, 32), ndim=2)
    rows = table[(table["family"] == "all") & (table["M"] > 8)]
    assert (rows["growth"] > 0.15).all()
    assert rows["flagged"].all()


def test_sw_operator_rejects_empty_padding():
    with pytest.raises(ValidationError):
        sw_operator(SWParams((0.5,), 0.0, 0.0, 2.0, 2.0), pad=0)


@pytest.mark.slow
def test_pentagonal_cancellation_keeps_the_scan_flat():
    # s = 0.4, p = 2, q = 2.5 sits on 1/q = 1/p - 1/2 + s but outside 1/q <= 1/p - 1 + s
    s, p, q = 0.4, 2.0, 2.5
    assert twisted_range_holds(s, p, q) and not fractional_range_holds(s, p, q)
    boxes = (256, 512, 1024, 2048, 4096)
    pentagonal = CoefficientStream.pentagonal()
    ones = CoefficientStream.ones()
    flat = operator_ratio_scan(lambda f: apply_fractional(f, pentagonal, s), p, q, boxes=boxes, members=2, seed=5)
    plain = operator_ratio_scan(lambda f: apply_fractional(f, ones, s), p, q, boxes=boxes, members=2, seed=5)
    assert scan_growth(flat) < 0.05
    plain_growth = plain[(plain["family"] == "all") & (plain["M"] > boxes[0])]["growth"]
    assert (plain_growth > 0.3).all()
