# tests/test_multipliers.py
import cmath
import math

import mpmath
import numpy as np
import pandas as pd
import pytest

from arith_core import CoefficientStream, kronecker_character
from multipliers import (
    EvalParams,
    MultiplierSpec,
    QuadratureParams,
    RegimeGate,
    T_y_direct,
    epsilon_halving_scan,
    error_law_summary,
    euler_f1_direct,
    eval_multiplier,
    eval_on_grid,
    eval_series,
    heat_kernel_eval,
    lemma1_error_scan,
    lemma1_main_term,
    lemma1_residual_bound,
    lemma2_error_scan,
    lemma2_main_term,
    quadfield_multiplier,
    theta_S_y,
    theta_dual_direct,
    weak_type_exponent,
)
from utils.errors import QuadratureError, ValidationError


def _e(t):
    return cmath.exp(-2j * math.pi * t)


# ---------- specs ----------
@pytest.mark.parametrize("s", [0.0, 1.0, 1.5, -0.2])
def test_multiplier_exponent_must_lie_in_unit_interval(s):
    with pytest.raises(ValidationError):
        MultiplierSpec.power(s, 2)


def test_infinite_stream_needs_truncation():
    with pytest.raises(ValidationError):
        eval_multiplier(MultiplierSpec.power(0.5, 2), 0.3, EvalParams())


def test_eval_multiplier_rejects_x_outside_unit_interval():
    with pytest.raises(ValidationError):
        eval_multiplier(MultiplierSpec.power(0.5, 1), 1.5, EvalParams(n_max=10))


# ---------- series values ----------
def test_power_multiplier_at_one_half_is_minus_eta():
    # sum (-1)^m m^{-1/2} = -eta(1/2)
    value = eval_multiplier(MultiplierSpec.power(0.5, 1), 0.5, EvalParams(epsilon=1e-8))
    assert value.real == pytest.approx(-0.604899, abs=1e-4)
    assert abs(value.imag) < 1e-8


def test_twisted_series_at_zero_is_leibniz(chi4):
    value = eval_series(CoefficientStream.twisted(chi4), 1.0, 0.0, EvalParams(n_max=10 ** 6))
    assert value.real == pytest.approx(math.pi / 4, abs=1e-6)


def test_pentagonal_series_closed_form():
    s, x = 0.3, 0.37
    value = eval_multiplier(MultiplierSpec.pentagonal(s), x, EvalParams(n_max=7))
    expected = -_e(x) - _e(2 * x) * 2 ** -s + _e(5 * x) * 5 ** -s + _e(7 * x) * 7 ** -s
    assert value == pytest.approx(expected, abs=1e-14)


def test_twisted_multiplier_sits_on_squares(chi4):
    s, x = 0.75, 0.21
    value = eval_multiplier(MultiplierSpec.twisted(s, chi4), x, EvalParams(n_max=5))
    expected = _e(x) - _e(9 * x) * 3 ** -s + _e(25 * x) * 5 ** -s
    assert value == pytest.approx(expected, abs=1e-14)


def test_large_phases_stay_accurate():
    # n^3 x far beyond 2^30: compare against exact rational reduction
    x = 0.123456789
    n_max = 2000
    value = eval_multiplier(MultiplierSpec.power(0.6, 3), x, EvalParams(n_max=n_max))
    with mpmath.workdps(40):
        xm = mpmath.mpf(x)
        ref = mpmath.fsum(mpmath.expjpi(-2 * m ** 3 * xm) * mpmath.mpf(m) ** -0.6 for m in range(1, n_max + 1))
    assert value == pytest.approx(complex(ref), abs=1e-9)


def test_grid_evaluation_matches_pointwise():
    spec = MultiplierSpec.pentagonal(0.3)
    params = EvalParams(n_max=500)
    G = 64
    grid = eval_on_grid(spec, G, params, offset=0.5, threads=2)
    for j in (0, 7, 31, 63):
        assert grid[j] == pytest.approx(eval_multiplier(spec, (j + 0.5) / G, params), abs=1e-10)


def test_grid_evaluation_is_thread_independent():
    spec = MultiplierSpec.power(0.75, 2)
    params = EvalParams.for_grid(256)
    one = eval_on_grid(spec, 256, params, threads=1)
    four = eval_on_grid(spec, 256, params, threads=4)
    np.testing.assert_allclose(one, four, atol=1e-12)


def test_epsilon_halving_scan_settles():
    table = epsilon_halving_scan(MultiplierSpec.power(0.75, 1), [0.3], epsilon0=1e-4, steps=3)
    assert list(table.columns) == ["x", "epsilon", "n_max", "value", "change"]
    assert len(table) == 3
    assert table["epsilon"].tolist() == pytest.approx([1e-4, 5e-5, 2.5e-5])
    assert np.isnan(table["change"].iloc[0])
    assert table["change"].iloc[1:].max() < 1e-3


# ---------- theta sums ----------
def test_theta_S_y_even_character(chi5_even):
    expected = 2 * (math.exp(-math.pi) - math.exp(-4 * math.pi) - math.exp(-9 * math.pi) + math.exp(-16 * math.pi))
    assert theta_S_y(chi5_even, 0.0, 1.0) == pytest.approx(expected, abs=1e-15)


def test_theta_S_y_vanishes_for_odd_character(chi4):
    assert abs(theta_S_y(chi4, 0.3, 0.1)) < 1e-12


@pytest.mark.parametrize("p,q,delta,y,N,k", [
    (1, 3, 0.001, 0.05, 3, 1),
    (2, 5, -0.002, 0.01, 1, 1),
    (1, 4, 0.0, 0.02, 4, 3),
    (3, 7, 0.0005, 0.003, 7, 2),
])
def test_poisson_dual_of_theta_sum(p, q, delta, y, N, k):
    direct = theta_dual_direct(p, q, delta, y, N, k)
    dual = T_y_direct(p, q, delta, y, N, k=k)
    assert abs(direct - dual) < 1e-9 * max(1.0, abs(direct))


def test_lemma1_main_term_examples():
    main = lemma1_main_term(1, 1, 0.0, 0.01)
    assert main.value == pytest.approx(10.0)
    assert main.in_regime
    # N does not divide q
    assert lemma1_main_term(1, 3, 0.0, 0.01, N=4).value == 0


def test_main_terms_flag_out_of_regime():
    assert not lemma1_main_term(1, 50, 0.0, 0.01).in_regime
    assert not lemma2_main_term(1, 50, 0.0, 0.01).in_regime


def test_regime_gate():
    gate = RegimeGate()
    assert gate.contains(10, 0.0, 0.01)
    assert not gate.contains(11, 0.0, 0.01)
    assert not gate.contains(2, 0.06, 0.01)
    assert gate.max_denominator(0.01) == 10


def test_lemma1_scan_respects_residual_majorant():
    scan = lemma1_error_scan(range(6, 11), moduli=(1, 3, 4), samples_per_level=6, seed=3, threads=2)
    assert len(scan) == 30
    divisible = scan[scan["q"] % scan["N"] == 0]
    for row in divisible.itertuples():
        assert row.scaled <= lemma1_residual_bound(row.q, row.delta, row.y) * (1 + 1e-9) + 1e-12


def test_error_scans_are_reproducible_across_thread_counts():
    a = lemma2_error_scan(range(6, 10), samples_per_level=4, seed=11, threads=1)
    b = lemma2_error_scan(range(6, 10), samples_per_level=4, seed=11, threads=3)
    pd.testing.assert_frame_equal(a, b)


@pytest.mark.slow
@pytest.mark.parametrize("scan", [
    lambda: lemma1_error_scan(range(6, 21), moduli=(1, 3, 4), samples_per_level=14, seed=7),
    lambda: lemma2_error_scan(range(6, 21), samples_per_level=14, seed=7),
], ids=["theta", "euler"])
def test_error_law_holds_over_full_level_range(scan):
    frame = scan()
    assert len(frame) >= 200
    summary = error_law_summary(frame)
    assert summary.bounded
    assert np.isfinite(summary.max_scaled)


def test_euler_f1_direct():
    expected = 1 + math.exp(-7 * math.pi) + math.exp(-5 * math.pi)
    assert euler_f1_direct(0.0, 0.5) == pytest.approx(expected, abs=1e-15)


def test_lemma2_main_term_examples():
    assert lemma2_main_term(1, 1, 0.0, 0.01).value.real == pytest.approx(2.8943, abs=1e-4)
    assert lemma2_main_term(1, 2, 0.0, 0.01).value == 0


def test_lemma2_main_term_approximates_f1_at_cusp():
    y = 2.0 ** -14
    direct = euler_f1_direct(0.0, y)
    main = lemma2_main_term(1, 1, 0.0, y).value
    assert abs(direct - main) * y ** 0.25 < 1e-6


def _law_frame(scaled):
    j = np.arange(6, 12)
    y = 2.0 ** -j
    return pd.DataFrame({"j": j, "y": y, "scaled": scaled(y)})


def test_error_law_summary_detects_bounded_and_growing_residuals():
    flat = error_law_summary(_law_frame(lambda y: np.full_like(y, 0.5)))
    assert flat.bounded and flat.slope == pytest.approx(0.0, abs=1e-12)
    assert flat.max_scaled == pytest.approx(0.5)
    growing = error_law_summary(_law_frame(lambda y: 1e-3 * y ** -0.5))
    assert not growing.bounded and growing.slope == pytest.approx(0.5)


def test_error_law_summary_needs_data():
    with pytest.raises(ValidationError):
        error_law_summary(pd.DataFrame(columns=["j", "y", "scaled"]))


# ---------- heat kernel ----------
def test_heat_kernel_single_term():
    spec = MultiplierSpec.custom(0.5, [0, 1])
    assert heat_kernel_eval(spec, 0.0, EvalParams(n_max=1)) == pytest.approx(1.0, abs=1e-8)


def test_heat_kernel_matches_series():
    spec = MultiplierSpec.pentagonal(0.3)
    params = EvalParams(n_max=200)
    assert heat_kernel_eval(spec, 0.3, params) == pytest.approx(eval_multiplier(spec, 0.3, params), abs=1e-6)


def test_heat_kernel_reports_unmet_tolerance():
    spec = MultiplierSpec.custom(0.5, [0, 1])
    with pytest.raises(QuadratureError) as info:
        heat_kernel_eval(spec, 0.0, EvalParams(n_max=1), QuadratureParams(tolerance=-1.0))
    assert info.value.tolerance == -1.0


# ---------- quadratic fields ----------
def test_quadfield_paths_agree():
    result = quadfield_multiplier(-4, 0.75, 0.3, 10_000)
    assert result.discrepancy < 1e-9
    assert list(result.per_class) == ["(1, 0, 1)"]
    assert result.per_class["(1, 0, 1)"] == pytest.approx(result.value, abs=1e-9)


def test_quadfield_class_split_sums_to_total():
    result = quadfield_multiplier(-23, 0.75, 0.17, 3000)
    assert len(result.per_class) == 3
    assert sum(result.per_class.values()) == pytest.approx(result.value, abs=1e-9)
    assert result.discrepancy < 1e-9


def test_quadfield_against_divisor_sums():
    chi = kronecker_character(-4)
    n_max = 2000
    expected = math.fsum(
        sum(chi(d).real for d in range(1, n + 1) if n % d == 0) * n ** -1.5 for n in range(1, n_max + 1)
    )
    assert quadfield_multiplier(-4, 1.5, 0.0, n_max).value.real == pytest.approx(expected, abs=1e-9)


def test_quadfield_at_zero_approaches_dedekind_zeta():
    value = quadfield_multiplier(-4, 1.5, 0.0, 10_000).value.real
    zeta_k = float(mpmath.zeta(1.5) * mpmath.dirichlet(1.5, [0, 1, 0, -1]))
    assert zeta_k == pytest.approx(2.258, abs=1e-3)
    # truncation leaves a tail of order n_max^{-1/2}
    assert value == pytest.approx(zeta_k, abs=0.03)


# ---------- weak-type exponents ----------
def test_weak_type_exponents(chi4):
    power = weak_type_exponent(MultiplierSpec.power(0.75, 2))
    assert power.r == pytest.approx(8.0) and power.proven
    assert weak_type_exponent(MultiplierSpec.pentagonal(0.4)).r == pytest.approx(10.0)
    assert weak_type_exponent(MultiplierSpec.quadratic_field(0.75, -4)).r == pytest.approx(4.0)
    assert weak_type_exponent(MultiplierSpec.twisted(0.75, chi4)).r == pytest.approx(8.0)


def test_weak_type_exponent_outside_proven_range():
    assert weak_type_exponent(MultiplierSpec.power(0.4, 2)).proven is False
    assert weak_type_exponent(MultiplierSpec.power(0.5, 3)).proven is None


def test_pentagonal_exponent_needs_small_s():
    with pytest.raises(ValidationError):
        weak_type_exponent(MultiplierSpec.pentagonal(0.6))
