# tests/test_arith_core.py
import cmath
import math

import mpmath
import numpy as np
import pytest
from numpy.testing import assert_allclose

from arith_core import (
    CoefficientStream,
    QuadraticForm,
    character_inversion,
    class_norm_counts,
    class_number,
    enumerate_characters,
    euler_split_coefficients,
    euler_weyl_sum,
    gauss_sum,
    ideal_norm_counts,
    is_fundamental_discriminant,
    is_primitive,
    kronecker_character,
    pentagonal_coefficients,
    pentagonal_product_oracle,
    quadratic_gauss_sum,
    reduced_forms,
    representation_counts,
    select_character,
    unit_count,
)
from utils.errors import ValidationError


# ---------- characters ----------
def test_modulus_one_has_the_trivial_character():
    chars = enumerate_characters(1)
    assert len(chars) == 1
    assert all(chars[0](n) == 1 for n in range(-3, 4))


def test_characters_mod_4(chi4):
    principal, odd = enumerate_characters(4)
    assert principal.is_principal
    assert odd(1) == pytest.approx(1) and odd(3) == pytest.approx(-1)
    assert odd(2) == 0 and odd.parity == -1


def test_characters_mod_5_are_generated_by_chi_2_equal_i():
    chars = enumerate_characters(5)
    assert len(chars) == 4
    assert chars[1](2) == pytest.approx(1j)
    # every character is a homomorphism on the units
    for chi in chars:
        for a in range(1, 5):
            for b in range(1, 5):
                assert chi(a * b) == pytest.approx(chi(a) * chi(b))


@pytest.mark.parametrize("N", [1, 2, 8, 12, 16, 30, 63, 100])
def test_character_count_is_phi(N):
    assert len(enumerate_characters(N)) == sum(1 for n in range(1, N + 1) if math.gcd(n, N) == 1)


def test_primitivity():
    principal4, odd4 = enumerate_characters(4)
    assert not is_primitive(principal4)
    assert is_primitive(odd4)
    # mod 6 the character with chi(5) = -1 comes from mod 3
    chi6 = next(chi for chi in enumerate_characters(6) if chi(5) == pytest.approx(-1))
    assert chi6.conductor == 3 and not chi6.is_primitive


def test_select_character_rejects_bad_label():
    with pytest.raises(ValidationError):
        select_character(5, 4)


def test_kronecker_character_is_real_with_sign_of_d():
    chi = kronecker_character(-4)
    assert chi.is_real and chi.parity == -1
    chi = kronecker_character(-23)
    assert [round(chi(n).real) for n in (2, 3, 5)] == [1, 1, -1]


# ---------- Gauss sums ----------
def test_gauss_sum_mod_4(chi4):
    assert gauss_sum(chi4) == pytest.approx(2j)


def test_gauss_sum_mod_3():
    chi = enumerate_characters(3)[1]
    assert gauss_sum(chi) == pytest.approx(1j * math.sqrt(3))


def test_gauss_sum_rejects_imprimitive():
    with pytest.raises(ValidationError):
        gauss_sum(enumerate_characters(4)[0])


def test_gauss_sum_modulus_identity(primitive_up_to):
    worst = max(abs(abs(gauss_sum(chi)) ** 2 - chi.modulus) for chi in primitive_up_to(200))
    assert worst < 1e-9


def test_character_inversion(primitive_up_to):
    for chi in primitive_up_to(30):
        for n in range(-5, 2 * chi.modulus):
            assert abs(character_inversion(chi, n) - chi(n)) < 1e-10


@pytest.mark.parametrize("p,q,m,expected", [(1, 1, 0, 1), (1, 2, 0, 0), (1, 4, 0, 2 + 2j)])
def test_quadratic_gauss_sum_examples(p, q, m, expected):
    assert quadratic_gauss_sum(p, q, m) == pytest.approx(expected, abs=1e-12)


def test_quadratic_gauss_sum_trichotomy():
    for q in range(1, 101):
        for p in range(1, q + 1):
            if math.gcd(p, q) != 1:
                continue
            mag = abs(quadratic_gauss_sum(p, q, 0))
            assert min(abs(mag), abs(mag - math.sqrt(q)), abs(mag - math.sqrt(2 * q))) < 1e-9


def test_euler_weyl_sum():
    assert euler_weyl_sum(1, 1) == pytest.approx(1)
    assert abs(euler_weyl_sum(1, 2)) < 1e-12
    brute = sum(cmath.exp(-2j * math.pi * (6 * l * l + l) / 5) for l in range(1, 6))
    assert euler_weyl_sum(1, 5) == pytest.approx(brute, abs=1e-12)


# ---------- pentagonal identity ----------
def _product_expansion(M):
    """Independent oracle: multiply out prod_{n<=M} (1 - x^n) with Python ints."""
    poly = [1] + [0] * M
    for n in range(1, M + 1):
        for i in range(M, n - 1, -1):
            poly[i] -= poly[i - n]
    return poly


def test_pentagonal_small_cases():
    assert list(pentagonal_coefficients(7)) == [1, -1, -1, 0, 0, 1, 0, 1]
    a = pentagonal_coefficients(15)
    assert list(np.nonzero(a)[0]) == [0, 1, 2, 5, 7, 12, 15]
    assert list(a[np.nonzero(a)[0]]) == [1, -1, -1, 1, 1, -1, -1]


def test_pentagonal_matches_product_expansion():
    assert list(pentagonal_coefficients(400)) == _product_expansion(400)
    assert list(pentagonal_product_oracle(400)) == _product_expansion(400)


@pytest.mark.slow
def test_pentagonal_matches_product_expansion_to_ten_thousand():
    M = 10_000
    assert np.array_equal(pentagonal_coefficients(M), pentagonal_product_oracle(M).astype(np.int64))
    f1, f2 = euler_split_coefficients(M)
    assert np.array_equal(pentagonal_coefficients(M), f1 + f2)


def test_euler_split():
    f1, f2 = euler_split_coefficients(20)
    assert f1[0] == 1 and f2[2] == -1
    assert np.array_equal(f1 + f2, pentagonal_coefficients(20))


# ---------- binary quadratic forms ----------
@pytest.mark.parametrize("D,forms", [
    (-4, [(1, 0, 1)]),
    (-3, [(1, 1, 1)]),
    (-23, [(1, 1, 6), (2, -1, 3), (2, 1, 3)]),
])
def test_reduced_forms(D, forms):
    assert [f.triple for f in reduced_forms(D)] == forms


@pytest.mark.parametrize("D,h", [(-3, 1), (-4, 1), (-7, 1), (-23, 3), (-47, 5)])
def test_class_numbers(D, h):
    assert class_number(D) == h


def _brute_force_class_count(D):
    """
    Union-find over every primitive positive form with a, |b|, c <= B, joined
    by (a,b,c) ~ (c,-b,a) and (a,b,c) ~ (a, b+2a, a+b+c) inside the box.
    """
    B = -D // 2 + 2
    forms = {}
    for a in range(1, B + 1):
        for b in range(-B, B + 1):
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c <= B and math.gcd(math.gcd(a, b), c) == 1:
                forms[(a, b, c)] = (a, b, c)

    def find(x):
        while forms[x] != x:
            forms[x] = forms[forms[x]]
            x = forms[x]
        return x

    for (a, b, c) in list(forms):
        for other in ((c, -b, a), (a, b + 2 * a, a + b + c), (a, b - 2 * a, a - b + c)):
            if other in forms:
                ra, rb = find((a, b, c)), find(other)
                if ra != rb:
                    forms[ra] = rb
    return len({find(f) for f in forms})


def test_class_numbers_against_brute_force():
    for D in range(-3, -101, -1):
        if D % 4 in (0, 1):
            assert class_number(D) == _brute_force_class_count(D), D


def test_reduced_forms_rejects_invalid_discriminant():
    with pytest.raises(ValidationError):
        reduced_forms(-5)
    with pytest.raises(ValidationError):
        reduced_forms(8)


def test_quadratic_form_validation():
    with pytest.raises(ValidationError):
        QuadraticForm(1, 3, 1)       # indefinite
    with pytest.raises(ValidationError):
        QuadraticForm(2, 2, 2)       # not primitive


def test_representation_counts_sum_of_two_squares():
    r = representation_counts(QuadraticForm(1, 0, 1), 5)
    assert (r[1], r[3], r[5]) == (4, 0, 8)


def test_units_and_fundamental_discriminants():
    assert [unit_count(D) for D in (-3, -4, -7)] == [6, 4, 2]
    assert is_fundamental_discriminant(-4) and is_fundamental_discriminant(-23)
    assert not is_fundamental_discriminant(-12) and not is_fundamental_discriminant(-16)


# ---------- ideal norms ----------
def test_ideal_norm_counts_gaussian_integers():
    a = ideal_norm_counts(-4, 10).terms(10).real
    assert (a[1], a[2], a[3], a[5]) == (1, 1, 0, 2)


def test_ideal_norm_counts_other_fields():
    assert ideal_norm_counts(-3, 5).terms(5)[1] == 1
    # 2 splits in Q(sqrt(-23)): one ideal in each class (2, +-1, 3)
    assert ideal_norm_counts(-23, 10).terms(10)[2] == 2
    per_class = {f.triple: counts[2] for f, counts in class_norm_counts(-23, 10).items()}
    assert per_class == {(1, 1, 6): 0, (2, -1, 3): 1, (2, 1, 3): 1}


def test_ideal_norm_counts_are_divisor_sums_of_kronecker():
    chi = kronecker_character(-4)
    a = ideal_norm_counts(-4, 200).terms(200).real
    for n in range(1, 201):
        expected = sum(chi(d).real for d in range(1, n + 1) if n % d == 0)
        assert a[n] == pytest.approx(expected)


def test_ideal_norm_counts_multiplicative():
    a = ideal_norm_counts(-4, 200).terms(200).real
    for m in range(1, 15):
        for n in range(1, 200 // m + 1):
            if math.gcd(m, n) == 1:
                assert a[m * n] == a[m] * a[n]


def test_non_fundamental_rejected():
    with pytest.raises(ValidationError):
        ideal_norm_counts(-12, 10)


# ---------- streams ----------
def test_power_stream_weights_carry_root_normalisation():
    w = CoefficientStream.power(2).weights(0.6, 10)
    assert w[9] == pytest.approx(3 ** -0.6)
    assert w[4] == pytest.approx(2 ** -0.6)
    assert w[5] == 0


def test_twisted_stream_l_value(chi4):
    w = CoefficientStream.twisted(chi4).weights(2.0, 20_000)
    catalan = float(mpmath.catalan)
    assert_allclose(w.sum().real, catalan, atol=1e-8)
