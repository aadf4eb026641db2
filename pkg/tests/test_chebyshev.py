import math
from fractions import Fraction

import numpy as np
import pytest

from agsplab.chebyshev import (
    apply_polynomial,
    chebyshev_coefficients,
    chebyshev_from_roots,
    chebyshev_t,
    chebyshev_t_recurrence,
    verify_window_bounds,
    window_polynomial,
)


def test_low_degree_values():
    for x in (-2.0, -0.3, 0.0, 0.7, 3.5):
        assert chebyshev_t(0, x) == pytest.approx(1.0, abs=1e-15)
        assert chebyshev_t(1, x) == pytest.approx(x, abs=1e-15)
    assert chebyshev_t(3, 2.0) == pytest.approx(26.0, rel=1e-12)


def test_closed_form_matches_recurrence():
    xs = np.concatenate([np.linspace(-3, 3, 61)])
    for n in (2, 5, 9, 14):
        stable = chebyshev_t(n, xs)
        recur = chebyshev_t_recurrence(n, xs)
        assert np.allclose(stable, recur, rtol=1e-9, atol=1e-9)


def test_bounded_on_interval():
    xs = np.linspace(-1, 1, 1000)
    for n in range(1, 51):
        assert np.max(np.abs(chebyshev_t(n, xs))) <= 1.0 + 1e-12


def test_outside_growth_bound():
    deltas = np.linspace(0.02, 1.0, 50)
    for n in range(1, 51):
        values = np.abs(chebyshev_t(n, -1.0 - deltas))
        assert np.all(values >= 1.0 + n * n * deltas - 1e-9)


def test_root_product_form():
    xs = np.linspace(-2, 2, 41)
    for n in range(1, 13):
        via_roots = chebyshev_from_roots(n, xs)
        direct = chebyshev_t_recurrence(n, xs)
        scale = np.maximum(np.abs(direct), 1.0)
        assert np.max(np.abs(via_roots - direct) / scale) <= 1e-8


def test_leading_coefficient_exact():
    for n in range(1, 31):
        coeffs = chebyshev_coefficients(n)
        assert coeffs[-1] == 2 ** (n - 1)
        assert all(isinstance(c, int) for c in coeffs)


def test_window_m4_closed_form():
    poly = window_polynomial(4)
    assert poly.degree == 2
    assert poly.normalizer == pytest.approx(41 / 9, abs=1e-15)
    assert poly.coefficients == (Fraction(1), Fraction(-40, 41), Fraction(8, 41))
    assert poly(1.0) == pytest.approx(9 / 41, abs=1e-12)


def test_window_degree_and_normalizer_growth():
    poly36 = window_polynomial(36)
    assert poly36.degree == 6
    for m in (2, 3, 4, 9, 10, 25, 49, 100):
        poly = window_polynomial(m)
        assert poly.degree == math.isqrt(m) + (0 if math.isqrt(m) ** 2 == m else 1)
        assert abs(poly.normalizer) >= 3.0


def test_window_value_at_zero_is_exactly_one():
    for m in (4, 9, 36):
        poly = window_polynomial(m)
        assert float(poly(0.0)) == 1.0


def test_window_bounds_reports():
    for m in (4, 9, 16, 25, 36, 49):
        report = verify_window_bounds(m)
        assert report.passed, f"m={m}: {report}"
        assert report.max_abs_on_window <= 1 / 3 + 1e-12


def test_coefficient_evaluation_agrees_with_stable():
    for m in (4, 9, 25, 49, 100, 144):
        poly = window_polynomial(m)
        if poly.degree > 12:
            continue
        xs = np.arange(0, m + 1, dtype=float)
        stable = poly(xs)
        by_coeff = poly.evaluate_by_coefficients(xs)
        scale = np.maximum(np.abs(stable), 1e-3)
        assert np.max(np.abs(stable - by_coeff) / scale) <= 1e-7


def test_apply_polynomial_window_values():
    poly = window_polynomial(4)
    values = apply_polynomial(poly, [0, 1, 2, 3, 4])
    assert values[0] == pytest.approx(1.0, abs=1e-15)
    assert values[1] == pytest.approx(9 / 41, abs=1e-12)
    assert values[2] == pytest.approx(-7 / 41, abs=1e-12)
    assert np.all(np.abs(values[1:]) <= 1 / 3 + 1e-12)


def test_apply_polynomial_outside_window_finite():
    poly = window_polynomial(9)
    values = apply_polynomial(poly, [-3.0, 12.5, 40.0])
    assert np.all(np.isfinite(values))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        window_polynomial(1)
    with pytest.raises(ValueError):
        chebyshev_t(-1, 0.5)
