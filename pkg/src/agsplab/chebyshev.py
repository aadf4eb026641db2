"""Chebyshev polynomials of the first kind and the mapped window polynomial.

The window polynomial of size m is the degree-ceil(sqrt(m)) Chebyshev
polynomial mapped affinely from [-1, 1] onto [1, m] and rescaled to equal 1
at x = 0.  On the integers 1..m its magnitude is at most 1/3, which is what
makes it usable as a low-degree stand-in for a product of m commuting
projectors: squaring the rescaling factor gives the 1/9-per-power decay of
the violating sectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

EXACT_COEFF_MAX_DEGREE = 20


def chebyshev_t(n: int, x):
    """T_n evaluated at a scalar or array.

    Uses the three-term recurrence on [-1, 1] and the hyperbolic closed
    form sign(x)^n * cosh(n * arccosh|x|) outside, where the recurrence
    loses accuracy for large n|x|.
    """
    if n < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)

    inside = np.abs(x) <= 1.0
    if inside.any():
        xi = x[inside]
        t_prev = np.ones_like(xi)
        t_cur = xi.copy()
        if n == 0:
            out[inside] = t_prev
        elif n == 1:
            out[inside] = t_cur
        else:
            for _ in range(n - 1):
                t_prev, t_cur = t_cur, 2.0 * xi * t_cur - t_prev
            out[inside] = t_cur
    if (~inside).any():
        xo = x[~inside]
        mag = np.cosh(n * np.arccosh(np.abs(xo)))
        sign = np.where(xo < 0, (-1.0) ** n, 1.0)
        out[~inside] = sign * mag
    return float(out[0]) if scalar else out


def chebyshev_t_recurrence(n: int, x):
    """T_n by the bare recurrence, any argument (reference implementation)."""
    x = np.asarray(x, dtype=float)
    t_prev = np.ones_like(x)
    if n == 0:
        return t_prev
    t_cur = x.copy()
    for _ in range(n - 1):
        t_prev, t_cur = t_cur, 2.0 * x * t_cur - t_prev
    return t_cur


def chebyshev_coefficients(n: int) -> list:
    """Exact integer monomial coefficients of T_n, lowest degree first."""
    prev = [1]
    if n == 0:
        return prev
    cur = [0, 1]
    for _ in range(n - 1):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return cur


def chebyshev_nodes(n: int):
    """The n simple roots of T_n, cos(pi (2k-1) / (2n)) for k = 1..n."""
    k = np.arange(1, n + 1)
    return np.cos(np.pi * (2 * k - 1) / (2 * n))


def chebyshev_from_roots(n: int, x):
    """T_n via its root product form, 2^(n-1) * prod (x - x_k)."""
    if n == 0:
        return np.ones_like(np.asarray(x, dtype=float))
    x = np.asarray(x, dtype=float)
    nodes = chebyshev_nodes(n)
    return 2.0 ** (n - 1) * np.prod(x[..., None] - nodes, axis=-1)


@dataclass(frozen=True)
class WindowPolynomial:
    """The size-m window polynomial C_m.

    degree is ceil(sqrt(m)) (for non-square m the next integer degree only
    strengthens the outside growth, so the 1/3 window bound survives).
    normalizer is the unscaled polynomial's value at x = 0; coefficients
    are monomial coefficients of C_m, exact Fractions up to degree 20 and
    floats beyond.
    """

    m: int
    degree: int
    normalizer: float
    coefficients: tuple
    coefficients_exact: bool

    def map_argument(self, x):
        return (np.asarray(x, dtype=float) - (self.m + 1) / 2.0) / ((self.m - 1) / 2.0)

    def __call__(self, x):
        """Stable evaluation: T_degree of the mapped argument, rescaled."""
        y = self.map_argument(x)
        return chebyshev_t(self.degree, y) / self.normalizer

    def evaluate_by_coefficients(self, x):
        """Direct monomial evaluation (for cross-checks, not production)."""
        coeffs = np.array([float(c) for c in self.coefficients])
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)


def window_polynomial(m: int) -> WindowPolynomial:
    if m < 2:
        raise ValueError("window size must be >= 2")
    degree = math.isqrt(m)
    if degree * degree < m:
        degree += 1
    y0 = Fraction(-(m + 1), m - 1)
    t_coeffs = chebyshev_coefficients(degree)
    normalizer_exact = sum(c * y0**k for k, c in enumerate(t_coeffs))
    if degree <= EXACT_COEFF_MAX_DEGREE:
        # compose T_degree with (x - a)/b exactly over the rationals
        a = Fraction(m + 1, 2)
        b = Fraction(m - 1, 2)
        acc = [Fraction(0)] * (degree + 1)
        # powers of the affine map, built iteratively
        power = [Fraction(1)]  # ((x - a)/b)^0
        for k, c in enumerate(t_coeffs):
            for i, p in enumerate(power):
                acc[i] += c * p
            if k < degree:
                nxt = [Fraction(0)] * (len(power) + 1)
                for i, p in enumerate(power):
                    nxt[i] += p * (-a) / b
                    nxt[i + 1] += p / b
                power = nxt
        coefficients = tuple(c / normalizer_exact for c in acc)
        exact = True
    else:
        y = np.polynomial.polynomial.Polynomial(
            [-(m + 1) / (m - 1), 2.0 / (m - 1)]
        )
        poly = sum(
            float(c) * y**k for k, c in enumerate(t_coeffs)
        ) / float(normalizer_exact)
        coefficients = tuple(poly.coef)
        exact = False
    return WindowPolynomial(
        m=m,
        degree=degree,
        normalizer=float(normalizer_exact),
        coefficients=coefficients,
        coefficients_exact=exact,
    )


@dataclass
class WindowBoundsReport:
    m: int
    degree: int
    normalizer: float
    value_at_zero: float
    max_abs_on_window: float
    passed: bool

    def to_row(self) -> dict:
        return {
            "m": self.m,
            "degree": self.degree,
            "normalizer": self.normalizer,
            "max_abs_on_window": self.max_abs_on_window,
            "pass": self.passed,
        }


def verify_window_bounds(m: int) -> WindowBoundsReport:
    """Certify the window contract: value 1 at x=0, magnitude <= 1/3 on the
    integers 1..m, and normalizer magnitude >= 3."""
    poly = window_polynomial(m)
    c0 = float(poly(0.0))
    max_abs = float(np.max(np.abs(poly(np.arange(1, m + 1)))))
    passed = (
        abs(c0 - 1.0) <= 1e-12
        and max_abs <= 1.0 / 3.0 + 1e-12
        and abs(poly.normalizer) >= 3.0
    )
    return WindowBoundsReport(
        m=m,
        degree=poly.degree,
        normalizer=poly.normalizer,
        value_at_zero=c0,
        max_abs_on_window=max_abs,
        passed=passed,
    )


def apply_polynomial(poly: WindowPolynomial, eigenvalues):
    """Pointwise stable evaluation on a list of eigenvalues (no clamping)."""
    return np.asarray(poly(np.asarray(eigenvalues, dtype=float)))
