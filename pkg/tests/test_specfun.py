"""Special-function evaluators against brute-force oracles.

Oracles used here are independent of the implementations under test:
* Laguerre: explicit series sum over binomial coefficients.
* Bessel: composite-trapezoid evaluation of the integral representation
  (1/pi) int_0^pi cos(n t - x sin t) dt, whose aliasing error for 256
  nodes is far below double precision on x in [0, 50].
* The first J_0 zero: bisection on the power series.
"""

import math

import numpy as np
import pytest

from slmsqueeze.specfun import bessel_first_kind, bessel_j0_zero, generalized_laguerre


def laguerre_series(p: int, alpha: float, x: float) -> float:
    total = 0.0
    for k in range(p + 1):
        # C(p+alpha, p-k) via gamma for real alpha
        binom = math.gamma(p + alpha + 1) / (
            math.gamma(alpha + k + 1) * math.factorial(p - k))
        total += (-1) ** k * binom * x**k / math.factorial(k)
    return total


def bessel_integral(n: int, x: float, nodes: int = 256) -> float:
    t = np.linspace(0.0, math.pi, nodes + 1)
    integrand = np.cos(n * t - x * np.sin(t))
    return float(np.trapezoid(integrand, t) / math.pi)


def j0_series(x: float) -> float:
    total, term = 1.0, 1.0
    for k in range(1, 40):
        term *= -(x / 2) ** 2 / k**2
        total += term
    return total


class TestGeneralizedLaguerre:
    def test_degree_zero_is_one(self):
        assert generalized_laguerre(0, 1.0, 3.7) == 1.0

    def test_degree_one_closed_form(self):
        # L_1^a(x) = 1 + a - x
        assert generalized_laguerre(1, 1.0, 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_degree_two_closed_form(self):
        # L_2^0(x) = (x^2 - 4x + 2) / 2
        assert generalized_laguerre(2, 0.0, 2.0) == pytest.approx(-1.0, abs=1e-14)

    def test_negative_degree_rejected(self):
        with pytest.raises(ValueError):
            generalized_laguerre(-1, 0.0, 1.0)

    @pytest.mark.parametrize("p", range(11))
    @pytest.mark.parametrize("alpha", [0.0, 1.0, 2.5, 3.0])
    def test_matches_series_oracle(self, p, alpha):
        for x in np.linspace(-20.0, 20.0, 41):
            expected = laguerre_series(p, alpha, float(x))
            got = generalized_laguerre(p, alpha, float(x))
            assert got == pytest.approx(expected, rel=1e-9, abs=1e-9 * max(1.0, abs(expected)))

    def test_vectorized_matches_scalar(self):
        xs = np.linspace(-5, 15, 7)
        vec = generalized_laguerre(3, 2.0, xs)
        assert vec == pytest.approx([generalized_laguerre(3, 2.0, float(x)) for x in xs])


class TestBesselFirstKind:
    def test_j0_at_zero(self):
        assert bessel_first_kind(0, 0.0) == 1.0

    def test_higher_orders_vanish_at_zero(self):
        for n in range(1, 6):
            assert bessel_first_kind(n, 0.0) == 0.0

    def test_first_j0_zero_against_series_bisection(self):
        lo, hi = 2.0, 3.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if j0_series(lo) * j0_series(mid) <= 0:
                hi = mid
            else:
                lo = mid
        zero = 0.5 * (lo + hi)
        assert zero == pytest.approx(2.404826, abs=1e-5)
        assert bessel_first_kind(0, zero) == pytest.approx(0.0, abs=1e-12)
        assert bessel_first_kind(0, 2.404826) == pytest.approx(0.0, abs=1e-5)

    def test_zero_finder_matches_series_bisection(self):
        assert bessel_j0_zero(1) == pytest.approx(2.404825557695773, abs=1e-10)

    def test_negative_arguments_rejected(self):
        with pytest.raises(ValueError):
            bessel_first_kind(-1, 1.0)
        with pytest.raises(ValueError):
            bessel_first_kind(1, -0.5)

    @pytest.mark.parametrize("n", range(9))
    def test_accuracy_against_integral_oracle(self, n):
        xs = np.linspace(0.0, 50.0, 251)
        got = bessel_first_kind(n, xs)
        expected = np.array([bessel_integral(n, float(x)) for x in xs])
        assert np.max(np.abs(got - expected)) < 1e-10

    def test_three_term_recurrence(self):
        # J_{n-1}(x) + J_{n+1}(x) = (2n/x) J_n(x)
        xs = np.linspace(0.5, 40.0, 200)
        for n in range(1, 8):
            lhs = bessel_first_kind(n - 1, xs) + bessel_first_kind(n + 1, xs)
            rhs = 2 * n / xs * bessel_first_kind(n, xs)
            assert np.max(np.abs(lhs - rhs)) < 1e-8

    def test_tiny_arguments(self):
        for n in range(4):
            assert bessel_first_kind(n, 1e-8) == pytest.approx(
                bessel_integral(n, 1e-8), abs=1e-14)
