import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from gupband.numerics import (DomainError, QuadratureError, QuadSpec, TailSumError, TailSumSpec,
                              bilateral_sum, gauss_legendre_panels, oscillatory_integrate,
                              projector_kernel, sine_integral, sine_integral_tail)

K = 3.0
A = math.pi / K

finite = st.floats(-1e3, 1e3, allow_nan=False)


def si_quad(x):
    val, _ = integrate.quad(lambda u: np.sinc(u / np.pi), 0.0, x, epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


def test_kernel_at_zero():
    assert projector_kernel(0.0, K) == K / math.pi


def test_kernel_at_spacing_vanishes():
    assert abs(projector_kernel(A, K)) < 1e-15 * K


def test_kernel_at_half_spacing():
    assert math.isclose(projector_kernel(A / 2, K), 2 * K / math.pi ** 2, rel_tol=1e-15)


@pytest.mark.parametrize("dx,k", [(math.nan, 1.0), (math.inf, 1.0), (0.1, 0.0), (0.1, -2.0)])
def test_kernel_domain_errors(dx, k):
    with pytest.raises(DomainError):
        projector_kernel(dx, k)


def test_kernel_continuous_at_zero():
    h = 1e-6 * A
    for d in (h, -h, 1e-9 * A, 2e-8 / K):
        assert abs(projector_kernel(d, K) - K / math.pi) < 1e-10 * K / math.pi


@given(finite)
def test_kernel_even(d):
    assert projector_kernel(d, K) == projector_kernel(-d, K)


def test_sine_integral_examples():
    assert sine_integral(0.0) == 0.0
    assert abs(sine_integral(1e6) - math.pi / 2) < 2e-6
    assert abs(sine_integral(math.pi) - si_quad(math.pi)) < 1e-12
    assert abs(sine_integral(math.pi) - 1.8519370519824662) < 1e-13


@given(st.floats(0, 1e5, allow_nan=False))
def test_sine_integral_odd_and_bounded(x):
    assert sine_integral(-x) == -sine_integral(x)
    assert abs(sine_integral(x)) <= sine_integral(math.pi) + 1e-15


@pytest.mark.parametrize("x", [0.5, 3.0, 15.9, 16.1, 40.0])
def test_sine_integral_matches_quadrature(x):
    assert abs(sine_integral(x) - si_quad(x)) < 1e-12


def _tail_mp(z):
    with mpmath.workdps(40):
        return float(mpmath.pi / 2 - mpmath.si(mpmath.mpf(z)))


@pytest.mark.parametrize("z", [1e3, 1234.5, 1e4, 9.9e4, 3.7e6])
def test_tail_asymptotic_branch_relative_accuracy(z):
    ref = _tail_mp(z)
    assert abs(sine_integral_tail(z) - ref) < 1e-13 * abs(ref)
    # supplying cos z and sin z must reproduce the same value
    assert abs(sine_integral_tail(z, math.cos(z), math.sin(z)) - ref) < 1e-13 * abs(ref)


def test_tail_continuous_at_switch():
    lo = sine_integral_tail(np.nextafter(1e3, 0))
    hi = sine_integral_tail(1e3)
    assert abs(lo - hi) < 1e-15


def test_tail_rejects_negative():
    with pytest.raises(DomainError):
        sine_integral_tail(-1.0)


def test_integrate_trivial():
    assert oscillatory_integrate(lambda u: np.zeros_like(u), 0.0, 1.0, 0.0) == 0.0
    assert math.isclose(oscillatory_integrate(lambda u: np.ones_like(u), 0.0, 2.5, 0.0), 2.5, rel_tol=1e-14)


def test_integrate_sinc_gives_si_pi():
    val = oscillatory_integrate(lambda u: np.sinc(u / np.pi), 0.0, math.pi, 1.0)
    assert abs(val - si_quad(math.pi)) < 1e-12


@given(st.integers(1, 40), st.floats(0.5, 20.0))
@settings(max_examples=30, deadline=None)
def test_integrate_whole_periods_vanish(periods, k):
    val = oscillatory_integrate(lambda u: np.sin(k * u), 0.0, periods * 2 * math.pi / k, k)
    assert abs(val) < 1e-11


def test_integrate_complex():
    val = oscillatory_integrate(lambda u: np.exp(1j * u), 0.0, math.pi / 2, 1.0)
    assert abs(val - (1 + 1j)) < 1e-13


def test_integrate_nonconvergence_reports_estimate():
    spec = QuadSpec(max_panels=8)
    with pytest.raises(QuadratureError) as exc:
        oscillatory_integrate(lambda u: np.sign(u - 0.3), 0.0, 1.0, 0.0, spec)
    assert math.isfinite(exc.value.estimate)


@pytest.mark.parametrize("kw", [dict(panel_width=0), dict(rel_tol=0), dict(abs_tol=-1), dict(max_panels=0)])
def test_quadspec_validation(kw):
    with pytest.raises(DomainError):
        QuadSpec(**kw)


@pytest.mark.parametrize("kw", [dict(initial_terms=0), dict(initial_terms=10, max_terms=5), dict(tail_tol=0)])
def test_tailsumspec_validation(kw):
    with pytest.raises(DomainError):
        TailSumSpec(**kw)


def test_gl_panels_integrate_polynomials_exactly():
    x, w = gauss_legendre_panels(-1.0, 2.0, 3)
    assert abs(np.sum(w * x ** 31) - (2 ** 32 - 1) / 32) < 1e-9 * 2 ** 32


def test_bilateral_examples():
    assert bilateral_sum(lambda n: 0.0) == 0.0
    assert abs(bilateral_sum(lambda n: 2.0 ** -abs(n)) - 3.0) < 1e-9


def test_bilateral_non_decaying_raises():
    with pytest.raises(TailSumError) as exc:
        bilateral_sum(lambda n: 1.0, TailSumSpec(max_terms=50))
    assert exc.value.partial == 101.0


@given(st.floats(0.1, 3.0))
@settings(max_examples=20, deadline=None)
def test_bilateral_reflection_invariant_for_even_terms(c):
    term = lambda n: 1.0 / (1.0 + c * n * n) ** 2
    assert bilateral_sum(term) == bilateral_sum(lambda n: term(-n))


def test_bilateral_delta_sum_at_origin_is_the_node_sample():
    # a sinc sum evaluated on a grid node returns the node's sample, here 8/pi^2
    a, V0 = A, 1.0

    def sample(n):
        x = n * a
        return 0.5 * V0 * a * a * (projector_kernel(x - a / 2, K) + projector_kernel(x + a / 2, K)) ** 2

    spec = TailSumSpec(initial_terms=49, max_terms=50, tail_tol=1e300)  # stop at n = +-50
    total = bilateral_sum(lambda n: a * projector_kernel(-n * a, K) * sample(n), spec)
    assert abs(total - 8 / math.pi ** 2) < 1e-14
