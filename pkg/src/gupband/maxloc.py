"""Maximally localized states.

In the wavevector representation the state centred at xbar is
    phi(k) = sqrt(2a) exp(-i k xbar) cos(k a/2),   |k| <= K,
independent of the deformation; in coordinates it is a pair of sincs,
    phi(x) = sqrt(a/2) [Pi(x - xbar + a/2) + Pi(x - xbar - a/2)],
with position variance a^2/4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .deformation import Deformation, ModelParams
from .numerics import (DomainError, OutOfBandError, QuadSpec, gauss_legendre_panels,
                       oscillatory_integrate, projector_kernel)


@dataclass(frozen=True)
class MaxLocState:
    center: float
    K: float

    def __post_init__(self):
        if not (math.isfinite(self.K) and self.K > 0):
            raise DomainError("K must be positive")
        if not math.isfinite(self.center):
            raise DomainError("center must be finite")

    @property
    def a(self) -> float:
        return math.pi / self.K


def _band(s: MaxLocState, k):
    k = np.asarray(k, dtype=float)
    if np.any(np.abs(k) > s.K * (1 + 1e-15)):
        raise OutOfBandError("wavevector outside the band")
    return k


def maxloc_wavevector(s: MaxLocState, k):
    k = _band(s, k)
    a = s.a
    out = math.sqrt(2 * a) * np.exp(-1j * k * s.center) * np.cos(k * a / 2)
    return out if out.ndim else complex(out)


def maxloc_wavevector_dk(s: MaxLocState, k):
    """d/dk of maxloc_wavevector."""
    k = _band(s, k)
    a = s.a
    c, sn = np.cos(k * a / 2), np.sin(k * a / 2)
    out = math.sqrt(2 * a) * np.exp(-1j * k * s.center) * (-1j * s.center * c - 0.5 * a * sn)
    return out if out.ndim else complex(out)


def maxloc_coordinate(s: MaxLocState, x):
    d = np.asarray(x, dtype=float) - s.center
    a = s.a
    out = math.sqrt(a / 2) * (projector_kernel(d + a / 2, s.K) + projector_kernel(d - a / 2, s.K))
    return out if np.ndim(out) else float(out)


def maxloc_coordinate_fourier(s: MaxLocState, x, spec: QuadSpec = QuadSpec()):
    """Second route: (1/2pi) times the integral of exp(i k x) phi(k) over the band."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    for i, xi in enumerate(xs):
        d = xi - s.center
        # the integrand is even in k after the phase e^{ik(x - xbar)} is taken
        val = oscillatory_integrate(
            lambda k: np.real(maxloc_wavevector(s, k) * np.exp(1j * k * xi)),
            -s.K, s.K, abs(d) + s.a / 2, spec)
        out[i] = val / (2 * np.pi)
    return out if np.ndim(x) else float(out[0])


def norm(s: MaxLocState, panels: int = 64) -> float:
    k, w = gauss_legendre_panels(-s.K, s.K, panels)
    return float(np.sum(w * np.abs(maxloc_wavevector(s, k)) ** 2) / (2 * np.pi))


def position_moments(s: MaxLocState, panels: int = 64):
    """(<x>, <x^2>) with x = i d/dk; the boundary terms vanish since phi(+-K) = 0."""
    k, w = gauss_legendre_panels(-s.K, s.K, panels)
    phi = maxloc_wavevector(s, k)
    dphi = maxloc_wavevector_dk(s, k)
    mean = np.sum(w * np.conj(phi) * 1j * dphi).real / (2 * np.pi)
    second = np.sum(w * np.abs(dphi) ** 2) / (2 * np.pi)
    return float(mean), float(second)


def position_variance(s: MaxLocState, panels: int = 64) -> float:
    """<x^2> - xbar^2 in the wavevector representation, after phase-centring at 0."""
    _, second = position_moments(MaxLocState(0.0, s.K), panels)
    return second


def dirichlet_mode(N: int, K: float, k):
    """N-th normalized Dirichlet mode on [-K, K] (N = 1 is the maxloc state at 0)."""
    a = math.pi / K
    k = np.asarray(k, dtype=float)
    arg = N * math.pi * (k + K) / (2 * K)
    return math.sqrt(2 * a) * np.sin(arg)


def dirichlet_mode_variance(N: int, K: float, panels: int = 64) -> float:
    """Position variance of the N-th Dirichlet mode, by quadrature of |d/dk|^2."""
    a = math.pi / K
    k, w = gauss_legendre_panels(-K, K, panels)
    c = N * math.pi / (2 * K)
    dphi = math.sqrt(2 * a) * c * np.cos(c * (k + K))
    # |phi|^2 is even in k for every mode, so <x> = 0
    return float(np.sum(w * dphi ** 2) / (2 * np.pi))


def _energy_integrand(d: Deformation, u, F_inf):
    # p^2 cos^2(k(p) a/2)/f(alpha p) with u = alpha p; k a/2 = (pi/2) F(u)/F_inf,
    # written through the gap so nothing cancels at large u.
    with np.errstate(over="ignore"):
        gap = np.asarray(d.F_gap(u), dtype=float) if math.isfinite(d.F_infinity) else F_inf - u
        return u * u * np.sin(0.5 * np.pi * gap / F_inf) ** 2 / np.asarray(d.f(u), dtype=float)


def maxloc_energy_increments(d: Deformation, u_max: float = 1e3):
    """Integral of the energy integrand over [U/2, U] for U = u_max/4, u_max/2, u_max.

    For the identity family the band maps onto the finite range u < alpha hbar K,
    taken as 1 in these scale-free units, and the increments are all zero past it.
    """
    F_inf = d.F_infinity if math.isfinite(d.F_infinity) else 1.0
    top = math.inf if math.isfinite(d.F_infinity) else F_inf
    incs = []
    for U in (u_max / 4, u_max / 2, u_max):
        lo, hi = U / 2, min(U, top)
        if hi <= lo:
            incs.append(0.0)
            continue
        val, _ = integrate.quad(lambda u: float(_energy_integrand(d, u, F_inf)), lo, hi,
                                limit=400, epsabs=0.0, epsrel=1e-10)
        incs.append(val)
    return incs


def maxloc_energy_finite(d: Deformation, p: Optional[ModelParams] = None) -> bool:
    """Whether the kinetic energy of a maxloc state is finite.

    Probes the energy integral by its increments over successive doublings
    of the momentum cutoff: an integrable tail makes them shrink at least
    geometrically (ratio <= 0.75), a divergent one does not.
    """
    i1, i2, i3 = maxloc_energy_increments(d)
    if i3 == 0.0:
        return True
    if not (math.isfinite(i2) and math.isfinite(i3)) or i2 <= 0:
        return False
    return bool(i3 / i2 <= 0.75 and i2 / max(i1, 1e-300) <= 0.75)
