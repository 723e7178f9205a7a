"""Special functions and quadrature primitives.

Everything here is a pure function of its inputs. The projector kernel and
the sine integral are vectorised over numpy arrays; the quadrature and the
bilateral sum accept vectorised callables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

SINC_BRANCH = 1e-8
GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)


class NumericalError(RuntimeError):
    """Base class for numerical failures (non-convergence, bad tails)."""


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class OutOfBandError(DomainError):
    """Raised when a wavevector lies outside the band [-K, K]."""


class QuadratureError(NumericalError):
    """Quadrature did not converge; carries the best estimate and error."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error:.3g})")
        self.estimate = estimate
        self.error = error


class TailSumError(NumericalError):
    """A bilateral sum hit max_terms before its tail became negligible."""

    def __init__(self, message: str, partial: float, last_ring: float):
        super().__init__(f"{message} (partial={partial!r}, last ring={last_ring:.3g})")
        self.partial = partial
        self.last_ring = last_ring


@dataclass(frozen=True)
class QuadSpec:
    panel_width: float = 1.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_panels: int = 1 << 20

    def __post_init__(self):
        if not self.panel_width > 0:
            raise DomainError("panel_width must be positive")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_panels < 1:
            raise DomainError("max_panels must be at least 1")


@dataclass(frozen=True)
class TailSumSpec:
    initial_terms: int = 8
    tail_tol: float = 1e-10
    max_terms: int = 1 << 20

    def __post_init__(self):
        if not 1 <= self.initial_terms <= self.max_terms:
            raise DomainError("need 1 <= initial_terms <= max_terms")
        if not self.tail_tol > 0:
            raise DomainError("tail_tol must be positive")


def projector_kernel(dx, K: float):
    """Kernel sin(K dx)/(pi dx) of the band projector.

    Near dx = 0 the two-term Taylor value (K/pi)(1 - (K dx)^2/6) is used.
    """
    if not (np.isfinite(K) and K > 0):
        raise DomainError(f"K must be positive and finite, got {K!r}")
    d = np.asarray(dx, dtype=float)
    if not np.all(np.isfinite(d)):
        raise DomainError("dx must be finite")
    z = K * d
    small = np.abs(z) < SINC_BRANCH
    safe = np.where(small, 1.0, d)
    out = np.where(small, (K / np.pi) * (1.0 - z * z / 6.0), np.sin(z) / (np.pi * safe))
    return out if out.ndim else float(out)


def sine_integral(x):
    """Si(x), exactly odd in x."""
    xa = np.asarray(x, dtype=float)
    out = np.sign(xa) * special.sici(np.abs(xa))[0]
    return out if out.ndim else float(out)


def _si_aux(z):
    """Auxiliary functions f, g with pi/2 - Si(z) = f cos z + g sin z (z >= 1e3)."""
    zi2 = 1.0 / (z * z)
    f = np.zeros_like(z)
    g = np.zeros_like(z)
    term_f = np.ones_like(z)
    term_g = np.ones_like(z)
    for j in range(8):
        f = f + term_f
        g = g + term_g
        term_f = -term_f * (2 * j + 1) * (2 * j + 2) * zi2
        term_g = -term_g * (2 * j + 2) * (2 * j + 3) * zi2
    return f / z, g * zi2


def sine_integral_tail(z, cos_z=None, sin_z=None):
    """Integral of sin(u)/u from z to infinity, for z >= 0.

    For large z the result depends on z only through cos z and sin z; those
    may be supplied directly when z itself is too large to reduce accurately.
    """
    za = np.asarray(z, dtype=float)
    if np.any(za < 0):
        raise DomainError("sine_integral_tail needs z >= 0")
    big = za >= 1e3
    out = np.empty_like(za)
    out[~big] = np.pi / 2 - special.sici(za[~big])[0]
    if np.any(big):
        zb = za[big]
        c = np.cos(zb) if cos_z is None else np.broadcast_to(np.asarray(cos_z, float), za.shape)[big]
        s = np.sin(zb) if sin_z is None else np.broadcast_to(np.asarray(sin_z, float), za.shape)[big]
        f, g = _si_aux(zb)
        out[big] = f * c + g * s
    return out if out.ndim else float(out)


def _eval(f, u):
    val = f(u)
    val = np.asarray(val)
    if val.shape != u.shape:
        val = np.broadcast_to(val, u.shape) if val.ndim == 0 else np.vectorize(f)(u)
    return val


def gauss_legendre_panels(lo: float, hi: float, n_panels: int):
    """Nodes and weights of the composite 16-point Gauss-Legendre rule."""
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def oscillatory_integrate(f: Callable, lo: float, hi: float, k_max: float,
                          spec: QuadSpec = QuadSpec()):
    """Composite Gauss-Legendre quadrature of f over [lo, hi].

    Panels are no wider than min(spec.panel_width, pi/(4 k_max)). The panel
    count is doubled until two successive estimates agree to the requested
    tolerance. f must accept a numpy array; complex values are allowed.
    """
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
        raise DomainError("need finite lo <= hi")
    if lo == hi:
        return 0.0
    width = spec.panel_width
    if k_max > 0:
        width = min(width, np.pi / (4.0 * k_max))
    n = max(1, int(math.ceil((hi - lo) / width)))
    if n > spec.max_panels:
        raise QuadratureError("panel count exceeds max_panels", float("nan"), float("inf"))
    nodes, weights = gauss_legendre_panels(lo, hi, n)
    prev = np.sum(weights * _eval(f, nodes))
    while True:
        n *= 2
        if n > spec.max_panels:
            raise QuadratureError("quadrature did not converge", complex(prev) if np.iscomplexobj(prev) else float(prev), float("nan"))
        nodes, weights = gauss_legendre_panels(lo, hi, n)
        cur = np.sum(weights * _eval(f, nodes))
        err = abs(cur - prev)
        if err <= max(spec.abs_tol, spec.rel_tol * abs(cur)):
            return complex(cur) if np.iscomplexobj(cur) else float(cur)
        prev = cur


def bilateral_sum(term: Callable[[int], float], spec: TailSumSpec = TailSumSpec()):
    """Sum term(n) over all integers n, growing symmetric rings n = +-N.

    Stops once two consecutive rings are below tail_tol relative to the
    running sum (after at least spec.initial_terms rings).
    """
    total = term(0)
    quiet = 0
    ring = 0.0
    for N in range(1, spec.max_terms + 1):
        ring = term(N) + term(-N)
        total = total + ring
        if N >= spec.initial_terms:
            quiet = quiet + 1 if abs(ring) <= spec.tail_tol * abs(total) else 0
            if quiet >= 2:
                return total
    raise TailSumError("bilateral_sum reached max_terms", total, abs(ring))
