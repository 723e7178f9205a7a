"""Potentials observed through maximally localized states.

A microscopic potential V is seen on a grid as the expectation values
    Vbar_n = <phi_n| V |phi_n>,
and the bandlimited potential is rebuilt from those samples by sinc
interpolation. Closed forms exist for the smeared Dirac delta and for the
step reconstructed from its plain samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .maxloc import MaxLocState, maxloc_coordinate
from .numerics import (DomainError, QuadratureError, gauss_legendre_panels,
                       oscillatory_integrate, projector_kernel, sine_integral, QuadSpec)
from .sampling import BandlimitedFunction, Grid, SampledFunction

KINDS = ("delta", "step", "user")

# Taylor coefficients of Vbar(x)/V0 in e = |x|/a - 1/2 (closed form is 0/0 at e = 0)
_HALF_A_TAYLOR = (
    0.52698177546350665717, -0.70264236728467554289, -0.38573893678422633279,
    0.56288672414107159935, 0.11357397094447952717, -0.17586554299713563365,
    -0.018427441805382855871, 0.029742066363488018032,
)
_TAYLOR_RADIUS = 5e-3


@dataclass(frozen=True)
class PotentialSpec:
    kind: str
    V0: float = 1.0
    user_fn: Optional[Callable] = None
    L_feature: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}")
        if not math.isfinite(self.V0):
            raise DomainError("V0 must be finite")
        if (self.kind == "user") != (self.user_fn is not None):
            raise DomainError("user_fn is required for, and only for, kind='user'")


def delta_samples(V0: float, g: Grid) -> np.ndarray:
    """(V0 a^2/2) [Pi(x_n - a/2) + Pi(x_n + a/2)]^2 for V = V0 a delta(x)."""
    a, K, x = g.a, g.K, g.points
    return 0.5 * V0 * a * a * (projector_kernel(x - a / 2, K) + projector_kernel(x + a / 2, K)) ** 2


def _phi0_sq(K):
    s = MaxLocState(0.0, K)
    return lambda x: np.asarray(maxloc_coordinate(s, x)) ** 2


def _cumulative_below(K: float, y: np.ndarray) -> np.ndarray:
    """Integral of |phi_0|^2 from -infinity to each y.

    Panels of width a/8 on [-X, X] with X = max(1000 a, max|y| + 10 a); the
    part below -X is taken from the cycle-averaged envelope
    |phi_0|^2 ~ a^3/(4 pi^2 x^4).
    """
    a = math.pi / K
    X = max(1000.0 * a, float(np.max(np.abs(y))) + 10.0 * a)
    h = a / 8
    n_pan = int(math.ceil(2 * X / h))
    X = 0.5 * n_pan * h
    f = _phi0_sq(K)
    nodes, weights = gauss_legendre_panels(-X, X, n_pan)
    panel = (weights * f(nodes)).reshape(n_pan, -1).sum(axis=1)
    edges_val = np.concatenate([[0.0], np.cumsum(panel)])
    tail = a ** 3 / (12 * math.pi ** 2 * X ** 3)
    j = np.clip(np.floor((y + X) / h).astype(int), 0, n_pan - 1)
    lo = -X + j * h
    gx, gw = np.polynomial.legendre.leggauss(16)
    half = 0.5 * (y - lo)
    nodes = lo[:, None] + half[:, None] * (gx[None, :] + 1.0)
    part = half * (f(nodes) @ gw)
    return tail + edges_val[j] + part


def step_samples(V0: float, g: Grid) -> np.ndarray:
    """Vbar_n = V0 times the weight of |phi_n|^2 on x < 0, for V = V0 Theta(-x)."""
    return V0 * _cumulative_below(g.K, -g.points)


def simple_step_samples(V0: float, g: Grid) -> SampledFunction:
    """Plain samples V0 Theta(-x_n), with Theta(0) = 1/2."""
    x = g.points
    return SampledFunction(g, V0 * np.where(x < 0, 1.0, np.where(x > 0, 0.0, 0.5)))


def user_samples(fn: Callable, g: Grid, rel_tol: float = 1e-8, start: float = 200.0,
                 max_extent: float = 12800.0) -> np.ndarray:
    """Vbar_n = integral of V(x)|phi_0(x - x_n)|^2 for a user potential.

    fn must accept numpy arrays (see as_vectorised).
    The range x_n +- X is doubled from X = start*a until the added shell
    changes every sample by less than rel_tol (relative, floor 1); beyond
    max_extent*a the integral is reported as not convergent.
    """
    a, K = g.a, g.K
    f = _phi0_sq(K)
    centers = g.points

    def shell(lo, hi):
        n_pan = max(1, int(math.ceil((hi - lo) / (a / 8))))
        u, w = gauss_legendre_panels(lo, hi, n_pan)
        vals = np.asarray(fn(centers[:, None] + u[None, :]), dtype=float)
        return vals @ (w * f(u))

    X = start * a
    total = shell(-X, X)
    while True:
        if 2 * X > max_extent * a:
            raise QuadratureError("sampling integral does not converge; potential grows too fast",
                                  float(np.max(np.abs(total))), float("inf"))
        add = shell(-2 * X, -X) + shell(X, 2 * X)
        total = total + add
        X *= 2
        if np.all(np.abs(add) <= rel_tol * np.maximum(np.abs(total), 1.0)):
            return total


def as_vectorised(fn: Callable) -> Callable:
    """fn itself if it maps arrays elementwise, else a numpy.vectorize wrapper."""
    try:
        ok = np.asarray(fn(np.zeros((2, 2)))).shape == (2, 2)
    except Exception:
        ok = False
    return fn if ok else np.vectorize(fn, otypes=[float])


def sample_potential(p: PotentialSpec, g: Grid) -> SampledFunction:
    if p.kind == "delta":
        vals = delta_samples(p.V0, g)
    elif p.kind == "step":
        vals = step_samples(p.V0, g)
    else:
        fn = as_vectorised(p.user_fn)
        vals = user_samples(lambda x: p.V0 * np.asarray(fn(x), dtype=float), g)
    return SampledFunction(g, vals)


def plain_samples(p: PotentialSpec, g: Grid) -> SampledFunction:
    """Point values V(x_n) instead of maxloc expectation values."""
    if p.kind == "step":
        return simple_step_samples(p.V0, g)
    if p.kind == "user":
        vals = as_vectorised(p.user_fn)(g.points)
        return SampledFunction(g, p.V0 * np.asarray(vals, dtype=float))
    raise DomainError("a delta potential has no point samples")


def observe_and_reconstruct(p: PotentialSpec, g: Grid, sampling: str = "maxloc") -> BandlimitedFunction:
    if sampling == "maxloc":
        src = sample_potential(p, g)
    elif sampling == "plain":
        src = plain_samples(p, g)
    else:
        raise DomainError("sampling must be 'maxloc' or 'plain'")
    return BandlimitedFunction(src)


def delta_reconstructed_closed_form(V0: float, a: float, x):
    """Bandlimited reconstruction of the observed delta potential V0 a delta(x).

    Vbar(x) = V0 a^2/((2 pi)^2 D) [a^2/D - 2 a x sin(Kx)/D + (4x/a) sin(Kx) - pi cos(Kx)],
    D = x^2 - a^2/4, with a Taylor branch near x = +-a/2.
    """
    t = np.abs(np.asarray(x, dtype=float)) / a
    e = t - 0.5
    near = np.abs(e) < _TAYLOR_RADIUS
    ts = np.where(near, 0.0, t)
    D = ts * ts - 0.25
    s, c = np.sin(np.pi * ts), np.cos(np.pi * ts)
    closed = (1.0 / D - 2 * ts * s / D + 4 * ts * s - np.pi * c) / (4 * np.pi ** 2 * D)
    taylor = np.zeros_like(e)
    for coef in reversed(_HALF_A_TAYLOR):
        taylor = taylor * e + coef
    out = V0 * np.where(near, taylor, closed)
    return out if out.ndim else float(out)


def delta_band_projection(V0: float, a: float, x, spec: QuadSpec = QuadSpec()):
    """Band projection of the smeared delta, V0 a^2/2 (Pi(y - a/2) + Pi(y + a/2))^2,
    by quadrature over the band of its Fourier transform (an independent route
    to the closed form)."""
    K = math.pi / a

    def H(q):
        q = np.abs(q)
        return (2 * np.cos(q * a / 2) * (2 * K - q) + (4 / a) * np.sin(q * a / 2)) / (2 * np.pi)

    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    for i, xi in enumerate(xs):
        val = oscillatory_integrate(lambda q: np.cos(q * xi) * H(q), 0.0, K, abs(xi) + a, spec)
        out[i] = 0.5 * V0 * a * a * 2 * val / (2 * np.pi)
    return out if np.ndim(x) else float(out[0])


def step_reconstruction_analytic(V0: float, K: float, x):
    """V0 (1/2 - Si(K x)/pi)."""
    out = V0 * (0.5 - np.asarray(sine_integral(K * np.asarray(x, dtype=float))) / math.pi)
    return out if np.ndim(out) else float(out)
