"""Free motion of a bandlimited Gaussian wavepacket.

The initial amplitude is Gaussian in the canonical momentum,
    a0(k) = N exp(-(p(k) - pbar)^2 / (4 sigma_p^2)),   p(k) = F_inv(alpha hbar k)/alpha,
and evolves as
    psi(x, t) = (1/2pi) int_{-K}^{K} dk a0(k) exp(-i p(k)^2 t/(2 m hbar) + i k x).
Expanding the exponent about kbar gives a Gaussian that moves with
vbar = fbar pbar/m and spreads on the time scale tau = tau0 fbar/(fbar + 2 w fbar'),
with w = alpha^2 pbar^2 and f read as a function of w.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .deformation import Deformation, ModelParams, canonical_momentum, wavevector
from .numerics import DomainError, OutOfBandError, QuadratureError, gauss_legendre_panels

# a0 is dropped where it is below exp(-DROP_EXPONENT) of its peak (about 1e-18)
DROP_EXPONENT = 42.0


@dataclass(frozen=True)
class WavepacketSpec:
    k_bar: float
    sigma_p: float
    t_grid: Sequence[float] = (0.0,)
    x_grid: Optional[Sequence[float]] = None

    def validate(self, p: ModelParams) -> None:
        if not abs(self.k_bar) < p.K:
            raise OutOfBandError("k_bar must lie strictly inside the band")
        if not self.sigma_p > 0:
            raise DomainError("sigma_p must be positive")
        if self.sigma_p > 0.05 * p.hbar * p.K:
            warnings.warn("sigma_p exceeds 0.05 hbar K; the Gaussian approximation degrades",
                          stacklevel=2)


@dataclass(frozen=True)
class WavepacketDiagnostics:
    p_bar: float
    f_bar: float
    f_bar_prime: float
    v_bar: float
    beta1: float
    beta2: float
    tau: float
    tau0: float
    sigma_x2_0: float

    def sigma_x2(self, t):
        t = np.asarray(t, dtype=float)
        out = self.sigma_x2_0 * (1.0 + (t / self.tau) ** 2)
        return out if out.ndim else float(out)


def diagnostics(w: WavepacketSpec, d: Deformation, p: ModelParams) -> WavepacketDiagnostics:
    pb = float(canonical_momentum(d, p, w.k_bar))
    return diagnostics_at_momentum(d, p, pb, w.sigma_p)


def diagnostics_at_momentum(d: Deformation, p: ModelParams, p_bar: float,
                            sigma_p: float) -> WavepacketDiagnostics:
    """Same as diagnostics, parametrised by pbar instead of kbar."""
    u = p.alpha * abs(p_bar)
    fb = float(d.f(u))
    wg = float(d.two_w_g_prime(u))            # 2 w f'(w), finite at w = 0
    with np.errstate(divide="ignore"):
        fbp = float(d.g_prime(u * u))               # may be infinite at w = 0
    hb, m = p.hbar, p.mass
    tau0 = m * hb / (2.0 * sigma_p ** 2)
    return WavepacketDiagnostics(
        p_bar=p_bar, f_bar=fb, f_bar_prime=fbp, v_bar=fb * p_bar / m,
        beta1=2.0 * hb * p_bar * fb, beta2=hb * hb * fb * (fb + wg),
        tau=tau0 * fb / (fb + wg), tau0=tau0,
        sigma_x2_0=hb * hb * fb * fb / (4.0 * sigma_p ** 2))


def _support(w: WavepacketSpec, d: Deformation, p: ModelParams):
    """k-interval outside which a0 is below exp(-DROP_EXPONENT) of its peak."""
    pb = float(canonical_momentum(d, p, w.k_bar))
    dp = 2.0 * w.sigma_p * math.sqrt(DROP_EXPONENT)
    lo = float(wavevector(d, p, pb - dp))
    hi = float(wavevector(d, p, pb + dp))
    return max(lo, -p.K), min(hi, p.K), pb


def initial_amplitude(w: WavepacketSpec, d: Deformation, p: ModelParams, k, norm: float = 1.0):
    """norm * exp(-(p(k) - pbar)^2/(4 sigma_p^2)); equals norm at k = kbar."""
    k = np.asarray(k, dtype=float)
    if np.any(np.abs(k) > p.K * (1 + 1e-15)):
        raise OutOfBandError("wavevector outside the band")
    pb = float(canonical_momentum(d, p, w.k_bar))
    with np.errstate(over="ignore", invalid="ignore"):
        pk = np.asarray(canonical_momentum(d, p, k), dtype=float)
        out = norm * np.exp(-((pk - pb) ** 2) / (4.0 * w.sigma_p ** 2))
    out = np.where(np.isfinite(pk), out, 0.0)
    return out if out.ndim else float(out)


class _Rule:
    """Quadrature nodes on the amplitude's support with a0 normalised."""

    def __init__(self, w, d, p, n_panels):
        lo, hi, _ = _support(w, d, p)
        self.k, self.wt = gauss_legendre_panels(lo, hi, n_panels)
        a0 = initial_amplitude(w, d, p, self.k)
        self.norm = 1.0 / math.sqrt(np.sum(self.wt * a0 ** 2) / (2 * np.pi))
        self.a0 = a0 * self.norm
        mom = np.asarray(canonical_momentum(d, p, self.k), dtype=float)
        self.phase_rate = mom ** 2 / (2.0 * p.mass * p.hbar)

    def psi(self, x, t):
        coef = self.wt * self.a0 * np.exp(-1j * self.phase_rate * t) / (2 * np.pi)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.shape, dtype=complex)
        step = max(1, (1 << 22) // self.k.size)
        for s in range(0, x.size, step):
            out[s:s + step] = np.exp(1j * np.outer(x[s:s + step], self.k)) @ coef
        return out


def _panels_needed(w, d, p, x, t):
    lo, hi, _ = _support(w, d, p)
    kk = np.linspace(lo, hi, 257)
    mom = np.asarray(canonical_momentum(d, p, kk), dtype=float)
    vt = np.gradient(mom ** 2 / (2.0 * p.mass * p.hbar), kk) * t
    # local frequency of exp(i(k x - E(k) t/hbar)) in k is |x - E'(k) t/hbar|
    xs = np.array([np.min(x), np.max(x)]) if np.size(x) else np.zeros(2)
    omega = float(np.max(np.abs(xs[:, None] - np.array([vt.min(), vt.max()])[None, :])))
    return max(16, int(math.ceil((hi - lo) * 4 * max(omega, 1e-300) / math.pi)))


def evolve(w: WavepacketSpec, d: Deformation, p: ModelParams, x, t: float,
           rel_tol: float = 1e-10, max_panels: int = 1 << 14):
    """psi(x, t) by Gauss-Legendre quadrature over the support of a0.

    a0 is normalised so the packet has unit norm. The panel count follows the
    fastest phase oscillation and is doubled until the result is stable.
    """
    w.validate(p)
    x_arr = np.asarray(x, dtype=float)
    n = _panels_needed(w, d, p, x_arr, t)
    prev = _Rule(w, d, p, n).psi(x_arr.ravel(), t)
    while True:
        n *= 2
        if n > max_panels:
            raise QuadratureError("wavepacket quadrature did not converge",
                                  float(np.max(np.abs(prev))), float("nan"))
        cur = _Rule(w, d, p, n).psi(x_arr.ravel(), t)
        err = float(np.max(np.abs(cur - prev)))
        if err <= rel_tol * float(np.max(np.abs(cur))):
            return cur.reshape(x_arr.shape) if x_arr.ndim else complex(cur[0])
        prev = cur


@dataclass(frozen=True)
class Moments:
    t: float
    norm: float
    center: float
    variance: float


def default_x_grid(diag: WavepacketDiagnostics, t: float, points: int = 801,
                   span: float = 8.0) -> np.ndarray:
    sx = math.sqrt(diag.sigma_x2(t))
    c = diag.v_bar * t
    return np.linspace(c - span * sx, c + span * sx, points)


def moments(w: WavepacketSpec, d: Deformation, p: ModelParams, t: float,
            x_grid=None) -> Moments:
    """Norm, centre and variance of |psi(x, t)|^2 by the trapezoid rule."""
    diag = diagnostics(w, d, p)
    x = default_x_grid(diag, t) if x_grid is None else np.asarray(x_grid, dtype=float)
    rho = np.abs(evolve(w, d, p, x, t)) ** 2
    nrm = float(np.trapezoid(rho, x))
    c = float(np.trapezoid(x * rho, x)) / nrm
    var = float(np.trapezoid((x - c) ** 2 * rho, x)) / nrm
    return Moments(t, nrm, c, var)


def fit_velocity(ms: Sequence[Moments]) -> float:
    """Least-squares slope of centre against time."""
    t = np.array([m.t for m in ms])
    c = np.array([m.center for m in ms])
    return float(np.polyfit(t, c, 1)[0])


def gaussian_approx_density(w: WavepacketSpec, d: Deformation, p: ModelParams, x, t: float):
    """Normalised Gaussian with mean vbar t and variance sigma_x^2(t)."""
    diag = diagnostics(w, d, p)
    s2 = diag.sigma_x2(t)
    x = np.asarray(x, dtype=float)
    out = np.exp(-((x - diag.v_bar * t) ** 2) / (2 * s2)) / math.sqrt(2 * math.pi * s2)
    return out if out.ndim else float(out)


def half_line_profile(A: complex, B):
    """Integral over s < 0 of exp(-A s^2 + i B s), Re A > 0.

    This is the band-edge approximation where the packet sits at the edge
    of the band and only one side of the Gaussian survives (experimental).
    Written with the Faddeeva function w(z) = exp(-z^2) erfc(-i z).
    """
    sa = np.sqrt(complex(A))
    z = -np.asarray(B, dtype=complex) / (2 * sa)
    out = math.sqrt(math.pi) / (2 * sa) * special.wofz(z)
    return out if out.ndim else complex(out)
