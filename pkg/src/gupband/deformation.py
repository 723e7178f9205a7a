"""Deformation families f(|u|), u = alpha p, with F, F^-1 and the dispersion.

A family is described by
    f(u)      the deformation function, f(0) = 1, even, increasing in |u|
    F(u)      integral of 1/f from 0 to u (odd, bounded by F_infinity)
    F_inv(v)  its inverse on (-F_infinity, F_infinity)
and the band edge K = F_infinity/(alpha hbar). The wavevector and canonical
momentum are tied by hbar k = F(alpha p)/alpha.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize, special

from .numerics import DomainError, OutOfBandError

SQRT_PI_2 = math.sqrt(math.pi) / 2.0


class UnsupportedError(DomainError):
    """The requested operation is not available for this family."""


def _arr(x):
    return np.asarray(x, dtype=float)


def _ret(out):
    return out if np.ndim(out) else float(out)


def _series(v, coeffs, start):
    """v**start * sum_j coeffs[j] v**j, by Horner's rule."""
    acc = np.zeros_like(v)
    for c in reversed(coeffs):
        acc = acc * v + c
    return acc * v ** start


@dataclass(frozen=True)
class Deformation:
    """A deformation family.

    `g_prime(w)` is df/dw with f viewed as a function of w = u^2, the
    convention used by the wavepacket spreading formulas. `F_gap(u)` is
    F_infinity - F(u) for u >= 0, computed without cancellation.
    `ratio_m1(v)` is F_inv(v)/v - 1, accurate for tiny v. `continuation(v)`
    is [F_inv(-i v)]^2 for real v >= 0 (None if unknown).
    """

    name: str
    f: Callable
    F: Callable
    F_inv: Callable
    f1: float
    f2: float
    F_infinity: float
    g_prime: Callable
    F_gap: Callable
    ratio_m1: Callable
    continuation: Optional[Callable] = None

    @property
    def needs_explicit_K(self) -> bool:
        return not math.isfinite(self.F_infinity)

    @property
    def admissible(self) -> bool:
        return bool(is_admissible(self))

    def two_w_g_prime(self, u):
        """2 w g'(w) at w = u^2, i.e. u f'(u); finite also where g' is not."""
        ua = np.abs(_arr(u))
        w = ua * ua
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(ua == 0, 0.0, 2.0 * w * self.g_prime(np.where(ua == 0, 1.0, w)))
        return _ret(out)


# kmm: f = 1 + u^2 ------------------------------------------------------------

def _kmm_ratio_m1(v):
    v = _arr(v)
    av = np.abs(v)
    small = av < 1e-2
    safe = np.where(small | (av == 0), 1.0, v)
    direct = np.tan(safe) / safe - 1.0
    v2 = v * v
    ser = v2 * (1 / 3 + v2 * (2 / 15 + v2 * (17 / 315 + v2 * 62 / 2835)))
    return _ret(np.where(small, ser, direct))


def _kmm():
    return Deformation(
        name="kmm",
        f=lambda u: 1.0 + _arr(u) ** 2,
        F=lambda u: _ret(np.arctan(_arr(u))),
        F_inv=lambda v: _ret(np.tan(_arr(v))),
        f1=0.0, f2=1.0, F_infinity=math.pi / 2,
        g_prime=lambda w: _ret(np.ones_like(_arr(w))),
        F_gap=lambda u: _ret(np.arctan2(1.0, _arr(u))),
        ratio_m1=_kmm_ratio_m1,
        continuation=lambda v: _ret(-np.tanh(_arr(v)) ** 2),
    )


# gauss: f = exp(u^2) ---------------------------------------------------------

def _gauss_F_inv(v):
    v = _arr(v)
    y = np.clip(v / SQRT_PI_2, -np.nextafter(1.0, 0.0), np.nextafter(1.0, 0.0))
    u = special.erfinv(y)
    # Newton polish on F(u) = v; F'(u) = exp(-u^2)
    for _ in range(2):
        r = SQRT_PI_2 * special.erf(u) - v
        step = r * np.exp(np.minimum(u * u, 700.0))
        u = np.where(np.abs(u) < 5.0, u - step, u)
    return _ret(u)


def _gauss_ratio_m1(v):
    v = _arr(v)
    av = np.abs(v)
    small = av < 1e-2
    safe = np.where(small | (av == 0), 1.0, v)
    direct = _arr(_gauss_F_inv(safe)) / safe - 1.0
    v2 = v * v
    ser = v2 * (1 / 3 + v2 * (7 / 30 + v2 * 127 / 630))
    return _ret(np.where(small, ser, direct))


def _erfi_inverse(z):
    """Solve erfi(y) = z for y >= 0, z >= 0."""
    if z == 0:
        return 0.0
    if z < 1e-8:
        return z * SQRT_PI_2
    target = math.log(z)
    g = lambda y: math.log(special.erfi(y)) - target
    hi = 1.0
    while g(hi) < 0:
        hi *= 2.0
    return optimize.brentq(g, 1e-300, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _gauss_continuation(v):
    v = _arr(v)
    y = np.vectorize(lambda s: _erfi_inverse(abs(s) / SQRT_PI_2))(v)
    return _ret(-(y ** 2))


def _gauss():
    return Deformation(
        name="gauss",
        f=lambda u: np.exp(_arr(u) ** 2),
        F=lambda u: _ret(SQRT_PI_2 * special.erf(_arr(u))),
        F_inv=_gauss_F_inv,
        f1=0.0, f2=1.0, F_infinity=SQRT_PI_2,
        g_prime=lambda w: _ret(np.exp(_arr(w))),
        F_gap=lambda u: _ret(SQRT_PI_2 * special.erfc(_arr(u))),
        ratio_m1=_gauss_ratio_m1,
        continuation=_gauss_continuation,
    )


# exp_abs: f = exp(|u|) -------------------------------------------------------

def _expabs_ratio_m1(v):
    v = _arr(v)
    av = np.abs(v)
    small = av < 1e-2
    safe = np.where(small | (av == 0), 0.5, av)
    direct = -np.log1p(-safe) / safe - 1.0
    ser = _series(av, [1 / (j + 2) for j in range(12)], 1)
    return _ret(np.where(small, ser, direct))


def _expabs_continuation(v):
    # [F_inv]^2 = G(|v|) with G(z) = log(1 - z)^2. Even powers of |v| are
    # read as powers of v^2 and odd ones as v^(2j)|w|, which continues to
    # Re G(i v) + Im G(i v).
    v = np.abs(_arr(v))
    G = np.log(1.0 - 1j * v) ** 2
    return _ret(G.real + G.imag)


def _exp_abs():
    return Deformation(
        name="exp_abs",
        f=lambda u: np.exp(np.abs(_arr(u))),
        F=lambda u: _ret(-np.expm1(-np.abs(_arr(u))) * np.sign(_arr(u))),
        F_inv=lambda v: _ret(-np.log1p(-np.abs(_arr(v))) * np.sign(_arr(v))),
        f1=1.0, f2=0.5, F_infinity=1.0,
        g_prime=lambda w: _ret(np.exp(np.sqrt(_arr(w))) / (2.0 * np.sqrt(_arr(w)))),
        F_gap=lambda u: _ret(np.exp(-_arr(u))),
        ratio_m1=_expabs_ratio_m1,
        continuation=_expabs_continuation,
    )


# identity: f = 1, ordinary QM with a hard cutoff ------------------------------

def _identity():
    return Deformation(
        name="identity",
        f=lambda u: _ret(np.ones_like(_arr(u))),
        F=lambda u: _ret(_arr(u).copy()),
        F_inv=lambda v: _ret(_arr(v).copy()),
        f1=0.0, f2=0.0, F_infinity=math.inf,
        g_prime=lambda w: _ret(np.zeros_like(_arr(w))),
        F_gap=lambda u: _ret(np.full_like(_arr(u), math.inf)),
        ratio_m1=lambda v: _ret(np.zeros_like(_arr(v))),
        continuation=lambda v: _ret(-_arr(v) ** 2),
    )


_BUILTINS = {"kmm": _kmm, "gauss": _gauss, "exp_abs": _exp_abs, "identity": _identity}
BUILTIN_NAMES = tuple(_BUILTINS)


def builtin(name: str) -> Deformation:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise DomainError(f"unknown deformation {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters; K is the band edge and a = pi/K the grid spacing."""

    alpha: float
    hbar: float = 1.0
    mass: float = 1.0
    K: float = math.nan

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise DomainError("hbar and mass must be positive")
        if not self.alpha >= 0 or not math.isfinite(self.alpha):
            raise DomainError("alpha must be finite and non-negative")
        if not (math.isfinite(self.K) and self.K > 0):
            raise DomainError("K must be positive and finite")

    @property
    def a(self) -> float:
        return math.pi / self.K

    @property
    def band_edge(self) -> float:
        """alpha hbar K, the edge of F's range that the band maps onto."""
        return self.alpha * self.hbar * self.K

    @classmethod
    def for_deformation(cls, d: Deformation, alpha: float, hbar: float = 1.0,
                        mass: float = 1.0, K: Optional[float] = None) -> "ModelParams":
        if d.needs_explicit_K:
            if K is None:
                raise DomainError(f"deformation {d.name!r} needs an explicit K")
            return cls(alpha=alpha, hbar=hbar, mass=mass, K=float(K))
        if not alpha > 0:
            raise DomainError("alpha must be positive for a bandlimiting deformation")
        K_derived = d.F_infinity / (alpha * hbar)
        if K is not None and not math.isclose(K, K_derived, rel_tol=1e-12):
            raise DomainError(f"K={K} inconsistent with F_infinity/(alpha hbar)={K_derived}")
        return cls(alpha=alpha, hbar=hbar, mass=mass, K=K_derived)

    @classmethod
    def from_K(cls, d: Deformation, K: float, hbar: float = 1.0, mass: float = 1.0,
               alpha: Optional[float] = None) -> "ModelParams":
        """Parameters with a prescribed band edge (alpha follows for GUP families)."""
        if d.needs_explicit_K:
            return cls(alpha=0.0 if alpha is None else alpha, hbar=hbar, mass=mass, K=float(K))
        return cls(alpha=d.F_infinity / (hbar * K), hbar=hbar, mass=mass, K=float(K))


def _check_band(p: ModelParams, k):
    k = _arr(k)
    if np.any(np.abs(k) > p.K * (1 + 1e-15)):
        raise OutOfBandError(f"wavevector outside the band |k| <= K = {p.K}")
    return k


def canonical_momentum(d: Deformation, p: ModelParams, k):
    """p(k) = F_inv(alpha hbar k)/alpha, equal to hbar k (1 + ratio_m1)."""
    k = _check_band(p, k)
    v = p.alpha * p.hbar * k
    return _ret(p.hbar * k * (1.0 + _arr(d.ratio_m1(v))))


def wavevector(d: Deformation, p: ModelParams, mom):
    """Inverse of canonical_momentum: k = F(alpha p)/(alpha hbar)."""
    mom = _arr(mom)
    if p.alpha == 0 or d.needs_explicit_K:
        return _ret(mom / p.hbar)
    return _ret(_arr(d.F(p.alpha * mom)) / (p.alpha * p.hbar))


def kinetic_energy(d: Deformation, p: ModelParams, k):
    """[F_inv(alpha hbar k)]^2/(2 m alpha^2), written as (hbar k)^2 (1+q)^2/(2m)."""
    k = _check_band(p, k)
    q = _arr(d.ratio_m1(p.alpha * p.hbar * k))
    with np.errstate(over="ignore"):
        out = (p.hbar * k) ** 2 * (1.0 + q) ** 2 / (2.0 * p.mass)
    return _ret(out)


def kinetic_energy_series(d: Deformation, p: ModelParams, k):
    """Small-k expansion (hbar k)^2/(2m) [1 + f1 v + (7 f1^2 + 8 f2)/12 v^2], v = alpha hbar |k|."""
    k = _arr(k)
    v = p.alpha * p.hbar * np.abs(k)
    return _ret((p.hbar * k) ** 2 / (2 * p.mass) * (1 + d.f1 * v + (7 * d.f1 ** 2 + 8 * d.f2) / 12 * v * v))


@dataclass(frozen=True)
class SeriesReport:
    name: str
    max_rel_dev_F: float
    max_rel_dev_F_inv: float
    order_F: float
    order_F_inv: float

    @property
    def max_rel_dev(self) -> float:
        return max(self.max_rel_dev_F, self.max_rel_dev_F_inv)


def _order(u, res):
    res = np.abs(res)
    if np.all(res == 0):
        return math.inf
    if np.any(res == 0):
        return math.inf
    return float(np.polyfit(np.log(u), np.log(res), 1)[0])


def series_check(d: Deformation, u=(0.01, 0.02, 0.04)) -> SeriesReport:
    """Compare F and F_inv with their third-order expansions at small arguments.

    The relative deviation must vanish faster than u^2; `order_*` is the
    fitted power of the absolute residual (4 or more when the cubic terms
    are right, infinity when the series is exact).
    """
    u = np.asarray(u, dtype=float)
    f1, f2 = d.f1, d.f2
    F_ser = u - 0.5 * f1 * u * np.abs(u) + (f1 * f1 - f2) / 3.0 * u ** 3
    Fi_ser = u + 0.5 * f1 * u * np.abs(u) + (f1 * f1 + 2 * f2) / 6.0 * u ** 3
    rF = _arr(d.F(u)) - F_ser
    rFi = _arr(d.F_inv(u)) - Fi_ser
    return SeriesReport(d.name, float(np.max(np.abs(rF / u))), float(np.max(np.abs(rFi / u))),
                        _order(u, rF), _order(u, rFi))


@dataclass(frozen=True)
class AdmissibilityReport:
    """Both admissibility sub-results; truthy only if both hold."""

    name: str
    box_admissible: bool
    maxloc_energy_finite: bool
    faster_than_quadratic: bool

    def __bool__(self) -> bool:
        return self.box_admissible and self.maxloc_energy_finite


def box_admissible(d: Deformation) -> bool:
    """lim [F_inv(-i v)]^2 / v^3 = 0 as v -> infinity, judged on v up to 1e8."""
    if d.continuation is None:
        return False
    vs = np.array([1e4, 1e6, 1e8])
    r = np.abs(_arr(d.continuation(vs))) / vs ** 3
    return bool(np.all(np.isfinite(r)) and r[-1] < 1e-4 and r[-1] <= r[0])


def grows_faster_than_quadratic(d: Deformation) -> bool:
    """Whether f(u)/u^2 increases without bound (probed up to u = 1e3)."""
    us = np.array([10.0, 100.0, 1000.0])
    with np.errstate(over="ignore"):
        r = _arr(d.f(us)) / us ** 2
    return bool(r[-1] > 1e3 * r[0])


def is_admissible(d: Deformation, p: Optional[ModelParams] = None) -> AdmissibilityReport:
    from .maxloc import maxloc_energy_finite

    return AdmissibilityReport(d.name, box_admissible(d), maxloc_energy_finite(d, p),
                               grows_faster_than_quadratic(d))
