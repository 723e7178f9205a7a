"""Particle in a square well: bound states and first-order energy shifts.

The well is V(x) = V0 [Theta(-x) + Theta(x - L)]. Inside it the bound state
is B (exp(ikx) +- exp(ik(L - x))) and outside it decays like exp(-kappa|x|).
With delta = arctan(k/kappa) every level n = 1, 2, ... satisfies

    k L = n pi - 2 delta,

odd n being the "plus" branch and even n the "minus" branch. The projected
Hamiltonian differs from the ordinary one by three first-order shifts: the
modified dispersion (h_nn = R_h eps), the projected potential (v_nn = R_v eps)
and the projected kinetic operator (t_nn ~ R_t eps). A brute-force
diagonalization in a plane-wave basis cross-checks their sum.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, optimize

from .deformation import Deformation, ModelParams, UnsupportedError, kinetic_energy
from .numerics import (DomainError, NumericalError, QuadSpec, oscillatory_integrate,
                       sine_integral_tail)

PLANCK_LENGTH = 1.616e-35  # metres
ORDER_TABLE_LENGTHS = (1e-15, 1e-10, 1e-6)
NU_NODES = 64
ORACLE_DOMAIN_FACTOR = 16.0
ORACLE_MAX_BASIS = 4096

_I_SPEC = QuadSpec(panel_width=0.5, rel_tol=1e-13, abs_tol=1e-300)


class PerturbationInvalid(DomainError):
    """The first-order expansion does not apply (level at or near the band edge)."""


class OracleConvergenceError(NumericalError):
    """Oracle energies changed too much when the periodic domain was doubled."""


@dataclass(frozen=True)
class WellSpec:
    V0: float
    L: float
    level_max: int = 3

    def __post_init__(self):
        # V0 = 0 is kept for the free-particle check of the oracle; it binds nothing
        if not self.V0 >= 0:
            raise DomainError("V0 must be non-negative (math.inf for the infinite well)")
        if not (math.isfinite(self.L) and self.L > 0):
            raise DomainError("L must be positive")
        if self.level_max < 1:
            raise DomainError("level_max must be at least 1")

    @property
    def infinite(self) -> bool:
        return math.isinf(self.V0)

    @classmethod
    def from_kappa_L(cls, kappa_L: float, L: float, p: ModelParams, level_max: int = 3) -> "WellSpec":
        """Depth chosen so that sqrt(2 m V0) L/hbar = kappa_L."""
        V0 = (p.hbar * kappa_L / L) ** 2 / (2 * p.mass)
        return cls(V0, L, level_max)


@dataclass(frozen=True)
class BoxLevel:
    n: int
    branch: str
    k: float
    kappa: float
    eps: float
    rho: complex
    B: complex
    L: float

    @property
    def sign(self) -> int:
        return 1 if self.branch == "plus" else -1

    @property
    def residual(self) -> float:
        """|exp(ikL) +- (kappa - ik)/(kappa + ik)|, zero on a level."""
        if math.isinf(self.kappa):
            return abs(np.exp(1j * self.k * self.L) + self.sign)
        r = (self.kappa - 1j * self.k) / (self.kappa + 1j * self.k)
        return abs(np.exp(1j * self.k * self.L) + self.sign * r)

    @property
    def tail_weight(self) -> float:
        """|rho|^2/(2 kappa L), the share of the two outer regions in the norm (up to 1 +- s)."""
        if math.isinf(self.kappa):
            return 0.0
        return abs(self.rho) ** 2 / (2 * self.kappa * self.L)

    @property
    def sinc_term(self) -> float:
        """+- sin(kL)/(kL)."""
        kl = self.k * self.L
        return self.sign * math.sin(kl) / kl


def _branch(n: int) -> str:
    return "plus" if n % 2 else "minus"


def _normalization(k: float, kappa: float, L: float, sign: int, rho: complex) -> float:
    tail = 0.0 if math.isinf(kappa) else abs(rho) ** 2 / (2 * kappa * L)
    return 1.0 / math.sqrt(2 * L * (1 + sign * math.sin(k * L) / (k * L) + tail))


def solve_bound_states(w: WellSpec, p: ModelParams) -> List[BoxLevel]:
    """Levels n = 1..level_max of the well with the ordinary dispersion.

    For finite V0 the root of kL + 2 arctan(k/kappa) = n pi is bracketed in
    (0, min(n pi/L, k0)), k0 = sqrt(2 m V0)/hbar; it tends to n pi/L as V0
    grows. Levels that are not bound are left out with a warning. For
    V0 = inf the deep-well limit k = n pi/L, rho = 0 is returned.
    """
    hb, m, L = p.hbar, p.mass, w.L
    out = []
    if w.infinite:
        for n in range(1, w.level_max + 1):
            k = n * math.pi / L
            out.append(BoxLevel(n, _branch(n), k, math.inf, (hb * k) ** 2 / (2 * m), 0j,
                                complex(1 / math.sqrt(2 * L)), L))
        return out
    k0 = math.sqrt(2 * m * w.V0) / hb
    for n in range(1, w.level_max + 1):
        if k0 * L <= (n - 1) * math.pi:
            warnings.warn(f"level n={n} is not bound (V0 too shallow); skipped", stacklevel=2)
            continue

        def g(k):
            return k * L + 2 * math.atan2(k, math.sqrt(max(k0 * k0 - k * k, 0.0))) - n * math.pi

        hi = min(n * math.pi / L, k0)
        if not g(hi) > 0:
            raise NumericalError(f"no root bracketed for level n={n}")
        k = optimize.brentq(g, 0.0, hi, xtol=1e-15 * hi, rtol=4 * np.finfo(float).eps)
        kappa = math.sqrt(k0 * k0 - k * k)
        delta = math.atan2(k, kappa)
        rho = 1 - np.exp(-2j * delta)
        sign = 1 if n % 2 else -1
        B = _normalization(k, kappa, L, sign, rho)
        out.append(BoxLevel(n, _branch(n), k, kappa, (hb * k) ** 2 / (2 * m), complex(rho),
                            complex(B), L))
    return out


def wavefunction(level: BoxLevel, x):
    """The bound state in coordinates (well on [0, L])."""
    x = np.asarray(x, dtype=float)
    k, L, B, rho, s = level.k, level.L, level.B, level.rho, level.sign
    inside = B * (np.exp(1j * k * x) + s * np.exp(1j * k * (L - x)))
    if math.isinf(level.kappa):
        out = np.where((x >= 0) & (x <= L), inside, 0.0)
    else:
        kap = level.kappa
        left = B * rho * np.exp(kap * np.minimum(x, 0.0))
        # psi(L + y) = s psi(-y) by the reflection symmetry about L/2
        right = s * B * rho * np.exp(-kap * np.maximum(x - L, 0.0))
        out = np.where(x < 0, left, np.where(x > L, right, inside))
    return out if out.ndim else complex(out)


def asymptotic_B2(level: BoxLevel) -> float:
    """(1/2L)(1 - 2/(kappa L) + 4/(kappa L)^2), the deep-well expansion of |B|^2 (both branches)."""
    e = 1.0 / (level.kappa * level.L)
    return (1 - 2 * e + 4 * e * e) / (2 * level.L)


@dataclass(frozen=True)
class NuDecomposition:
    """KL = 2 pi (N + nu) = 4 pi (N' + nu') with integer N, N' and nu, nu' in [0, 1).

    Built from (N, nu) the fractional parts stay exact even where KL itself
    is far too large to resolve them in floating point.
    """

    N: int
    nu: float
    N_prime: int
    nu_prime: float

    def __post_init__(self):
        if not (0 <= self.nu < 1 and 0 <= self.nu_prime < 1):
            raise DomainError("fractional parts must lie in [0, 1)")

    @classmethod
    def from_parts(cls, N: int, nu: float) -> "NuDecomposition":
        N = int(N)
        if not 0 <= nu < 1:
            raise DomainError("nu must lie in [0, 1)")
        half = 0.5 * (N % 2 + nu)
        return cls(N, float(nu), N // 2 + int(half >= 1), half - int(half >= 1))

    @classmethod
    def from_KL(cls, KL: float) -> "NuDecomposition":
        if not (math.isfinite(KL) and KL > 0):
            raise DomainError("KL must be positive")
        r = KL / (2 * math.pi)
        N = math.floor(r)
        return cls.from_parts(N, min(r - N, np.nextafter(1.0, 0.0)))

    @property
    def KL(self) -> float:
        return 2 * math.pi * (self.N + self.nu)

    @property
    def KL_prime(self) -> float:
        return 4 * math.pi * (self.N_prime + self.nu_prime)


def _nu_dec(p: ModelParams, L: float, nu_dec: Optional[NuDecomposition]) -> NuDecomposition:
    if nu_dec is None:
        nu_dec = NuDecomposition.from_KL(p.K * L)
    if nu_dec.KL < 100:
        warnings.warn("KL < 100: the large-KL expansions are poor", stacklevel=3)
    return nu_dec


def pure_gup_shift(level: BoxLevel, d: Deformation, p: ModelParams) -> Tuple[float, float]:
    """(h_nn, R_h) from the modified dispersion alone.

    In the deep well R_h = (F_inv(alpha hbar k)/(alpha hbar k))^2 - 1. In a finite
    well the two outer regions add their share with the continued eigenvalue
    of the kinetic operator on exp(-kappa |x|), weighted by the norm split.
    """
    if not level.k < p.K:
        raise PerturbationInvalid("level lies at or beyond the band edge")
    v = p.alpha * p.hbar * level.k
    q = float(d.ratio_m1(v))
    R_inf = q * (2 + q)
    if abs(R_inf) > 1:
        raise PerturbationInvalid(f"R_h = {R_inf:.3g}: the shift is not small, first order fails")
    eps = level.eps
    if math.isinf(level.kappa):
        return R_inf * eps, R_inf
    s = level.sinc_term
    tw = level.tail_weight
    wv = p.alpha * p.hbar * level.kappa
    e_kap = (p.hbar * level.kappa) ** 2 / (2 * p.mass)
    if d.continuation is None:
        raise UnsupportedError(f"{d.name} has no continuation for the decaying tails")
    c_rel = 0.0 if wv == 0 else (float(d.continuation(wv)) + wv * wv) / (wv * wv)
    h = ((1 + s) * eps * R_inf + tw * e_kap * c_rel) / (1 + s + tw)
    return h, h / eps


def ic_plus(k: float, L: float, nu_dec: NuDecomposition) -> float:
    """I_c+ = integral of (1 - cos u)/u over [KL - kL, KL + kL].

    Written as an integral over s = u - KL of (1 - cos(2 pi nu + s))/(KL + s),
    so the phase comes from nu and not from reducing KL.
    """
    A, b = nu_dec.KL, k * L
    if not b < A:
        raise PerturbationInvalid("kL must be below KL")
    phi = 2 * math.pi * nu_dec.nu
    return oscillatory_integrate(lambda s: (1 - np.cos(phi + s)) / (A + s), -b, b, 1.0, _I_SPEC)


def ic_plus_expansion(k: float, K: float, n: int, nu: float) -> float:
    """(k/K)[4 sin^2(nu pi) + (n pi)^2 cos(2 nu pi)], the small-k/K expansion of I_c+."""
    return (k / K) * (4 * math.sin(nu * math.pi) ** 2 + (n * math.pi) ** 2 * math.cos(2 * nu * math.pi))


def is_plus(k: float, L: float, nu_dec: NuDecomposition) -> float:
    """I_s+ = Si(KL + kL) - Si(KL - kL), via the sine-integral tails."""
    A, b = nu_dec.KL, k * L
    phi = 2 * math.pi * nu_dec.nu

    def tail(sign):
        return sine_integral_tail(A + sign * b, math.cos(phi + sign * b), math.sin(phi + sign * b))

    return float(tail(-1) - tail(1))


def potential_shift(level: BoxLevel, p: ModelParams,
                    nu_dec: Optional[NuDecomposition] = None) -> Tuple[float, float]:
    """(v_nn, R_v): hbar^2 k I_c+/(m L pi) for odd n, exactly 0 for even n."""
    if level.n % 2 == 0:
        return 0.0, 0.0
    if level.n > 5:
        warnings.warn("n > 5: neglected O(n^4) terms may matter", stacklevel=2)
    nd = _nu_dec(p, level.L, nu_dec)
    I = ic_plus(level.k, level.L, nd)
    v = p.hbar ** 2 * level.k * I / (p.mass * level.L * math.pi)
    return v, v / level.eps


def kinetic_R_t(nu_dec: NuDecomposition) -> float:
    """(2/pi) Si(KL/2) - 1 = -(2/pi) times the tail beyond KL/2 = 2 pi (N' + nu')."""
    phi = 2 * math.pi * nu_dec.nu_prime
    z = 0.5 * nu_dec.KL
    return -2 / math.pi * float(sine_integral_tail(z, math.cos(phi), math.sin(phi)))


def kinetic_R_t_cosine(nu_dec: NuDecomposition) -> float:
    """(4/(KL pi))(1 - cos 2 pi nu'), the cosine approximation reported alongside."""
    return 4 / (nu_dec.KL * math.pi) * (1 - math.cos(2 * math.pi * nu_dec.nu_prime))


def kinetic_shift(level: BoxLevel, d: Deformation, p: ModelParams, w: Optional[WellSpec] = None,
                  nu_dec: Optional[NuDecomposition] = None) -> Tuple[float, float]:
    """(t_nn, R_t) with t_nn = R_t (1 + R_h) eps."""
    L = level.L if w is None else w.L
    nd = _nu_dec(p, L, nu_dec)
    R_t = kinetic_R_t(nd)
    _, R_h = pure_gup_shift(level, d, p)
    return R_t * (1 + R_h) * level.eps, R_t


def _gl01(n: int = NU_NODES):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1), 0.5 * w


def nu_average_R_v(level: BoxLevel, p: ModelParams, N: Optional[int] = None) -> float:
    """Integral over nu in [0, 1] of R_v with KL = 2 pi (N + nu) and k, L held fixed."""
    if level.n % 2 == 0:
        return 0.0
    N = NuDecomposition.from_KL(p.K * level.L).N if N is None else N
    nus, ws = _gl01()
    vals = []
    for nu in nus:
        nd = NuDecomposition.from_parts(N, float(nu))
        vals.append(2 * ic_plus(level.k, level.L, nd) / (level.k * level.L * math.pi))
    return float(np.dot(ws, vals))


def nu_average_R_t(KL: float) -> float:
    """Integral over nu' in [0, 1] of R_t with KL = 4 pi (N' + nu')."""
    Np = NuDecomposition.from_KL(KL).N_prime
    nus, ws = _gl01()
    vals = [kinetic_R_t(NuDecomposition.from_parts(2 * Np + int(2 * nu >= 1), (2 * nu) % 1.0))
            for nu in nus]
    return float(np.dot(ws, vals))


def kinetic_on_exponential(d: Deformation, p: ModelParams, s: float, kind: str) -> float:
    """Eigenvalue of the kinetic operator on exp(i s x) ("oscillatory") or exp(s x) ("decaying")."""
    if kind == "oscillatory":
        v = p.alpha * p.hbar * s
        if p.alpha == 0:
            return (p.hbar * s) ** 2 / (2 * p.mass)
        return float(d.F_inv(v)) ** 2 / (2 * p.mass * p.alpha ** 2)
    if kind == "decaying":
        if d.continuation is None:
            raise UnsupportedError(f"{d.name} has no known analytic continuation")
        v = abs(p.alpha * p.hbar * s)
        if v == 0:
            return -((p.hbar * s) ** 2) / (2 * p.mass)
        # relative form keeps the alpha -> 0 limit exact
        return float(d.continuation(v)) / (v * v) * (p.hbar * s) ** 2 / (2 * p.mass)
    raise DomainError("kind must be 'oscillatory' or 'decaying'")


@dataclass(frozen=True)
class LevelShift:
    n: int
    branch: str
    k: float
    eps: float
    R_h: float
    h_nn: float
    v_nn: float
    R_v: float
    t_nn: float
    R_t: float
    t_nn_approx: float
    R_t_cosine: float
    I_c_plus: float
    I_c_plus_expansion: float

    @property
    def total(self) -> float:
        return self.h_nn + self.v_nn + self.t_nn


@dataclass(frozen=True)
class ShiftReport:
    levels: Tuple[LevelShift, ...]
    R_v_avg: float
    R_t_avg: float
    nu: NuDecomposition
    params: dict = field(default_factory=dict)

    @property
    def average_target(self) -> float:
        """4/(KL pi)."""
        return 4 / (self.nu.KL * math.pi)


def shift_report(w: WellSpec, d: Deformation, p: ModelParams,
                 nu_dec: Optional[NuDecomposition] = None) -> ShiftReport:
    nd = _nu_dec(p, w.L, nu_dec)
    rows = []
    levels = solve_bound_states(w, p)
    for lv in levels:
        h, R_h = pure_gup_shift(lv, d, p)
        v, R_v = potential_shift(lv, p, nd)
        t, R_t = kinetic_shift(lv, d, p, w, nd)
        odd = lv.n % 2 == 1
        I = ic_plus(lv.k, lv.L, nd) if odd else 0.0
        I_exp = ic_plus_expansion(lv.k, nd.KL / lv.L, lv.n, nd.nu) if odd else 0.0
        rows.append(LevelShift(lv.n, lv.branch, lv.k, lv.eps, R_h, h, v, R_v, t, R_t,
                               R_t * lv.eps, kinetic_R_t_cosine(nd), I, I_exp))
    first = levels[0]
    R_v_avg = nu_average_R_v(first, p, nd.N)
    R_t_avg = nu_average_R_t(nd.KL)
    params = {"deformation": d.name, "alpha": p.alpha, "hbar": p.hbar, "mass": p.mass,
              "K": p.K, "V0": w.V0, "L": w.L, "KL": nd.KL, "N": nd.N, "nu": nd.nu,
              "N_prime": nd.N_prime, "nu_prime": nd.nu_prime}
    return ShiftReport(tuple(rows), R_v_avg, R_t_avg, nd, params)


@dataclass(frozen=True)
class OrderRow:
    L: float
    lP_over_L_sq: float
    inv_KL: float
    lP_over_L: float


def order_of_magnitude_table(lengths: Sequence[float] = ORDER_TABLE_LENGTHS,
                             l_P: float = PLANCK_LENGTH) -> List[OrderRow]:
    """(l_P/L)^2 and 1/(KL) for the kmm band edge K = pi/(2 alpha hbar), alpha hbar = l_P/(2 pi).

    The pure-GUP shift scales like (l_P/L)^2 and the bandwidth shifts like 1/(KL) ~ l_P/L.
    """
    ah = l_P / (2 * math.pi)
    K = math.pi / (2 * ah)
    return [OrderRow(L, (l_P / L) ** 2, 1 / (K * L), l_P / L) for L in lengths]


# brute-force oracle ----------------------------------------------------------

def _mode_count_K(K: float, D: float) -> int:
    """Largest m with 2 pi m/D < K."""
    m = math.floor(K * D / (2 * math.pi))
    return m - 1 if 2 * math.pi * m / D >= K else m


def max_oracle_K(L: float, domain_factor: float = ORACLE_DOMAIN_FACTOR,
                 max_basis: int = ORACLE_MAX_BASIS) -> float:
    """Largest band edge whose in-band plane waves on the domain fit in max_basis."""
    D = domain_factor * L
    m_max = (max_basis - 1) // 2
    return 2 * math.pi * (m_max + 0.5) / D


def _V_fourier(w: WellSpec, D: float, j):
    """(1/D) times the integral of V over one period against exp(-i 2 pi j x/D), well centred."""
    j = np.asarray(j, dtype=float)
    q = 2 * math.pi * j / D
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -2 * w.V0 * np.sin(q * w.L / 2) / (q * D)
    return np.where(j == 0, w.V0 * (1 - w.L / D), out)


def projected_hamiltonian(w: WellSpec, d: Deformation, p: ModelParams, domain_length: float):
    """(k_m, H): the Hamiltonian in the in-band plane waves of the periodic domain.

    H[m, m'] = T(k_m) delta + V~(k_m - k_m'); the symmetrised projected
    potential reduces to the in-band Fourier components of V.
    """
    if w.infinite:
        raise DomainError("the oracle needs a finite V0")
    m_max = _mode_count_K(p.K, domain_length)
    m = np.arange(-m_max, m_max + 1)
    k = 2 * math.pi * m / domain_length
    H = _V_fourier(w, domain_length, m[:, None] - m[None, :]).astype(complex)
    H[np.diag_indices_from(H)] += kinetic_energy(d, p, k)
    return k, H


def _parity_blocks(w, d, p, D):
    m_max = _mode_count_K(p.K, D)
    m = np.arange(0, m_max + 1)
    k = 2 * math.pi * m / D
    T = np.asarray(kinetic_energy(d, p, k), dtype=float)
    diff = _V_fourier(w, D, m[:, None] - m[None, :])
    summ = _V_fourier(w, D, m[:, None] + m[None, :])
    even = diff + summ
    even[0, :] /= math.sqrt(2)
    even[:, 0] /= math.sqrt(2)
    even[np.diag_indices_from(even)] += T
    odd = (diff - summ)[1:, 1:]
    odd[np.diag_indices_from(odd)] += T[1:]
    return even, odd


def lowest_eigenvalues(H: np.ndarray, n: int) -> np.ndarray:
    """The n lowest eigenvalues of a Hermitian matrix, ascending.

    Near the band edge the kinetic diagonal can exceed the low eigenvalues by
    ten orders of magnitude, and a direct eigensolver then loses them in
    rounding at the scale of the largest entry. For a positive-definite H the
    largest eigenvalues of H^-1, formed through a Cholesky factorization, keep
    their relative accuracy; other matrices fall back to the direct solver.
    The i-th value then carries a relative error of about machine epsilon
    times lambda_i/lambda_1, harmless while the wanted levels are of one order.
    """
    size = H.shape[0]
    n = min(n, size)
    if n <= 0:
        return np.empty(0)
    try:
        c = linalg.cho_factor(H, lower=True)
    except linalg.LinAlgError:
        return linalg.eigh(H, eigvals_only=True, subset_by_index=[0, n - 1])
    Hi = linalg.cho_solve(c, np.eye(size, dtype=H.dtype))
    Hi = 0.5 * (Hi + Hi.conj().T)
    mu = linalg.eigh(Hi, eigvals_only=True, subset_by_index=[size - n, size - 1])
    return np.sort(1.0 / mu)


def _lowest(w, d, p, D, n):
    out = [lowest_eigenvalues(block, n) for block in _parity_blocks(w, d, p, D)]
    return np.sort(np.concatenate(out))[:n]


@dataclass(frozen=True)
class OracleResult:
    energies: np.ndarray
    basis_size: int
    domain_length: float
    params: ModelParams
    converged: bool
    max_rel_change: float


def brute_force_oracle(w: WellSpec, d: Deformation, p: ModelParams,
                       basis_size: int = ORACLE_MAX_BASIS, domain_length: Optional[float] = None,
                       n_levels: Optional[int] = None, check: bool = True,
                       strict: bool = True, rel_tol: float = 1e-6) -> OracleResult:
    """Lowest energies of the projected Hamiltonian on a periodic domain.

    basis_size caps the number of plane waves; if the band holds more, K is
    lowered (and alpha raised to match) with a warning. The check re-solves
    on a domain twice as long; a relative change above rel_tol raises
    OracleConvergenceError when strict, else is reported.
    """
    D = ORACLE_DOMAIN_FACTOR * w.L if domain_length is None else float(domain_length)
    if not D > w.L:
        raise DomainError("domain_length must exceed L")
    n = w.level_max if n_levels is None else n_levels
    M = 2 * _mode_count_K(p.K, D) + 1
    if M > basis_size:
        K_eff = 2 * math.pi * ((basis_size - 1) // 2 + 0.5) / D
        warnings.warn(f"{M} plane waves exceed the basis cap {basis_size}; K lowered to {K_eff:.6g}",
                      stacklevel=2)
        p = ModelParams.from_K(d, K_eff, p.hbar, p.mass, alpha=p.alpha if d.needs_explicit_K else None)
        M = 2 * _mode_count_K(p.K, D) + 1
    E = _lowest(w, d, p, D, n)
    change = math.nan
    converged = True
    if check:
        E2 = _lowest(w, d, p, 2 * D, n)
        change = float(np.max(np.abs(E2 - E) / np.maximum(np.abs(E2), 1e-300)))
        converged = change <= rel_tol
        if strict and not converged:
            raise OracleConvergenceError(f"oracle energies moved by {change:.3g} (relative) "
                                         f"when the domain was doubled")
    return OracleResult(E, M, D, p, converged, change)


@dataclass(frozen=True)
class OracleComparison:
    n: int
    eps: float
    oracle_energy: float
    oracle_shift: float
    first_order: float
    rel_diff: float


def compare_with_first_order(w: WellSpec, d: Deformation, p: ModelParams,
                             result: OracleResult) -> List[OracleComparison]:
    """Oracle shift (oracle energy minus the exact ordinary finite-well level)
    against h_nn + v_nn + t_nn evaluated with the oracle's parameters."""
    pe = result.params
    nd = NuDecomposition.from_KL(pe.K * w.L)
    out = []
    for lv, E in zip(solve_bound_states(w, pe), result.energies):
        h, _ = pure_gup_shift(lv, d, pe)
        v, _ = potential_shift(lv, pe, nd)
        t, _ = kinetic_shift(lv, d, pe, w, nd)
        shift = float(E) - lv.eps
        first = h + v + t
        rel = abs(first - shift) / abs(shift) if shift != 0 else math.inf
        out.append(OracleComparison(lv.n, lv.eps, float(E), shift, first, rel))
    return out
