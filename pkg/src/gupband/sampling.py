"""Coordinate grids, grid eigenfunctions and sinc reconstruction.

A grid x_n = n a + theta with a = pi/K is the spectrum of one self-adjoint
extension of the coordinate operator. A bandlimited function is fixed by its
values on any one grid and is rebuilt by

    psi(x) = a sum_n psi_n Pi(x - x_n),   Pi(d) = sin(K d)/(pi d).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import csvio
from .numerics import DomainError, OutOfBandError

SUMMATION_MODES = ("plain", "smooth")
_CHUNK = 1 << 22


@dataclass(frozen=True)
class Grid:
    a: float
    theta: float = 0.0
    n_min: int = -50
    n_max: int = 50

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise DomainError("grid spacing must be positive")
        if not 0 <= self.theta < self.a:
            raise DomainError("theta must lie in [0, a)")
        if self.n_min > self.n_max:
            raise DomainError("need n_min <= n_max")

    @classmethod
    def centered(cls, a: float, half_window: int, theta: float = 0.0) -> "Grid":
        return cls(a=a, theta=theta, n_min=-half_window, n_max=half_window)

    @property
    def K(self) -> float:
        return math.pi / self.a

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def points(self) -> np.ndarray:
        return self.indices * self.a + self.theta

    def __len__(self) -> int:
        return self.n_max - self.n_min + 1


@dataclass(frozen=True, eq=False)
class SampledFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.dtype.kind not in "fc":
            vals = vals.astype(float)
        if vals.shape != (len(self.grid),):
            raise DomainError(f"expected {len(self.grid)} samples, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("samples must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def to_csv(self, path, meta=None) -> None:
        g = self.grid
        rows = zip(g.indices, g.points, self.values)
        info = {"a": g.a, "theta": g.theta, "n_min": g.n_min, "n_max": g.n_max}
        info.update(meta or {})
        csvio.write_table(path, ["n", "x_n", "value"], rows, info)

    @classmethod
    def from_csv(cls, path) -> "SampledFunction":
        meta, header, rows = csvio.read_table(path)
        if header != ["n", "x_n", "value"]:
            raise DomainError(f"unexpected columns {header}")
        grid = Grid(float(meta["a"]), float(meta["theta"]), int(meta["n_min"]), int(meta["n_max"]))
        vals = [complex(r[2]) if "j" in r[2] else float(r[2]) for r in rows]
        return cls(grid, np.array(vals))


@dataclass(frozen=True, eq=False)
class BandlimitedFunction:
    """A bandlimited function represented by its samples on one grid.

    `summation="plain"` truncates the reconstruction sum at the window edge.
    `summation="smooth"` multiplies the samples by a C-infinity taper that
    equals 1 on the inner half of the window and falls to 0 at its edge; this
    summability method converges quickly for bounded non-decaying samples
    (in-band plane waves, say) where the plain sum converges only like 1/N.
    """

    source: SampledFunction
    K: float = field(default=math.nan)
    summation: str = "plain"

    def __post_init__(self):
        K = self.source.grid.K if math.isnan(self.K) else self.K
        if not math.isclose(K * self.source.grid.a, math.pi, rel_tol=1e-12):
            raise DomainError("grid spacing must equal pi/K")
        if self.summation not in SUMMATION_MODES:
            raise DomainError(f"summation must be one of {SUMMATION_MODES}")
        object.__setattr__(self, "K", K)

    @property
    def grid(self) -> Grid:
        return self.source.grid

    def weights(self) -> np.ndarray:
        vals = self.source.values
        if self.summation == "plain":
            return vals
        return vals * smooth_taper(self.grid.indices, self.grid.n_min, self.grid.n_max)

    def __call__(self, x):
        return reconstruct(self, x)


def smooth_taper(n, n_min: int, n_max: int) -> np.ndarray:
    """1 for |n - c| <= h/2, smooth step to 0 at |n - c| = h (c, h: window centre, half-width)."""
    c = 0.5 * (n_min + n_max)
    h = max(0.5 * (n_max - n_min), 1.0)
    s = np.clip((np.abs(np.asarray(n, float) - c) / h - 0.5) / 0.5, 0.0, 1.0)
    out = np.where(s <= 0, 1.0, 0.0)
    mid = (s > 0) & (s < 1)
    sm = s[mid]
    e1 = np.exp(-1.0 / (1.0 - sm))
    e2 = np.exp(-1.0 / sm)
    out[mid] = e1 / (e1 + e2)
    return out


def grid_eigenfunction(g: Grid, n: int, k):
    """sqrt(a) exp(i k x_n), the coordinate eigenfunction in the wavevector representation."""
    k = np.asarray(k, dtype=float)
    if np.any(np.abs(k) > g.K * (1 + 1e-15)):
        raise OutOfBandError("wavevector outside the band")
    out = math.sqrt(g.a) * np.exp(1j * k * (n * g.a + g.theta))
    return out if out.ndim else complex(out)


def sinc_sum(t, n, w):
    """sum_j w_j sinc(t - n_j) for every t, with sinc(z) = sin(pi z)/(pi z).

    Uses sin(pi (t - n)) = (-1)^n sin(pi t); t exactly on a node returns the
    node's weight. Work is chunked to bound memory.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = np.asarray(n)
    w = np.asarray(w)
    m = np.rint(t)
    r = t - m
    parity = np.where(np.mod(m, 2) == 0, 1.0, -1.0)
    s = parity * np.sin(np.pi * r) / np.pi
    wa = w * np.where(np.mod(n, 2) == 0, 1.0, -1.0)
    dtype = np.result_type(w.dtype, float)
    out = np.zeros(t.shape, dtype=dtype)
    # below the smallest normal double sinc(r) is exactly 1 and 1/r overflows
    exact = np.abs(r) < np.finfo(float).tiny
    if np.any(exact):
        lookup = dict(zip(n.tolist(), w.tolist()))
        out[exact] = [lookup.get(int(mm), 0.0) for mm in m[exact]]
    idx = np.nonzero(~exact)[0]
    step = max(1, _CHUNK // max(1, n.size))
    nf = n.astype(float)
    for start in range(0, idx.size, step):
        sel = idx[start:start + step]
        out[sel] = s[sel] * ((1.0 / (t[sel, None] - nf[None, :])) @ wa)
    return out


def reconstruct(b: BandlimitedFunction, x):
    """a sum_n v_n Pi(x - x_n) over the sample window."""
    x_arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x_arr)):
        raise DomainError("x must be finite")
    g = b.grid
    t = (x_arr.ravel() - g.theta) / g.a
    out = sinc_sum(t, g.indices, b.weights()).reshape(x_arr.shape)
    if out.ndim == 0:
        return complex(out) if np.iscomplexobj(out) else float(out)
    return out


def truncation_estimate(b: BandlimitedFunction, x):
    """Size of the omitted tail if the samples continued with their edge values.

    For fixed x the kernel alternates in sign along the grid, so a constant
    continuation is an alternating series bounded by its first term.
    """
    g = b.grid
    t = (np.asarray(x, dtype=float) - g.theta) / g.a
    s = np.abs(np.sin(np.pi * (t - np.rint(t)))) / np.pi
    vals = b.source.values
    hi = np.abs(vals[-1]) / np.abs(g.n_max + 1 - t)
    lo = np.abs(vals[0]) / np.abs(t - (g.n_min - 1))
    return s * (hi + lo)


def resample(b: BandlimitedFunction, g2: Grid) -> SampledFunction:
    if not math.isclose(g2.a, b.grid.a, rel_tol=1e-12):
        raise DomainError("resampling needs the same grid spacing")
    return SampledFunction(g2, np.asarray(reconstruct(b, g2.points)))


def probe_points(b: BandlimitedFunction, half_span: float = 5.0, count: int = 101,
                 margin: float = 5.0) -> np.ndarray:
    """count points in [-half_span a, half_span a], kept margin*a inside the window."""
    g = b.grid
    x = np.linspace(-half_span * g.a, half_span * g.a, count)
    lo = g.n_min * g.a + g.theta + margin * g.a
    hi = g.n_max * g.a + g.theta - margin * g.a
    keep = (x >= lo) & (x <= hi)
    if not np.any(keep):
        raise DomainError("sample window too small for the probe set")
    return x[keep]


DEFAULT_RESAMPLE_HALF_WINDOW = 1 << 18


def shift_equivalence_check(b: BandlimitedFunction, theta2: float, probes=None,
                            half_window: int = DEFAULT_RESAMPLE_HALF_WINDOW) -> float:
    """Max |reconstruction from b - reconstruction from b resampled at offset theta2|.

    The resampled set covers indices c +- half_window around the source
    window centre c. Both reconstructions are plain or smooth as b is. For
    samples whose values fall off like 1/n the deviation falls off like
    1/half_window, hence the wide default.
    """
    g = b.grid
    if not 0 <= theta2 < g.a:
        raise DomainError("theta2 must lie in [0, a)")
    if theta2 == g.theta:
        return 0.0
    x = probe_points(b) if probes is None else np.asarray(probes, dtype=float)
    c = (g.n_min + g.n_max) // 2
    g2 = Grid(g.a, theta2, c - half_window, c + half_window)
    b2 = BandlimitedFunction(resample(b, g2), b.K, b.summation)
    return float(np.max(np.abs(np.asarray(reconstruct(b, x)) - np.asarray(reconstruct(b2, x)))))
