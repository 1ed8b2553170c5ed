"""Harmonic extension to the unit disk and its dyadic coefficient field.

The circle is parametrized by theta in [0,1). The kernel at radius r is
P_r(theta) = (1 - r^2) / (1 - 2 r cos(2 pi theta) + r^2), normalized so that
its mean over the circle is 1. Grid functions are extended by midpoint
quadrature (equivalently circular convolution on a fine grid); band-limited
functions admit the exact mode rule f_hat(n) -> r^|n| f_hat(n).

The dyadic field integrates the extension over each level-j cube at radius
1 - 2^-j; radial divergence indexes convert its pointwise exponents through
beta = 1 - index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import CoefficientField, cube_of_point, estimate_from_chain
from .errors import DomainError
from .haar import GridFunction


class CircleFunction:
    """Function on the circle, stored on a grid or as Fourier modes."""

    def __init__(self, grid: GridFunction | None = None,
                 modes: np.ndarray | None = None, nonneg: bool = False):
        if (grid is None) == (modes is None):
            raise DomainError("provide exactly one of grid or modes")
        self.grid = grid
        self.modes = None if modes is None else np.asarray(modes,
                                                           dtype=complex)
        if self.modes is not None and len(self.modes) % 2 == 0:
            raise DomainError("modes must have odd length (-N..N)")
        self.nonneg = nonneg
        if nonneg and grid is not None and np.any(grid.values < 0):
            raise DomainError("nonneg flag with negative grid values")

    @classmethod
    def from_values(cls, values, nonneg=False):
        return cls(grid=GridFunction(values), nonneg=nonneg)

    @classmethod
    def from_modes(cls, modes, nonneg=False):
        return cls(modes=modes, nonneg=nonneg)

    @property
    def n_max(self):
        return (len(self.modes) - 1) // 2 if self.modes is not None else None

    def mean(self) -> float:
        if self.grid is not None:
            return float(np.mean(self.grid.values))
        return float(self.modes[self.n_max].real)

    def norm1(self) -> float:
        if self.grid is not None:
            return self.grid.norm1()
        res = 1 << 12
        return float(np.mean(np.abs(self.sample(res))))

    def sample(self, resolution: int) -> np.ndarray:
        """Values at midpoints (i + 1/2) / resolution."""
        theta = (np.arange(resolution) + 0.5) / resolution
        if self.grid is not None:
            return self.grid(theta)
        n = np.arange(-self.n_max, self.n_max + 1)
        return np.real(np.exp(2j * np.pi * np.outer(theta, n)) @ self.modes)


def kernel_resolution(r: float, depth: int) -> int:
    """Midpoint resolution: at least 2^(depth+4) and 32/(1-r) kernel widths."""
    res = max(2 ** (depth + 4), int(32.0 / max(1.0 - r, 1e-12)))
    return 1 << int(math.ceil(math.log2(res)))


def kernel_values(r: float, theta: np.ndarray) -> np.ndarray:
    return (1.0 - r * r) / (1.0 - 2.0 * r * np.cos(2.0 * np.pi * theta)
                            + r * r)


def poisson_extend(f: CircleFunction, r: float, theta) -> np.ndarray | float:
    """P[f](r, theta); exact mode scaling or midpoint-quadrature."""
    if not 0.0 <= r < 1.0:
        raise DomainError(f"radius {r} outside [0,1)")
    theta_arr = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    if f.modes is not None:
        n = np.arange(-f.n_max, f.n_max + 1)
        scaled = f.modes * r ** np.abs(n)
        out = np.real(np.exp(2j * np.pi * np.outer(theta_arr, n)) @ scaled)
    else:
        res = kernel_resolution(r, f.grid.depth)
        s = (np.arange(res) + 0.5) / res
        fv = f.grid(s)
        out = np.empty(len(theta_arr))
        for i, t in enumerate(theta_arr):
            out[i] = float(np.mean(kernel_values(r, t - s) * fv))
    return out if np.ndim(theta) else float(out[0])


def _extension_on_grid(f: CircleFunction, r: float, res: int) -> np.ndarray:
    """P[f](r, .) at the res midpoints via FFT circular convolution."""
    s = (np.arange(res) + 0.5) / res
    fv = f.sample(res)
    kv = kernel_values(r, np.arange(res) / res)
    conv = np.fft.irfft(np.fft.rfft(fv) * np.fft.rfft(kv), n=res) / res
    # midpoint sampling of f against kernel offsets aligned on the same grid
    return conv


@dataclass
class PoissonField:
    field: CoefficientField
    radii: list
    resolution: int


def poisson_field(f: CircleFunction, depth: int) -> PoissonField:
    """e_lambda = integral over lambda of P[f]((1 - 2^-j) xi) d xi, j <= depth."""
    levels = []
    radii = []
    res = kernel_resolution(1.0 - 2.0 ** -depth, depth)
    for j in range(depth + 1):
        r = 1.0 - 2.0 ** -j
        radii.append(r)
        vals = _extension_on_grid(f, r, res)
        cell = res // 2 ** j
        e = np.abs(vals.reshape(2 ** j, cell).mean(axis=1)) * 2.0 ** -j
        levels.append(e)
    fld = CoefficientField(levels, meta={"source": "poisson",
                                         "depth": depth})
    return PoissonField(field=fld, radii=radii, resolution=res)


def harnack_check(f: CircleFunction, j: int, samples: int, seed=0):
    """Ratio statistics P[f](r x) / (2^j e_{I_j(x)}) over random (x, r).

    r is drawn in [1 - 2^-j, 1 - 2^-(j+1)]; zero denominators are skipped
    and counted.
    """
    if j < 0:
        raise DomainError("level must be >= 0")
    rng = np.random.default_rng(seed)
    pf = poisson_field(f, j)
    ratios = []
    skipped = 0
    for _ in range(samples):
        x = float(rng.random())
        r = 1.0 - 2.0 ** -j + float(rng.random()) * (2.0 ** -j - 2.0 ** -(j + 1))
        denom = 2.0 ** j * pf.field.value(cube_of_point(x, j))
        if denom <= 0.0:
            skipped += 1
            continue
        num = poisson_extend(f, r, x)
        ratios.append(num / denom)
    ratios = np.array(ratios)
    if len(ratios) == 0:
        return {"min": math.nan, "max": math.nan, "skipped": skipped,
                "count": 0}
    return {"min": float(ratios.min()), "max": float(ratios.max()),
            "mean": float(ratios.mean()), "skipped": skipped,
            "count": len(ratios)}


@dataclass
class RadialIndexes:
    """Divergence indexes of the radial extension at a boundary point.

    beta_minus bounds the limsup growth of log|P[f](r x)| / -log(1-r) and
    equals 1 minus the lower e-index; beta_plus is the liminf analogue,
    1 minus the upper index. Both are clamped to [0, 1].
    """

    beta_minus: float
    beta_plus: float
    estimate: object


def radial_divergence_index(f: CircleFunction, x: float,
                            depth: int) -> RadialIndexes:
    pf = poisson_field(f, depth)
    est = estimate_from_chain(pf.field.chain(x, 1, depth), (1, depth))
    clamp = lambda v: min(1.0, max(0.0, v))
    return RadialIndexes(
        beta_minus=clamp(1.0 - est.lower),
        beta_plus=clamp(1.0 - est.upper),
        estimate=est,
    )


def kernel_mass(r: float, resolution: int) -> float:
    """Midpoint quadrature of the kernel; equals 1 up to the trapezoid tail."""
    theta = (np.arange(resolution) + 0.5) / resolution
    return float(np.mean(kernel_values(r, theta)))
