"""Spectrally banded trigonometric construction on the circle.

Building blocks per schedule index k (frequency parameter m_k):

  * a cover of target points by closed dyadic intervals at scale 2^-(m_k-1),
  * the tent function chi = max(0, 1 - 2^(m_k-1) dist(x, cover)),
  * its Fejer sum P_k of order 2^(m_k-2) after rescaling by
    2^((m_k-1)(1-s)/p)  (nonnegative, norm-contracting),
  * the modulation Q_k(x) = sin(2 pi 2^(m_k-1) x) P_k(x), whose spectrum is
    confined to +-[M_k, N_k] with M_k = 2^(m_k-2), N_k = 3 * 2^(m_k-2).

On admissible digit strings the base frequency satisfies
sin(2 pi 2^(m_k-1) x) >= sqrt(2)/2 (exact dyadic interval membership), so
each block is bounded below by its tent on the covered points. Blocks at
even k enter the real channel, odd k the imaginary channel, with weights
(k // 2)^-2; partial sums are constant between consecutive bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .digit_sets import SparseSchedule
from .errors import DomainError, InsufficientDataError, StageError

SQRT2_HALF = math.sqrt(2.0) / 2.0


class TrigPolynomial:
    """Complex trigonometric polynomial with coefficients on [n_min, n_max]."""

    def __init__(self, n_min: int, n_max: int, coeffs):
        c = np.asarray(coeffs, dtype=complex)
        if len(c) != n_max - n_min + 1:
            raise DomainError("coefficient array does not match the window")
        self.n_min = int(n_min)
        self.n_max = int(n_max)
        self.coeffs = c

    @classmethod
    def zero(cls):
        return cls(0, 0, [0.0])

    def coefficient(self, n: int) -> complex:
        if self.n_min <= n <= self.n_max:
            return complex(self.coeffs[n - self.n_min])
        return 0.0 + 0.0j

    def support(self):
        nz = np.nonzero(self.coeffs)[0]
        if len(nz) == 0:
            return None
        return (self.n_min + int(nz[0]), self.n_min + int(nz[-1]))

    def is_real_valued(self, tol=1e-12) -> bool:
        for n in range(max(abs(self.n_min), abs(self.n_max)) + 1):
            if abs(self.coefficient(-n) - np.conj(self.coefficient(n))) > tol:
                return False
        return True

    def evaluate(self, x, chunk=1 << 18):
        """Sum of c(n) e^(2 pi i n x), chunked over coefficients."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.zeros(len(x), dtype=complex)
        for start in range(self.n_min, self.n_max + 1, chunk):
            stop = min(start + chunk - 1, self.n_max)
            n = np.arange(start, stop + 1)
            c = self.coeffs[start - self.n_min: stop - self.n_min + 1]
            out += np.exp(2j * np.pi * np.outer(x, n)) @ c
        return out

    def truncate(self, n: int) -> "TrigPolynomial":
        """Symmetric truncation to |m| <= n."""
        lo = max(self.n_min, -n)
        hi = min(self.n_max, n)
        if lo > hi:
            return TrigPolynomial.zero()
        return TrigPolynomial(lo, hi,
                              self.coeffs[lo - self.n_min: hi - self.n_min + 1])

    def grid_values(self, resolution: int) -> np.ndarray:
        """Values at i / resolution via zero-padded inverse FFT."""
        if resolution < 2 * max(abs(self.n_min), abs(self.n_max)) + 2:
            raise DomainError("resolution too small for the spectrum")
        spec = np.zeros(resolution, dtype=complex)
        for n in range(self.n_min, self.n_max + 1):
            spec[n % resolution] += self.coeffs[n - self.n_min]
        return np.fft.ifft(spec) * resolution

    def norm2_sq(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))


@dataclass
class CoverSpec:
    """Closed dyadic intervals of length 2^-level covering target points."""

    level: int
    indices: np.ndarray
    cap: int
    c_g: float
    s: float

    def __post_init__(self):
        self.indices = np.unique(np.asarray(self.indices, dtype=np.int64))
        if len(self.indices) > self.cap:
            raise DomainError(
                f"cover of {len(self.indices)} exceeds cap {self.cap}"
            )

    def intervals(self):
        h = 2.0 ** -self.level
        return [(int(i) * h, (int(i) + 1) * h) for i in self.indices]


def cover_from_points(points, level: int, s: float,
                      slack: float = 0.05) -> CoverSpec:
    """Dyadic cover of the points at the given level.

    The cardinality cap scales like C_G 2^(level (s + slack)); the constant
    C_G is raised to the smallest power of two that covers every point, and
    reported in the spec.
    """
    pts = np.asarray(points, dtype=np.float64)
    idx = np.unique(np.minimum((pts * 2 ** level).astype(np.int64),
                               2 ** level - 1))
    base = 2.0 ** (level * (s + slack))
    c_g = 1.0
    while c_g * base < len(idx):
        c_g *= 2.0
    cap = int(math.ceil(c_g * base))
    return CoverSpec(level=level, indices=idx, cap=cap, c_g=c_g, s=s)


class TentFunction:
    """chi(x) = max(0, 1 - 2^level * dist(x, union of cover intervals))."""

    def __init__(self, cover: CoverSpec):
        if len(cover.indices) == 0:
            raise DomainError("empty cover")
        self.cover = cover
        self.scale = 2.0 ** cover.level
        ivs = cover.intervals()
        merged = [list(ivs[0])]
        for lo, hi in ivs[1:]:
            if lo <= merged[-1][1] + 1e-15:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        self.segments = [(lo, hi) for lo, hi in merged]

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        dist = np.full(len(x), np.inf)
        for lo, hi in self.segments:
            d = np.maximum(lo - x, 0.0) + np.maximum(x - hi, 0.0)
            dist = np.minimum(dist, d)
        return np.maximum(0.0, 1.0 - self.scale * dist)

    def norm1(self) -> float:
        """Exact integral: plateau lengths plus triangular ramps.

        Ramps of adjacent segments may overlap where gaps are narrower than
        two ramp widths; integrate the exact piecewise-affine profile on the
        merged breakpoint grid instead of assuming full triangles.
        """
        w = 1.0 / self.scale
        pts = set()
        for lo, hi in self.segments:
            pts.update((lo - w, lo, hi, hi + w))
        pts = sorted(pts)
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            if b <= a:
                continue
            fa = float(self(np.array([a + 1e-15]))[0])
            fb = float(self(np.array([b - 1e-15]))[0])
            total += 0.5 * (fa + fb) * (b - a)
        return total

    def sample(self, resolution: int) -> np.ndarray:
        return self(np.arange(resolution) / resolution)


def build_chi(cover: CoverSpec) -> TentFunction:
    return TentFunction(cover)


def fejer_approx(samples, order: int) -> TrigPolynomial:
    """Fejer (Cesaro) sum of order N from equispaced samples.

    Coefficients are g_hat(n) (1 - |n|/(N+1)) for |n| <= N with g_hat taken
    from the discrete transform; the result is a nonnegative-preserving,
    norm-contracting approximation of the sampled function.
    """
    g = np.asarray(samples, dtype=np.float64)
    P = len(g)
    if P < 4 * order or P & (P - 1):
        raise DomainError("grid size must be a power of two >= 4 * order")
    spec = np.fft.fft(g) / P
    n = np.arange(-order, order + 1)
    coeffs = spec[n % P] * (1.0 - np.abs(n) / (order + 1.0))
    return TrigPolynomial(-order, order, coeffs)


def modulation_frequency(m: int) -> int:
    return 2 ** (m - 1)


def band_limits(m: int):
    """(M, N) = (2^(m-2), 3 * 2^(m-2)) for the block at frequency index m."""
    return 2 ** (m - 2), 3 * 2 ** (m - 2)


def build_q(p_poly: TrigPolynomial, m: int) -> TrigPolynomial:
    """Q(x) = sin(2 pi 2^(m-1) x) P(x) at exact coefficient level.

    Requires spec(P) inside +-2^(m-2); the result lives on
    +-[2^(m-2), 3 * 2^(m-2)] and satisfies Q >= (sqrt2/2) P at points where
    the base sine is >= sqrt2/2 and P >= 0.
    """
    M, N = band_limits(m)
    F = modulation_frequency(m)
    sup = p_poly.support()
    if sup is not None and (sup[0] < -M or sup[1] > M):
        raise DomainError(
            f"spectrum {sup} exceeds +-{M} for modulation at m={m}"
        )
    coeffs = np.zeros(2 * N + 1, dtype=complex)
    for n in range(-N, N + 1):
        val = (p_poly.coefficient(n - F) - p_poly.coefficient(n + F)) / 2j
        coeffs[n + N] = val
    return TrigPolynomial(-N, N, coeffs)


def q_band(p_poly: TrigPolynomial, m: int) -> np.ndarray:
    """Positive-band coefficients of Q on [M, N]; Q(-n) = conj(Q(n)).

    On the band, Q_hat(n) = P_hat(n - F) / (2i) exactly (the shifted copy
    from -F lies outside the band).
    """
    M, N = band_limits(m)
    F = modulation_frequency(m)
    out = np.empty(N - M + 1, dtype=complex)
    for i, n in enumerate(range(M, N + 1)):
        out[i] = p_poly.coefficient(n - F) / 2j
    return out


@dataclass
class Block:
    k: int
    m: int
    weight: float
    channel: str  # "real" | "imag"
    band: np.ndarray  # coefficients on [M, N]
    stats: dict = field(default_factory=dict)

    @property
    def band_limits(self):
        return band_limits(self.m)

    def value(self, x, n_cut=None):
        """Real block value 2 Re sum band e(nx), optionally cut at |n|<=n_cut."""
        M, N = self.band_limits
        hi = N if n_cut is None else min(N, n_cut)
        if hi < M:
            return np.zeros(np.atleast_1d(x).shape)
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.zeros(len(x), dtype=complex)
        chunk = 1 << 18
        for start in range(M, hi + 1, chunk):
            stop = min(start + chunk - 1, hi)
            n = np.arange(start, stop + 1)
            c = self.band[start - M: stop - M + 1]
            out += np.exp(2j * np.pi * np.outer(x, n)) @ c
        return 2.0 * np.real(out)

    def norm2_sq(self) -> float:
        return 2.0 * float(np.sum(np.abs(self.band) ** 2))


@dataclass
class BlockFunction:
    schedule: SparseSchedule
    s: float
    p: float
    blocks: list
    parity_offset: int = 0

    @property
    def n_ceiling(self) -> int:
        return max((band_limits(b.m)[1] for b in self.blocks), default=0)

    def band_edges(self):
        return sorted((band_limits(b.m), b.k) for b in self.blocks)

    def value(self, x):
        return self.partial_sum(self.n_ceiling, x)

    def partial_sum(self, n: int, x):
        """S_n f(x): whole blocks below n plus the straddling partial block."""
        x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
        total = np.zeros(len(x_arr), dtype=complex)
        for b in self.blocks:
            M, N = band_limits(b.m)
            if n < M:
                continue
            v = b.value(x_arr, n_cut=n)
            if b.channel == "real":
                total += b.weight * v
            else:
                total += 1j * b.weight * v
        return total if np.ndim(x) else complex(total[0])

    def coefficient(self, n: int) -> complex:
        out = 0.0 + 0.0j
        for b in self.blocks:
            M, N = band_limits(b.m)
            factor = b.weight if b.channel == "real" else 1j * b.weight
            if M <= n <= N:
                out += factor * b.band[n - M]
            elif M <= -n <= N:
                out += factor * np.conj(b.band[-n - M])
        return out

    def analytic_coefficients(self) -> np.ndarray:
        """a_n for n = 0..n_ceiling (the analytic-part coefficient vector)."""
        out = np.zeros(self.n_ceiling + 1, dtype=complex)
        for b in self.blocks:
            M, N = band_limits(b.m)
            factor = b.weight if b.channel == "real" else 1j * b.weight
            out[M:N + 1] += factor * b.band
        return out

    def norm2_sq(self) -> float:
        return float(sum(b.weight ** 2 * b.norm2_sq() for b in self.blocks))


def block_weight(k: int) -> float:
    """Series weight (k // 2)^-2: blocks enter as Q_{2j}, Q_{2j+1} with j^-2."""
    j = k // 2
    if j < 1:
        raise DomainError("blocks start at k = 2")
    return 1.0 / (j * j)


def build_block_function(points, s: float, p: float, k_range,
                         schedule: SparseSchedule | None = None,
                         parity_offset: int = 0,
                         tolerance: float = 1e-9) -> BlockFunction:
    """Full banded construction over the given block indices (k >= 2).

    Each stage validates its own contract and raises StageError naming the
    stage and k on failure: tent bounds, Fejer positivity and contraction,
    spectrum confinement, band disjointness.
    """
    schedule = schedule or SparseSchedule()
    if p < 1:
        raise DomainError("p must be >= 1")
    if not 0.0 < s <= 1.0:
        raise DomainError("s must lie in (0, 1]")
    ks = sorted(int(k) for k in k_range)
    if any(k < 2 for k in ks):
        raise DomainError("blocks start at k = 2")
    blocks = []
    prev_N = 0
    for k in ks:
        m = schedule.m(k)
        if m < 3:
            raise DomainError(f"m_{k} = {m} too small for banding")
        M, N = band_limits(m)
        if M <= prev_N:
            raise StageError("banding", k, "bands overlap")
        cover = cover_from_points(points, m - 1, s)
        chi = build_chi(cover)
        order = 2 ** (m - 2)
        grid = 4 * order
        rescale = 2.0 ** ((m - 1) * (1.0 - s) / p)
        g = rescale * chi.sample(grid)
        if np.max(chi.sample(grid)) > 1.0 + tolerance:
            raise StageError("tent", k, "tent exceeds 1")
        poly = fejer_approx(g, order)
        vals = np.real(poly.grid_values(grid))
        if vals.min() < -tolerance * max(1.0, rescale):
            raise StageError("fejer-positivity", k,
                             f"min {vals.min():.3e}")
        norm_g = float(np.mean(np.abs(g) ** p) ** (1.0 / p))
        norm_p = float(np.mean(np.abs(vals) ** p) ** (1.0 / p))
        if norm_p > norm_g * (1.0 + 1e-3):
            raise StageError("fejer-contraction", k,
                             f"{norm_p:.6g} > {norm_g:.6g}")
        band = q_band(poly, m)
        channel = "real" if (k + parity_offset) % 2 == 0 else "imag"
        blocks.append(Block(
            k=k, m=m, weight=block_weight(k), channel=channel, band=band,
            stats={
                "cover_size": len(cover.indices),
                "cover_cap": cover.cap,
                "c_g": cover.c_g,
                "rescale": rescale,
                "chi_norm1": chi.norm1(),
                "fejer_min": float(vals.min()),
                "p_norm": norm_p,
            },
        ))
        prev_N = N
    return BlockFunction(schedule=schedule, s=s, p=p, blocks=blocks,
                         parity_offset=parity_offset)


def tent_lower_bound_constant(f: BlockFunction, points) -> dict:
    """Measured c in P_k(x) >= c 2^((m_k-1)(1-s)/p) over covered points."""
    out = {}
    pts = np.asarray(points, dtype=np.float64)
    for b in f.blocks:
        m = b.m
        M, N = band_limits(m)
        F = modulation_frequency(m)
        # P values recovered from the band: P(x) = 2 Re sum P_hat e(nx) ...
        # easier: P = Q / sin at sampled points is ill-conditioned; rebuild P
        # directly from the stored band (P_hat(n) = 2i Q_hat(n + F)).
        level = m - 1
        idx = np.minimum((pts * 2 ** level).astype(np.int64), 2 ** level - 1)
        scale = 2.0 ** ((m - 1) * (1.0 - f.s) / f.p)
        p_coeffs = np.zeros(2 * (2 ** (m - 2)) + 1, dtype=complex)
        Mp = 2 ** (m - 2)
        for i, n in enumerate(range(M, N + 1)):
            p_coeffs[(n - F) + Mp] = b.band[i] * 2j
        poly = TrigPolynomial(-Mp, Mp, p_coeffs)
        vals = np.real(poly.evaluate(pts))
        out[b.k] = float(np.min(vals) / scale)
    return out


def fs_divergence_index(f: BlockFunction, x: float, schedule_n=None):
    """(beta_minus, beta_plus) from log|S_n f(x)| / log n at band edges."""
    if schedule_n is None:
        schedule_n = sorted(band_limits(b.m)[1] for b in f.blocks)
    ns = sorted(set(int(n) for n in schedule_n))
    if len(ns) < 3:
        raise InsufficientDataError("need at least 3 schedule points")
    ratios = []
    for n in ns:
        v = abs(f.partial_sum(n, x))
        ratios.append(math.log(max(v, 1e-300)) / math.log(n))
    tail = ratios[-math.ceil(len(ratios) / 2):]
    return {"beta_minus": max(tail), "beta_plus": min(tail),
            "schedule": ns, "ratios": ratios}


def localization_check(poly: TrigPolynomial, j: int, p: float, x_samples):
    """Measured constant in the partial-sum localization inequality.

    For x with |S_{2^j} f(x)| >= ||S_{2^j} f||_p, scores
    ||S||_{L^p(3 I_j(x))} j^(3/p) 2^(j/p) / |S(x)|; returns the per-sample
    scores and their minimum (empty report when nothing qualifies).
    """
    S = poly.truncate(2 ** j)
    res = 2 ** (j + 6)
    vals = S.grid_values(res)
    vals_abs = np.abs(vals)
    norm_p = float(np.mean(vals_abs ** p) ** (1.0 / p))
    cell = res // 2 ** j
    scores = []
    for x in np.atleast_1d(np.asarray(x_samples, dtype=np.float64)):
        gi = int(x * res) % res
        sx = vals_abs[gi]
        if sx < norm_p:
            continue
        k = gi // cell
        window = np.arange((k - 1) * cell, (k + 2) * cell) % res
        local = float(np.mean(vals_abs[window] ** p)
                      * 3.0 * 2.0 ** -j) ** (1.0 / p)
        score = local * j ** (3.0 / p) * 2.0 ** (j / p) / sx
        scores.append({"x": float(x), "score": float(score)})
    return {
        "scores": scores,
        "min": min((s["score"] for s in scores), default=None),
        "qualifying": len(scores),
    }
