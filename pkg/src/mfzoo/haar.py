"""Haar partial sums, coefficient fields and saturating constructions.

A grid function carries 2^J values on the uniform partition of [0,1).
Partial sums T_j are conditional expectations onto level-j cubes (exact
block means). The coefficient field is e_lambda = 2^(-j/2) |T_j f| on each
cube, a dyadic system whose l^2 level sums are controlled by ||f||_2.

The saturating builder arranges one calibrated cascade per target exponent
in disjoint top-level slots, so that at analysis depth the chain ratios of
each cascade's core cubes sit on its exponent and the per-level core counts
grow like 2^(2 alpha j). Mass shed by the cascades lands either next to the
exponent-1/2 bulk or on transient cubes whose chain history is inconsistent,
which the chain-mode level sets discard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .dyadic import CoefficientField
from .errors import BudgetError, DomainError


class GridFunction:
    """Piecewise-constant function on [0,1) with 2^depth equal cells."""

    def __init__(self, values, depth=None):
        v = np.asarray(values, dtype=np.float64)
        if depth is None:
            depth = int(round(math.log2(len(v))))
        if len(v) != 2 ** depth:
            raise DomainError(f"grid length {len(v)} != 2^{depth}")
        if not np.all(np.isfinite(v)):
            raise DomainError("non-finite grid values")
        self.depth = depth
        self.values = v
        self.values.setflags(write=False)

    @classmethod
    def zero(cls, depth):
        return cls(np.zeros(2 ** depth), depth)

    def norm2_sq(self) -> float:
        return float(np.mean(self.values ** 2))

    def norm2(self) -> float:
        return math.sqrt(self.norm2_sq())

    def norm1(self) -> float:
        return float(np.mean(np.abs(self.values)))

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        idx = np.minimum((x * 2 ** self.depth).astype(np.int64),
                         2 ** self.depth - 1)
        return self.values[idx]


def haar_partial_sum(f: GridFunction, j: int) -> GridFunction:
    """T_j f: block means over level-j cubes, expanded back to the grid."""
    if not 0 <= j <= f.depth:
        raise DomainError(f"level {j} outside 0..{f.depth}")
    if j == f.depth:
        return GridFunction(f.values.copy(), f.depth)
    means = f.values.reshape(2 ** j, -1).mean(axis=1)
    return GridFunction(np.repeat(means, 2 ** (f.depth - j)), f.depth)


def level_means(f: GridFunction, j: int) -> np.ndarray:
    """The 2^j block means of f at level j (the values of T_j f)."""
    if not 0 <= j <= f.depth:
        raise DomainError(f"level {j} outside 0..{f.depth}")
    return f.values.reshape(2 ** j, -1).mean(axis=1)


def haar_field(f: GridFunction) -> CoefficientField:
    """Coefficient field e_lambda = 2^(-j/2) |T_j f| for j = 0..depth."""
    levels = []
    for j in range(f.depth + 1):
        levels.append(2.0 ** (-j / 2.0) * np.abs(level_means(f, j)))
    return CoefficientField(levels, meta={"source": "haar", "depth": f.depth})


class HaarCoefficients:
    """Mean plus detail coefficients against the sup-normalized Haar system.

    detail[j][k] = <f, psi_{j,k}> where psi is +1 on the left half of the
    level-j cube and -1 on the right half. Parseval in the orthonormal
    frame reads ||f||_2^2 = mean^2 + sum_j sum_k 2^j detail[j][k]^2.
    """

    def __init__(self, mean, details):
        self.mean = float(mean)
        self.details = [np.asarray(d, dtype=np.float64) for d in details]
        for j, d in enumerate(self.details):
            if d.shape != (2 ** j,):
                raise DomainError(f"detail level {j} has wrong length")

    @classmethod
    def decompose(cls, f: GridFunction):
        details = []
        for j in range(f.depth):
            m = level_means(f, j + 1)
            left, right = m[0::2], m[1::2]
            details.append((left - right) * 2.0 ** -(j + 1))
        return cls(float(level_means(f, 0)[0]), details)

    @property
    def max_detail_level(self):
        return len(self.details) - 1

    def parseval_sum(self) -> float:
        total = self.mean ** 2
        for j, d in enumerate(self.details):
            total += float(np.sum(2.0 ** j * d ** 2))
        return total


def gf2_build_haar(a_values, depth: int) -> GridFunction:
    """The level-j indicator sum f = sum 2^(j/2) |a_lambda| 1_lambda.

    The level j is len(a_values).bit_length()-derived: a_values has length
    2^j. T_j f = f, e_lambda(f) = |a_lambda| and ||f||_2^2 = sum |a|^2.
    """
    a = np.abs(np.asarray(a_values, dtype=np.float64))
    j = int(round(math.log2(len(a))))
    if len(a) != 2 ** j:
        raise DomainError("coefficient count must be a power of two")
    if depth < j:
        raise DomainError(f"grid depth {depth} < level {j}")
    vals = np.repeat(a * 2.0 ** (j / 2.0), 2 ** (depth - j))
    return GridFunction(vals, depth)


def build_from_cover(covers: dict, alpha: float, depth: int,
                     j0: int = 1) -> GridFunction:
    """Layered indicator sum f = sum_{j >= j0} j^-2 f_j with a_lambda = 2^-(j alpha).

    covers maps level j to an array of cube indices Gamma_j. Each level must
    satisfy the l^2 budget sum_{lambda in Gamma_j} 2^(-2 j alpha) <= 1. Every
    covered point x then carries e_j(f, x) >= j^-2 2^(-j alpha).
    """
    F = np.zeros(2 ** depth)
    for j, idx in sorted(covers.items()):
        if j < j0 or j > depth:
            raise DomainError(f"cover level {j} outside [{j0}, {depth}]")
        idx = np.asarray(idx, dtype=np.int64)
        if len(np.unique(idx)) != len(idx):
            raise DomainError(f"duplicate cubes in cover at level {j}")
        budget = len(idx) * 2.0 ** (-2 * j * alpha)
        if budget > 1.0 + 1e-12:
            raise BudgetError(j, budget, 1.0)
        amp = j ** -2.0 * 2.0 ** (j / 2.0) * 2.0 ** (-j * alpha)
        F.reshape(2 ** j, -1)[idx] += amp
    return GridFunction(F, depth)


def besicovitch_cover(alpha: float, depth: int, j0: int = 1) -> dict:
    """Top-mass covers of the digit-frequency measure with dimension 2 alpha.

    Level j keeps the floor(2^(2 j alpha)) highest-mass cubes of the plain
    Bernoulli(delta(2 alpha)) measure, ties broken by index; masses depend
    only on the digit count, so the selection orders by popcount.
    """
    from .digit_sets import delta_of_alpha

    if not 0.0 < alpha <= 0.5:
        raise DomainError(f"alpha={alpha} outside (0, 1/2]")
    delta = delta_of_alpha(min(2 * alpha, 1.0))
    covers = {}
    for j in range(j0, depth + 1):
        size = max(1, int(math.floor(2.0 ** (2 * j * alpha))))
        size = min(size, 2 ** j)
        if delta >= 0.5 - 1e-12:
            covers[j] = np.arange(size, dtype=np.int64)
            continue
        idx = np.arange(2 ** j, dtype=np.int64)
        ones = np.zeros(2 ** j, dtype=np.int64)
        x = idx.copy()
        while x.any():
            ones += x & 1
            x >>= 1
        order = np.lexsort((idx, ones))
        covers[j] = np.sort(order[:size])
    return covers


# ---------------------------------------------------------------------------
# Saturating construction
# ---------------------------------------------------------------------------

_BETA_BAND = 0.019     # |log2 e + alpha j| <= band * j on core chains
_SLOT_LEVEL = 4        # families live in disjoint level-4 slots


def _reg_slope(xs, ys):
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    xm, ym = xs.mean(), ys.mean()
    return float(((xs - xm) * (ys - ym)).sum() / ((xs - xm) ** 2).sum())


def _plan_target(alpha, branch_set, j):
    """Steering target before a run of branch levels: pre-pay half the drop."""
    drop = 0.5 - alpha
    if (j + 1) not in branch_set:
        return 0.0
    r = 0
    while (j + 1 + r) in branch_set:
        r += 1
    lo = max(0.0, r * drop - 0.9 * _BETA_BAND * (j + r))
    hi = 0.9 * _BETA_BAND * j
    return min(max(r * drop / 2.0, lo), hi)


def _simulate(alpha, branch_set, depth, anchor):
    """Residual path E_j = log2 e_j + alpha j along the core; None if the
    band |E| <= band * j is violated at any level >= anchor."""
    drop = 0.5 - alpha
    E = 0.0
    counts = {}
    nb = 0
    for j in range(_SLOT_LEVEL + 1, depth + 1):
        if j in branch_set:
            E -= drop
            nb += 1
        else:
            E = min(_plan_target(alpha, branch_set, j), E + alpha + 0.5)
        counts[j] = nb
        if j >= anchor and abs(E) > _BETA_BAND * j:
            return None
    return counts


def _choose_branches(alpha, depth, window, anchor):
    """Branch levels whose window count slope best matches 2 alpha."""
    target = 2 * alpha
    levels = list(range(_SLOT_LEVEL + 1, depth + 1))
    want = int(round(target * len(levels)))
    best = None
    for k in sorted({max(0, want - 2), max(0, want - 1), want,
                     min(len(levels), want + 1), min(len(levels), want + 2)}):
        for B in combinations(levels, k):
            counts = _simulate(alpha, set(B), depth, anchor)
            if counts is None:
                continue
            xs = list(range(window[0], window[1] + 1))
            ys = [counts[j] for j in xs]
            err = abs(_reg_slope(xs, ys) - target)
            key = (round(err, 9), k, B)
            if best is None or key < best:
                best = key
    if best is None:
        raise DomainError(f"no feasible branch pattern for alpha={alpha}")
    return set(best[2])


@dataclass
class SaturatingBuild:
    """A saturating grid function with its construction report."""

    function: GridFunction
    alphas: list
    cores: dict          # (alpha, level) -> core cube indices
    branch_sets: dict    # alpha -> sorted branch levels
    window: tuple
    anchor: int
    eps: float


def build_saturating(alphas, depth: int, window=None) -> SaturatingBuild:
    """One calibrated cascade per exponent in disjoint top-level slots.

    Each cascade starts at its slot cube. At branch levels the core splits
    evenly into both children (log2 e drops by 1/2 - alpha against the
    alpha-line); elsewhere one child continues with the mass fraction chosen
    to steer the residual back toward zero, and the sibling keeps the rest
    as a uniform fill. Remaining slots stay uniform, carrying the
    exponent-1/2 bulk. Analysis with chain-mode level sets over the window
    reads the core counts, which grow like 2^(2 alpha j) by construction.
    """
    alphas = [float(a) for a in alphas]
    if not alphas:
        return SaturatingBuild(GridFunction.zero(depth), [], {}, {},
                               (1, depth), 1, 0.02)
    for a in alphas:
        if not 0.0 < a <= 0.5:
            raise DomainError(f"alpha={a} outside (0, 1/2]")
    if len(alphas) > 2 ** _SLOT_LEVEL:
        raise DomainError("more families than slots")
    if window is None:
        window = (max(_SLOT_LEVEL + 2, math.ceil(depth / 2) + 2), depth)
    anchor = max(_SLOT_LEVEL + 3, window[0] - 3)
    F = np.zeros(2 ** depth)
    cores = {}
    branch_sets = {}
    for slot, a in enumerate(alphas):
        bset = _choose_branches(a, depth, window, anchor)
        branch_sets[a] = sorted(bset)
        drop = 0.5 - a
        E = 0.0
        logm = _SLOT_LEVEL * (0.5 - a)  # log2 mean of the slot cube
        cur = np.array([slot], dtype=np.int64)
        for j in range(_SLOT_LEVEL + 1, depth + 1):
            if j in bset:
                cur = np.concatenate([2 * cur, 2 * cur + 1])
                E -= drop
            else:
                Enew = min(_plan_target(a, bset, j), E + a + 0.5)
                lq = Enew - E - a - 0.5
                leak = 1.0 - 2.0 ** lq
                if leak > 1e-9:
                    sib = 2 * cur + 1
                    F.reshape(2 ** j, -1)[sib] += 2.0 ** (
                        logm + math.log2(2 * leak))
                cur = 2 * cur
                logm += 1.0 + lq
                E = Enew
            cores[(a, j)] = cur
        F.reshape(2 ** depth, -1)[cur] += 2.0 ** logm
    for s in range(len(alphas), 2 ** _SLOT_LEVEL):
        F.reshape(2 ** _SLOT_LEVEL, -1)[s] += 1.0
    return SaturatingBuild(
        function=GridFunction(F, depth),
        alphas=alphas,
        cores=cores,
        branch_sets=branch_sets,
        window=window,
        anchor=anchor,
        eps=0.02,
    )


# ---------------------------------------------------------------------------
# Wavelet leaders and Besov norms (Haar specialization, d = 1)
# ---------------------------------------------------------------------------


@dataclass
class BesovParams:
    """Smoothness s, integrability p, summability q with s - 1/p > 0, s < 1."""

    s: float
    p: float
    q: float

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise DomainError("p and q must be >= 1")
        if not 0 < self.s < 1:
            raise DomainError("Haar specialization requires 0 < s < 1")
        if self.s - 1.0 / self.p <= 0:
            raise DomainError("regularity regime requires s - 1/p > 0")


def _tripled_max(block_max: np.ndarray) -> np.ndarray:
    """Max over blocks k-1, k, k+1 (clipped), given per-block maxima."""
    left = np.concatenate([block_max[:1] * 0.0 - np.inf, block_max[:-1]])
    right = np.concatenate([block_max[1:], block_max[-1:] * 0.0 - np.inf])
    return np.maximum(np.maximum(left, block_max), right)


def leaders_raw(coeffs: HaarCoefficients) -> list:
    """Leaders d_lambda = max |detail| over same-or-finer cubes contained in
    the tripled cube, per level 1..max. The tripled cube at level j covers
    exactly the level-i blocks k-1, k, k+1, so block maxima are exact."""
    J = coeffs.max_detail_level
    abs_details = [np.abs(d) for d in coeffs.details]
    out = []
    for j in range(1, J + 1):
        n = 2 ** j
        d = np.full(n, -np.inf)
        for i in range(j, J + 1):
            bm = abs_details[i].reshape(n, 2 ** (i - j)).max(axis=1)
            d = np.maximum(d, _tripled_max(bm))
        out.append(np.where(np.isfinite(d), d, 0.0))
    return out


def wavelet_leaders(coeffs: HaarCoefficients,
                    params: BesovParams) -> CoefficientField:
    """Leader field with entries 2^((s - 1/p) j) d_lambda."""
    raw = leaders_raw(coeffs)
    levels = [np.array([raw[0].max() if raw else 0.0])]
    for j, d in enumerate(raw, start=1):
        levels.append(2.0 ** ((params.s - 1.0 / params.p) * j) * d)
    return CoefficientField(levels, meta={"source": "leaders",
                                          "s": params.s, "p": params.p})


def besov_norm(coeffs: HaarCoefficients, params: BesovParams) -> float:
    """(sum_j (2^((sp-1) j) sum_k |c|^p)^(q/p))^(1/q) over detail levels."""
    s, p, q = params.s, params.p, params.q
    total = 0.0
    for j, d in enumerate(coeffs.details):
        inner = float(np.sum(np.abs(d) ** p)) * 2.0 ** ((s * p - 1.0) * j)
        if inner > 0:
            total += inner ** (q / p)
    return total ** (1.0 / q)
