"""Binary-digit fractal sets: the sparse compact set and Besicovitch sets.

The compact set forces the digit pattern 0,1,0 at positions m_k, m_k+1,
m_k+2 of the binary expansion, with m_k = (k+1)^2 by default. Besicovitch
sets prescribe an asymptotic digit frequency delta; the natural measures put
independent Bernoulli(delta) digits on the free positions and follow the
forcing elsewhere. Digit strings are kept in exact dyadic arithmetic
(integer numerator over a power of two) so interval membership checks are
exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicCube
from .errors import DomainError

SQRT2_HALF = math.sqrt(2.0) / 2.0


class SparseSchedule:
    """Digit-forcing schedule m_k (default (k+1)^2), gaps at least 3."""

    def __init__(self, rule=None, name="(k+1)^2"):
        self._rule = rule if rule is not None else (lambda k: (k + 1) ** 2)
        self.name = name
        prev = None
        for k in range(1, 64):
            m = self._rule(k)
            if prev is not None and m - prev < 3:
                raise DomainError(
                    f"schedule gap m_{k} - m_{k-1} = {m - prev} < 3"
                )
            prev = m

    def m(self, k: int) -> int:
        if k < 1:
            raise DomainError("schedule index starts at 1")
        return self._rule(k)

    def blocks_upto(self, n: int):
        """All k with m_k <= n."""
        out = []
        k = 1
        while self.m(k) <= n:
            out.append(k)
            k += 1
        return out

    def forced_bits(self, n: int):
        """Map position -> forced bit for positions <= n."""
        forced = {}
        for k in self.blocks_upto(n):
            m = self.m(k)
            for pos, bit in ((m, 0), (m + 1, 1), (m + 2, 0)):
                if pos <= n:
                    forced[pos] = bit
        return forced

    def free_positions(self, n: int) -> np.ndarray:
        forced = self.forced_bits(n)
        return np.array([p for p in range(1, n + 1) if p not in forced],
                        dtype=np.int64)

    def u(self, n: int) -> int:
        """card(Omega_n): number of free positions among 1..n."""
        return n - len(self.forced_bits(n))


@dataclass(frozen=True)
class DigitString:
    """Finite binary word epsilon_1..epsilon_n with exact dyadic value."""

    digits: tuple

    def __post_init__(self):
        if any(d not in (0, 1) for d in self.digits):
            raise DomainError("digits must be 0/1")

    @classmethod
    def from_bits(cls, bits):
        return cls(tuple(int(b) for b in bits))

    @classmethod
    def from_cube(cls, cube: DyadicCube):
        n = cube.level
        bits = [(cube.index >> (n - i)) & 1 for i in range(1, n + 1)]
        return cls(tuple(bits))

    @property
    def depth(self) -> int:
        return len(self.digits)

    @property
    def numerator(self) -> int:
        v = 0
        for b in self.digits:
            v = (v << 1) | b
        return v

    @property
    def value(self) -> float:
        return self.numerator / 2 ** self.depth

    def cube(self) -> DyadicCube:
        return DyadicCube(self.depth, self.numerator)


def alpha_of_delta(delta: float) -> float:
    """Binary entropy -d log2 d - (1-d) log2(1-d) on (0, 1/2]."""
    if not 0.0 < delta <= 0.5:
        raise DomainError(f"delta={delta} outside (0, 1/2]")
    if delta == 0.5:
        return 1.0
    return float(-delta * math.log2(delta)
                 - (1.0 - delta) * math.log2(1.0 - delta))


def delta_of_alpha(alpha: float) -> float:
    """Bisection inverse of alpha_of_delta to absolute tolerance 1e-12."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha={alpha} outside (0, 1]")
    if alpha == 1.0:
        return 0.5
    lo, hi = 1e-300, 0.5
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if alpha_of_delta(mid) < alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def k_admissible(word: DigitString, schedule: SparseSchedule) -> bool:
    """True iff every forced position covered by the word carries its bit."""
    forced = schedule.forced_bits(word.depth)
    return all(word.digits[pos - 1] == bit for pos, bit in forced.items())


@dataclass
class BesicovitchParams:
    """Digit-frequency parameter delta with its entropy dimension alpha."""

    delta: float
    alpha: float
    theta: float = 0.75

    def __post_init__(self):
        if not 0.0 < self.delta <= 0.5:
            raise DomainError(f"delta={self.delta} outside (0, 1/2]")
        if abs(alpha_of_delta(self.delta) - self.alpha) > 1e-12:
            raise DomainError("alpha does not match the entropy of delta")
        if not (0.5 < self.theta < 1.0):
            raise DomainError(f"theta={self.theta} outside (1/2, 1)")

    @classmethod
    def from_delta(cls, delta, theta=0.75):
        return cls(delta=delta, alpha=alpha_of_delta(delta), theta=theta)

    @classmethod
    def from_alpha(cls, alpha, theta=0.75):
        d = delta_of_alpha(alpha)
        return cls(delta=d, alpha=alpha_of_delta(d), theta=theta)


@dataclass
class KMeasureRule:
    """Bernoulli(delta) digits on free positions, forced bits elsewhere."""

    schedule: SparseSchedule
    delta: float

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise DomainError(f"delta={self.delta} outside [0,1]")


def sample_point(rule: KMeasureRule, depth: int, seed,
                 mode: str = "k") -> DigitString:
    """Draw one digit string of the given depth.

    mode "k" (alias "intersection"): forced bits at scheduled positions and
    Bernoulli(delta) on free positions -- the natural measure on the
    intersection of the digit-frequency set with the compact set.
    mode "plain": Bernoulli(delta) at every position, no forcing.
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    if mode == "intersection":
        mode = "k"
    if mode not in ("k", "plain"):
        raise DomainError(f"unknown sample mode {mode!r}")
    rng = np.random.default_rng(seed)
    bits = (rng.random(depth) < rule.delta).astype(np.int64)
    if mode == "k":
        for pos, bit in rule.schedule.forced_bits(depth).items():
            bits[pos - 1] = bit
    return DigitString(tuple(int(b) for b in bits))


def measure_mass(rule: KMeasureRule, cube: DyadicCube) -> float:
    """Mass of a cube under the digit-rule measure (0 if inadmissible)."""
    word = DigitString.from_cube(cube)
    forced = rule.schedule.forced_bits(word.depth)
    mass = 1.0
    for pos in range(1, word.depth + 1):
        bit = word.digits[pos - 1]
        if pos in forced:
            if bit != forced[pos]:
                return 0.0
        else:
            mass *= rule.delta if bit == 1 else (1.0 - rule.delta)
    return mass


def sine_check(word: DigitString, schedule: SparseSchedule):
    """Exact interval membership behind sin(2 pi 2^(m_k - 1) x) >= sqrt2/2.

    For each scheduled block fully determined by the word, reports the
    fractional part of 2^(m_k - 1) * value (exact dyadic arithmetic) and the
    sine at that base frequency. Admissible words give fractional parts in
    [1/4, 3/8], hence sines in [sqrt2/2, 1]. Raises on inadmissible words.
    """
    if not k_admissible(word, schedule):
        raise DomainError("word is not admissible for the schedule")
    n = word.depth
    num = word.numerator
    out = []
    for k in schedule.blocks_upto(n):
        m = schedule.m(k)
        if m + 2 > n:
            continue
        shift = m - 1
        if shift >= n:
            continue
        r = (num << shift) % (1 << n)  # numerator of frac(2^(m-1) x) over 2^n
        in_interval = (r * 4 >= (1 << n)) and (r * 8 <= 3 * (1 << n))
        frac = r / (1 << n)
        out.append({
            "k": k,
            "m": m,
            "frac": frac,
            "sine": math.sin(2.0 * math.pi * frac),
            "in_interval": in_interval,
        })
    return out


def empirical_frequency(word: DigitString, schedule: SparseSchedule):
    """Full and free-position running digit frequencies of a word."""
    n = word.depth
    total = sum(word.digits)
    free = schedule.free_positions(n)
    u = len(free)
    restricted = (
        sum(word.digits[p - 1] for p in free) / u if u > 0 else 0.0
    )
    return {
        "full": total / n,
        "restricted": restricted,
        "n": n,
        "u": u,
        "bound": 3 * len(schedule.blocks_upto(n)) / n,
    }


def admissible_counts(schedule: SparseSchedule, depth: int) -> np.ndarray:
    """Number of admissible cubes per level 1..depth: 2^(u_j)."""
    return np.array([2 ** schedule.u(j) for j in range(1, depth + 1)],
                    dtype=np.float64)


def admissible_grid(schedule: SparseSchedule, depth: int):
    """Level -> indices of admissible cubes, as a LevelSetGrid-shaped dict.

    Enumerates the admissible tree breadth-first; sizes stay moderate
    because forced positions carry a single admissible child.
    """
    levels = {}
    idx = np.array([0, 1], dtype=np.int64)
    forced = schedule.forced_bits(depth)
    levels[1] = idx if 1 not in forced else np.array([forced[1]],
                                                     dtype=np.int64)
    cur = levels[1]
    for j in range(2, depth + 1):
        if j in forced:
            cur = 2 * cur + forced[j]
        else:
            cur = np.concatenate([2 * cur, 2 * cur + 1])
            cur.sort()
        levels[j] = cur
    return levels
