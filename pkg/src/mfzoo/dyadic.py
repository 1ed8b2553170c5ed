"""Dyadic indexing, coefficient fields, pointwise exponents and box-counting.

All quantities live on [0,1). A cube at level j with index k denotes the
half-open interval [k 2^-j, (k+1) 2^-j). Coefficient fields store one
nonnegative float per cube per level up to a maximum depth. Pointwise
behaviour is read off the per-level ratios log2(e_j) / (-j) along the chain
of cubes containing a point; finite-depth surrogates for liminf/limsup use
the last half of the analysis window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InsufficientDataError

RATIO_CAP = 10.0


@dataclass(frozen=True)
class DyadicCube:
    """Dyadic interval [k 2^-j, (k+1) 2^-j)."""

    level: int
    index: int

    def __post_init__(self):
        if self.level < 0:
            raise DomainError(f"negative level {self.level}")
        if not 0 <= self.index < 2 ** self.level:
            raise DomainError(
                f"index {self.index} out of range at level {self.level}"
            )

    @property
    def left(self) -> float:
        return self.index * 2.0 ** -self.level

    @property
    def right(self) -> float:
        return (self.index + 1) * 2.0 ** -self.level

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise DomainError("root cube has no parent")
        return DyadicCube(self.level - 1, self.index // 2)

    def children(self):
        return (
            DyadicCube(self.level + 1, 2 * self.index),
            DyadicCube(self.level + 1, 2 * self.index + 1),
        )

    def enlarged(self):
        """The 3x enlargement [(k-1) 2^-j, (k+2) 2^-j) truncated to [0,1)."""
        lo = max(0.0, (self.index - 1) * 2.0 ** -self.level)
        hi = min(1.0, (self.index + 2) * 2.0 ** -self.level)
        return lo, hi

    def contains(self, x: float) -> bool:
        return self.left <= x < self.right


def cube_of_point(x: float, j: int) -> DyadicCube:
    """The unique level-j cube containing x."""
    if not 0.0 <= x < 1.0:
        raise DomainError(f"x={x} outside [0,1)")
    if j < 0:
        raise DomainError(f"negative level {j}")
    k = min(int(math.floor(x * 2 ** j)), 2 ** j - 1)
    return DyadicCube(j, k)


class CoefficientField:
    """Per-level arrays of nonnegative coefficient magnitudes e_lambda.

    Level j holds exactly 2^j values. Magnitudes are taken at ingestion;
    non-finite входные values are rejected. Arrays are frozen after
    construction so fields can be shared freely.
    """

    def __init__(self, levels, meta=None):
        self.levels = []
        for j, arr in enumerate(levels):
            a = np.abs(np.asarray(arr, dtype=np.float64))
            if a.shape != (2 ** j,):
                raise DomainError(
                    f"level {j} must have length {2 ** j}, got {a.shape}"
                )
            if not np.all(np.isfinite(a)):
                raise DomainError(f"non-finite coefficient at level {j}")
            a.setflags(write=False)
            self.levels.append(a)
        self.meta = dict(meta or {})

    @property
    def max_depth(self) -> int:
        return len(self.levels) - 1

    def level(self, j: int) -> np.ndarray:
        if not 0 <= j <= self.max_depth:
            raise DomainError(f"level {j} outside 0..{self.max_depth}")
        return self.levels[j]

    def value(self, cube: DyadicCube) -> float:
        return float(self.level(cube.level)[cube.index])

    def chain(self, x: float, j_min: int = 0, j_max: int | None = None):
        """Values e_j(x) along the cube chain of x for j in [j_min, j_max]."""
        j_max = self.max_depth if j_max is None else j_max
        out = []
        for j in range(j_min, j_max + 1):
            out.append(self.value(cube_of_point(x, j)))
        return np.array(out)

    def ratio_level(self, j: int) -> np.ndarray:
        """Per-cube ratios log2(e) / (-j) at level j; zeros map to the cap."""
        e = self.level(j)
        if j == 0:
            return np.where(e > 0.0, 0.0, RATIO_CAP)
        with np.errstate(divide="ignore"):
            r = np.log2(np.maximum(e, 1e-300)) / (-j)
        return np.where(e > 0.0, r, RATIO_CAP)


@dataclass
class ExponentEstimate:
    """Finite-depth surrogate of the lower/upper pointwise indexes."""

    lower: float
    upper: float
    window: tuple
    diagnostics: dict = field(default_factory=dict)


def ratios_from_chain(values, j_min, cap=RATIO_CAP):
    """Per-level ratios log2|e_j| / (-j) for a chain starting at j_min >= 1."""
    values = np.asarray(values, dtype=np.float64)
    js = np.arange(j_min, j_min + len(values))
    if j_min < 1:
        raise DomainError("chain ratios need j_min >= 1")
    with np.errstate(divide="ignore"):
        r = np.log2(np.maximum(np.abs(values), 1e-300)) / (-js)
    return np.where(np.abs(values) > 0.0, r, cap)


def estimate_from_chain(values, window, cap=RATIO_CAP):
    """Min/max of the per-level ratios over the tail half of the window.

    `values` are e_j for j = window[0] .. window[1]. Zero entries contribute
    the capped ratio. An all-zero tail is flagged in the diagnostics.
    """
    j_min, j_max = window
    if j_min < 1 or j_max < j_min:
        raise DomainError(f"bad window {window}")
    values = np.asarray(values, dtype=np.float64)
    if len(values) != j_max - j_min + 1:
        raise DomainError("chain length does not match window")
    ratios = ratios_from_chain(values, j_min, cap)
    n_tail = math.ceil(len(ratios) / 2)
    tail = ratios[-n_tail:]
    tail_vals = np.abs(values[-n_tail:])
    all_zero = bool(np.all(tail_vals == 0.0))
    if all_zero:
        lower = upper = cap
    else:
        lower = float(tail.min())
        upper = float(tail.max())
    return ExponentEstimate(
        lower=lower,
        upper=upper,
        window=(j_min, j_max),
        diagnostics={
            "ratios": ratios,
            "tail_start": j_max - n_tail + 1,
            "all_zero_tail": all_zero,
            "cap": cap,
        },
    )


def estimate_exponents(field: CoefficientField, x: float, window=None,
                       cap=RATIO_CAP) -> ExponentEstimate:
    """Estimate (h^-, h^+) at x from the cube chain of the field."""
    if window is None:
        window = (1, field.max_depth)
    j_min, j_max = window
    if j_min < 1 or j_max > field.max_depth:
        raise DomainError(f"window {window} outside [1, {field.max_depth}]")
    values = field.chain(x, j_min, j_max)
    return estimate_from_chain(values, (j_min, j_max), cap)


def gf1_check(field: CoefficientField, p: float, bound: float):
    """Per-level l^p norms (sum_lambda e^p)^(1/p) with a pass flag per level."""
    if p < 1:
        raise DomainError(f"p={p} < 1")
    rows = []
    for j in range(field.max_depth + 1):
        e = field.level(j)
        norm = float(np.sum(e ** p) ** (1.0 / p))
        rows.append({"level": j, "norm": norm, "passes": norm <= bound})
    return rows


@dataclass
class LevelSetGrid:
    """Per-level sets of cube indices selected by an exponent criterion."""

    target: float
    tolerance: float
    mode: str
    levels: dict  # level -> np.ndarray of selected cube indices

    def count(self, j: int) -> int:
        return len(self.levels.get(j, ()))

    def nonempty_levels(self):
        return sorted(j for j, idx in self.levels.items() if len(idx) > 0)


def _ancestor_window(j, w_lo):
    """Tail half of [w_lo, j], used by the one-sided surrogates."""
    n = j - w_lo + 1
    n_tail = math.ceil(n / 2)
    return range(j - n_tail + 1, j + 1)


def extract_level_set(field: CoefficientField, alpha: float, eps: float,
                      mode: str = "limit", window=None) -> LevelSetGrid:
    """Select cubes per level according to an exponent criterion.

    Modes:
      limit  -- the cube's own ratio lies in [alpha - eps, alpha + eps];
      lower  -- liminf surrogate (min of ancestor ratios over the tail half
                of the window up to the cube's level) is <= alpha + eps;
      upper  -- limsup surrogate (max of the same ratios) is <= alpha + eps;
      chain  -- every ancestor ratio from the window start up to the cube's
                level lies in [alpha - eps, alpha + eps]; the finite-depth
                surrogate for {h^- = h^+ = alpha}.
    """
    if eps <= 0:
        raise DomainError(f"eps={eps} must be positive")
    if mode not in ("limit", "lower", "upper", "chain"):
        raise DomainError(f"unknown mode {mode!r}")
    J = field.max_depth
    w_lo, w_hi = window if window is not None else (1, J)
    w_lo = max(1, w_lo)
    w_hi = min(J, w_hi)
    ratios = {j: field.ratio_level(j) for j in range(1, w_hi + 1)}
    levels = {}
    for j in range(w_lo, w_hi + 1):
        r_own = ratios[j]
        if mode == "limit":
            sel = np.abs(r_own - alpha) <= eps
        elif mode == "chain":
            sel = np.ones(2 ** j, dtype=bool)
            for i in range(w_lo, j + 1):
                r = np.repeat(ratios[i], 2 ** (j - i))
                sel &= np.abs(r - alpha) <= eps
        else:
            agg = None
            for i in _ancestor_window(j, w_lo):
                r = np.repeat(ratios[i], 2 ** (j - i))
                if agg is None:
                    agg = r.copy()
                elif mode == "lower":
                    np.minimum(agg, r, out=agg)
                else:
                    np.maximum(agg, r, out=agg)
            sel = agg <= alpha + eps
        levels[j] = np.nonzero(sel)[0]
    return LevelSetGrid(target=alpha, tolerance=eps, mode=mode, levels=levels)


def box_dimension(grid: LevelSetGrid, window=None):
    """Least-squares slope of log2(count_j) against j over nonempty levels.

    Returns (dimension_estimate, r_squared). A perfectly constant count has
    slope 0 and r^2 = 1 by convention. Raises InsufficientDataError when
    fewer than 4 nonempty levels fall in the window.
    """
    js = grid.nonempty_levels()
    if window is not None:
        js = [j for j in js if window[0] <= j <= window[1]]
    if len(js) < 4:
        raise InsufficientDataError(
            f"need >= 4 nonempty levels, got {len(js)}"
        )
    xs = np.array(js, dtype=np.float64)
    ys = np.array([math.log2(grid.count(j)) for j in js])
    xm, ym = xs.mean(), ys.mean()
    sxx = float(((xs - xm) ** 2).sum())
    sxy = float(((xs - xm) * (ys - ym)).sum())
    slope = sxy / sxx
    ss_tot = float(((ys - ym) ** 2).sum())
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        resid = ys - (ym + slope * (xs - xm))
        r2 = 1.0 - float((resid ** 2).sum()) / ss_tot
    return slope, r2


@dataclass
class SpectrumRow:
    abscissa: float
    dim_estimate: float | None
    r2: float | None
    levels_used: int
    counts: dict
    flag: str  # "ok" | "empty" | "insufficient-data"


@dataclass
class SpectrumReport:
    rows: list
    model_line: list | None = None

    def as_csv_rows(self):
        out = [("abscissa", "dim_estimate", "r2", "levels_used", "flag")]
        for r in self.rows:
            out.append((
                f"{r.abscissa:.10g}",
                "" if r.dim_estimate is None else f"{r.dim_estimate:.10g}",
                "" if r.r2 is None else f"{r.r2:.10g}",
                str(r.levels_used),
                r.flag,
            ))
        return out


def coarse_spectrum(field: CoefficientField, abscissae, eps: float,
                    mode: str = "limit", window=None,
                    model=None) -> SpectrumReport:
    """Batch extract_level_set + box_dimension, one row per abscissa.

    Never aborts the batch: rows without enough data are flagged. The
    regression window defaults to the last half of the field's levels,
    mirroring the tail-window surrogate used for pointwise exponents.
    """
    abscissae = list(abscissae)
    if not abscissae:
        raise DomainError("abscissae must be nonempty")
    for a in abscissae:
        if not 0.0 <= a <= RATIO_CAP:
            raise DomainError(f"abscissa {a} outside [0, {RATIO_CAP}]")
    J = field.max_depth
    if window is None:
        window = (max(1, math.ceil(J / 2)), J)
    rows = []
    for a in abscissae:
        grid = extract_level_set(field, a, eps, mode=mode, window=window)
        counts = {j: grid.count(j) for j in range(window[0], window[1] + 1)}
        nonempty = [j for j, c in counts.items() if c > 0]
        if not nonempty:
            rows.append(SpectrumRow(a, None, None, 0, counts, "empty"))
            continue
        try:
            dim, r2 = box_dimension(grid, window=window)
        except InsufficientDataError:
            rows.append(SpectrumRow(a, None, None, len(nonempty), counts,
                                    "insufficient-data"))
            continue
        rows.append(SpectrumRow(a, dim, r2, len(nonempty), counts, "ok"))
    model_line = None
    if model is not None:
        model_line = [(a, float(model(a))) for a in abscissae]
    return SpectrumReport(rows=rows, model_line=model_line)
