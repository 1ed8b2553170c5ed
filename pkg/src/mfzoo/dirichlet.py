"""Dirichlet series on the critical line and their Fourier-integral bridges.

A series sum a_k k^(-s) with square-summable coefficients is evaluated at
s = 1/2 - it. Three discretization bridges link it to L^2 functions on the
half-line: unit-grid step functions from Fourier coefficients, log-grid step
functions from Dirichlet coefficients, and the reverse quadrature giving
Bessel-bounded Dirichlet coefficients from a half-line function. Divergence
indexes on the Dirichlet side live on the log log n scale; at the scales a
machine can sum directly, partial integrals of the bridged step function at
band-edge cutoffs serve as the computable surrogate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError


class DirichletSeries:
    """Coefficients a_k, 1 <= k <= n_max, with the l^2 norm."""

    def __init__(self, coefficients):
        c = np.asarray(coefficients, dtype=complex)
        if c.ndim != 1 or len(c) == 0:
            raise DomainError("need a nonempty 1-d coefficient array")
        self.coefficients = c

    @property
    def n_max(self) -> int:
        return len(self.coefficients)

    def a(self, k: int) -> complex:
        if not 1 <= k <= self.n_max:
            return 0.0 + 0.0j
        return complex(self.coefficients[k - 1])

    def h2_norm_sq(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))

    def h2_norm(self) -> float:
        return math.sqrt(self.h2_norm_sq())


def ds_partial_sum(g: DirichletSeries, n: int, t) -> complex | np.ndarray:
    """sum_{k<=n} a_k k^(-1/2 + it), ascending k, vectorized over t."""
    if not 1 <= n <= g.n_max:
        raise DomainError(f"n={n} outside 1..{g.n_max}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    k = np.arange(1, n + 1)
    base = g.coefficients[:n] * k ** -0.5
    out = np.exp(1j * np.outer(t_arr, np.log(k))) @ base
    return out if np.ndim(t) else complex(out[0])


class PiecewiseConstant:
    """Complex step function on increasing breakpoints."""

    def __init__(self, breakpoints, values):
        b = np.asarray(breakpoints, dtype=np.float64)
        v = np.asarray(values, dtype=complex)
        if len(b) != len(v) + 1:
            raise DomainError("need one more breakpoint than values")
        if np.any(np.diff(b) <= 0):
            raise DomainError("breakpoints must increase strictly")
        self.breakpoints = b
        self.values = v

    @property
    def support(self):
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def norm2_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2
                            * np.diff(self.breakpoints)))

    def norm2(self) -> float:
        return math.sqrt(self.norm2_sq())

    def __call__(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=np.float64))
        idx = np.searchsorted(self.breakpoints, u, side="right") - 1
        out = np.zeros(len(u), dtype=complex)
        ok = (idx >= 0) & (idx < len(self.values))
        out[ok] = self.values[idx[ok]]
        return out


class HalfLineFunction(PiecewiseConstant):
    """Step function on [0, +inf) starting at t_0 = 0."""

    def __init__(self, breakpoints, values):
        super().__init__(breakpoints, values)
        if abs(self.breakpoints[0]) > 1e-15:
            raise DomainError("half-line functions start at 0")


def fs_to_fi(coefficients) -> HalfLineFunction:
    """Unit-grid bridge: F(t) = a_k on [k, k+1) for k = 0, 1, ...

    Preserves the l^2 norm exactly.
    """
    a = np.asarray(coefficients, dtype=complex)
    return HalfLineFunction(np.arange(len(a) + 1, dtype=np.float64), a)


def ds_to_fi(g: DirichletSeries) -> HalfLineFunction:
    """Log-grid bridge: G = b_k / sqrt(log(k+1) - log k) on [log k, log(k+1))."""
    k = np.arange(1, g.n_max + 1)
    widths = np.log(k + 1) - np.log(k)
    values = g.coefficients / np.sqrt(widths)
    breaks = np.concatenate([[0.0], np.log(k + 1)])
    return HalfLineFunction(breaks, values)


def fi_to_ds(G: PiecewiseConstant, n_max: int | None = None) -> DirichletSeries:
    """Reverse bridge b_k = integral over [log k, log(k+1)) of G(u) e^(u/2) du.

    The series is truncated at the largest k with log(k+1) inside the
    support (or at n_max); the coefficients satisfy the Bessel bound
    sum |b_k|^2 <= ||G||_2^2.
    """
    lo, hi = G.support
    k_top = int(math.floor(math.exp(hi))) - 1
    if n_max is not None:
        k_top = min(k_top, n_max)
    if k_top < 1:
        raise DomainError("support too short for any coefficient")
    coeffs = np.zeros(k_top, dtype=complex)
    for k in range(1, k_top + 1):
        a, b = math.log(k), math.log(k + 1)
        lo_i = np.searchsorted(G.breakpoints, a, side="right") - 1
        hi_i = np.searchsorted(G.breakpoints, b, side="left")
        total = 0.0 + 0.0j
        for i in range(max(lo_i, 0), min(hi_i, len(G.values))):
            seg_a = max(a, float(G.breakpoints[i]))
            seg_b = min(b, float(G.breakpoints[i + 1]))
            if seg_b > seg_a:
                total += G.values[i] * 2.0 * (math.exp(seg_b / 2.0)
                                              - math.exp(seg_a / 2.0))
        coeffs[k - 1] = total
    return DirichletSeries(coeffs)


def fi_partial_integral(F: PiecewiseConstant, R: float, t) -> complex:
    """Exact piecewise closed form of the truncated integral of F e^(itu)."""
    lo, hi = F.support
    if not lo <= R <= hi + 1e-12:
        raise DomainError(f"R={R} outside support [{lo}, {hi}]")
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.zeros(len(t_arr), dtype=complex)
    for i, ti in enumerate(t_arr):
        total = 0.0 + 0.0j
        for seg in range(len(F.values)):
            a = float(F.breakpoints[seg])
            b = min(float(F.breakpoints[seg + 1]), R)
            if b <= a:
                break if a >= R else None
            if b <= a:
                continue
            v = F.values[seg]
            if v == 0:
                continue
            if abs(ti) < 1e-300:
                total += v * (b - a)
            else:
                total += v * (np.exp(1j * ti * b)
                              - np.exp(1j * ti * a)) / (1j * ti)
        out[i] = total
    return out if np.ndim(t) else complex(out[0])


def ds_divergence_index(values_by_n) -> dict:
    """(beta_minus, beta_plus) in log log scale from (n, |S_n|) pairs.

    The schedule must contain at least 4 points with log log n spacing at
    least 0.1; the indexes are the max/min ratios over the tail half.
    """
    pts = sorted((int(n), float(v)) for n, v in values_by_n)
    if len(pts) < 4:
        raise InsufficientDataError("need at least 4 schedule points")
    lls = [math.log(math.log(n)) for n, _ in pts]
    if any(b - a < 0.1 for a, b in zip(lls[:-1], lls[1:])):
        raise DomainError("log log n spacing below 0.1")
    ratios = [math.log(max(v, 1e-300)) / ll for (n, v), ll in zip(pts, lls)]
    tail = ratios[-math.ceil(len(ratios) / 2):]
    return {"beta_minus": max(tail), "beta_plus": min(tail),
            "ratios": ratios, "schedule": [n for n, _ in pts]}


def ds_divergence_from_series(g: DirichletSeries, t: float,
                              schedule) -> dict:
    """Divergence indexes from true partial sums at the given n schedule."""
    vals = []
    for n in schedule:
        if n > g.n_max:
            raise DomainError(f"schedule point {n} beyond n_max={g.n_max}")
        vals.append((n, abs(ds_partial_sum(g, int(n), t))))
    return ds_divergence_index(vals)


def compose_multifractal_ds(block_function) -> DirichletSeries:
    """Bridge a banded circle function into a Dirichlet series.

    Takes the analytic-part coefficients a_m (m >= 0), forms the unit-grid
    step function and applies the reverse bridge, truncating at the
    frequency ceiling of the input.
    """
    a = block_function.analytic_coefficients()
    F = fs_to_fi(a)
    return fi_to_ds(F, n_max=len(a) - 1 if len(a) > 1 else 1)


def embedding_check(g: DirichletSeries, resolution: int = 1 << 12) -> float:
    """Measured ratio of the critical-line L^2 mass over [0,1] to ||g||^2."""
    t = (np.arange(resolution) + 0.5) / resolution
    vals = ds_partial_sum(g, g.n_max, t)
    integral = float(np.mean(np.abs(vals) ** 2))
    return integral / g.h2_norm_sq()


def truncated_transform(G: PiecewiseConstant, R: float,
                        xi) -> complex | np.ndarray:
    """hat(G_R)(xi) = integral over [-R, R] of G(u) e^(i u xi) du, exact."""
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    out = np.zeros(len(xi_arr), dtype=complex)
    for seg in range(len(G.values)):
        a = max(float(G.breakpoints[seg]), -R)
        b = min(float(G.breakpoints[seg + 1]), R)
        if b <= a:
            continue
        v = G.values[seg]
        if v == 0:
            continue
        small = np.abs(xi_arr) < 1e-300
        with np.errstate(invalid="ignore", divide="ignore"):
            term = v * (np.exp(1j * np.outer(xi_arr, [b])).ravel()
                        - np.exp(1j * np.outer(xi_arr, [a])).ravel()) \
                / (1j * xi_arr)
        term[small] = v * (b - a)
        out += term
    return out if np.ndim(xi) else complex(out[0])


def fi_localization_check(G: PiecewiseConstant, R: float, t_samples,
                          resolution: int = 1 << 14) -> dict:
    """Measured constant in the truncated-transform localization bound.

    For t with |hat(G_R)(t)| >= ||G||_2, scores
    ||hat(G_R)||_{L^2(I)} sqrt(R) log(R) / |hat(G_R)(t)| over the interval I
    of size 1/R centred at t, evaluated by exact piecewise transforms on a
    fine grid. Empty report when no sample qualifies.
    """
    if R < 2:
        raise DomainError("R must be >= 2")
    norm = G.norm2()
    scores = []
    for t in np.atleast_1d(np.asarray(t_samples, dtype=np.float64)):
        gt = abs(truncated_transform(G, R, float(t)))
        if gt < norm:
            continue
        xi = np.linspace(t - 0.5 / R, t + 0.5 / R, resolution // 8)
        vals = np.abs(truncated_transform(G, R, xi))
        local = math.sqrt(float(np.trapezoid(vals ** 2, xi)))
        score = local * math.sqrt(R) * math.log(R) / gt
        scores.append({"t": float(t), "score": float(score)})
    return {
        "scores": scores,
        "min": min((s["score"] for s in scores), default=None),
        "qualifying": len(scores),
    }
