"""Counting functions and condition checkers for node sequences.

n_z(t) counts sequence points in the closed Euclidean disc of radius t
around z; N_z(r) is its logarithmically weighted integral
integral_0^r (n_z(t) - 1)^+ / t dt, which collapses to the closed log-sum
over sorted distances (the nearest point never contributes).

All existential conditions are turned into best-constant computations over
the finite sequence: a finite sequence always satisfies "there exists C",
so the informative output is the smallest C together with a witness index.
Quantities defined as suprema over the whole disc are evaluated on
caller-supplied grids plus all nodes and labelled estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .geometry import DiscSequence, pseudo_dist
from .growth import GrowthFunction

__all__ = [
    "CountingError",
    "ConditionReport",
    "counting_n",
    "counting_N",
    "check_concentration",
    "check_korenblum_sum",
    "carleson_delta",
    "separation",
    "seip_density_estimate",
    "EquivalenceReport",
    "concentration_korenblum_comparison",
    "sigma_log_comparison",
    "SigmaComparisonReport",
    "SandwichReport",
    "counting_sandwich_check",
    "concentration_grid_constant",
]


class CountingError(ValueError):
    """Invalid parameter for a counting operation."""


@dataclass(frozen=True)
class ConditionReport:
    """Best constant for a per-node inequality over a finite sequence."""

    condition_name: str
    best_constant: float
    witness_index: int
    holds_with: Optional[float] = None
    values: tuple = field(default=(), repr=False)

    @property
    def holds(self) -> Optional[bool]:
        if self.holds_with is None:
            return None
        return self.best_constant <= self.holds_with

    def to_dict(self) -> dict:
        return {
            "condition_name": self.condition_name,
            "best_constant": self.best_constant,
            "witness_index": self.witness_index,
            "holds_with": self.holds_with,
        }


def counting_n(seq: DiscSequence, z: complex, t: float) -> int:
    """Number of sequence points in the closed disc of radius t around z."""
    if t < 0:
        raise CountingError("radius t must be nonnegative")
    if len(seq) == 0:
        return 0
    return int(np.count_nonzero(np.abs(seq.values - complex(z)) <= t))


def counting_N(seq: DiscSequence, z: complex, r: float) -> float:
    """Log-weighted counting integral of (n_z - 1)^+ up to radius r.

    With sorted distances d_1 <= d_2 <= ... from z, equals
    sum over j >= 2, d_j <= r of ln(r / d_j): the nearest point is
    discounted, which realizes the (n - 1)^+ truncation.
    """
    if not r > 0:
        raise CountingError("radius r must be positive")
    if len(seq) <= 1:
        return 0.0
    d = np.sort(np.abs(seq.values - complex(z)))[1:]
    inside = d[d <= r]
    if inside.size == 0:
        return 0.0
    return float(np.sum(np.log(r / inside)))


def _psi_at_nodes(seq: DiscSequence, gf: GrowthFunction) -> np.ndarray:
    return np.asarray(gf.psi(1.0 / (1.0 - seq.moduli)), dtype=float)


def _best_constant(name: str, numerators: np.ndarray, denominators: np.ndarray,
                   constant: Optional[float]) -> ConditionReport:
    if numerators.size == 0:
        return ConditionReport(name, 0.0, 0, constant, ())
    ratios = numerators / denominators
    k = int(np.argmax(ratios))
    return ConditionReport(name, float(ratios[k]), k, constant, tuple(ratios))


def check_concentration(seq: DiscSequence, gf: GrowthFunction, delta: float = 0.5,
                        constant: Optional[float] = None) -> ConditionReport:
    """Best C in N_{z_k}(delta (1 - |z_k|)) <= C psi(1 / (1 - |z_k|))."""
    if not 0 < delta < 1:
        raise CountingError("delta must lie in (0, 1)")
    if len(seq) == 0:
        raise CountingError("concentration check needs a nonempty sequence")
    nums = np.array([
        counting_N(seq, p.value, delta * (1.0 - p.modulus)) for p in seq
    ])
    return _best_constant("concentration", nums, _psi_at_nodes(seq, gf), constant)


def check_korenblum_sum(seq: DiscSequence, gf: GrowthFunction, delta: float = 0.5,
                        constant: Optional[float] = None) -> ConditionReport:
    """Best C in the pseudohyperbolic log-sum over close pairs <= C psi.

    For each node k the sum runs over 0 < |z_j - z_k| < delta (1 - |z_k|)
    of ln(1 / sigma(z_k, z_j)).
    """
    if not 0 < delta < 1:
        raise CountingError("delta must lie in (0, 1)")
    if len(seq) == 0:
        raise CountingError("korenblum check needs a nonempty sequence")
    values = seq.values
    nums = np.zeros(len(seq))
    for k, p in enumerate(seq):
        d = np.abs(values - p.value)
        mask = (d > 0) & (d < delta * (1.0 - p.modulus))
        if not mask.any():
            continue
        sig = d[mask] / np.abs(1.0 - np.conj(p.value) * values[mask])
        nums[k] = -np.sum(np.log(sig))
    return _best_constant("korenblum_sum", nums, _psi_at_nodes(seq, gf), constant)


def _log_sigma_matrix(seq: DiscSequence) -> np.ndarray:
    """ln sigma(z_j, z_k) with +inf on the diagonal."""
    v = seq.values
    d = np.abs(v[:, None] - v[None, :])
    denom = np.abs(1.0 - np.conj(v[:, None]) * v[None, :])
    with np.errstate(divide="ignore"):
        out = np.log(d) - np.log(denom)
    out[np.diag_indices_from(out)] = 0.0
    return out


def carleson_delta(seq: DiscSequence) -> float:
    """inf over k of the product of sigma(z_j, z_k), j != k, via log sums."""
    if len(seq) <= 1:
        return 1.0
    log_sigma = _log_sigma_matrix(seq)
    sums = log_sigma.sum(axis=0)
    return float(np.exp(sums.min()))


def separation(seq: DiscSequence) -> float:
    """Minimal pairwise pseudohyperbolic distance."""
    if len(seq) < 2:
        raise CountingError("separation needs at least two points")
    log_sigma = _log_sigma_matrix(seq)
    log_sigma[np.diag_indices_from(log_sigma)] = np.inf
    return float(np.exp(log_sigma.min()))


def seip_density_estimate(seq: DiscSequence, r_grid: Sequence[float],
                          z_grid: Iterable[complex]) -> float:
    """Finite-sample density estimate from annular pseudohyperbolic log sums.

    Maximizes over the supplied grids the quotient of
    sum over 1/2 < sigma(z, z_j) < r of ln(1 / sigma) by ln(1 / (1 - r)).
    This is a diagnostic lower bound for the true limsup quantity, which is
    not computable from finite data.
    """
    r_vals = np.asarray(list(r_grid), dtype=float)
    z_vals = np.asarray(list(z_grid), dtype=complex)
    if r_vals.size == 0 or z_vals.size == 0:
        raise CountingError("both grids must be nonempty")
    if np.any((r_vals <= 0) | (r_vals >= 1)):
        raise CountingError("r grid must lie in (0, 1)")
    if len(seq) == 0:
        return 0.0
    best = 0.0
    for z in z_vals:
        sig = np.array([pseudo_dist(z, complex(v)) for v in seq.values])
        sig = sig[sig > 0.5]
        if sig.size == 0:
            continue
        logs = -np.log(sig)
        for r in r_vals:
            num = float(logs[sig < r].sum())
            best = max(best, num / math.log(1.0 / (1.0 - r)))
    return best


@dataclass(frozen=True)
class SigmaComparisonReport:
    """Per-pair excess of ln(1/sigma) over the Euclidean log term."""

    min_excess: float
    max_excess: float
    bound: float
    pair_count: int

    @property
    def holds(self) -> bool:
        return self.min_excess >= -1e-12 and self.max_excess <= self.bound + 1e-12


def sigma_log_comparison(seq: DiscSequence, delta: float = 0.5) -> SigmaComparisonReport:
    """Exact two-sided comparison of the pseudohyperbolic and Euclidean log terms.

    For each pair with 0 < |z_j - z_k| <= delta (1 - |z_k|) the excess
    ln(1/sigma(z_k, z_j)) - ln((1 - |z_k|) / |z_j - z_k|)
    equals ln(|1 - conj(z_j) z_k| / (1 - |z_k|)) and lies in [0, ln(2 + delta)].
    """
    if not 0 < delta < 1:
        raise CountingError("delta must lie in (0, 1)")
    v = seq.values
    lo, hi, count = np.inf, -np.inf, 0
    for k, p in enumerate(seq):
        d = np.abs(v - p.value)
        mask = (d > 0) & (d <= delta * (1.0 - p.modulus))
        if not mask.any():
            continue
        excess = np.log(np.abs(1.0 - np.conj(v[mask]) * p.value) / (1.0 - p.modulus))
        lo = min(lo, float(excess.min()))
        hi = max(hi, float(excess.max()))
        count += int(mask.sum())
    if count == 0:
        lo = hi = 0.0
    return SigmaComparisonReport(lo, hi, math.log(2.0 + delta), count)


@dataclass(frozen=True)
class EquivalenceReport:
    """Joint report for the concentration and korenblum-sum constants.

    ``pointwise_max`` is the per-node maximum of the korenblum sum divided
    by its proven affine bound N_k(delta) + affine_factor * N_k(alpha delta);
    it never exceeds 1.
    """

    C_concentration: float
    C_korenblum: float
    C_concentration_enlarged: float
    affine_factor: float
    pointwise_max: float
    lower_ok: bool

    @property
    def upper_ok(self) -> bool:
        return self.pointwise_max <= 1.0 + 1e-12


def concentration_korenblum_comparison(seq: DiscSequence, gf: GrowthFunction,
                                       delta: float = 0.5, alpha: float = 2.0) -> EquivalenceReport:
    """Two-sided comparison of the concentration and korenblum-sum conditions.

    Direction one: every node satisfies N_k(delta (1-|z_k|)) <= korenblum sum,
    hence the concentration constant is at most the korenblum one.
    Direction two: the korenblum sum at node k is at most
    N_k(delta(1-|z_k|)) + (ln(1/delta) + ln(2+delta)) / ln(alpha)
    times N_k(alpha delta (1-|z_k|)); both facts are verified pointwise.
    """
    if not (0 < delta < 1 and alpha > 1 and delta * alpha <= 1):
        raise CountingError("need 0 < delta < 1 < alpha with alpha * delta <= 1")
    if len(seq) == 0:
        raise CountingError("comparison needs a nonempty sequence")
    psi_vals = _psi_at_nodes(seq, gf)
    factor = (math.log(1.0 / delta) + math.log(2.0 + delta)) / math.log(alpha)
    v = seq.values

    kore = np.zeros(len(seq))
    n_small = np.zeros(len(seq))
    n_large = np.zeros(len(seq))
    for k, p in enumerate(seq):
        d = np.abs(v - p.value)
        mask = (d > 0) & (d < delta * (1.0 - p.modulus))
        if mask.any():
            sig = d[mask] / np.abs(1.0 - np.conj(p.value) * v[mask])
            kore[k] = -float(np.sum(np.log(sig)))
        n_small[k] = counting_N(seq, p.value, delta * (1.0 - p.modulus))
        n_large[k] = counting_N(seq, p.value, alpha * delta * (1.0 - p.modulus))

    c_small = float((n_small / psi_vals).max())
    c_kore = float((kore / psi_vals).max())
    c_large = float((n_large / psi_vals).max())
    lower_ok = bool(np.all(n_small <= kore + 1e-12))
    bound = n_small + factor * n_large
    with np.errstate(invalid="ignore", divide="ignore"):
        point = np.where(kore > 0, kore / np.maximum(bound, 1e-300), 0.0)
    return EquivalenceReport(
        C_concentration=c_small,
        C_korenblum=c_kore,
        C_concentration_enlarged=c_large,
        affine_factor=factor,
        pointwise_max=float(point.max()) if point.size else 0.0,
        lower_ok=lower_ok,
    )


@dataclass(frozen=True)
class SandwichReport:
    """Counting sandwich between the truncated count and the log integral."""

    n_bound: ConditionReport
    max_lower_violation: float
    sandwich_ok: bool


def counting_sandwich_check(seq: DiscSequence, gf: GrowthFunction,
                            delta: float = 0.5, alpha: float = 2.0,
                            z_points: Optional[Iterable[complex]] = None) -> SandwichReport:
    """Verify (n_z(delta/alpha (1-|z|)) - 1)^+ ln(alpha) <= N_z(delta (1-|z|)).

    The sandwich is checked at every node plus any supplied z points; the
    returned condition report carries the best constant for the count bound
    n_z((1 - |z|)/2) <= C psi(1 / (1 - |z|)) over the same points.
    """
    if not (0 < delta < 1 and alpha > 1 and delta / alpha > 0):
        raise CountingError("need 0 < delta < 1 < alpha")
    pts = [complex(v) for v in seq.values]
    if z_points is not None:
        pts.extend(complex(z) for z in z_points)
    if not pts:
        raise CountingError("no evaluation points")
    worst = -math.inf
    nums, dens = [], []
    for z in pts:
        az = abs(z)
        if az >= 1.0:
            raise CountingError("sandwich points must lie inside the disc")
        one_minus = 1.0 - az
        lower = max(counting_n(seq, z, (delta / alpha) * one_minus) - 1, 0) * math.log(alpha)
        mid = counting_N(seq, z, delta * one_minus)
        worst = max(worst, lower - mid)
        nums.append(float(counting_n(seq, z, 0.5 * one_minus)))
        dens.append(float(gf.psi(1.0 / one_minus)))
    report = _best_constant("count_bound", np.asarray(nums), np.asarray(dens), None)
    return SandwichReport(
        n_bound=report,
        max_lower_violation=float(worst),
        sandwich_ok=worst <= 1e-12,
    )


def concentration_grid_constant(seq: DiscSequence, gf: GrowthFunction,
                                delta1: float = 0.5,
                                z_points: Optional[Iterable[complex]] = None) -> float:
    """All-z variant of the concentration constant on nodes plus a grid."""
    if not 0 < delta1 < 1:
        raise CountingError("delta1 must lie in (0, 1)")
    pts = [complex(v) for v in seq.values]
    if z_points is not None:
        pts.extend(complex(z) for z in z_points)
    best = 0.0
    for z in pts:
        one_minus = 1.0 - abs(z)
        if one_minus <= 0:
            raise CountingError("grid points must lie inside the disc")
        val = counting_N(seq, z, delta1 * one_minus) / float(gf.psi(1.0 / one_minus))
        best = max(best, val)
    return best
