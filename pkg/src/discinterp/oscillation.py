"""Coefficient construction for f'' + a f = 0 with prescribed zeros.

Writing a solution as f = P e^g with P the canonical product over the zero
set turns the equation into
a = -P''/P - 2 g' P'/P - (g')^2 - g'',
which is analytic across the nodes exactly when h = g' interpolates
h(z_k) = -P''(z_k) / (2 P'(z_k)).  The interpolation module supplies h; g is
the radial primitive anchored at g(0) = 0 (the free additive constant only
rescales f) and h' comes from term-wise analytic differentiation of the
series, never from finite differences, so residual checks keep an
independent error source.

The sharpness pair sequence packs two points per dyadic level with gaps
eps_n = exp(-2**(n rho)) / 2.  The gaps underflow doubles almost
immediately, so the sequence keeps exact logarithmic records (ln eps_n,
ln(1 - |z_m|)) and all counting and reduced-product quantities on it are
computed in log space; nodes whose gap is not representable are flagged
log-only and excluded from complex-plane evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import DiscSequence
from .growth import GrowthFunction
from .interpolation import (
    GrowthRow,
    GrowthTable,
    Interpolant,
    build_interpolant,
)
from .products import LOG_ZERO, CanonicalProduct, logsumexp_complex

__all__ = [
    "OscillationError",
    "osc_targets",
    "OscillationSolution",
    "build_coefficient",
    "ResidualReport",
    "SharpnessSequence",
    "SharpnessRow",
    "sharpness_sequence",
    "sharpness_counting_check",
    "WitnessReport",
    "sharpness_growth_witness",
    "IndexCancellationLogReport",
]

LN2 = math.log(2.0)

# 7-point, 6th order central second-derivative stencil
_FD7 = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


class OscillationError(ValueError):
    """Invalid oscillation construction or failed quadrature."""


def osc_targets(cp: CanonicalProduct) -> np.ndarray:
    """Targets b_k = -P''(z_k) / (2 P'(z_k)) in closed form.

    The reduced product cancels in the ratio, leaving
    b_k = -(s + 1) conj(z_k) / (1 - |z_k|^2) - B_k'(z_k)/B_k(z_k),
    so the values stay finite even when B_k underflows.
    """
    n = len(cp.sequence)
    if n == 0:
        return np.zeros(0, dtype=complex)
    zc = np.conj(cp.sequence.values)
    oms = (1.0 - zc * cp.sequence.values).real
    rest = np.array([cp.logderiv_rest_at_node(k) for k in range(n)])
    return -(cp.genus + 1) * zc / oms - rest


@dataclass(frozen=True)
class ResidualReport:
    points: tuple
    residuals: tuple

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0


class OscillationSolution:
    """Coefficient function with its product/interpolant decomposition."""

    def __init__(self, product: CanonicalProduct, gprime: Interpolant,
                 gf: GrowthFunction, C0: float):
        self.product = product
        self.gprime = gprime
        self.gf = gf
        self.C0 = float(C0)
        self._g_cache: dict[complex, complex] = {}

    @property
    def sequence(self) -> DiscSequence:
        return self.product.sequence

    # -- the coefficient --------------------------------------------------

    def coefficient_many(self, z) -> np.ndarray:
        """a(z) = -P''/P - 2 h P'/P - h^2 - h' as plain complex values."""
        zb = np.atleast_1d(np.asarray(z, dtype=complex))
        h, hp, _, _ = self.gprime.eval_and_derivative_many(zb)
        lp = self.product.log_deriv_P_many(zb)
        lp2 = self.product.log_deriv_prime_many(zb)
        out = -(lp**2 + lp2) - 2.0 * h * lp - h**2 - hp
        return out if np.ndim(z) else complex(out[0])

    def coefficient(self, z: complex) -> complex:
        return complex(self.coefficient_many(z))

    def coefficient_log_many(self, z) -> np.ndarray:
        """Complex log of a(z); survives radii where h overflows doubles."""
        zb = np.atleast_1d(np.asarray(z, dtype=complex))
        _, _, lam_h, lam_hp = self.gprime.eval_and_derivative_many(zb)
        lp = self.product.log_deriv_P_many(zb)
        lp2 = self.product.log_deriv_prime_many(zb)
        with np.errstate(divide="ignore", invalid="ignore"):
            comp = np.stack([
                2.0 * lam_h + 1j * math.pi,
                lam_hp + 1j * math.pi,
                _safe_log(lp**2 + lp2) + 1j * math.pi,
                lam_h + _safe_log(2.0 * lp) + 1j * math.pi,
            ])
        return logsumexp_complex(comp, axis=0)

    # -- the primitive g ---------------------------------------------------

    def _h_segment_integral(self, a: complex, b: complex, tol: float = 1e-11) -> complex:
        """Integral of h along the straight segment [a, b], panel-doubling GL."""
        if a == b:
            return 0.0 + 0.0j
        prev = None
        panels = 8
        while panels <= 4096:
            edges = np.linspace(0.0, 1.0, panels + 1)
            mid = 0.5 * (edges[:-1] + edges[1:])
            half = 0.5 * (edges[1] - edges[0])
            ts = (mid[:, None] + half * _GL_NODES[None, :]).ravel()
            pts = a + (b - a) * ts
            vals = self.gprime.eval_many(pts).reshape(panels, -1)
            total = complex((vals * _GL_WEIGHTS[None, :]).sum() * half * (b - a))
            if prev is not None and abs(total - prev) <= tol * (1.0 + abs(total)):
                return total
            prev = total
            panels *= 2
        raise OscillationError("segment quadrature for g did not converge")

    def eval_g(self, z: complex, tol: float = 1e-11) -> complex:
        """g(z) = integral of h along the radial segment from 0, g(0) = 0."""
        z = complex(z)
        cached = self._g_cache.get(z)
        if cached is None:
            cached = self._h_segment_integral(0.0, z, tol)
            self._g_cache[z] = cached
        return cached

    def eval_g_via(self, z: complex, via: complex, tol: float = 1e-11) -> complex:
        """g(z) along the two-segment path 0 -> via -> z (path independence)."""
        return self._h_segment_integral(0.0, via, tol) + self._h_segment_integral(via, z, tol)

    def eval_f(self, z: complex) -> complex:
        """f(z) = P(z) exp(g(z))."""
        return complex(self.product.P(complex(z)) * np.exp(self.eval_g(z)))

    # -- diagnostics --------------------------------------------------------

    def residual_report(self, n_samples: int = 200, seed: int = 0,
                        r_cap: float = 0.8, min_dist_factor: float = 0.1) -> ResidualReport:
        """Normalized |f'' + a f| at random points away from the nodes.

        f is differentiated by a 7-point finite-difference stencil applied to
        the locally anchored P(z) exp(g(z) - g(z0)): the common factor
        exp(g(z0)) scales out of the normalized residual, so no global
        quadrature enters.  The stencil step shrinks with every local rate
        (|h|, sqrt|a|, |P'/P|, 1/(1-|z|)) to balance truncation against
        roundoff.
        """
        rng = np.random.default_rng(seed)
        zs: list[complex] = []
        nodes = self.sequence.values
        attempts = 0
        while len(zs) < n_samples and attempts < 200 * n_samples:
            attempts += 1
            z = r_cap * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
            if len(nodes) and np.min(np.abs(nodes - z)) < min_dist_factor * (1.0 - abs(z)):
                continue
            zs.append(complex(z))
        if len(zs) < n_samples:
            raise OscillationError("could not place residual sample points")

        residuals = []
        for z0 in zs:
            h0, hp0, _, _ = self.gprime.eval_and_derivative_many(np.asarray([z0]))
            lp = complex(self.product.log_deriv_P_many(z0))
            lp2 = complex(self.product.log_deriv_prime_many(z0))
            a0 = -(lp**2 + lp2) - 2.0 * complex(h0[0]) * lp - complex(h0[0]) ** 2 - complex(hp0[0])
            scale = (abs(h0[0]) + math.sqrt(abs(a0)) + abs(lp)
                     + math.sqrt(abs(lp2)) + 2.0 / (1.0 - abs(z0)))
            step = 0.02 / scale
            if len(nodes):
                step = min(step, 0.05 * float(np.min(np.abs(nodes - z0))))
            offsets = np.arange(-3, 4) * step
            pts = z0 + offsets
            # straight-segment increments of g, one 32-point panel each
            seg_ts = 0.5 * (_GL_NODES + 1.0)
            seg_pts = (z0 + np.outer(offsets, seg_ts)).ravel()
            seg_vals = self.gprime.eval_many(seg_pts).reshape(7, -1)
            dg = (seg_vals * (0.5 * _GL_WEIGHTS)[None, :]).sum(axis=1) * offsets
            f_loc = np.asarray(self.product.P(pts)) * np.exp(dg)
            fd_second = complex((_FD7 * f_loc).sum() / step**2)
            numer = abs(fd_second + a0 * f_loc[3])
            denom = abs(fd_second) + abs(a0) * abs(f_loc[3]) + 1e-300
            residuals.append(float(numer / denom))
        return ResidualReport(points=tuple(zs), residuals=tuple(residuals))

    def zero_count_circle(self, center: complex, radius: float,
                          n_points: int = 1024) -> float:
        """Argument-principle zero count of f inside a circle.

        Integrates f'/f = P'/P + h by the trapezoid rule; e^g contributes
        nothing.  Returns the raw (un-rounded) count so callers can check
        quadrature quality.
        """
        thetas = 2.0 * math.pi * np.arange(n_points) / n_points
        ring = center + radius * np.exp(1j * thetas)
        w = self.product.log_deriv_P_many(ring) + self.gprime.eval_many(ring)
        return float(np.mean(w * (ring - center)).real)

    def zero_counts(self, n_points: int = 1024) -> np.ndarray:
        """Winding number of f around each node on a safe private circle.

        The circle must stay inside the region where h keeps its node scale:
        the trapezoid cancels the analytic h contribution only down to the
        roundoff floor eps * max|h| * radius, and h grows like
        exp(s_k |dz| / (1 - |z_k|)) away from the node.
        """
        nodes = self.sequence.values
        exps = self.gprime.exponents
        counts = np.zeros(len(nodes))
        for k, zk in enumerate(nodes):
            others = np.delete(nodes, k)
            gap = np.min(np.abs(others - zk)) if len(others) else np.inf
            one_minus = 1.0 - abs(zk)
            radius = 0.4 * min(gap, one_minus, 5.0 * one_minus / (1.0 + exps[k]))
            counts[k] = self.zero_count_circle(complex(zk), float(radius), n_points)
        return counts

    def growth_a_report(self, r_grid: Sequence[float], theta_count: int = 256) -> GrowthTable:
        """ln max |a| on circles against psi_tilde, fully in log space."""
        rows = []
        thetas = 2.0 * math.pi * np.arange(theta_count) / theta_count
        ring = np.exp(1j * thetas)
        for r in r_grid:
            if not 0 < r < 1:
                raise OscillationError("growth radii must lie in (0, 1)")
            lam = self.coefficient_log_many(r * ring)
            ln_max = float(np.max(lam.real))
            denom = float(self.gf.psi_tilde(1.0 / (1.0 - r)))
            ratio = ln_max / denom if (math.isfinite(ln_max) and denom > 0) else float("nan")
            rows.append(GrowthRow(float(r), ln_max, denom, ratio))
        return GrowthTable(tuple(rows))


def _safe_log(values: np.ndarray) -> np.ndarray:
    vals = np.asarray(values, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(vals)
    out = np.where(vals == 0, complex(LOG_ZERO, 0.0), out)
    return out


def build_coefficient(seq: DiscSequence, gf: GrowthFunction, C0: float = 8.0) -> OscillationSolution:
    """Build a(z) so that f'' + a f = 0 admits a solution vanishing exactly on seq."""
    product = CanonicalProduct(seq, gf.genus)
    targets = osc_targets(product)
    gprime = build_interpolant(seq, targets, gf, C0=C0, product=product)
    return OscillationSolution(product, gprime, gf, C0)


# ---------------------------------------------------------------------------
# sharpness pair sequence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SharpnessRow:
    n: int
    N_value: float
    target: float
    ratio: float


@dataclass(frozen=True)
class WitnessReport:
    """Forced lower bound on ln|g'| against the hypothetical growth cap."""

    rows: tuple
    crossing_index: Optional[int]

    @property
    def has_witness(self) -> bool:
        return self.crossing_index is not None


@dataclass(frozen=True)
class IndexCancellationLogReport:
    indices: tuple
    lhs: tuple
    rhs: tuple
    ratios: tuple

    @property
    def constant(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    @property
    def spread(self) -> float:
        finite = [r for r in self.ratios if r > 0]
        return max(finite) / min(finite) if finite else 1.0


class SharpnessSequence:
    """Paired dyadic sequence z = 1 - 2^-n and its eps_n-shifted twin.

    Exact log-space records (ln eps_n, ln(1 - |z_m|), pairwise gap logs)
    make counting checks possible far beyond double-precision range; nodes
    whose twin gap cannot be represented are flagged log-only.
    """

    def __init__(self, rho: float, n_max: int):
        if not rho > 0:
            raise OscillationError("rho must be positive")
        if n_max < 1:
            raise OscillationError("n_max must be at least 1")
        self.rho = float(rho)
        self.n_max = int(n_max)
        pair = np.repeat(np.arange(1, n_max + 1), 2)
        upper = np.tile([False, True], n_max)
        t_pow = 2.0 ** (pair * rho)
        log_eps = -t_pow - LN2
        with np.errstate(under="ignore"):
            # halving is exact, so this beats exp(-t - ln 2) by half an ulp
            eps = 0.5 * np.exp(-t_pow)
        base = 2.0 ** (-pair.astype(float))
        off = np.where(upper, eps, 0.0)
        positions = 1.0 - base + off
        # ln(1 - |z|): exact for the lower twin, log1p-corrected for the upper
        scaled = np.exp(np.minimum(log_eps + pair * LN2, 0.0)) * upper
        log_one_minus = -pair * LN2 + np.log1p(-scaled)
        if np.any(eps >= base / 2.0):
            raise OscillationError(
                "pair gap exceeds half the dyadic step; sequence not increasing"
            )
        if np.any(positions >= 1.0) or np.any(positions <= 0.0):
            raise OscillationError("sequence left the open unit interval")
        self.pair = pair
        self.is_upper = upper
        self.t_pow = t_pow
        self.log_eps = log_eps
        self.eps = eps
        self.positions = positions
        self.log_one_minus = log_one_minus
        self.log_only = upper & ~(positions > (1.0 - base))
        for arr in (self.pair, self.is_upper, self.t_pow, self.log_eps,
                    self.eps, self.positions, self.log_one_minus, self.log_only):
            arr.flags.writeable = False

    def __len__(self) -> int:
        return 2 * self.n_max

    # -- exact pairwise geometry ------------------------------------------

    def log_gap_matrix(self) -> np.ndarray:
        """ln |z_i - z_j| with exact twin-gap records; +inf on the diagonal."""
        base = 2.0 ** (-self.pair.astype(float))
        diff = (base[:, None] - base[None, :]) + (self.eps * self.is_upper)[None, :] \
            - (self.eps * self.is_upper)[:, None]
        with np.errstate(divide="ignore"):
            out = np.log(np.abs(diff))
        twins = (self.pair[:, None] == self.pair[None, :]) & \
                (self.is_upper[:, None] != self.is_upper[None, :])
        out[twins] = np.broadcast_to(self.log_eps[:, None], out.shape)[twins]
        out[np.diag_indices_from(out)] = np.inf
        return out

    def counting_N_log(self, m: int, delta: float = 0.5) -> float:
        """N at node m with radius delta (1 - |z_m|), entirely in log space."""
        if not 0 < delta < 1:
            raise OscillationError("delta must lie in (0, 1)")
        gaps = self.log_gap_matrix()[m]
        r_log = math.log(delta) + float(self.log_one_minus[m])
        inside = gaps <= r_log + 1e-12
        inside[m] = False
        return float(np.sum(r_log - gaps[inside]))

    def counting_table(self, delta: float = 0.5) -> tuple:
        """Rows (n, N at the upper twin, (1/(1-|z|))^rho, ratio)."""
        rows = []
        for n in range(1, self.n_max + 1):
            m = 2 * n - 1
            N = self.counting_N_log(m, delta)
            target = math.exp(-self.rho * float(self.log_one_minus[m]))
            rows.append(SharpnessRow(n=n, N_value=N, target=target, ratio=N / target))
        return tuple(rows)

    # -- conversions --------------------------------------------------------

    def representable_values(self, min_gap: float = 2e-15) -> list[complex]:
        """Nodes usable for complex-plane evaluation (distinct as doubles)."""
        vals: list[complex] = []
        for m in range(len(self)):
            if self.is_upper[m] and (self.log_only[m] or self.eps[m] < min_gap):
                continue
            vals.append(complex(self.positions[m]))
        return vals

    def to_disc_sequence(self, min_gap: float = 2e-15) -> DiscSequence:
        return DiscSequence(self.representable_values(min_gap))

    # -- log-space product diagnostics ---------------------------------------

    def index_cancellation_log_report(self, genus: int, delta: float = 0.5) -> IndexCancellationLogReport:
        """|ln|B_k| + N_k| against sum |A_n|^(s+1), with exact gap logs.

        All points are real, so the reduced product is evaluated in real
        log arithmetic; the huge twin terms ln(eps) cancel between ln|B_k|
        and the counting integral.
        """
        if genus < 1:
            raise OscillationError("genus must be a positive integer")
        x = self.positions
        om = np.exp(self.log_one_minus)          # 1 - x, exact to double
        gaps = self.log_gap_matrix()
        M = len(self)
        idx, lhs_list, rhs_list, ratio_list = [], [], [], []
        for k in range(M):
            D = om + x * om[k]                   # 1 - x_n x_k, no cancellation
            oms = om * (1.0 + x)                 # 1 - x_n^2
            A = oms / D
            log_one_minus_A = np.log(x) + gaps[:, k] - np.log(D)
            ln_E = np.empty(M)
            small = np.abs(A) <= 0.5
            for n in range(M):
                if n == k:
                    continue
                if small[n]:
                    a, acc, wj = A[n], 0.0, A[n] ** genus
                    for j in range(genus + 1, genus + 80):
                        wj *= a
                        acc += wj / j
                        if abs(wj) < 1e-25:
                            break
                    ln_E[n] = -acc
                else:
                    q = sum(A[n] ** j / j for j in range(1, genus + 1))
                    ln_E[n] = log_one_minus_A[n] + q
            mask = np.arange(M) != k
            lnB = float(np.sum(ln_E[mask]))
            N = self.counting_N_log(k, delta)
            rhs = float(np.sum(np.abs(A) ** (genus + 1)))
            idx.append(k)
            lhs_list.append(abs(lnB + N))
            rhs_list.append(rhs)
            ratio_list.append(abs(lnB + N) / rhs)
        return IndexCancellationLogReport(
            indices=tuple(idx), lhs=tuple(lhs_list),
            rhs=tuple(rhs_list), ratios=tuple(ratio_list),
        )

    def growth_witness(self, eps0: float) -> WitnessReport:
        """Crossing of the forced ln|g'(z_2n)| >= 2^(n rho) - ln 5 lower bound.

        The hypothetical cap is (1/(1-|z_2n|))^(rho - eps0/2); the report
        lists both columns and the first index from which the lower bound
        exceeds the cap for the rest of the range (None when the scales
        coincide, e.g. eps0 = 0).
        """
        if eps0 < 0:
            raise OscillationError("eps0 must be nonnegative")
        rows = []
        above = []
        for n in range(1, self.n_max + 1):
            m = 2 * n - 1
            lower = float(self.t_pow[m]) - math.log(5.0)
            upper = math.exp(-(self.rho - eps0 / 2.0) * float(self.log_one_minus[m]))
            rows.append((n, lower, upper))
            above.append(lower > upper)
        crossing = None
        for i in range(len(above)):
            if all(above[i:]):
                crossing = i + 1
                break
        return WitnessReport(rows=tuple(rows), crossing_index=crossing)


def sharpness_sequence(rho: float, n_max: int) -> SharpnessSequence:
    return SharpnessSequence(rho, n_max)


def sharpness_counting_check(seq: SharpnessSequence, delta: float = 0.5) -> tuple:
    return seq.counting_table(delta)


def sharpness_growth_witness(seq: SharpnessSequence, eps0: float) -> WitnessReport:
    return seq.growth_witness(eps0)
