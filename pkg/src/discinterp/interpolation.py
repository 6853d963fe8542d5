"""Constructive interpolation series over a canonical product.

The interpolant is

    f(z) = sum_n b_n / (z - z_n) * P(z) / P'(z_n)
                 * ((1 - |z_n|^2) / (1 - conj(z_n) z))**(s_n - 1),

with per-node exponents s_n selected from a log-concave coefficient ladder:
ln phi_n is minus the Young conjugate of u -> C0 * psi_tilde(C0 e^u), so the
ladder equals its own Newton majorant and its coefficient ratios kappa_n are
nondecreasing.  A node with 1/(1 - |z_n|) in the kappa bucket [kappa_m,
kappa_{m+1}) receives s_n = m, clamped to at least 1 so the extra Moebius
factor never carries a negative power.

Evaluation is log-space throughout.  The n-th term is assembled from the
factor split P(z) = E(A_n(z), s) B_n(z) using the exact identity
E(A_n(z), s)/(z - z_n) = -conj(z_n) e^{Q(A_n(z))} / (1 - conj(z_n) z), which
is pole-free, so f(z_k) = b_k holds exactly at the nodes and the terms stay
finite arbitrarily close to them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .counting import ConditionReport, check_concentration
from .geometry import DiscSequence
from .growth import GrowthError, GrowthFunction
from .products import (
    LOG_ZERO,
    CanonicalProduct,
    LogComplex,
    _poly_q,
    logsumexp_complex,
)

__all__ = [
    "InterpolationError",
    "LadderError",
    "TargetData",
    "CoefficientLadder",
    "build_ladder",
    "ladder_for_sequence",
    "select_exponents",
    "Interpolant",
    "build_interpolant",
    "GrowthRow",
    "GrowthTable",
    "growth_report",
    "MaxTermBoundReport",
    "max_term_bound_report",
]


class InterpolationError(ValueError):
    """Inconsistent interpolation data."""


class LadderError(ValueError):
    """The coefficient ladder cannot be built or is too short."""


# hard cap on ladder length: beyond this the conjugate arrays stop fitting
# in memory; reachable only for fast growth with nodes hugging the boundary
MAX_LADDER_LENGTH = 5_000_000


@dataclass(frozen=True)
class TargetData:
    """Interpolation targets with their admissibility constant."""

    values: np.ndarray
    admissibility_constant: float

    @classmethod
    def from_values(cls, seq: DiscSequence, gf: GrowthFunction,
                    values: Sequence[complex]) -> "TargetData":
        vals = np.asarray(values, dtype=complex)
        if vals.shape != (len(seq),):
            raise InterpolationError(
                f"expected {len(seq)} target values, got shape {vals.shape}"
            )
        if len(seq):
            denom = np.asarray(gf.psi_tilde(1.0 / (1.0 - seq.moduli)), dtype=float)
            with np.errstate(divide="ignore"):
                log_abs = np.log(np.abs(vals))
            pos = np.maximum(log_abs, 0.0)
            constant = float(np.max(pos / denom))
        else:
            constant = 0.0
        vals = vals.copy()
        vals.flags.writeable = False
        return cls(values=vals, admissibility_constant=constant)


@dataclass(frozen=True)
class CoefficientLadder:
    """Log-concave coefficient ladder with its ratio sequence.

    ``log_coeffs[n]`` is ln phi_n; ``log_kappas[n]`` is ln(phi_{n-1}/phi_n)
    with a -inf sentinel at n = 0.  Log-concavity of the coefficients is
    enforced exactly, so the kappa sequence is nondecreasing.
    """

    gf: GrowthFunction
    C0: float
    log_coeffs: np.ndarray = field(repr=False)
    log_kappas: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        for arr in (self.log_coeffs, self.log_kappas):
            arr.flags.writeable = False

    @property
    def n_max(self) -> int:
        return len(self.log_coeffs) - 1

    def log_max_term(self, log_t: float) -> tuple[float, int]:
        """(ln mu(t), attaining index) at t = exp(log_t), ties to the larger index."""
        arr = self.log_coeffs + np.arange(len(self.log_coeffs)) * log_t
        idx = len(arr) - 1 - int(np.argmax(arr[::-1]))
        return float(arr[idx]), idx


def build_ladder(gf: GrowthFunction, C0: float, n_max: int) -> CoefficientLadder:
    """Ladder coefficients ln phi_n = -sup_{u >= 0} (n u - C0 psi_tilde(C0 e^u)).

    The objective is concave in u with derivative n - C0 psi(C0 e^u), so the
    supremum sits where the nondecreasing function C0 psi(C0 e^u) crosses n;
    the crossing is inverted in closed form per family (log domain, so no
    intermediate overflow).  Convexity of the conjugate is then enforced
    exactly by a running-maximum pass over its increments.
    """
    if not C0 >= 2:
        raise LadderError(f"C0 must be at least 2, got {C0}")
    if n_max < 1:
        raise LadderError("n_max must be at least 1")
    if n_max > MAX_LADDER_LENGTH:
        raise LadderError(
            f"ladder length {n_max} exceeds {MAX_LADDER_LENGTH}; "
            "reduce C0 or keep nodes further from the boundary"
        )
    n = np.arange(n_max + 1, dtype=float)
    log_C0 = math.log(C0)
    slope_at_zero = C0 * float(gf.psi_log(log_C0))
    u = np.zeros(n_max + 1)
    above = n > slope_at_zero
    if above.any():
        try:
            u[above] = np.maximum(
                np.asarray(gf.psi_inverse_log(n[above] / C0)) - log_C0, 0.0
            )
        except GrowthError as exc:
            raise LadderError(
                f"growth function too slow for n_max = {n_max}: {exc}"
            ) from exc
    if not np.all(np.isfinite(u)):
        raise LadderError("unbounded conjugate: growth function too slow")
    v_at_u = C0 * np.asarray(gf.psi_tilde_log(log_C0 + u), dtype=float)
    v_star = n * u - v_at_u
    # exact log-concavity: lift the increments to their running maximum
    incr = np.maximum.accumulate(np.diff(v_star)) if n_max else np.zeros(0)
    v_star = np.concatenate(([v_star[0]], v_star[0] + np.cumsum(incr)))
    log_kappas = np.concatenate(([LOG_ZERO], incr))
    return CoefficientLadder(gf=gf, C0=float(C0),
                             log_coeffs=-v_star, log_kappas=log_kappas)


def ladder_for_sequence(gf: GrowthFunction, C0: float, seq: DiscSequence,
                        max_doublings: int = 40) -> CoefficientLadder:
    """Smallest ladder whose last kappa exceeds twice the largest 1/(1-|z_k|)."""
    if len(seq) == 0:
        return build_ladder(gf, C0, 1)
    target_log = math.log(2.0) - math.log1p(-float(seq.moduli.max()))
    n_max = max(8, int(C0 * float(gf.psi_log(math.log(C0) + target_log))) + 8)
    for _ in range(max_doublings):
        ladder = build_ladder(gf, C0, n_max)
        if ladder.log_kappas[-1] > target_log:
            return ladder
        n_max *= 2
    raise LadderError("kappa sequence grows too slowly to cover the node set")


def select_exponents(ladder: CoefficientLadder, seq: DiscSequence) -> np.ndarray:
    """Exponent s_n per node from its kappa bucket, clamped to at least 1.

    Verifies that the maximal term at t = 1/(1 - |z_n|) is attained at the
    bucket index (ties resolved to the larger index).
    """
    if len(seq) == 0:
        return np.zeros(0, dtype=int)
    log_t = -np.log1p(-seq.moduli)
    buckets = np.searchsorted(ladder.log_kappas, log_t, side="right") - 1
    if np.any(buckets >= ladder.n_max):
        raise LadderError(
            "ladder too short for the node set: extend n_max beyond "
            f"{ladder.n_max}"
        )
    idx_grid = np.arange(len(ladder.log_coeffs))
    for t, b in zip(log_t, buckets):
        arr = ladder.log_coeffs + idx_grid * t
        best = len(arr) - 1 - int(np.argmax(arr[::-1]))
        if best != b and arr[best] - arr[b] > 1e-9 * max(1.0, abs(arr[b])):
            raise InterpolationError(
                f"maximal term attained at {best}, bucket gave {b}"
            )
    return np.maximum(buckets, 1).astype(int)


class Interpolant:
    """The assembled interpolation series; immutable, evaluation is pure."""

    def __init__(self, product: CanonicalProduct, targets: TargetData,
                 exponents: np.ndarray, ladder: CoefficientLadder,
                 concentration: Optional[ConditionReport] = None):
        self.product = product
        self.targets = targets
        self.exponents = np.asarray(exponents, dtype=int)
        self.ladder = ladder
        self.concentration = concentration
        with np.errstate(divide="ignore"):
            log_abs = np.log(np.abs(targets.values))
        phases = np.angle(targets.values)
        self._log_b = np.where(
            np.isneginf(log_abs), complex(LOG_ZERO, 0.0), log_abs + 1j * phases
        )
        self._log_P_prime = product.log_P_prime_nodes()

    @property
    def sequence(self) -> DiscSequence:
        return self.product.sequence

    # -- term assembly -------------------------------------------------------

    def _assemble(self, zb: np.ndarray) -> dict:
        cp = self.product
        lam, A, onemA, D = cp._factors(zb)
        logP = lam.sum(axis=0)
        with np.errstate(invalid="ignore"):
            logB = logP[None, :] - lam
        hits = np.isneginf(lam.real)
        if hits.any():
            for nrow, m in zip(*np.where(hits)):
                others = np.delete(lam[:, m], nrow)
                logB[nrow, m] = others.sum()
        zc = np.conj(cp.sequence.values)
        with np.errstate(divide="ignore", invalid="ignore"):
            L = (
                self._log_b[:, None]
                + logB
                + np.log(zc)[:, None]
                - np.log(D)
                + 1j * math.pi
                + _poly_q(A, cp.genus)
                + (self.exponents - 1)[:, None] * np.log(A)
                - self._log_P_prime[:, None]
            )
        return {"lam": lam, "A": A, "onemA": onemA, "D": D,
                "logP": logP, "L": L, "hits": hits}

    def _term_logs(self, zb: np.ndarray) -> np.ndarray:
        return self._assemble(zb)["L"]

    def _derivative_logs(self, zb: np.ndarray, parts: dict) -> np.ndarray:
        """Per-term logs of d/dz term_n via the smooth logarithmic factor.

        term_n'/term_n = S_n + (s_n - 1) conj(z_n)/D + conj(z_n)/D *
        (1 + A + ... + A^s), where S_n is the off-factor log derivative;
        every piece is regular at the nodes.
        """
        cp = self.product
        A, onemA, D, L = parts["A"], parts["onemA"], parts["D"], parts["L"]
        with np.errstate(divide="ignore", invalid="ignore"):
            T = cp._deriv_terms(A, onemA)
            full = T.sum(axis=0)
            S = full[None, :] - T
        hits = parts["hits"]
        if hits.any():
            finite_T = np.where(np.isfinite(T), T, 0.0)
            for nrow, m in zip(*np.where(hits)):
                S[nrow, m] = np.delete(finite_T[:, m], nrow).sum()
        zcD = np.conj(cp.sequence.values)[:, None] / D
        # 1 + A + ... + A^s evaluated as a plain polynomial (exact at A = 1)
        geom = np.ones_like(A)
        Aj = np.ones_like(A)
        for _ in range(cp.genus):
            Aj = Aj * A
            geom = geom + Aj
        dfac = S + (self.exponents - 1)[:, None] * zcD + zcD * geom
        with np.errstate(divide="ignore", invalid="ignore"):
            dL = L + np.log(dfac.astype(complex))
        dead = np.isneginf(L.real)
        if dead.any():
            dL[dead] = complex(LOG_ZERO, 0.0)
        bad = np.isnan(dL)
        if bad.any():
            dL[bad] = complex(LOG_ZERO, 0.0)
        return dL

    # -- evaluation ------------------------------------------------------------

    def eval_many(self, z) -> np.ndarray:
        zb = np.atleast_1d(np.asarray(z, dtype=complex))
        if len(self.sequence) == 0:
            out = np.zeros(len(zb), dtype=complex)
        else:
            lam = logsumexp_complex(self._term_logs(zb), axis=0)
            with np.errstate(over="ignore"):
                out = np.where(np.isneginf(lam.real), 0.0, np.exp(lam))
        return out if np.ndim(z) else complex(out[0])

    def eval(self, z: complex) -> complex:
        return complex(self.eval_many(z))

    def eval_log_many(self, z) -> np.ndarray:
        zb = np.atleast_1d(np.asarray(z, dtype=complex))
        if len(self.sequence) == 0:
            return np.full(len(zb), complex(LOG_ZERO, 0.0))
        return logsumexp_complex(self._term_logs(zb), axis=0)

    def eval_log(self, z: complex) -> LogComplex:
        return LogComplex.from_log(complex(self.eval_log_many(np.asarray([z]))[0]))

    def derivative_many(self, z) -> np.ndarray:
        zb = np.atleast_1d(np.asarray(z, dtype=complex))
        if len(self.sequence) == 0:
            out = np.zeros(len(zb), dtype=complex)
        else:
            parts = self._assemble(zb)
            lam = logsumexp_complex(self._derivative_logs(zb, parts), axis=0)
            with np.errstate(over="ignore"):
                out = np.where(np.isneginf(lam.real), 0.0, np.exp(lam))
        return out if np.ndim(z) else complex(out[0])

    def derivative(self, z: complex) -> complex:
        return complex(self.derivative_many(z))

    def eval_and_derivative_many(self, z) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(values, derivative values, value logs, derivative logs) in one pass."""
        zb = np.atleast_1d(np.asarray(z, dtype=complex))
        if len(self.sequence) == 0:
            zero = np.zeros(len(zb), dtype=complex)
            logs = np.full(len(zb), complex(LOG_ZERO, 0.0))
            return zero, zero.copy(), logs, logs.copy()
        parts = self._assemble(zb)
        lam_v = logsumexp_complex(parts["L"], axis=0)
        lam_d = logsumexp_complex(self._derivative_logs(zb, parts), axis=0)
        with np.errstate(over="ignore"):
            vals = np.where(np.isneginf(lam_v.real), 0.0, np.exp(lam_v))
            dvals = np.where(np.isneginf(lam_d.real), 0.0, np.exp(lam_d))
        return vals, dvals, lam_v, lam_d

    def interpolation_errors(self) -> np.ndarray:
        """Relative identity error |f(z_k) - b_k| / (1 + |b_k|) at every node."""
        if len(self.sequence) == 0:
            return np.zeros(0)
        f_vals = self.eval_many(self.sequence.values)
        b = self.targets.values
        with np.errstate(invalid="ignore"):
            return np.abs(f_vals - b) / (1.0 + np.abs(b))


def build_interpolant(seq: DiscSequence, values: Sequence[complex],
                      gf: GrowthFunction, C0: float = 8.0,
                      product: Optional[CanonicalProduct] = None,
                      ladder: Optional[CoefficientLadder] = None) -> Interpolant:
    """Assemble the full interpolant for the given nodes and targets."""
    if product is None:
        product = CanonicalProduct(seq, gf.genus)
    elif product.sequence is not seq:
        raise InterpolationError("product was built over a different sequence")
    targets = TargetData.from_values(seq, gf, values)
    if ladder is None:
        ladder = ladder_for_sequence(gf, C0, seq)
    exponents = select_exponents(ladder, seq)
    concentration = check_concentration(seq, gf) if len(seq) else None
    return Interpolant(product, targets, exponents, ladder, concentration)


@dataclass(frozen=True)
class GrowthRow:
    r: float
    ln_max_modulus: float
    psi_tilde: float
    ratio: float


@dataclass(frozen=True)
class GrowthTable:
    rows: tuple

    @property
    def max_ratio(self) -> float:
        finite = [row.ratio for row in self.rows if math.isfinite(row.ratio)]
        return max(finite) if finite else float("nan")

    def ratio_at(self, r: float) -> float:
        for row in self.rows:
            if abs(row.r - r) < 1e-12:
                return row.ratio
        raise KeyError(f"radius {r} not in table")


def growth_report(interp: Interpolant, gf: GrowthFunction,
                  r_grid: Sequence[float], theta_count: int = 256) -> GrowthTable:
    """Maximum modulus of the interpolant on circles, against psi_tilde.

    The ratio column is ln M(r, f) / psi_tilde(1/(1-r)); rows where f
    vanishes identically carry -inf and a NaN ratio.
    """
    rows = []
    thetas = 2.0 * math.pi * np.arange(theta_count) / theta_count
    ring = np.exp(1j * thetas)
    for r in r_grid:
        if not 0 < r < 1:
            raise InterpolationError("growth radii must lie in (0, 1)")
        lam = interp.eval_log_many(r * ring)
        ln_max = float(np.max(lam.real))
        denom = float(gf.psi_tilde(1.0 / (1.0 - r)))
        ratio = ln_max / denom if (math.isfinite(ln_max) and denom > 0) else float("nan")
        rows.append(GrowthRow(float(r), ln_max, denom, ratio))
    return GrowthTable(tuple(rows))


@dataclass(frozen=True)
class MaxTermBoundRow:
    t: float
    log_mu: float
    upper_literal: float
    lower_literal: float
    upper_scaled: float
    lower_scaled: float


@dataclass(frozen=True)
class MaxTermBoundReport:
    """Two-sided maximal-term bounds along a t grid.

    The literal bounds are ln mu(t) <= 2 psi_tilde(C0 t) and
    ln mu(t) >= (1/4) psi_tilde(C0 t / 2); they are consistent with the
    ladder target only at C0 = 2.  The scaled bounds carry the extra C0
    factors (2 C0 above, C0/4 below) implied by the target
    C0 psi_tilde(C0 t) and hold for any admissible C0 beyond a threshold.
    ``t0_*`` is the smallest grid value from which the corresponding pair of
    bounds holds for the rest of the grid, or None.
    """

    rows: tuple
    t0_literal: Optional[float]
    t0_scaled: Optional[float]


def max_term_bound_report(ladder: CoefficientLadder,
                          t_grid: Sequence[float],
                          tol: float = 1e-6) -> MaxTermBoundReport:
    gf, C0 = ladder.gf, ladder.C0
    rows = []
    for t in sorted(float(t) for t in t_grid):
        if t < 1.0:
            raise LadderError("t grid must lie in [1, inf)")
        log_mu, _ = ladder.log_max_term(math.log(t))
        base = float(gf.psi_tilde_log(math.log(C0 * t)))
        half = float(gf.psi_tilde_log(math.log(C0 * t / 2.0)))
        rows.append(MaxTermBoundRow(
            t=t, log_mu=log_mu,
            upper_literal=2.0 * base, lower_literal=0.25 * half,
            upper_scaled=2.0 * C0 * base, lower_scaled=(C0 / 4.0) * half,
        ))

    def first_threshold(upper_key: str, lower_key: str) -> Optional[float]:
        ok = [
            row.log_mu <= getattr(row, upper_key) + tol
            and row.log_mu >= getattr(row, lower_key) - tol
            for row in rows
        ]
        for i in range(len(rows)):
            if all(ok[i:]):
                return rows[i].t
        return None

    return MaxTermBoundReport(
        rows=tuple(rows),
        t0_literal=first_threshold("upper_literal", "lower_literal"),
        t0_scaled=first_threshold("upper_scaled", "lower_scaled"),
    )
