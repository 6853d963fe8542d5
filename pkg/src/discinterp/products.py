"""Canonical products with genus factors, evaluated in log space.

The product over a node sequence Z with genus s is
P(z) = prod_n E(A_n(z), s) where E(w, 0) = 1 - w,
E(w, s) = (1 - w) exp(w + w^2/2 + ... + w^s/s) and
A_n(z) = (1 - |z_n|^2) / (1 - conj(z_n) z).

Every product-scale quantity is carried as a complex logarithm
(log modulus plus accumulated phase) so that sequences whose factors reach
exp(-2**(n rho)) survive: naive double-precision products underflow after a
handful of such factors.  The reduced product B_k = P / E(A_k(z), s) and the
node derivative P'(z_k) are cached at construction in the same representation.

Key algebraic identities used throughout (all consequences of the factor
definitions):

* 1 - A_n(z) = conj(z_n) (z_n - z) / (1 - conj(z_n) z), computed in this
  form to stay exact near nodes;
* d/dw log E(w, s) = -w^s / (1 - w);
* E'(w, s) = -w^s exp(w + ... + w^s/s), so E'(1, s) = -exp(H_s) and
  E''(1, s) = -2 s exp(H_s) with H_s the harmonic number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .counting import counting_N, counting_n
from .geometry import DiscSequence
from .growth import GrowthFunction

__all__ = [
    "ProductsError",
    "LogComplex",
    "logsumexp_complex",
    "weierstrass_E",
    "log_weierstrass_E",
    "CanonicalProduct",
    "TsujiReport",
    "FactorSumGrowthReport",
    "factor_sum_growth_check",
    "IndexCancellationReport",
    "index_cancellation_check",
    "PrimeCountingReport",
    "prime_counting_criteria_check",
]

LOG_ZERO = float("-inf")

# Relative distance to a node below which the logarithmic derivative is
# treated as a pole.
POLE_TOL = 1e-12


class ProductsError(ValueError):
    """Invalid evaluation for a canonical product."""


def _norm_phase(phi: float) -> float:
    """Reduce a phase to (-pi, pi]."""
    if not math.isfinite(phi):
        return 0.0
    p = math.remainder(phi, 2.0 * math.pi)
    if p <= -math.pi:
        p += 2.0 * math.pi
    return p


@dataclass(frozen=True)
class LogComplex:
    """Logarithm of a complex number: log modulus and normalized phase.

    ``log_modulus`` is -inf exactly when the represented value is zero.
    """

    log_modulus: float
    phase: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "phase", _norm_phase(self.phase))
        if self.log_modulus == LOG_ZERO:
            object.__setattr__(self, "phase", 0.0)

    @classmethod
    def from_value(cls, w: complex) -> "LogComplex":
        w = complex(w)
        if w == 0:
            return cls(LOG_ZERO, 0.0)
        return cls(math.log(abs(w)), math.atan2(w.imag, w.real))

    @classmethod
    def from_log(cls, lam: complex) -> "LogComplex":
        return cls(float(lam.real), float(lam.imag))

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(LOG_ZERO, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.log_modulus == LOG_ZERO

    @property
    def value(self) -> complex:
        if self.is_zero:
            return 0.0 + 0.0j
        return math.exp(self.log_modulus) * complex(math.cos(self.phase), math.sin(self.phase))

    @property
    def log(self) -> complex:
        return complex(self.log_modulus, self.phase)

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        if self.is_zero or other.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_modulus + other.log_modulus, self.phase + other.phase)

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        if other.is_zero:
            raise ZeroDivisionError("division by an exact log-space zero")
        if self.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_modulus - other.log_modulus, self.phase - other.phase)

    def __pow__(self, n: int) -> "LogComplex":
        if self.is_zero:
            return LogComplex.zero() if n > 0 else LogComplex(0.0, 0.0)
        return LogComplex(n * self.log_modulus, n * self.phase)


def logsumexp_complex(lams: np.ndarray, axis: int = 0) -> np.ndarray:
    """Complex log of a sum of exponentials of complex logs.

    Terms with real part -inf are exact zeros.  The shifted sum is
    accumulated in descending modulus order to limit cancellation noise.
    """
    lams = np.asarray(lams, dtype=complex)
    if lams.ndim == 1:
        lams = lams[:, None]
        squeeze = True
    else:
        squeeze = False
    if axis != 0:
        lams = np.moveaxis(lams, axis, 0)
    M = lams.real.max(axis=0)
    out = np.full(lams.shape[1:], complex(LOG_ZERO, 0.0), dtype=complex)
    finite = np.isfinite(M)
    if np.any(finite):
        shifted = lams[:, finite] - M[None, finite]
        shifted = np.where(np.isneginf(shifted.real), complex(LOG_ZERO, 0.0), shifted)
        order = np.argsort(-shifted.real, axis=0)
        terms = np.exp(np.take_along_axis(shifted, order, axis=0))
        total = terms.sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[finite] = M[finite] + np.where(total == 0, complex(LOG_ZERO, 0.0), np.log(total))
    return out[0] if squeeze else out


def weierstrass_E(w: complex, s: int) -> complex:
    """Genus-s primary factor (1 - w) exp(w + w^2/2 + ... + w^s/s)."""
    if s < 0:
        raise ProductsError("genus must be nonnegative")
    w = complex(w)
    q = 0.0 + 0.0j
    wj = 1.0 + 0.0j
    for j in range(1, s + 1):
        wj *= w
        q += wj / j
    return (1.0 - w) * np.exp(q) if s else (1.0 - w)


def _poly_q(A: np.ndarray, s: int) -> np.ndarray:
    """w + w^2/2 + ... + w^s/s, vectorized."""
    q = np.zeros_like(A)
    wj = np.ones_like(A)
    for j in range(1, s + 1):
        wj = wj * A
        q = q + wj / j
    return q


def log_weierstrass_E(w: complex, s: int) -> LogComplex:
    """Complex log of the primary factor, stable for small and near-1 w."""
    lam = _log_E(np.asarray([w], dtype=complex), None, s)[0]
    return LogComplex.from_log(lam)


def _log_E(A: np.ndarray, one_minus_A: Optional[np.ndarray], s: int) -> np.ndarray:
    """log E(A, s) elementwise as complex log values.

    For |A| <= 1/2 the tail series -sum_{j>s} A^j / j avoids the cancellation
    between log(1 - A) and the genus polynomial; elsewhere the direct form is
    used with 1 - A supplied in its node-stable representation when given.
    """
    A = np.asarray(A, dtype=complex)
    if one_minus_A is None:
        one_minus_A = 1.0 - A
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.log(one_minus_A)
    lam = np.where(np.isnan(lam), complex(LOG_ZERO, 0.0), lam)
    lam = lam + _poly_q(A, s)
    small = np.abs(A) <= 0.5
    if small.any():
        As = np.where(small, A, 0.0)
        wj = As ** (s + 1)
        acc = wj / (s + 1)
        for j in range(s + 2, s + 90):
            wj = wj * As
            term = wj / j
            acc = acc + term
            if float(np.max(np.abs(term))) < 1e-24:
                break
        lam = np.where(small, -acc, lam)
    return lam


class CanonicalProduct:
    """Canonical product over a node sequence with fixed genus.

    Immutable after construction; per-node data (reduced products at their
    own node, node derivatives, logarithmic-derivative remainders) is cached
    once.  Evaluation at distinct points is pure and batched.
    """

    def __init__(self, sequence: DiscSequence, genus: int):
        if genus < 1:
            raise ProductsError("genus must be a positive integer")
        self.sequence = sequence
        self.genus = int(genus)
        self.harmonic = sum(1.0 / j for j in range(1, self.genus + 1))
        zn = sequence.values
        self._zn = zn
        self._zn_conj = np.conj(zn)
        # computed through the same complex product as the factor denominator
        # so that A_k(z_k) is exactly 1 in floating point
        self._oms = (1.0 - self._zn_conj * zn).real
        self.tail_sum = float(np.sum((1.0 - sequence.moduli) ** (self.genus + 1)))

        n = len(sequence)
        if n:
            lam, A, onemA, _ = self._factors(zn)
            lam_d = lam.copy()
            np.fill_diagonal(lam_d, 0.0)
            self._log_B_nodes = lam_d.sum(axis=0)
            with np.errstate(divide="ignore", invalid="ignore"):
                T = self._deriv_terms(A, onemA)
            np.fill_diagonal(T, 0.0)
            self._logderiv_rest_nodes = T.sum(axis=0)
            self._log_P_prime_nodes = (
                self._log_B_nodes
                + self.harmonic
                + np.log(self._zn_conj)
                - np.log(self._oms.astype(complex))
                + 1j * math.pi
            )
        else:
            self._log_B_nodes = np.zeros(0, dtype=complex)
            self._logderiv_rest_nodes = np.zeros(0, dtype=complex)
            self._log_P_prime_nodes = np.zeros(0, dtype=complex)

    # -- batched internals ---------------------------------------------------

    def _factors(self, z: np.ndarray):
        """Per-factor data at a batch of points.

        Returns (lam, A, one_minus_A, D) with shape (n_nodes, n_points);
        lam is the complex log of each primary factor.
        """
        z = np.asarray(z, dtype=complex)
        D = 1.0 - self._zn_conj[:, None] * z[None, :]
        A = self._oms[:, None] / D
        onemA = self._zn_conj[:, None] * (self._zn[:, None] - z[None, :]) / D
        lam = _log_E(A, onemA, self.genus)
        return lam, A, onemA, D

    def _deriv_terms(self, A: np.ndarray, onemA: np.ndarray) -> np.ndarray:
        """Per-factor d/dz log E(A_n(z), s) = -conj(z_n) A^(s+2) / ((1-A)(1-|z_n|^2))."""
        return -self._zn_conj[:, None] * A ** (self.genus + 2) / (onemA * self._oms[:, None])

    def _deriv_prime_terms(self, A: np.ndarray, onemA: np.ndarray) -> np.ndarray:
        """Per-factor second log-derivative contribution d/dz of the above."""
        s = self.genus
        num = (s + 2) - (s + 1) * A
        return -(self._zn_conj[:, None] ** 2) * A ** (s + 3) * num / (
            onemA**2 * self._oms[:, None] ** 2
        )

    def _as_batch(self, z) -> tuple[np.ndarray, bool]:
        arr = np.asarray(z, dtype=complex)
        scalar = arr.ndim == 0
        return np.atleast_1d(arr), scalar

    # -- public evaluation ----------------------------------------------------

    def log_P_many(self, z) -> np.ndarray:
        zb, scalar = self._as_batch(z)
        lam, _, _, _ = self._factors(zb)
        out = lam.sum(axis=0) if len(self.sequence) else np.zeros(len(zb), dtype=complex)
        return out[0] if scalar else out

    def log_P(self, z: complex) -> LogComplex:
        return LogComplex.from_log(complex(self.log_P_many(z)))

    def P(self, z):
        lam = self.log_P_many(z)
        with np.errstate(over="ignore"):
            out = np.exp(lam)
        return complex(out) if np.ndim(out) == 0 else out

    def _check_pole(self, zb: np.ndarray) -> None:
        if len(self.sequence) == 0:
            return
        d = np.abs(zb[None, :] - self._zn[:, None])
        lim = POLE_TOL * (1.0 - self.sequence.moduli)[:, None]
        if np.any(d < lim):
            raise ProductsError("logarithmic derivative evaluated at a node pole")

    def log_deriv_P_many(self, z) -> np.ndarray:
        """P'/P at a batch of points away from the nodes."""
        zb, scalar = self._as_batch(z)
        self._check_pole(zb)
        if len(self.sequence) == 0:
            out = np.zeros(len(zb), dtype=complex)
        else:
            _, A, onemA, _ = self._factors(zb)
            out = self._deriv_terms(A, onemA).sum(axis=0)
        return out[0] if scalar else out

    def log_deriv_P(self, z: complex) -> complex:
        return complex(self.log_deriv_P_many(z))

    def log_deriv_prime_many(self, z) -> np.ndarray:
        """(P'/P)' at a batch of points away from the nodes."""
        zb, scalar = self._as_batch(z)
        self._check_pole(zb)
        if len(self.sequence) == 0:
            out = np.zeros(len(zb), dtype=complex)
        else:
            _, A, onemA, _ = self._factors(zb)
            out = self._deriv_prime_terms(A, onemA).sum(axis=0)
        return out[0] if scalar else out

    # -- node data --------------------------------------------------------------

    def log_B_at_node(self, k: int) -> LogComplex:
        """Reduced product B_k(z_k) = prod_{n != k} E(A_n(z_k), s) as a log."""
        return LogComplex.from_log(complex(self._log_B_nodes[k]))

    def logderiv_rest_at_node(self, k: int) -> complex:
        """B_k'(z_k) / B_k(z_k), the node value of the off-factor log derivative."""
        return complex(self._logderiv_rest_nodes[k])

    def log_P_prime_at_node(self, k: int) -> LogComplex:
        return LogComplex.from_log(complex(self._log_P_prime_nodes[k]))

    def log_P_prime_nodes(self) -> np.ndarray:
        return self._log_P_prime_nodes.copy()

    def P_prime_at_node(self, k: int) -> complex:
        """P'(z_k) = -conj(z_k) B_k(z_k) e^{H_s} / (1 - |z_k|^2), via the cache."""
        return self.log_P_prime_at_node(k).value

    def P_second_at_node(self, k: int) -> complex:
        """P''(z_k) from the factor split P = E(A_k(z), s) B_k(z).

        Differentiating twice and using E(1, s) = 0, E'(1, s) = -e^{H_s},
        E''(1, s) = -2 s e^{H_s} gives
        P''(z_k) = -2 e^{H_s} B_k(z_k) D_k ((s+1) D_k + S_k)
        with D_k = conj(z_k) / (1 - |z_k|^2) and S_k = B_k'(z_k)/B_k(z_k).
        """
        Dk = self._zn_conj[k] / self._oms[k]
        Sk = self._logderiv_rest_nodes[k]
        rest = -2.0 * math.exp(self.harmonic) * Dk * ((self.genus + 1) * Dk + Sk)
        return complex(self.log_B_at_node(k).value * rest)

    def P_second_many(self, z) -> np.ndarray:
        """P'' away from nodes via P ((P'/P)^2 + (P'/P)'); node-exact at nodes."""
        zb, scalar = self._as_batch(z)
        out = np.empty(len(zb), dtype=complex)
        if len(self.sequence):
            d = np.abs(zb[None, :] - self._zn[:, None])
            lim = POLE_TOL * (1.0 - self.sequence.moduli)[:, None]
            near = d < lim
            at_node = near.any(axis=0)
        else:
            at_node = np.zeros(len(zb), dtype=bool)
        away = ~at_node
        if away.any():
            za = zb[away]
            lp = self.log_deriv_P_many(za)
            lp2 = self.log_deriv_prime_many(za)
            with np.errstate(over="ignore"):
                out[away] = np.exp(self.log_P_many(za)) * (lp**2 + lp2)
        for m in np.where(at_node)[0]:
            k = int(np.argmin(np.abs(self._zn - zb[m])))
            out[m] = self.P_second_at_node(k)
        return out[0] if scalar else out

    def P_second(self, z: complex) -> complex:
        return complex(self.P_second_many(z))

    # -- bounds -------------------------------------------------------------------

    def factor_abs_power_sum(self, z) -> np.ndarray:
        """sum_n |A_n(z)|^(s+1), the universal comparison series."""
        zb, scalar = self._as_batch(z)
        if len(self.sequence) == 0:
            out = np.zeros(len(zb))
        else:
            _, A, _, _ = self._factors(zb)
            out = (np.abs(A) ** (self.genus + 1)).sum(axis=0)
        return float(out[0]) if scalar else out

    def tsuji_bound_check(self, z: complex) -> "TsujiReport":
        """log|P(z)| against the universal factor-sum bound 2^(s+2) sum |A_n|^(s+1)."""
        lhs = float(self.log_P_many(z).real)
        rhs = 2.0 ** (self.genus + 2) * self.factor_abs_power_sum(z)
        return TsujiReport(lhs=lhs, rhs=float(rhs), holds=lhs <= rhs + 1e-9)


@dataclass(frozen=True)
class TsujiReport:
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class FactorSumGrowthReport:
    best_constant: float
    witness: complex
    hypothesis_constant: float


def factor_sum_growth_check(cp: CanonicalProduct, gf: GrowthFunction,
                            z_grid: Sequence[complex]) -> FactorSumGrowthReport:
    """Best constant bounding sum |A_n(z)|^(s+1) by psi_tilde(1/(1-|z|)) on a grid.

    The report carries the hypothesis constant of the underlying estimate,
    max over the grid of n_z((1-|z|)/2) / psi(1/(1-|z|)).  Diagnostic only:
    the ratio degenerates as z -> 0 where psi_tilde vanishes, so grids
    should stay in an annulus.
    """
    z = np.asarray(list(z_grid), dtype=complex)
    if z.size == 0:
        raise ProductsError("z grid must be nonempty")
    sums = cp.factor_abs_power_sum(z)
    one_minus = 1.0 - np.abs(z)
    denom = np.asarray(gf.psi_tilde(1.0 / one_minus), dtype=float)
    if np.any(denom <= 0):
        raise ProductsError("grid contains points with vanishing psi_tilde; avoid z = 0")
    ratios = sums / denom
    i = int(np.argmax(ratios))
    counts = np.array([
        counting_n(cp.sequence, complex(zz), 0.5 * om)
        for zz, om in zip(z, one_minus)
    ], dtype=float)
    hyp = counts / np.asarray(gf.psi(1.0 / one_minus), dtype=float)
    return FactorSumGrowthReport(
        best_constant=float(ratios[i]),
        witness=complex(z[i]),
        hypothesis_constant=float(hyp.max()),
    )


@dataclass(frozen=True)
class IndexCancellationReport:
    """Cancellation between ln|B_k(z_k)| and the counting integral at each node."""

    lhs: tuple
    rhs: tuple
    ratios: tuple
    constant: float

    @property
    def finite(self) -> bool:
        return all(math.isfinite(v) for v in self.ratios)


def index_cancellation_check(cp: CanonicalProduct, delta: float = 0.5) -> IndexCancellationReport:
    """|ln|B_k(z_k)| + N_{z_k}(delta (1-|z_k|))| against sum |A_n(z_k)|^(s+1).

    The individually huge terms cancel; the residual stays comparable to the
    factor sum.  The constant is reported, not asserted against a theoretical
    value (none is explicit).
    """
    if not 0 < delta < 1:
        raise ProductsError("delta must lie in (0, 1)")
    seq = cp.sequence
    lhs, rhs, ratios = [], [], []
    for k, p in enumerate(seq):
        lnB = cp.log_B_at_node(k).log_modulus
        N = counting_N(seq, p.value, delta * (1.0 - p.modulus))
        left = abs(lnB + N)
        right = float(cp.factor_abs_power_sum(p.value))
        lhs.append(left)
        rhs.append(right)
        ratios.append(left / right)
    constant = max(ratios) if ratios else 0.0
    return IndexCancellationReport(tuple(lhs), tuple(rhs), tuple(ratios), float(constant))


@dataclass(frozen=True)
class PrimeCountingReport:
    """Joint best constants for the counting and node-derivative conditions."""

    concentration_constant: float
    count_constant: float
    ln_prime_constant: float
    class_R_member: bool

    @property
    def warn_not_class_R(self) -> bool:
        return not self.class_R_member


def prime_counting_criteria_check(cp: CanonicalProduct, gf: GrowthFunction) -> PrimeCountingReport:
    """Best constants for the N-bound, the count bound and |ln((1-|z_k|)|P'(z_k)|)|.

    For growth functions outside the regular class the joint equivalence is
    not claimed; the report flags that case instead of raising.
    """
    seq = cp.sequence
    psi_vals = np.asarray(gf.psi(1.0 / (1.0 - seq.moduli)), dtype=float)
    conc = np.array([
        counting_N(seq, p.value, 0.5 * (1.0 - p.modulus)) for p in seq
    ])
    counts = np.array([
        counting_n(seq, p.value, 0.5 * (1.0 - p.modulus)) for p in seq
    ], dtype=float)
    ln_prime = np.array([
        abs(math.log(1.0 - p.modulus) + cp.log_P_prime_at_node(k).log_modulus)
        for k, p in enumerate(seq)
    ])
    def best(v: np.ndarray) -> float:
        return float((v / psi_vals).max()) if v.size else 0.0
    return PrimeCountingReport(
        concentration_constant=best(conc),
        count_constant=best(counts),
        ln_prime_constant=best(ln_prime),
        class_R_member=gf.family == "power",
    )
