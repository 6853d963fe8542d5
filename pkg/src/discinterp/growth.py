"""Growth-function algebra for the moderate-growth classes.

Three parametric families are built in:

* ``power(rho)``          : psi(x) = x**rho, rho > 0
* ``log_power(p)``        : psi(x) = ln(x)**p, p >= 0
* ``exp_log_power(beta)`` : psi(x) = exp(ln(x)**beta), 0 < beta < 1

Each carries its logarithmic integral
psi_tilde(x) = integral_1^x psi(t)/t dt (closed form for the first two
families, adaptive quadrature for the third), the analytic growth order in
the doubling sense, and the genus used by canonical products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.integrate import quad

__all__ = [
    "GrowthError",
    "GrowthFunction",
    "PolyaEstimate",
    "ClassRReport",
    "polya_order_estimate",
    "class_R_check",
]

FAMILIES = ("power", "log_power", "exp_log_power")

ArrayLike = Union[float, np.ndarray]


class GrowthError(ValueError):
    """Invalid growth-function parameter or evaluation outside [1, inf)."""


def _check_domain(x: np.ndarray) -> None:
    if np.any(x < 1.0 - 1e-12):
        raise GrowthError(f"growth functions are defined on [1, inf), got {x.min()}")


@dataclass(frozen=True)
class GrowthFunction:
    """A member of one of the built-in growth families."""

    family: str
    param: float

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise GrowthError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        p = float(self.param)
        if self.family == "power" and not p > 0:
            raise GrowthError("power family needs rho > 0")
        if self.family == "log_power" and not p >= 0:
            raise GrowthError("log_power family needs p >= 0")
        if self.family == "exp_log_power" and not 0 < p < 1:
            raise GrowthError("exp_log_power family needs beta in (0, 1)")
        object.__setattr__(self, "param", p)

    # -- constructors ------------------------------------------------------

    @classmethod
    def power(cls, rho: float) -> "GrowthFunction":
        return cls("power", rho)

    @classmethod
    def log_power(cls, p: float) -> "GrowthFunction":
        return cls("log_power", p)

    @classmethod
    def exp_log_power(cls, beta: float) -> "GrowthFunction":
        return cls("exp_log_power", beta)

    # -- derived data ------------------------------------------------------

    @property
    def polya_order(self) -> float:
        """Analytic doubling order: rho for powers, 0 for the slow families."""
        return self.param if self.family == "power" else 0.0

    @property
    def genus(self) -> int:
        """Genus floor(order) + 1 used by canonical products."""
        return int(math.floor(self.polya_order)) + 1

    # -- evaluation --------------------------------------------------------

    def psi(self, x: ArrayLike) -> ArrayLike:
        x_arr = np.asarray(x, dtype=float)
        _check_domain(x_arr)
        return self.psi_log(np.log(np.maximum(x_arr, 1.0)))

    def psi_log(self, log_x: ArrayLike) -> ArrayLike:
        """psi evaluated at x = exp(log_x); avoids forming huge x."""
        u = np.asarray(log_x, dtype=float)
        if self.family == "power":
            out = np.exp(self.param * u)
        elif self.family == "log_power":
            out = u ** self.param if self.param > 0 else np.ones_like(u)
        else:
            out = np.exp(u ** self.param)
        return out if out.ndim else float(out)

    def psi_tilde(self, x: ArrayLike) -> ArrayLike:
        x_arr = np.asarray(x, dtype=float)
        _check_domain(x_arr)
        return self.psi_tilde_log(np.log(np.maximum(x_arr, 1.0)))

    def psi_tilde_log(self, log_x: ArrayLike) -> ArrayLike:
        """Logarithmic integral of psi at x = exp(log_x)."""
        u = np.asarray(log_x, dtype=float)
        if self.family == "power":
            out = np.expm1(self.param * u) / self.param
        elif self.family == "log_power":
            out = u ** (self.param + 1) / (self.param + 1)
        else:
            beta = self.param
            flat = np.atleast_1d(u).astype(float)
            vals = np.empty_like(flat)
            for i, ui in enumerate(flat):
                # substituting t = e^v turns the integrand into exp(v**beta)
                vals[i] = quad(lambda v: math.exp(v**beta), 0.0, ui,
                               epsabs=1e-12, epsrel=1e-10, limit=200)[0]
            out = vals.reshape(u.shape)
        return out if out.ndim else float(out)

    def psi_inverse_log(self, y: ArrayLike) -> ArrayLike:
        """ln of the inverse function: solves psi(x) = y for ln x."""
        y_arr = np.asarray(y, dtype=float)
        if np.any(y_arr <= 0):
            raise GrowthError("psi inverse needs y > 0")
        if self.family == "power":
            out = np.log(y_arr) / self.param
        elif self.family == "log_power":
            if self.param == 0:
                raise GrowthError("log_power with p = 0 is constant, not invertible")
            out = y_arr ** (1.0 / self.param)
        else:
            if np.any(y_arr < 1.0):
                raise GrowthError("exp_log_power has range [1, inf)")
            out = np.log(y_arr) ** (1.0 / self.param)
        return out if out.ndim else float(out)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {"family": self.family, "param": self.param}

    @classmethod
    def from_dict(cls, data: dict) -> "GrowthFunction":
        try:
            return cls(str(data["family"]), float(data["param"]))
        except KeyError as exc:
            raise GrowthError(f"growth spec missing field {exc}") from exc


@dataclass(frozen=True)
class PolyaEstimate:
    """Analytic doubling order together with a dyadic-grid cross-check."""

    analytic: float
    dyadic_sup: float


def polya_order_estimate(gf: GrowthFunction, j_lo: int = 30, j_hi: int = 60) -> PolyaEstimate:
    """Doubling order of psi with a numerical estimate on a dyadic tail grid.

    The estimate is sup over x = 2**j, j in [j_lo, j_hi], of
    log2(psi(2x) / psi(x)); the limit property lives at large x, hence the
    tail grid.
    """
    js = np.arange(j_lo, j_hi + 1, dtype=float)
    log_x = js * math.log(2.0)
    ratios = np.log2(
        np.asarray(gf.psi_log(log_x + math.log(2.0)))
        / np.asarray(gf.psi_log(log_x))
    )
    return PolyaEstimate(analytic=gf.polya_order, dyadic_sup=float(ratios.max()))


@dataclass(frozen=True)
class ClassRReport:
    """Boundedness diagnostics for psi_tilde / psi."""

    member: bool
    ratio_sup: float
    x_at_sup: float


def class_R_check(gf: GrowthFunction, x_max: float, grid_size: int = 512) -> ClassRReport:
    """Check whether psi_tilde = O(psi), reporting the ratio sup on [1, x_max].

    Membership is decided from the closed form of each family: powers are
    members (the ratio tends to 1/rho); log powers and exp-log powers are
    not (the ratio is unbounded).  The grid sup is a finite-window
    diagnostic, not the deciding quantity.
    """
    if not x_max >= 2:
        raise GrowthError("x_max must be at least 2")
    grid = np.geomspace(1.0, float(x_max), grid_size)
    psi_vals = np.asarray(gf.psi(grid), dtype=float)
    tilde_vals = np.asarray(gf.psi_tilde(grid), dtype=float)
    mask = psi_vals > 0
    ratios = tilde_vals[mask] / psi_vals[mask]
    if ratios.size == 0:
        return ClassRReport(member=gf.family == "power", ratio_sup=0.0, x_at_sup=1.0)
    i = int(np.argmax(ratios))
    return ClassRReport(
        member=gf.family == "power",
        ratio_sup=float(ratios[i]),
        x_at_sup=float(grid[mask][i]),
    )
