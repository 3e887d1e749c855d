"""Charging-function pairs (g, h) and the competitive-ratio lower bounds.

Three kinds are provided: the exponential bipartite pair (h identically 0),
the two-segment piecewise-linear general pair, and an optional capped
exponential variant.  All integrals of g and h are evaluated in closed form
per piece; grid minimization only ever touches the outer theta/tau sweeps.

Values "at 1-minus" are requested through the JUST_BELOW side marker, never
through an epsilon below 1: both piecewise functions jump at 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .engine import Side
from .errors import ChargingInvalid, OutOfDomain

E_INV = 1.0 / math.e


class ChargingKind(Enum):
    EXPONENTIAL_BIPARTITE = "exp"
    PIECEWISE_GENERAL = "piecewise"
    CAPPED_EXPONENTIAL = "capped"


@dataclass(frozen=True)
class PiecewiseConstants:
    """Breakpoint and slopes of the two-segment linear (g, h) pair."""

    t: float
    kg1: float
    kg2: float
    b: float
    kh1: float
    kh2: float


B2_CONSTANTS = PiecewiseConstants(
    t=0.3, kg1=0.21, kg2=0.1, b=0.46, kh1=0.26, kh2=0.17
)

CAP_OFFSET = 0.0128


@dataclass(frozen=True)
class BoundGrid:
    step: float = 1e-3

    def __post_init__(self):
        if self.step <= 0:
            raise ChargingInvalid(f"grid step must be positive, got {self.step}")

    def axis(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, round(1.0 / self.step) + 1)


def _check_x(x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise OutOfDomain(f"argument {x} outside [0, 1]")


@dataclass(frozen=True)
class ChargingFunction:
    kind: ChargingKind
    constants: Optional[PiecewiseConstants] = None

    def __post_init__(self):
        if self.kind is ChargingKind.PIECEWISE_GENERAL and self.constants is None:
            object.__setattr__(self, "constants", B2_CONSTANTS)

    # -- pointwise evaluation ------------------------------------------------

    def g(self, x: float, side: Side = Side.AT) -> float:
        _check_x(x)
        if x == 1.0 and side is Side.AT:
            return 1.0
        if self.kind is ChargingKind.EXPONENTIAL_BIPARTITE:
            return math.exp(x - 1.0)
        if self.kind is ChargingKind.CAPPED_EXPONENTIAL:
            return min(1.0, math.exp(x - 1.0) + CAP_OFFSET)
        c = self.constants
        if x <= c.t:
            return c.kg1 * x + c.b
        return c.kg2 * (x - c.t) + c.kg1 * c.t + c.b

    def h(self, x: float, side: Side = Side.AT) -> float:
        _check_x(x)
        if self.kind is not ChargingKind.PIECEWISE_GENERAL:
            return 0.0
        if x == 1.0 and side is Side.AT:
            return 0.0
        c = self.constants
        if x <= c.t:
            return c.kh1 * x
        return c.kh2 * (x - c.t) + c.kh1 * c.t

    def phi(self, x: float, side: Side = Side.AT) -> float:
        """Net retained gain 1 - g - h of an active endpoint."""
        return 1.0 - self.g(x, side) - self.h(x, side)

    # -- closed-form integrals ----------------------------------------------

    def g_integral(self, theta: float) -> float:
        """Exact integral of g over [0, theta] (the jump at 1 has measure 0)."""
        _check_x(theta)
        if self.kind is ChargingKind.EXPONENTIAL_BIPARTITE:
            return math.exp(theta - 1.0) - E_INV
        if self.kind is ChargingKind.CAPPED_EXPONENTIAL:
            xcap = 1.0 + math.log1p(-CAP_OFFSET)
            if theta <= xcap:
                return math.exp(theta - 1.0) - E_INV + CAP_OFFSET * theta
            at_cap = math.exp(xcap - 1.0) - E_INV + CAP_OFFSET * xcap
            return at_cap + (theta - xcap)
        c = self.constants
        if theta <= c.t:
            return 0.5 * c.kg1 * theta**2 + c.b * theta
        head = 0.5 * c.kg1 * c.t**2 + c.b * c.t
        d = theta - c.t
        return head + 0.5 * c.kg2 * d**2 + (c.kg1 * c.t + c.b) * d

    def h_integral(self, theta: float) -> float:
        _check_x(theta)
        if self.kind is not ChargingKind.PIECEWISE_GENERAL:
            return 0.0
        c = self.constants
        if theta <= c.t:
            return 0.5 * c.kh1 * theta**2
        d = theta - c.t
        return 0.5 * c.kh1 * c.t**2 + 0.5 * c.kh2 * d**2 + c.kh1 * c.t * d

    # -- vectorized limit-valued grids --------------------------------------

    def g_limit_grid(self, xs: np.ndarray) -> np.ndarray:
        """g on a grid, with the 1-minus limit substituted at x == 1."""
        if self.kind is ChargingKind.EXPONENTIAL_BIPARTITE:
            return np.exp(xs - 1.0)
        if self.kind is ChargingKind.CAPPED_EXPONENTIAL:
            return np.minimum(1.0, np.exp(xs - 1.0) + CAP_OFFSET)
        c = self.constants
        return np.where(
            xs <= c.t,
            c.kg1 * xs + c.b,
            c.kg2 * (xs - c.t) + c.kg1 * c.t + c.b,
        )

    def h_limit_grid(self, xs: np.ndarray) -> np.ndarray:
        if self.kind is not ChargingKind.PIECEWISE_GENERAL:
            return np.zeros_like(xs)
        c = self.constants
        return np.where(xs <= c.t, c.kh1 * xs, c.kh2 * (xs - c.t) + c.kh1 * c.t)

    def g_integral_grid(self, xs: np.ndarray) -> np.ndarray:
        if self.kind is ChargingKind.PIECEWISE_GENERAL:
            c = self.constants
            head = 0.5 * c.kg1 * c.t**2 + c.b * c.t
            d = xs - c.t
            return np.where(
                xs <= c.t,
                0.5 * c.kg1 * xs**2 + c.b * xs,
                head + 0.5 * c.kg2 * d**2 + (c.kg1 * c.t + c.b) * d,
            )
        return np.array([self.g_integral(float(x)) for x in xs])


EXPONENTIAL = ChargingFunction(ChargingKind.EXPONENTIAL_BIPARTITE)
PIECEWISE = ChargingFunction(ChargingKind.PIECEWISE_GENERAL, B2_CONSTANTS)
CAPPED = ChargingFunction(ChargingKind.CAPPED_EXPONENTIAL)

_BY_NAME = {
    "exp": EXPONENTIAL,
    "piecewise": PIECEWISE,
    "capped": CAPPED,
}


def by_name(name: str) -> ChargingFunction:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ChargingInvalid(f"unknown charging kind {name!r}") from None


def eval(
    charging: ChargingFunction, which: str, x: float, side: Side = Side.AT
) -> float:
    """Evaluate g, h or phi at x, honoring the side marker at the jump."""
    fn = {"g": charging.g, "h": charging.h, "phi": charging.phi}.get(which)
    if fn is None:
        raise OutOfDomain(f"unknown function {which!r}")
    return fn(x, side)


@dataclass(frozen=True)
class PropertyReport:
    g_nondecreasing: bool
    g_one_is_one: bool
    h_nondecreasing: bool
    h_one_is_zero: bool
    h_over_y_nonincreasing: bool
    phi_nonnegative: bool

    @property
    def passed(self) -> bool:
        return all(
            (
                self.g_nondecreasing,
                self.g_one_is_one,
                self.h_nondecreasing,
                self.h_one_is_zero,
                self.h_over_y_nonincreasing,
                self.phi_nonnegative,
            )
        )

    def as_dict(self) -> dict:
        return {
            "g_nondecreasing": self.g_nondecreasing,
            "g_one_is_one": self.g_one_is_one,
            "h_nondecreasing": self.h_nondecreasing,
            "h_one_is_zero": self.h_one_is_zero,
            "h_over_y_nonincreasing": self.h_over_y_nonincreasing,
            "phi_nonnegative": self.phi_nonnegative,
            "passed": self.passed,
        }


def check_properties(
    charging: ChargingFunction, grid: BoundGrid = BoundGrid()
) -> PropertyReport:
    """Verify the required (g, h) properties on a dense grid plus breakpoints.

    Piecewise kinds additionally get exact slope checks.
    """
    xs = grid.axis()
    if charging.constants is not None:
        xs = np.unique(np.concatenate([xs, [charging.constants.t]]))
    tol = 1e-12
    gv = charging.g_limit_grid(xs)
    hv = charging.h_limit_grid(xs)
    g_nondec = bool(
        np.all(np.diff(gv) >= -tol) and charging.g(1.0) >= gv[-1] - tol
    )
    h_nondec = bool(np.all(np.diff(hv) >= -tol))
    pos = xs > 0
    ratio = hv[pos] / xs[pos]
    h_over_y = bool(np.all(np.diff(ratio) <= tol))
    phi_nonneg = bool(np.all(1.0 - gv - hv >= -tol))
    if charging.kind is ChargingKind.PIECEWISE_GENERAL:
        c = charging.constants
        g_nondec = g_nondec and c.kg1 >= 0 and c.kg2 >= 0
        h_nondec = h_nondec and c.kh1 >= 0 and c.kh2 >= 0
        h_over_y = h_over_y and c.kh2 <= c.kh1
    return PropertyReport(
        g_nondecreasing=g_nondec,
        g_one_is_one=abs(charging.g(1.0) - 1.0) < tol,
        h_nondecreasing=h_nondec,
        h_one_is_zero=abs(charging.h(1.0)) < tol,
        h_over_y_nonincreasing=h_over_y,
        phi_nonnegative=phi_nonneg,
    )


# -- bipartite bound ---------------------------------------------------------


def _f_bipartite_matrix(
    y: np.ndarray, charging: ChargingFunction, grid: BoundGrid
) -> np.ndarray:
    thetas = grid.axis()
    ig = charging.g_integral_grid(thetas)
    g_theta = charging.g_limit_grid(thetas)
    gy = charging.g_limit_grid(y)
    vals = ig[None, :] + np.minimum(1.0 - g_theta[None, :], gy[:, None])
    # theta = 1 at the jump: 1 - g(1) = 0 is also a legal candidate
    vals_at_one = charging.g_integral(1.0) + np.minimum(0.0, gy)
    return np.minimum(vals.min(axis=1), vals_at_one)


def f_bipartite(
    y_u: float, charging: ChargingFunction, grid: BoundGrid = BoundGrid()
) -> float:
    """Per-edge expected-gain lower bound for the bipartite analysis."""
    _check_x(y_u)
    return float(_f_bipartite_matrix(np.array([y_u]), charging, grid)[0])


def ratio_bipartite(
    charging: ChargingFunction, grid: BoundGrid = BoundGrid()
) -> float:
    """Competitive-ratio lower bound: integral of the bipartite f over ranks."""
    ys = grid.axis()
    fy = _f_bipartite_matrix(ys, charging, grid)
    return float(np.trapezoid(fy, ys))


# -- general bound -----------------------------------------------------------


def psi1(
    y_u: float,
    theta: float,
    tau: float,
    charging: ChargingFunction,
    *,
    theta_side: Side = Side.AT,
    tau_side: Side = Side.AT,
) -> float:
    """Two-threshold bound term (compensation active between theta and tau)."""
    _check_x(y_u)
    if not (0.0 <= theta <= tau <= 1.0):
        raise OutOfDomain(f"need 0 <= theta <= tau <= 1, got {theta}, {tau}")
    if tau == 1.0 and tau_side is Side.AT:
        raise OutOfDomain("tau must stay below 1; pass side JUST_BELOW for 1-minus")
    gy = charging.g(y_u)
    return (
        charging.g_integral(theta)
        + (tau - theta) * charging.h(theta, theta_side)
        + (1.0 - theta) * min(gy, charging.phi(theta, theta_side))
        + theta * min(gy, charging.phi(tau, tau_side))
    )


def psi2(
    y_u: float,
    theta: float,
    charging: ChargingFunction,
    *,
    theta_side: Side = Side.AT,
) -> float:
    """Single-threshold bound term (no compensation window above theta)."""
    _check_x(y_u)
    gy = charging.g(y_u)
    return (
        charging.g_integral(theta)
        + (1.0 - theta) * charging.h(theta, theta_side)
        + (1.0 - theta) * min(gy, 1.0 - charging.g(theta, theta_side))
    )


def _f_general_matrix(
    y: np.ndarray,
    charging: ChargingFunction,
    grid: BoundGrid,
    *,
    simplified: bool = False,
) -> np.ndarray:
    """Vectorized f(y_u) via the (theta, tau) decomposition.

    The tau minimization splits exactly into two candidates: tau = theta
    (constant compensation term plus g(y_u) share) and a suffix minimum of
    tau*h(theta) + theta*phi(tau) over the tau grid.  The full form adds the
    clamp (1 - theta)*phi(1-minus) on the compensation window; with the
    stock piecewise constants the clamp is never active and both forms agree.
    """
    xs = grid.axis()  # grid point at 1 means the 1-minus limit throughout
    n = len(xs)
    g_lim = charging.g_limit_grid(xs)
    h_lim = charging.h_limit_grid(xs)
    phi_lim = 1.0 - g_lim - h_lim
    ig = charging.g_integral_grid(xs)
    phi_one = float(phi_lim[-1])

    qsuf = np.empty(n)
    for i in range(n):
        q = h_lim[i] * xs[i:] + xs[i] * phi_lim[i:]
        qsuf[i] = q.min()

    gy = charging.g_limit_grid(y)
    gy_col = gy[:, None]

    # first branch: compensation window [theta, tau)
    inner_a = (xs * h_lim)[None, :] + xs[None, :] * gy_col  # tau = theta
    inner = np.minimum(inner_a, qsuf[None, :])
    if not simplified:
        clamp = ((1.0 - xs) * phi_one)[None, :] + xs[None, :] * np.minimum(
            gy_col, phi_one
        )
        inner = np.minimum(inner, clamp)
    branch1 = (
        ig[None, :]
        + (1.0 - xs)[None, :] * np.minimum(gy_col, phi_lim[None, :])
        + inner
        - (xs * h_lim)[None, :]
    )

    # second branch: no compensation window (tau_m = 1)
    comp2 = h_lim if simplified else np.minimum(phi_one, h_lim)
    branch2 = (
        ig[None, :]
        + ((1.0 - xs) * comp2)[None, :]
        + (1.0 - xs)[None, :] * np.minimum(gy_col, 1.0 - g_lim[None, :])
    )

    return np.minimum(branch1, branch2).min(axis=1)


def f_general(
    y_u: float,
    charging: ChargingFunction,
    grid: BoundGrid = BoundGrid(),
    *,
    simplified: bool = False,
) -> float:
    """Per-edge expected-gain lower bound for the general-graph analysis."""
    _check_x(y_u)
    if not check_properties(charging).passed:
        raise ChargingInvalid("charging function fails its required properties")
    return float(
        _f_general_matrix(np.array([y_u]), charging, grid, simplified=simplified)[0]
    )


def ratio_general(
    charging: ChargingFunction,
    grid: BoundGrid = BoundGrid(),
    *,
    simplified: bool = False,
) -> float:
    """Competitive-ratio lower bound: integral of the general f over ranks."""
    if not check_properties(charging).passed:
        raise ChargingInvalid("charging function fails its required properties")
    ys = grid.axis()
    fy = _f_general_matrix(ys, charging, grid, simplified=simplified)
    return float(np.trapezoid(fy, ys))


def _refine_scalar(fn, lo: float, hi: float, coarse_step: float) -> tuple[float, float]:
    """Coarse grid sweep on [lo, hi] followed by a local 1e-5 sweep."""
    xs = np.clip(np.arange(lo, hi + coarse_step / 2, coarse_step), lo, hi)
    vals = np.array([fn(float(x)) for x in xs])
    i = int(vals.argmin())
    best_x, best_v = float(xs[i]), float(vals[i])
    a = max(lo, best_x - coarse_step)
    b = min(hi, best_x + coarse_step)
    fine = np.clip(np.arange(a, b + 5e-6, 1e-5), lo, hi)
    for x in fine:
        v = fn(float(x))
        if v < best_v:
            best_x, best_v = float(x), v
    return best_v, best_x


def minimize_psi2(
    y_u: float, charging: ChargingFunction, coarse_step: float = 1e-3
) -> tuple[float, float]:
    """Minimum of psi2 over theta (1 treated as the 1-minus limit)."""
    return _refine_scalar(
        lambda th: psi2(y_u, th, charging, theta_side=Side.JUST_BELOW),
        0.0,
        1.0,
        coarse_step,
    )


def minimize_psi1(
    y_u: float, charging: ChargingFunction, coarse_step: float = 1e-3
) -> tuple[float, float]:
    """Minimum of psi1 over theta with tau at its optimum; returns (value, theta).

    For charging pairs satisfying check_properties the inner tau minimum is
    explored on the same grid (tau = 1 meaning the 1-minus limit).
    """

    def over_tau(th: float) -> float:
        def fn(tau: float) -> float:
            return psi1(
                y_u,
                th,
                tau,
                charging,
                theta_side=Side.JUST_BELOW,
                tau_side=Side.JUST_BELOW,
            )

        val, _ = _refine_scalar(fn, th, 1.0, coarse_step)
        return val

    xs = np.arange(0.0, 1.0 + coarse_step / 2, coarse_step)
    # coarse theta sweep with cheap tau resolution, then refine theta locally
    vals = np.array(
        [
            min(
                psi1(
                    y_u,
                    float(th),
                    float(tau),
                    charging,
                    theta_side=Side.JUST_BELOW,
                    tau_side=Side.JUST_BELOW,
                )
                for tau in (th, (th + 1.0) / 2.0, 1.0)
            )
            for th in xs
        ]
    )
    i = int(vals.argmin())
    a = max(0.0, float(xs[i]) - coarse_step)
    b = min(1.0, float(xs[i]) + coarse_step)
    best_v, best_th = None, None
    for th in np.arange(a, b + 5e-6, 1e-5):
        v = over_tau(float(th))
        if best_v is None or v < best_v:
            best_v, best_th = v, float(th)
    return best_v, best_th


def charging_to_json(charging: ChargingFunction) -> dict:
    out: dict = {"kind": charging.kind.value}
    if charging.kind is ChargingKind.PIECEWISE_GENERAL:
        c = charging.constants
        out["constants"] = {
            "t": c.t,
            "kg1": c.kg1,
            "kg2": c.kg2,
            "b": c.b,
            "kh1": c.kh1,
            "kh2": c.kh2,
        }
    return out


def charging_from_json(data: dict) -> ChargingFunction:
    kind = ChargingKind(data["kind"])
    if kind is ChargingKind.PIECEWISE_GENERAL and "constants" in data:
        c = data["constants"]
        return ChargingFunction(
            kind,
            PiecewiseConstants(
                t=c["t"],
                kg1=c["kg1"],
                kg2=c["kg2"],
                b=c["b"],
                kh1=c["kh1"],
                kh2=c["kh2"],
            ),
        )
    return ChargingFunction(kind)
