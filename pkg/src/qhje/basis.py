"""Independent real solution pairs of the stationary Schrodinger equation.

The solver produces two real solutions (theta1, theta2) on a uniform grid
with one of two normalization conventions fixed at ``x_min``:

* ``SLOPE_ONE``:   theta1(x_min) = 0, theta1'(x_min) = 1,
                   theta2(x_min) = 1, theta2'(x_min) = 0,
  so the Wronskian theta1*theta2' - theta1'*theta2 equals -1 exactly.
* ``FLOYD_WAVE``:  like SLOPE_ONE but theta1'(x_min) = sqrt(2 m |E|)/hbar,
  so that on the free potential with x_min = 0 and E > 0 the pair is
  exactly (sin kx, cos kx).  This is the basis the closed-form Jacobi
  time law is written in.

Free and linear potentials are solved in closed form (trig/hyperbolic and
Airy functions); everything else uses the Numerov three-point recursion,
which is fourth order in the spacing for this equation class.  Derivative
fields are stored alongside the values so every downstream consumer
differentiates the same data.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.special import airy

from .errors import NonFiniteField
from .potentials import FreePotential, Grid, LinearPotential, Potential, Units

__all__ = [
    "Convention",
    "BasisPair",
    "solve_basis",
    "wronskian",
    "schrodinger_residual",
    "recombine_second",
]


class Convention(str, Enum):
    SLOPE_ONE = "slope_one"
    FLOYD_WAVE = "floyd_wave"


@dataclass(frozen=True)
class BasisPair:
    """Two independent real Schrodinger solutions with first derivatives."""

    grid: Grid
    energy: float
    theta1: np.ndarray
    theta1_prime: np.ndarray
    theta2: np.ndarray
    theta2_prime: np.ndarray
    convention: Convention
    units: Units
    solver: str = "analytic"
    recombined: bool = False

    def __post_init__(self):
        for name in ("theta1", "theta1_prime", "theta2", "theta2_prime"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != self.grid.x.shape:
                raise ValueError(f"{name} shape does not match the grid")
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not all(
            np.all(np.isfinite(f))
            for f in (self.theta1, self.theta1_prime, self.theta2, self.theta2_prime)
        ):
            raise NonFiniteField(
                "basis fields are not finite; shrink the domain away from the "
                "deep forbidden region"
            )


class WronskianReport(NamedTuple):
    value: float
    max_relative_drift: float


class SchrodingerResidual(NamedTuple):
    theta1_max: float
    theta2_max: float
    scale: float


def _derivative_4th(y: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order first derivative on a uniform grid (5-point stencils)."""
    n = y.size
    if n < 5:
        raise ValueError("need at least 5 points")
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * h)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
    return d


def second_derivative_4th(y: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central second derivative; valid on the interior [2:-2]."""
    d2 = np.full_like(y, np.nan)
    d2[2:-2] = (
        -y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]
    ) / (12 * h * h)
    return d2


def _numerov(xs, w, y0, yp0, w1_0, w2_0):
    """Integrate y'' = w(x) y rightward from (y0, yp0).

    ``w1_0`` and ``w2_0`` are dw/dx and d2w/dx2 at x_min, used for the
    fifth-order Taylor start that preserves the global fourth order.
    """
    h = xs[1] - xs[0]
    y = np.empty_like(xs)
    y[0] = y0
    w0 = w[0]
    y[1] = (
        y0
        + h * yp0
        + 0.5 * h * h * w0 * y0
        + h**3 / 6.0 * (w1_0 * y0 + w0 * yp0)
        + h**4 / 24.0 * (w2_0 * y0 + 2.0 * w1_0 * yp0 + w0 * w0 * y0)
    )
    c = h * h / 12.0
    one_minus = 1.0 - c * w
    two_plus = 2.0 * (1.0 + 5.0 * c * w)
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, xs.size - 1):
            y[i + 1] = (two_plus[i] * y[i] - one_minus[i - 1] * y[i - 1]) / one_minus[i + 1]
    return y


def _analytic_free(grid, energy, units, slope1):
    dx = grid.x - grid.x_min
    k2 = 2.0 * units.mass * energy / units.hbar**2
    if k2 > 1e-300:
        k = np.sqrt(k2)
        u1, u1p = np.sin(k * dx) / k, np.cos(k * dx)
        u2, u2p = np.cos(k * dx), -k * np.sin(k * dx)
    elif k2 < -1e-300:
        kap = np.sqrt(-k2)
        u1, u1p = np.sinh(kap * dx) / kap, np.cosh(kap * dx)
        u2, u2p = np.cosh(kap * dx), kap * np.sinh(kap * dx)
    else:
        u1, u1p = dx.copy(), np.ones_like(dx)
        u2, u2p = np.ones_like(dx), np.zeros_like(dx)
    return slope1 * u1, slope1 * u1p, u2, u2p


def _analytic_linear(grid, energy, units, slope1, g):
    # Airy equation after z = c (x - E/g) with c**3 = 2 m g / hbar**2.
    c = np.sign(g) * abs(2.0 * units.mass * g / units.hbar**2) ** (1.0 / 3.0)
    z = c * (grid.x - energy / g)
    with np.errstate(over="ignore"):
        ai, aip, bi, bip = airy(z)
    # Recombine (Ai, Bi) to the convention's initial data at x_min.
    m = np.array([[ai[0], bi[0]], [c * aip[0], c * bip[0]]])
    c1 = np.linalg.solve(m, np.array([0.0, slope1]))
    c2 = np.linalg.solve(m, np.array([1.0, 0.0]))
    u1 = c1[0] * ai + c1[1] * bi
    u1p = c * (c1[0] * aip + c1[1] * bip)
    u2 = c2[0] * ai + c2[1] * bi
    u2p = c * (c2[0] * aip + c2[1] * bip)
    return u1, u1p, u2, u2p


def solve_basis(
    potential: Potential,
    energy: float,
    grid: Grid,
    units: Units | None = None,
    convention: Convention = Convention.SLOPE_ONE,
    method: str = "auto",
) -> BasisPair:
    """Solve for the (theta1, theta2) pair at fixed energy.

    ``method`` is "auto" (closed form where available, Numerov otherwise),
    "analytic", or "numerov".  Raises :class:`NonFiniteField` when the
    recursion overflows in a deep forbidden region.
    """
    units = units or Units()
    units.require_quantum()
    if not np.isfinite(energy):
        raise ValueError("energy must be finite")
    convention = Convention(convention)

    if convention is Convention.FLOYD_WAVE:
        slope1 = np.sqrt(2.0 * units.mass * abs(energy)) / units.hbar
        if slope1 == 0.0:
            raise ValueError("floyd_wave convention is degenerate at E = 0")
    else:
        slope1 = 1.0

    analytic_ok = isinstance(potential, (FreePotential, LinearPotential))
    if method == "auto":
        method = "analytic" if analytic_ok else "numerov"
    if method == "analytic" and not analytic_ok:
        raise ValueError(f"no closed-form basis for potential kind {potential.kind!r}")
    if method not in ("analytic", "numerov"):
        raise ValueError(f"unknown method {method!r}")

    if method == "analytic":
        if isinstance(potential, FreePotential):
            t1, t1p, t2, t2p = _analytic_free(grid, energy, units, slope1)
        else:
            t1, t1p, t2, t2p = _analytic_linear(grid, energy, units, slope1, potential.slope)
    else:
        scale = 2.0 * units.mass / units.hbar**2
        w = scale * (potential.v(grid.x) - energy)
        w1_0 = scale * potential.dv(grid.x[0])
        w2_0 = scale * potential.d2v(grid.x[0])
        t1 = _numerov(grid.x, w, 0.0, slope1, w1_0, w2_0)
        t2 = _numerov(grid.x, w, 1.0, 0.0, w1_0, w2_0)
        h = grid.h
        t1p = _derivative_4th(t1, h)
        t2p = _derivative_4th(t2, h)
        # The initial slopes are part of the convention; store them exactly.
        t1p[0] = slope1
        t2p[0] = 0.0

    return BasisPair(
        grid=grid,
        energy=float(energy),
        theta1=t1,
        theta1_prime=t1p,
        theta2=t2,
        theta2_prime=t2p,
        convention=convention,
        units=units,
        solver=method,
    )


def wronskian(pair: BasisPair) -> WronskianReport:
    """Wronskian at x_min and its maximum relative drift over the grid."""
    w = pair.theta1 * pair.theta2_prime - pair.theta1_prime * pair.theta2
    w0 = float(w[0])
    if w0 == 0.0:
        raise ValueError("degenerate pair: Wronskian vanishes at x_min")
    drift = float(np.max(np.abs(w - w0)) / abs(w0))
    return WronskianReport(value=w0, max_relative_drift=drift)


def schrodinger_residual(pair: BasisPair, potential: Potential) -> SchrodingerResidual:
    """Max |-(hbar^2/2m) theta'' + (V - E) theta| at interior points.

    theta'' comes from the fourth-order central stencil, so for a basis
    solved at fourth order the residual also converges at fourth order.
    """
    units = pair.units
    h = pair.grid.h
    vx = potential.v(pair.grid.x)
    out = []
    for theta in (pair.theta1, pair.theta2):
        d2 = second_derivative_4th(theta, h)[2:-2]
        res = -(units.hbar**2 / (2 * units.mass)) * d2 + (
            (vx[2:-2] - pair.energy) * theta[2:-2]
        )
        out.append(float(np.max(np.abs(res))))
    scale = max(abs(pair.energy), potential.energy_scale(pair.grid.x)) * max(
        float(np.max(np.abs(pair.theta1))), float(np.max(np.abs(pair.theta2))), 1e-300
    )
    return SchrodingerResidual(theta1_max=out[0], theta2_max=out[1], scale=scale)


def recombine_second(pair: BasisPair, mu: float) -> BasisPair:
    """Replace theta2 by mu*theta1 + theta2 (Wronskian unchanged)."""
    if not np.isfinite(mu):
        raise ValueError("mu must be finite")
    return replace(
        pair,
        theta2=mu * pair.theta1 + pair.theta2,
        theta2_prime=mu * pair.theta1_prime + pair.theta2_prime,
        recombined=True,
    )
