"""Reduced action assembly and the identities built on it.

Given a basis pair and a microstate (E, a, b, lambda) this module forms

    phi1 = theta2,          phi2 = a*theta1 + b*theta2,
    S0   = hbar * arctan(phi2/phi1) + hbar*lambda   (branch-unwrapped),
    P    = dS0/dx = hbar * (phi1 phi2' - phi1' phi2) / (phi1^2 + phi2^2),

and the second and third spatial derivatives of S0 obtained analytically
from P by repeated differentiation, eliminating phi'' through the
Schrodinger equation.  No field is ever differenced numerically, so the
residual of the quantum stationary Hamilton-Jacobi equation measures
basis error only.

The conjugate momentum P never vanishes: the denominator is positive
(phi1, phi2 cannot vanish together) and the numerator is the constant
-a * W with W the pair Wronskian.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import BSpline, make_interp_spline

from .basis import BasisPair, Convention, recombine_second
from .errors import (
    DegenerateMicrostate,
    EnergyMismatch,
    ForbiddenRegion,
    InvalidGrid,
    TurningPoint,
)
from .potentials import Grid, Potential, Units

__all__ = [
    "Microstate",
    "MuNuConversion",
    "ActionField",
    "convert_mu_nu",
    "build_action",
    "qshje_residual",
    "quantum_coordinate",
    "f_factor",
    "lagrangian",
    "reconstruct_wavefunction",
    "turning_guard",
]

#: default relative width of the |E - V| guard band around turning points
EPS_TP_REL = 1e-9


@dataclass(frozen=True)
class Microstate:
    """Non-classical integration constants selecting one reduced action.

    ``a`` and ``b`` are taken against a declared basis pair via
    phi2 = a*theta1 + b*theta2; ``lam`` is the additive phase (it shifts
    S0 by hbar*lam and nothing else).
    """

    energy: float
    a: float
    b: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        for name in ("energy", "a", "b", "lam"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"microstate field {name} must be finite")
        if self.a == 0.0:
            raise DegenerateMicrostate("microstate constant 'a' must be nonzero")


@dataclass(frozen=True)
class MuNuConversion:
    """Result of rewriting (mu, nu) constants in (a, b) form.

    The (a, b) pair refers to the recombined basis in which the second
    member is mu*theta1 + theta2; apply :meth:`recombine` to the original
    pair before building the action field.
    """

    a: float
    b: float
    mu: float

    def recombine(self, pair: BasisPair) -> BasisPair:
        return recombine_second(pair, self.mu)

    def microstate(self, energy: float, lam: float = 0.0) -> Microstate:
        return Microstate(energy=energy, a=self.a, b=self.b, lam=lam)


def convert_mu_nu(mu: float, nu: float) -> MuNuConversion:
    """Convert (mu, nu) constants to the canonical (a, b) parametrization.

    a = 1 - mu*nu and b = nu; degenerate when mu*nu = 1.
    """
    if not (np.isfinite(mu) and np.isfinite(nu)):
        raise ValueError("mu and nu must be finite")
    a = 1.0 - mu * nu
    if abs(a) <= 1e-14 * (1.0 + abs(mu * nu)):
        raise DegenerateMicrostate("mu*nu = 1 is excluded (a = 1 - mu*nu would vanish)")
    return MuNuConversion(a=a, b=nu, mu=mu)


@dataclass(frozen=True)
class ActionField:
    """S0 and its first three spatial derivatives on a grid."""

    grid: Grid
    microstate: Microstate
    units: Units
    convention: Convention
    recombined: bool
    s0: np.ndarray
    s0_d1: np.ndarray
    s0_d2: np.ndarray
    s0_d3: np.ndarray
    #: max relative deviation of s0_d1 from hbar*(-a W(x_min))/(phi1^2+phi2^2);
    #: bounded by the Wronskian drift of the underlying pair
    eq19_drift: float
    _splines: tuple[BSpline, ...] = dc_field(repr=False, compare=False, default=())

    def __post_init__(self):
        for name in ("s0", "s0_d1", "s0_d2", "s0_d3"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        spl = tuple(
            make_interp_spline(self.grid.x, f, k=5)
            for f in (self.s0, self.s0_d1, self.s0_d2, self.s0_d3)
        )
        object.__setattr__(self, "_splines", spl)

    @property
    def energy(self) -> float:
        return self.microstate.energy

    def _eval(self, idx, x):
        x = np.asarray(x, dtype=float)
        if not self.grid.contains(x):
            raise ValueError("evaluation point outside the field grid")
        out = self._splines[idx](x)
        return float(out) if out.ndim == 0 else out

    def s0_at(self, x):
        return self._eval(0, x)

    def p_at(self, x):
        return self._eval(1, x)

    def d2_at(self, x):
        return self._eval(2, x)

    def d3_at(self, x):
        return self._eval(3, x)

    @property
    def min_abs_p(self) -> float:
        return float(np.min(np.abs(self.s0_d1)))


def build_action(pair: BasisPair, ms: Microstate, potential: Potential) -> ActionField:
    """Assemble the reduced action field for one microstate.

    The potential enters only through the Schrodinger equation
    phi'' = (2m/hbar^2)(V - E) phi used to eliminate second derivatives
    when forming d2S0/dx2 and d3S0/dx3 analytically.
    """
    units = pair.units
    units.require_quantum()
    if not np.isclose(pair.energy, ms.energy, rtol=1e-12, atol=0.0):
        raise EnergyMismatch(
            f"pair energy {pair.energy} != microstate energy {ms.energy}"
        )
    hbar, mass = units.hbar, units.mass

    phi1 = pair.theta2
    phi2 = ms.a * pair.theta1 + ms.b * pair.theta2
    phi1p = pair.theta2_prime
    phi2p = ms.a * pair.theta1_prime + ms.b * pair.theta2_prime

    dd = phi1 * phi1 + phi2 * phi2
    wphi = phi1 * phi2p - phi1p * phi2
    p = hbar * wphi / dd

    # Continuous angle of (phi1, phi2); anchored at the principal value at
    # x_min, which is energy-independent for both conventions.
    angle = np.unwrap(np.arctan2(phi2, phi1))
    s0 = hbar * angle + hbar * ms.lam
    step = np.abs(np.diff(s0))
    if np.any(step >= 0.5 * np.pi * hbar):
        raise InvalidGrid(
            "grid too coarse to resolve the action phase: "
            f"max |dS0| = {np.max(step):.3g} >= pi*hbar/2"
        )
    if np.any(np.sign(np.diff(s0)) != np.sign(p[:-1])):
        raise InvalidGrid("action unwrapping is inconsistent with the momentum sign")

    # dP/dx and d2P/dx2 from D' and D'', with phi'' eliminated through the
    # Schrodinger equation (no numerical differencing).
    ddp = 2.0 * (phi1 * phi1p + phi2 * phi2p)
    vx = potential.v(pair.grid.x)
    dd2 = 2.0 * (phi1p * phi1p + phi2p * phi2p) + 2.0 * (
        2.0 * mass / hbar**2
    ) * (vx - pair.energy) * dd
    ratio = ddp / dd
    d2 = -p * ratio
    d3 = p * (2.0 * ratio * ratio - dd2 / dd)

    w0 = float((pair.theta1 * pair.theta2_prime - pair.theta1_prime * pair.theta2)[0])
    p_const_w = hbar * (-ms.a * w0) / dd
    eq19_drift = float(np.max(np.abs(p - p_const_w)) / np.max(np.abs(p)))

    return ActionField(
        grid=pair.grid,
        microstate=ms,
        units=units,
        convention=pair.convention,
        recombined=pair.recombined,
        s0=s0,
        s0_d1=p,
        s0_d2=d2,
        s0_d3=d3,
        eq19_drift=eq19_drift,
    )


class QshjeReport(NamedTuple):
    residual: np.ndarray
    max_abs: float
    scale: float


def qshje_residual(field: ActionField, potential: Potential) -> QshjeReport:
    """Pointwise residual of the quantum stationary Hamilton-Jacobi equation.

    residual = P^2/2m + V - E - (hbar^2/4m) [ (3/2)(S0''/S0')^2 - S0'''/S0' ]
    """
    units = field.units
    p, d2, d3 = field.s0_d1, field.s0_d2, field.s0_d3
    vx = potential.v(field.grid.x)
    quantum = (units.hbar**2 / (4.0 * units.mass)) * (1.5 * (d2 / p) ** 2 - d3 / p)
    res = p * p / (2.0 * units.mass) + vx - field.energy - quantum
    scale = max(abs(field.energy), potential.energy_scale(field.grid.x), 1e-300)
    return QshjeReport(residual=res, max_abs=float(np.max(np.abs(res))), scale=scale)


def turning_guard(field: ActionField, potential: Potential) -> float:
    """Default |E - V| guard band width for this field."""
    return EPS_TP_REL * max(
        abs(field.energy), potential.energy_scale(field.grid.x), 1e-300
    )


def _check_allowed(field, potential, lo, hi, eps):
    xs = field.grid.x
    inside = xs[(xs > lo) & (xs < hi)]
    sample = np.concatenate(([lo], inside, [hi]))
    gap = field.energy - potential.v(sample)
    if np.min(gap) <= eps:
        raise ForbiddenRegion(
            f"E <= V on the path: min(E - V) = {np.min(gap):.3g} within [{lo}, {hi}]"
        )


def quantum_coordinate(
    field: ActionField,
    potential: Potential,
    x: float,
    x_ref: float,
    quad_tol: float = 1e-10,
) -> float:
    """Transformed coordinate xhat = int_{x_ref}^{x} P / sqrt(2m(E-V)) dx'.

    Real only on classically allowed paths; raises ForbiddenRegion
    otherwise.  (dxhat/dx)^2 equals the kinetic weight f wherever both
    are defined.
    """
    mass = field.units.mass
    energy = field.energy
    eps = turning_guard(field, potential)
    lo, hi = min(x, x_ref), max(x, x_ref)
    if not (field.grid.contains(lo) and field.grid.contains(hi)):
        raise ValueError("path leaves the field grid")
    _check_allowed(field, potential, lo, hi, eps)

    def integrand(u):
        return field.p_at(u) / np.sqrt(2.0 * mass * (energy - potential.v(u)))

    val, _ = quad(integrand, x_ref, x, epsabs=1e-14, epsrel=quad_tol, limit=200)
    return float(val)


def f_factor(field: ActionField, potential: Potential, x, eps_tp: float | None = None):
    """Kinetic weight f = P^2 / (2m (E - V)).

    Positive in classically allowed regions, negative in forbidden ones.
    Raises TurningPoint when any evaluation point falls inside the
    |E - V| guard band.
    """
    eps = turning_guard(field, potential) if eps_tp is None else eps_tp
    gap = field.energy - potential.v(x)
    if np.any(np.abs(gap) <= eps):
        raise TurningPoint(f"|E - V| <= {eps:.3g} at some evaluation point")
    p = field.p_at(x)
    return p * p / (2.0 * field.units.mass * gap)


def lagrangian(
    field: ActionField,
    potential: Potential,
    x: float,
    v: float,
    eps_tp: float | None = None,
) -> float:
    """L = (1/2) m v^2 f(x) - V(x)."""
    f = f_factor(field, potential, x, eps_tp=eps_tp)
    return 0.5 * field.units.mass * v * v * f - potential.v(x)


class WavefunctionReport(NamedTuple):
    phi: np.ndarray
    max_residual: float
    scale: float


def reconstruct_wavefunction(
    field: ActionField,
    potential: Potential,
    alpha: complex,
    beta: complex,
) -> WavefunctionReport:
    """phi = (S0')^(-1/2) [alpha e^{iS0/hbar} + beta e^{-iS0/hbar}].

    Reports the max Schrodinger residual with phi'' taken by 3-point
    central differences, which vanishes quadratically under refinement.
    """
    units = field.units
    hbar = units.hbar
    p = field.s0_d1.astype(complex)
    phase = np.exp(1j * field.s0 / hbar)
    phi = p ** (-0.5) * (alpha * phase + beta / phase)

    h = field.grid.h
    d2 = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / (h * h)
    vx = potential.v(field.grid.x)[1:-1]
    res = -(hbar**2 / (2 * units.mass)) * d2 + (vx - field.energy) * phi[1:-1]
    scale = max(abs(field.energy), potential.energy_scale(field.grid.x)) * float(
        np.max(np.abs(phi))
    )
    return WavefunctionReport(
        phi=phi, max_residual=float(np.max(np.abs(res))), scale=scale
    )
