"""Quantum trajectory integration and the first-integral identities.

Two independent routes produce the same motion:

* quadrature route - invert dS0/dx = 2(E - V)/xdot into a time law
  t(x) = t0 + int P / (2(E - V)) dx' and read the kinematics off the
  action field;
* first-integral route - integrate the third-order system (x, v, acc)
  whose jerk is obtained by solving the quartic-in-(E-V) first integral
  of the quantum law of motion for d(acc)/dt.

The quartic also runs backwards: given raw kinematic data (x, v, acc,
jerk) it is solved for E - V, with an explicit root-selection policy
because several energies are generally consistent with a single state.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp

from .action import ActionField, Microstate, f_factor, turning_guard
from .errors import (
    NoRealRoot,
    QuadratureFailure,
    StepFailure,
    TurningPoint,
    TurningPointInPath,
    ZeroVelocity,
)
from .potentials import Potential, Units

__all__ = [
    "Region",
    "Route",
    "RootPolicy",
    "TrajectoryState",
    "Trajectory",
    "EnergyRoots",
    "velocity_law",
    "derive_initial_state",
    "jerk_rhs",
    "fiqnl_residual",
    "integrate_quadrature",
    "integrate_fiqnl",
    "integrate_fiqnl_fixed",
    "conservation_residual",
    "solve_energy",
]

DEFAULT_QUAD_TOL = 1e-10
DEFAULT_ODE_TOL = 1e-9


class Region(str, Enum):
    ALLOWED = "allowed"
    FORBIDDEN = "forbidden"


class Route(str, Enum):
    QUADRATURE = "quadrature"
    FIQNL = "fiqnl"
    FLOYD_JACOBI = "floyd"
    CLOSED_FORM = "closed_form"
    CLASSICAL = "classical"


class RootPolicy(str, Enum):
    CLOSEST_TO_CLASSICAL = "closest_to_classical"
    CLOSEST_TO_REFERENCE = "closest_to_reference"
    ALL = "all"


@dataclass(frozen=True)
class TrajectoryState:
    """One kinematic state (t, x, xdot, xddot [, jerk])."""

    t: float
    x: float
    v: float
    acc: float
    jerk: float | None = None

    def __post_init__(self):
        vals = [self.t, self.x, self.v, self.acc]
        if self.jerk is not None:
            vals.append(self.jerk)
        if not np.all(np.isfinite(vals)):
            raise ValueError("trajectory state fields must be finite")


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered kinematic states with residual diagnostics."""

    route: Route
    microstate: Microstate | None
    units: Units
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    acc: np.ndarray
    jerk: np.ndarray
    conservation_residual: np.ndarray
    fiqnl_residual: np.ndarray
    interpolant: Callable | None = None

    def __post_init__(self):
        for name in ("t", "x", "v", "acc", "jerk", "conservation_residual", "fiqnl_residual"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return self.t.size

    def state(self, i: int) -> TrajectoryState:
        jerk = self.jerk[i]
        return TrajectoryState(
            t=float(self.t[i]),
            x=float(self.x[i]),
            v=float(self.v[i]),
            acc=float(self.acc[i]),
            jerk=None if np.isnan(jerk) else float(jerk),
        )

    @property
    def max_conservation_residual(self) -> float:
        return float(np.nanmax(np.abs(self.conservation_residual)))

    @property
    def max_fiqnl_residual(self) -> float:
        return float(np.nanmax(np.abs(self.fiqnl_residual)))


@dataclass(frozen=True)
class EnergyRoots:
    """Real energies solving the first-integral quartic at one state."""

    roots: tuple[float, ...]
    selected: float | None
    policy: RootPolicy
    back_substitution_max: float


def _guard(field: ActionField, potential: Potential, eps_tp: float | None) -> float:
    return turning_guard(field, potential) if eps_tp is None else eps_tp


def velocity_law(
    field: ActionField,
    potential: Potential,
    x: float,
    region: Region = Region.ALLOWED,
    eps_tp: float | None = None,
) -> float:
    """xdot = 2 (E - V) / P.

    The sign rule (velocity and conjugate momentum share a sign in
    allowed regions and oppose in forbidden ones) holds automatically
    because E - V flips sign across the turning point.  ``region``
    declares the caller's expectation and is validated.
    """
    eps = _guard(field, potential, eps_tp)
    gap = field.energy - potential.v(x)
    if abs(gap) <= eps:
        raise TurningPoint(f"|E - V| = {abs(gap):.3g} <= guard {eps:.3g} at x = {x}")
    region = Region(region)
    if region is Region.ALLOWED and gap < 0:
        raise ValueError(f"x = {x} declared allowed but E < V there")
    if region is Region.FORBIDDEN and gap > 0:
        raise ValueError(f"x = {x} declared forbidden but E > V there")
    return float(2.0 * gap / field.p_at(x))


def _kinematics_from_field(field, potential, xs):
    """Velocity, acceleration and jerk implied by the action field."""
    energy = field.energy
    gap = energy - potential.v(xs)
    p = field.p_at(xs)
    d2 = field.d2_at(xs)
    d3 = field.d3_at(xs)
    vp = potential.dv(xs)
    vpp = potential.d2v(xs)
    v = 2.0 * gap / p
    acc = -(v**3) * d2 / (2.0 * gap) - v * v * vp / gap
    jerk = (v**4 / (2.0 * gap)) * (-d3 - 2.0 * vpp / v + 4.0 * acc * vp / v**3) + (
        3.0 * acc * acc / v
    )
    return v, acc, jerk


def derive_initial_state(
    field: ActionField,
    potential: Potential,
    x0: float,
    eps_tp: float | None = None,
) -> tuple[float, float, float]:
    """Initial (v0, acc0, jerk0) consistent with the field at x0.

    The velocity comes from the momentum law and the higher derivatives
    from inverting the S0''/S0''' chain, so the returned state lies on the
    first-integral manifold by construction.
    """
    eps = _guard(field, potential, eps_tp)
    gap = field.energy - potential.v(x0)
    if abs(gap) <= eps:
        raise TurningPoint(f"x0 = {x0} is inside the turning-point guard band")
    v, acc, jerk = _kinematics_from_field(field, potential, np.asarray(x0, dtype=float))
    return float(v), float(acc), float(jerk)


def _fiqnl_terms(x, v, acc, jerk, potential, energy, units):
    """Terms of the quartic first integral, largest scale last."""
    hbar, mass = units.hbar, units.mass
    y = energy - potential.v(x)
    vp = potential.dv(x)
    vpp = potential.d2v(x)
    t4 = y**4
    t3 = -(mass * v * v / 2.0) * y**3
    t2 = (hbar**2 / 8.0) * (1.5 * (acc / v) ** 2 - jerk / v) * y * y
    t1 = -(hbar**2 / 8.0) * (v * v * vpp + acc * vp) * y
    t0 = -(3.0 * hbar**2 / 16.0) * (v * vp) ** 2
    return t4, t3, t2, t1, t0


def fiqnl_residual(
    state: TrajectoryState,
    potential: Potential,
    energy: float,
    units: Units,
) -> float:
    """First-integral residual, normalized by max(|E|, |V(x)|)^4."""
    if state.v == 0.0:
        raise ZeroVelocity("first-integral residual needs xdot != 0")
    if state.jerk is None:
        raise ValueError("state has no jerk")
    t4, t3, t2, t1, t0 = _fiqnl_terms(
        state.x, state.v, state.acc, state.jerk, potential, energy, units
    )
    scale = max(abs(energy), abs(potential.v(state.x)), 1e-300)
    return float((t4 + t3 + t2 + t1 + t0) / scale**4)


def jerk_rhs(
    state: TrajectoryState,
    potential: Potential,
    energy: float,
    units: Units,
    eps_tp: float = 0.0,
) -> float:
    """Solve the first integral for the jerk at one state."""
    return float(
        _jerk(state.x, state.v, state.acc, potential, energy, units, eps_tp)
    )


def _jerk(x, v, acc, potential, energy, units, eps_tp=0.0):
    units.require_quantum()
    hbar, mass = units.hbar, units.mass
    y = energy - potential.v(x)
    if np.any(np.abs(y) <= eps_tp) or np.any(y == 0.0):
        raise TurningPoint("E = V at the evaluation point")
    if np.any(v == 0.0):
        raise ZeroVelocity("jerk law needs xdot != 0")
    vp = potential.dv(x)
    vpp = potential.d2v(x)
    bracket = (
        y**4
        - (mass * v * v / 2.0) * y**3
        - (hbar**2 / 8.0) * (v * v * vpp + acc * vp) * y
        - (3.0 * hbar**2 / 16.0) * (v * vp) ** 2
    )
    return 1.5 * acc * acc / v + (8.0 * v / (hbar**2 * y * y)) * bracket


def conservation_residual(
    state: TrajectoryState,
    field: ActionField,
    potential: Potential,
    eps_tp: float | None = None,
) -> float:
    """Residual of (1/2) m v^2 f + V - E at one state."""
    f = f_factor(field, potential, state.x, eps_tp=eps_tp)
    return float(
        0.5 * field.units.mass * state.v**2 * f + potential.v(state.x) - field.energy
    )


def _diagnostics(field, potential, xs, v, acc, jerk):
    """Conservation and first-integral residual arrays along an arc."""
    units = field.units
    energy = field.energy
    gap = energy - potential.v(xs)
    p = field.p_at(xs)
    f = p * p / (2.0 * units.mass * gap)
    cons = 0.5 * units.mass * v * v * f + potential.v(xs) - energy
    t4, t3, t2, t1, t0 = _fiqnl_terms(xs, v, acc, jerk, potential, energy, units)
    scale = np.maximum(abs(energy), np.abs(potential.v(xs)))
    fiq = (t4 + t3 + t2 + t1 + t0) / scale**4
    return np.asarray(cons, dtype=float), np.asarray(fiq, dtype=float)


def integrate_quadrature(
    field: ActionField,
    potential: Potential,
    x0: float,
    x_end: float,
    t0: float = 0.0,
    quad_tol: float = DEFAULT_QUAD_TOL,
    eps_tp: float | None = None,
    stride: int = 1,
) -> Trajectory:
    """Trajectory from the time-law quadrature t(x) = t0 + int dx/xdot.

    The arc must stay within a single classical region; the integrand has
    a simple pole at a turning point (P stays finite there), so arrival
    times diverge as the arc end approaches one.
    """
    if x_end == x0:
        raise ValueError("empty arc")
    eps = _guard(field, potential, eps_tp)
    lo, hi = min(x0, x_end), max(x0, x_end)
    if not (field.grid.contains(lo) and field.grid.contains(hi)):
        raise ValueError("arc leaves the field grid")

    xs_grid = field.grid.x
    inside = xs_grid[(xs_grid > lo) & (xs_grid < hi)]
    if stride > 1:
        inside = inside[::stride]
    sample = np.concatenate(([lo], inside, [hi]))
    gap = field.energy - potential.v(sample)
    if np.any(np.abs(gap) <= eps) or (np.min(gap) < 0.0 < np.max(gap)):
        raise TurningPointInPath(
            f"arc [{lo}, {hi}] crosses or touches a turning point"
        )
    xs = sample if x_end > x0 else sample[::-1]

    v, acc, jerk = _kinematics_from_field(field, potential, xs)
    if np.sign(v[0]) != np.sign(x_end - x0):
        raise ValueError(
            "x_end is unreachable: the velocity points away from it "
            f"(v(x0) = {v[0]:.3g})"
        )

    energy = field.energy

    def integrand(u):
        return field.p_at(u) / (2.0 * (energy - potential.v(u)))

    dts = np.empty(xs.size - 1)
    err_total = 0.0
    for i in range(xs.size - 1):
        out = quad(
            integrand, xs[i], xs[i + 1], epsabs=1e-14, epsrel=quad_tol,
            limit=200, full_output=1,
        )
        if len(out) > 3:
            raise QuadratureFailure(f"panel [{xs[i]}, {xs[i+1]}]: {out[3]}")
        dts[i] = out[0]
        err_total += abs(out[1])
    t = t0 + np.concatenate(([0.0], np.cumsum(dts)))
    span = abs(t[-1] - t0)
    if err_total > max(100.0 * quad_tol * max(span, 1.0), 1e-12):
        raise QuadratureFailure(
            f"accumulated quadrature error estimate {err_total:.3g} too large"
        )

    cons, fiq = _diagnostics(field, potential, xs, v, acc, jerk)
    return Trajectory(
        route=Route.QUADRATURE,
        microstate=field.microstate,
        units=field.units,
        t=t, x=xs, v=v, acc=acc, jerk=jerk,
        conservation_residual=cons,
        fiqnl_residual=fiq,
    )


def integrate_fiqnl(
    initial: TrajectoryState,
    potential: Potential,
    energy: float,
    units: Units,
    t_end: float,
    ode_tol: float = DEFAULT_ODE_TOL,
    eps_tp: float = 0.0,
    method: str = "DOP853",
    field: ActionField | None = None,
) -> Trajectory:
    """Integrate (x, v, acc) with the jerk supplied by the first integral.

    Uses an adaptive embedded Runge-Kutta pair (DOP853 by default) with
    per-step relative tolerance ``ode_tol``; states are recorded at the
    accepted steps.  When ``field`` is given, the per-state first-integral
    diagnostic is evaluated with the jerk implied by the action field,
    which is an estimate independent of the integrator's own right-hand
    side (the rhs jerk satisfies the first integral identically).
    """
    if initial.v == 0.0:
        raise ZeroVelocity("initial state has zero velocity")
    if t_end <= initial.t:
        raise ValueError("t_end must exceed the initial time")
    units.require_quantum()
    if initial.jerk is not None:
        res = fiqnl_residual(initial, potential, energy, units)
        if abs(res) > 1e-6:
            raise ValueError(
                f"initial state is off the first-integral manifold: {res:.3g}"
            )

    def rhs(t, s):
        return [s[1], s[2], _jerk(s[0], s[1], s[2], potential, energy, units, eps_tp)]

    def vel_event(t, s):
        return s[1]

    vel_event.terminal = True

    def turn_event(t, s):
        return abs(energy - potential.v(s[0])) - eps_tp

    turn_event.terminal = True
    events = [vel_event] + ([turn_event] if eps_tp > 0.0 else [])

    sol = solve_ivp(
        rhs,
        (initial.t, t_end),
        [initial.x, initial.v, initial.acc],
        method=method,
        rtol=ode_tol,
        atol=1e-3 * ode_tol,
        dense_output=True,
        events=events,
    )
    if sol.status < 0:
        raise StepFailure(sol.message)
    if sol.status == 1:
        if sol.t_events[0].size:
            raise ZeroVelocity(f"velocity crossed zero at t = {sol.t_events[0][0]}")
        raise StepFailure(
            f"turning-point guard reached at t = {sol.t_events[1][0]}"
        )

    t, (xs, v, acc) = sol.t, sol.y
    jerk = np.array(
        [_jerk(xs[i], v[i], acc[i], potential, energy, units) for i in range(t.size)]
    )
    if field is not None:
        _, _, jerk_f = _kinematics_from_field(field, potential, xs)
        cons, fiq = _diagnostics(field, potential, xs, v, acc, jerk_f)
    else:
        cons = np.full(t.size, np.nan)
        terms = _fiqnl_terms(xs, v, acc, jerk, potential, energy, units)
        scale = np.maximum(abs(energy), np.abs(potential.v(xs)))
        fiq = sum(terms) / scale**4
    ms = field.microstate if field is not None else None
    return Trajectory(
        route=Route.FIQNL,
        microstate=ms,
        units=units,
        t=t, x=xs, v=v, acc=acc, jerk=jerk,
        conservation_residual=cons,
        fiqnl_residual=np.asarray(fiq, dtype=float),
        interpolant=sol.sol,
    )


def integrate_fiqnl_fixed(
    initial: TrajectoryState,
    potential: Potential,
    energy: float,
    units: Units,
    t_end: float,
    n_steps: int,
    field: ActionField | None = None,
) -> Trajectory:
    """Classic fixed-step RK4 on the same system, for convergence studies."""
    if initial.v == 0.0:
        raise ZeroVelocity("initial state has zero velocity")
    units.require_quantum()
    h = (t_end - initial.t) / n_steps
    if h <= 0:
        raise ValueError("t_end must exceed the initial time")

    def rhs(s):
        return np.array(
            [s[1], s[2], _jerk(s[0], s[1], s[2], potential, energy, units)]
        )

    ts = initial.t + h * np.arange(n_steps + 1)
    ys = np.empty((n_steps + 1, 3))
    ys[0] = (initial.x, initial.v, initial.acc)
    for i in range(n_steps):
        s = ys[i]
        k1 = rhs(s)
        k2 = rhs(s + 0.5 * h * k1)
        k3 = rhs(s + 0.5 * h * k2)
        k4 = rhs(s + h * k3)
        ys[i + 1] = s + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    xs, v, acc = ys.T
    jerk = np.array(
        [_jerk(xs[i], v[i], acc[i], potential, energy, units) for i in range(ts.size)]
    )
    if field is not None:
        _, _, jerk_f = _kinematics_from_field(field, potential, xs)
        cons, fiq = _diagnostics(field, potential, xs, v, acc, jerk_f)
    else:
        cons = np.full(ts.size, np.nan)
        terms = _fiqnl_terms(xs, v, acc, jerk, potential, energy, units)
        scale = np.maximum(abs(energy), np.abs(potential.v(xs)))
        fiq = sum(terms) / scale**4
    return Trajectory(
        route=Route.FIQNL,
        microstate=field.microstate if field is not None else None,
        units=units,
        t=ts, x=xs, v=v, acc=acc, jerk=jerk,
        conservation_residual=cons,
        fiqnl_residual=np.asarray(fiq, dtype=float),
    )


def solve_energy(
    state: TrajectoryState,
    potential: Potential,
    units: Units,
    policy: RootPolicy = RootPolicy.CLOSEST_TO_CLASSICAL,
    reference_energy: float | None = None,
) -> EnergyRoots:
    """All real energies consistent with one kinematic state.

    The first integral is a quartic in y = E - V(x); its real roots are
    found through the companion matrix, polished by Newton steps, and
    deduplicated.  Roots with y ~ 0 describe a turning point, which
    contradicts the state's nonzero velocity, so the selection policies
    skip them (the full root list still reports them).

    Several genuinely distinct trajectories can share one (x, v, acc,
    jerk) state, so no single-state policy can always identify the
    energy the state was generated with; ``closest_to_classical`` picks
    the admissible root nearest the classical kinetic energy m v^2 / 2,
    which is reliable when m v^2 / 2 < 2 (E - V).
    """
    if state.v == 0.0:
        raise ZeroVelocity("energy quartic needs xdot != 0")
    if state.jerk is None:
        raise ValueError("state has no jerk; the quartic needs all four kinematic data")
    units.require_quantum()
    policy = RootPolicy(policy)
    hbar, mass = units.hbar, units.mass
    v, acc, jerk = state.v, state.acc, state.jerk
    vp = potential.dv(state.x)
    vpp = potential.d2v(state.x)

    c3 = -mass * v * v / 2.0
    c2 = (hbar**2 / 8.0) * (1.5 * (acc / v) ** 2 - jerk / v)
    c1 = -(hbar**2 / 8.0) * (v * v * vpp + acc * vp)
    c0 = -(3.0 * hbar**2 / 16.0) * (v * vp) ** 2
    coeffs = np.array([1.0, c3, c2, c1, c0])

    yscale = max(
        abs(c3), abs(c2) ** 0.5, abs(c1) ** (1.0 / 3.0), abs(c0) ** 0.25,
        mass * v * v / 2.0, 1e-300,
    )
    raw = np.roots(coeffs)
    real = [
        complex(r).real
        for r in raw
        if abs(complex(r).imag) <= 1e-8 * max(abs(complex(r)), yscale)
    ]
    if not real:
        raise NoRealRoot("the first-integral quartic has no real root")

    def poly(y):
        return (((y + c3) * y + c2) * y + c1) * y + c0

    def dpoly(y):
        return ((4.0 * y + 3.0 * c3) * y + 2.0 * c2) * y + c1

    polished = []
    for y in real:
        for _ in range(3):
            d = dpoly(y)
            if d == 0.0:
                break
            step = poly(y) / d
            if not np.isfinite(step):
                break
            y -= step
        polished.append(y)
    polished.sort()
    roots_y: list[float] = []
    for y in polished:
        if not roots_y or abs(y - roots_y[-1]) > 1e-9 * max(yscale, abs(y)):
            roots_y.append(y)

    def scale4(y):
        return max(y**4, abs(c3 * y**3), abs(c2 * y * y), abs(c1 * y), abs(c0), 1e-300)

    back_sub = max(abs(poly(y)) / scale4(y) for y in roots_y)

    vx = float(potential.v(state.x))
    roots_e = tuple(y + vx for y in roots_y)

    selected = None
    if policy is not RootPolicy.ALL:
        admissible = [y for y in roots_y if abs(y) > 1e-9 * yscale]
        if not admissible:
            raise NoRealRoot("all real roots sit at the turning point E = V")
        if policy is RootPolicy.CLOSEST_TO_CLASSICAL:
            target = mass * v * v / 2.0
        else:
            if reference_energy is None:
                raise ValueError("closest_to_reference policy needs reference_energy")
            target = reference_energy - vx
        selected = min(admissible, key=lambda y: abs(y - target)) + vx

    return EnergyRoots(
        roots=roots_e,
        selected=selected,
        policy=policy,
        back_substitution_max=float(back_sub),
    )
