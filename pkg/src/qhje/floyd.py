"""Jacobi-theorem (Floydian) time laws and the classical-limit average.

The Jacobi-theorem trajectory takes t - t0 = dS0/dE at fixed position.
On the free potential, with the basis pair fixed to (sin kx, cos kx)
(the ``floyd_wave`` convention anchored at x = 0), the derivative has the
closed form

    t - t0 = a sqrt(2m/E) x / [ (a^2+b^2+1) + sigma cos(2 sqrt(2mE) x/hbar
                                                         + gamma) ],

with sigma^2 = (a^2-b^2-1)^2 + 4a^2b^2 and the quadrant-resolved phase
gamma = atan2(-2ab, 1+b^2-a^2).  For any potential the derivative is
available numerically by re-solving the basis at E +/- dE with matched
branch anchoring.

These times differ from the dynamics-route times except for the
classical microstate (a, b) = (1, 0), where sigma = 0 and every route
collapses to uniform motion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .action import ActionField, Microstate, build_action
from .basis import BasisPair, Convention
from .errors import BranchMismatch, SingularDenominator
from .potentials import Potential, Units

__all__ = [
    "FloydTrajectoryPoint",
    "SigmaGamma",
    "sigma_gamma",
    "floyd_free_closed",
    "floyd_time_numeric",
    "cycle_average_classical_limit",
]


@dataclass(frozen=True)
class FloydTrajectoryPoint:
    x: float
    t_minus_t0: float


@dataclass(frozen=True)
class SigmaGamma:
    """Amplitude and phase of the oscillatory denominator term."""

    sigma: float
    gamma: float


def sigma_gamma(a: float, b: float) -> SigmaGamma:
    """Oscillation amplitude sigma and quadrant-correct phase gamma.

    sigma^2 = a^4 + b^4 + 1 + 2a^2b^2 + 2b^2 - 2a^2, which equals the
    manifestly nonnegative (a^2 - b^2 - 1)^2 + 4a^2b^2; sigma vanishes
    exactly for (a, b) = (+-1, 0).
    """
    if a == 0.0:
        raise ValueError("constant 'a' must be nonzero")
    sigma = float(np.hypot(a * a - b * b - 1.0, 2.0 * a * b))
    gamma = float(np.arctan2(-2.0 * a * b, 1.0 + b * b - a * a))
    return SigmaGamma(sigma=sigma, gamma=gamma)


def floyd_free_closed(a: float, b: float, energy: float, units: Units, x):
    """Closed-form Jacobi-theorem time on the free potential.

    ``x`` is the displacement from the basis anchor (where the pair is
    exactly sin/cos).  Scalar or array.
    """
    if a == 0.0:
        raise ValueError("constant 'a' must be nonzero")
    if energy <= 0.0:
        raise ValueError("closed form requires E > 0")
    units.require_quantum()
    sg = sigma_gamma(a, b)
    k2 = 2.0 * units.mass * energy
    den = (a * a + b * b + 1.0) + sg.sigma * np.cos(
        2.0 * np.sqrt(k2) * np.asarray(x, dtype=float) / units.hbar + sg.gamma
    )
    if np.any(np.abs(den) < 1e-12 * (a * a + b * b + 1.0)):
        raise SingularDenominator("time-law denominator vanished")
    out = a * np.sqrt(2.0 * units.mass / energy) * np.asarray(x, dtype=float) / den
    return float(out) if out.ndim == 0 else out


def _action_for(basis_factory, potential, ms: Microstate, energy: float) -> ActionField:
    pair: BasisPair = basis_factory(energy)
    if pair.convention is not Convention.FLOYD_WAVE or pair.recombined:
        raise ValueError(
            "Jacobi-theorem differentiation requires a pristine floyd_wave basis"
        )
    shifted = Microstate(energy=energy, a=ms.a, b=ms.b, lam=ms.lam)
    return build_action(pair, shifted, potential)


def _branch_consistent(fp: ActionField, fm: ActionField, hbar: float) -> bool:
    diff = fp.s0 - fm.s0
    return bool(np.all(np.abs(np.diff(diff)) < 0.5 * np.pi * hbar))


def floyd_time_numeric(
    basis_factory,
    potential: Potential,
    ms: Microstate,
    x,
    de: float | None = None,
    stencil: int = 3,
    max_retries: int = 2,
):
    """dS0/dE at fixed x by central differences with basis re-solves.

    The microstate constants (a, b, lambda) are held fixed across the
    energy perturbation and both action fields unwrap from the same
    anchor at x_min, so the difference is branch-consistent; a detected
    branch mismatch retries with a tenth of the step before failing.
    ``stencil`` is 3 (one pair of solves) or 5 (Richardson-style
    four-point formula).
    """
    if stencil not in (3, 5):
        raise ValueError("stencil must be 3 or 5")
    energy = ms.energy
    step = de if de is not None else 1e-6 * abs(energy)
    if step <= 0.0:
        raise ValueError("energy step must be positive")

    for attempt in range(max_retries + 1):
        fields = {}
        offsets = (-1, 1) if stencil == 3 else (-2, -1, 1, 2)
        for k in offsets:
            fields[k] = _action_for(basis_factory, potential, ms, energy + k * step)
        hbar = fields[1].units.hbar
        ok = _branch_consistent(fields[1], fields[-1], hbar)
        if stencil == 5:
            ok = ok and _branch_consistent(fields[2], fields[-2], hbar)
        if ok:
            if stencil == 3:
                out = (fields[1].s0_at(x) - fields[-1].s0_at(x)) / (2.0 * step)
            else:
                out = (
                    fields[-2].s0_at(x)
                    - 8.0 * fields[-1].s0_at(x)
                    + 8.0 * fields[1].s0_at(x)
                    - fields[2].s0_at(x)
                ) / (12.0 * step)
            return out
        step /= 10.0
    raise BranchMismatch(
        "branch unwrapping differs between the perturbed action fields"
    )


def cycle_average_classical_limit(
    a: float,
    b: float,
    energy: float,
    units: Units,
    n_hbar_halvings: int = 4,
    anchor_x: float = 1.0,
) -> np.ndarray:
    """Cycle-averaged slope of the Jacobi-theorem time law under hbar halving.

    At each hbar_k = hbar / 2^k the local slope (t - t0)/x of the closed
    form is averaged over one full period of the oscillatory term
    starting at ``anchor_x``; a full-period average is anchor-independent.
    The sequence converges to the classical slope sqrt(m / 2E).
    """
    if energy <= 0.0:
        raise ValueError("requires E > 0")
    units.require_quantum()
    averages = np.empty(n_hbar_halvings + 1)
    for k in range(n_hbar_halvings + 1):
        uk = Units(hbar=units.hbar / 2.0**k, mass=units.mass)
        period = np.pi * uk.hbar / np.sqrt(2.0 * uk.mass * energy)

        def slope(x):
            return floyd_free_closed(a, b, energy, uk, x) / x

        val, _ = quad(
            slope, anchor_x, anchor_x + period, epsabs=1e-14, epsrel=1e-12, limit=200
        )
        averages[k] = val / period
    return averages
