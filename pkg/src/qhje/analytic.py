"""Closed-form free-particle catalogue.

The free-particle trajectory is

    x(t) = (hbar / sqrt(2mE)) arctan[ a_t tan(2E (t - t0)/hbar) + b_t ] + x0,

continued across the tangent singularities so that x is monotone for
a_t > 0.  Its constants (a_t, b_t) parametrize the same family as the
action constants (a_s, b_s) through a_t = 1/a_s, b_t = -b_s/a_s, which
is the mapping forced by the action-of-time law S0 = 2E (t - t0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMicrostate
from .potentials import Units

__all__ = [
    "FreeTrajectoryParams",
    "free_trajectory",
    "free_action_of_time",
    "microstate_to_trajectory_constants",
    "classical_free_trajectory",
]


@dataclass(frozen=True)
class FreeTrajectoryParams:
    a_t: float
    b_t: float = 0.0
    energy: float = 0.5
    x0: float = 0.0
    t0: float = 0.0

    def __post_init__(self):
        if self.a_t == 0.0:
            raise DegenerateMicrostate("trajectory constant a_t must be nonzero")
        if self.energy <= 0.0:
            raise ValueError("free trajectory requires E > 0")


def free_trajectory(params: FreeTrajectoryParams, units: Units, t):
    """Evaluate the closed-form trajectory with branch unwrapping.

    Each tangent singularity crossed adds sign(a_t) * pi*hbar/sqrt(2mE),
    keeping x continuous and (for a_t > 0) strictly increasing.
    """
    units.require_quantum()
    k = np.sqrt(2.0 * units.mass * params.energy)
    phase = 2.0 * params.energy * (np.asarray(t, dtype=float) - params.t0) / units.hbar
    n = np.floor((phase + 0.5 * np.pi) / np.pi)
    residual = phase - n * np.pi
    branch = np.sign(params.a_t) * n * np.pi
    out = (units.hbar / k) * (
        np.arctan(params.a_t * np.tan(residual) + params.b_t) + branch
    ) + params.x0
    return float(out) if out.ndim == 0 else out


def free_action_of_time(energy: float, t, t0: float = 0.0):
    """S0 accumulated along the free motion: 2E (t - t0) at any hbar."""
    out = 2.0 * energy * (np.asarray(t, dtype=float) - t0)
    return float(out) if out.ndim == 0 else out


def microstate_to_trajectory_constants(a_s: float, b_s: float) -> tuple[float, float]:
    """Map action constants (a_s, b_s) to trajectory constants (a_t, b_t)."""
    if a_s == 0.0:
        raise DegenerateMicrostate("action constant 'a' must be nonzero")
    return 1.0 / a_s, -b_s / a_s


def classical_free_trajectory(energy: float, units: Units, t, x0: float = 0.0, t0: float = 0.0):
    """Uniform motion x = x0 + sqrt(2E/m) (t - t0)."""
    out = x0 + np.sqrt(2.0 * energy / units.mass) * (np.asarray(t, dtype=float) - t0)
    return float(out) if out.ndim == 0 else out
