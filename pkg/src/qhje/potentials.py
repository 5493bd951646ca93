"""Units, uniform grids, and the 1-D potential catalogue.

Every potential exposes ``v``, ``dv`` and ``d2v`` accessors that accept
scalars or arrays.  The tabulated variant interpolates with a cubic
spline, so its derivative accessors are consistent with the values to
interpolation order only (see :meth:`TabulatedPotential.finite_difference_check`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidGrid

__all__ = [
    "Units",
    "Grid",
    "Potential",
    "FreePotential",
    "LinearPotential",
    "HarmonicPotential",
    "TabulatedPotential",
]


def _like(x, values):
    """Return ``values`` as a float scalar when ``x`` was scalar."""
    out = np.asarray(values, dtype=float)
    if np.ndim(x) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Units:
    """Fundamental constants of the problem.

    ``hbar = 0`` is accepted so that classical-reduction identities can be
    evaluated; the field and trajectory solvers reject it.
    """

    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.hbar) or self.hbar < 0.0:
            raise ValueError(f"hbar must be finite and >= 0, got {self.hbar}")
        if not np.isfinite(self.mass) or self.mass <= 0.0:
            raise ValueError(f"mass must be finite and > 0, got {self.mass}")

    def require_quantum(self):
        """Raise unless hbar is strictly positive."""
        if self.hbar <= 0.0:
            raise ValueError("operation requires hbar > 0")


@dataclass(frozen=True)
class Grid:
    """Uniform spatial grid with at least 16 points."""

    x_min: float
    x_max: float
    n_points: int
    x: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise InvalidGrid("grid endpoints must be finite")
        if self.x_min >= self.x_max:
            raise InvalidGrid(f"x_min must be < x_max, got [{self.x_min}, {self.x_max}]")
        if int(self.n_points) != self.n_points or self.n_points < 16:
            raise InvalidGrid(f"n_points must be an integer >= 16, got {self.n_points}")
        xs = np.linspace(self.x_min, self.x_max, int(self.n_points))
        xs.flags.writeable = False
        object.__setattr__(self, "x", xs)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.x_min - 1e-12) and np.all(x <= self.x_max + 1e-12))

    def refined(self, factor: int = 2) -> "Grid":
        """Same span with the spacing divided by ``factor``."""
        return Grid(self.x_min, self.x_max, (self.n_points - 1) * factor + 1)


class Potential:
    """Base class: a classical potential with two derivatives."""

    kind = "abstract"

    def v(self, x):
        raise NotImplementedError

    def dv(self, x):
        raise NotImplementedError

    def d2v(self, x):
        raise NotImplementedError

    def energy_scale(self, x) -> float:
        """Magnitude of V over a set of points, used for guard bands."""
        return float(np.max(np.abs(self.v(np.asarray(x, dtype=float)))))


@dataclass(frozen=True)
class FreePotential(Potential):
    """V = 0 everywhere."""

    kind = "free"

    def v(self, x):
        return _like(x, np.zeros_like(np.asarray(x, dtype=float)))

    def dv(self, x):
        return _like(x, np.zeros_like(np.asarray(x, dtype=float)))

    def d2v(self, x):
        return _like(x, np.zeros_like(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class LinearPotential(Potential):
    """V = slope * x with slope != 0 (use FreePotential for slope 0)."""

    slope: float
    kind = "linear"

    def __post_init__(self):
        if not np.isfinite(self.slope) or self.slope == 0.0:
            raise ValueError("linear potential needs a finite nonzero slope")

    def v(self, x):
        return _like(x, self.slope * np.asarray(x, dtype=float))

    def dv(self, x):
        return _like(x, np.full_like(np.asarray(x, dtype=float), self.slope))

    def d2v(self, x):
        return _like(x, np.zeros_like(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class HarmonicPotential(Potential):
    """V = stiffness * x**2 / 2."""

    stiffness: float = 1.0
    kind = "harmonic"

    def __post_init__(self):
        if not np.isfinite(self.stiffness) or self.stiffness <= 0.0:
            raise ValueError("harmonic stiffness must be finite and > 0")

    def v(self, x):
        x = np.asarray(x, dtype=float)
        return _like(x, 0.5 * self.stiffness * x * x)

    def dv(self, x):
        return _like(x, self.stiffness * np.asarray(x, dtype=float))

    def d2v(self, x):
        return _like(x, np.full_like(np.asarray(x, dtype=float), self.stiffness))


class TabulatedPotential(Potential):
    """Potential sampled on nodes, interpolated with a cubic spline.

    Derivatives come from the spline, so ``d2v`` is piecewise linear and
    accurate to the interpolation order only.
    """

    kind = "tabulated"

    def __init__(self, x_nodes, v_nodes):
        x_nodes = np.asarray(x_nodes, dtype=float)
        v_nodes = np.asarray(v_nodes, dtype=float)
        if x_nodes.ndim != 1 or x_nodes.size < 8:
            raise ValueError("tabulated potential needs >= 8 nodes")
        if x_nodes.shape != v_nodes.shape:
            raise ValueError("x_nodes and v_nodes must have the same shape")
        if not (np.all(np.isfinite(x_nodes)) and np.all(np.isfinite(v_nodes))):
            raise ValueError("tabulated nodes must be finite")
        if np.any(np.diff(x_nodes) <= 0):
            raise ValueError("x_nodes must be strictly increasing")
        self.x_nodes = x_nodes
        self.v_nodes = v_nodes
        self._spline = CubicSpline(x_nodes, v_nodes)
        self._dspline = self._spline.derivative(1)
        self._d2spline = self._spline.derivative(2)

    def v(self, x):
        return _like(x, self._spline(np.asarray(x, dtype=float)))

    def dv(self, x):
        return _like(x, self._dspline(np.asarray(x, dtype=float)))

    def d2v(self, x):
        return _like(x, self._d2spline(np.asarray(x, dtype=float)))

    def finite_difference_check(self, x, step=None):
        """Cross-check dv/d2v against central differences of v.

        Returns the max absolute deviations (dv, d2v); both should be at
        the interpolation-order level for smooth data.
        """
        x = np.asarray(x, dtype=float)
        h = step if step is not None else 1e-4 * (self.x_nodes[-1] - self.x_nodes[0])
        dv_fd = (self.v(x + h) - self.v(x - h)) / (2 * h)
        d2v_fd = (self.v(x + h) - 2 * self.v(x) + self.v(x - h)) / (h * h)
        return (
            float(np.max(np.abs(dv_fd - self.dv(x)))),
            float(np.max(np.abs(d2v_fd - self.d2v(x)))),
        )
