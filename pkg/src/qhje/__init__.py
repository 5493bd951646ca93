"""qhje: a one-dimensional quantum-trajectory engine.

Solves the quantum stationary Hamilton-Jacobi equation for arbitrary 1-D
potentials, integrates the associated quantum trajectories by two
independent routes, computes Jacobi-theorem (Floydian) trajectories for
comparison, and checks every identity with residual diagnostics.
"""

from .potentials import (
    FreePotential,
    Grid,
    HarmonicPotential,
    LinearPotential,
    TabulatedPotential,
    Units,
)
from .basis import BasisPair, Convention, solve_basis, wronskian, schrodinger_residual
from .action import (
    ActionField,
    Microstate,
    build_action,
    convert_mu_nu,
    f_factor,
    lagrangian,
    qshje_residual,
    quantum_coordinate,
    reconstruct_wavefunction,
)
from .dynamics import (
    EnergyRoots,
    Region,
    RootPolicy,
    Route,
    Trajectory,
    TrajectoryState,
    conservation_residual,
    derive_initial_state,
    fiqnl_residual,
    integrate_fiqnl,
    integrate_fiqnl_fixed,
    integrate_quadrature,
    jerk_rhs,
    solve_energy,
    velocity_law,
)
from .floyd import (
    FloydTrajectoryPoint,
    SigmaGamma,
    cycle_average_classical_limit,
    floyd_free_closed,
    floyd_time_numeric,
    sigma_gamma,
)
from .analytic import (
    FreeTrajectoryParams,
    classical_free_trajectory,
    free_action_of_time,
    free_trajectory,
    microstate_to_trajectory_constants,
)

__version__ = "0.1.0"

__all__ = [
    "Units", "Grid",
    "FreePotential", "LinearPotential", "HarmonicPotential", "TabulatedPotential",
    "Convention", "BasisPair", "solve_basis", "wronskian", "schrodinger_residual",
    "Microstate", "ActionField", "convert_mu_nu", "build_action", "qshje_residual",
    "quantum_coordinate", "f_factor", "lagrangian", "reconstruct_wavefunction",
    "Region", "Route", "RootPolicy", "TrajectoryState", "Trajectory", "EnergyRoots",
    "velocity_law", "derive_initial_state", "jerk_rhs", "fiqnl_residual",
    "integrate_quadrature", "integrate_fiqnl", "integrate_fiqnl_fixed",
    "conservation_residual", "solve_energy",
    "FloydTrajectoryPoint", "SigmaGamma", "sigma_gamma", "floyd_free_closed",
    "floyd_time_numeric", "cycle_average_classical_limit",
    "FreeTrajectoryParams", "free_trajectory", "free_action_of_time",
    "microstate_to_trajectory_constants", "classical_free_trajectory",
    "__version__",
]
