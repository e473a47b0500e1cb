"""Statistical force on a partition wall splitting a harmonic trap.

One side of the wall carries a Dirichlet condition, the other a Neumann
condition. With ``N`` identical particles on each side, the difference in
their pressures on the wall follows from the level coefficients in
:mod:`~partition_force.spectrum`, the grand-canonical machinery in
:mod:`~partition_force.statmech` and the closed forms in
:mod:`~partition_force.approx`. :mod:`~partition_force.oracle` re-derives the
level coefficients by shooting.
"""

from partition_force.errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    FitError,
    OverflowDomain,
    PartitionForceError,
    PoleError,
    RegimeWarning,
    StiffnessError,
    VerificationFailure,
)
from partition_force.spectrum import (
    ApproxForm,
    BoundaryCondition,
    PhysicalScales,
    delta_f_level,
    delta_f_level_approx,
    delta_f_table,
    fermion_zero_t_force,
    level_energy,
)
from partition_force.statmech import (
    EnsembleParams,
    ForceEstimate,
    FugacityResult,
    Statistics,
    SumMode,
    exact_force,
    net_force,
    solve_fugacity,
    total_number,
)

__version__ = "0.1.0"
