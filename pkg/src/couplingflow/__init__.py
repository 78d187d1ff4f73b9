"""Coupling-flow solver: eigenvalues, interaction matrix elements and
eigenvector overlaps of H(g) = H0 + g*V evolved by exact ODEs in g."""

__version__ = "0.1.0"

from .basis import BasisConfig, harmonic_energies, hermite_function, hermite_functions, x_power_matrix
from .errors import (
    ChainMismatchError,
    CouplingFlowError,
    NearDegeneracyError,
    NoConvergenceError,
    RhsError,
    StepLimitExceeded,
    StepUnderflow,
    UnsupportedPowerError,
    ZeroRampRateError,
)
from .flow import FlowDerivative, FlowState, flow_rhs, min_coupled_gap
from .integrator import IntegratorConfig, integrate
from .models import (
    ModelSpec,
    SpectrumTable,
    aho_initial,
    dwp_initial,
    dwp_model,
    potential_curve,
    solve_aho,
    solve_dwp,
    wavefunction_density,
)
from .nonadiabatic import NonadiabaticState, evolve_ramp, nonadiabatic_rhs
from .oracle import ModelKind, OracleResult, build_hamiltonian, jacobi_diagonalize
