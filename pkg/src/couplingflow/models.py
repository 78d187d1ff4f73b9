"""Concrete flows: the anharmonic oscillator from the harmonic point, and the
double well chained from the anharmonic solution at g = 1/2.

The double well is written as

    H'(g') = (p^2/2 + x^2/2 + x^4/2) - g' x^2,

so its g' = 0 point is the anharmonic oscillator at g = 1/2, whose flowed
eigenvectors serve as the unperturbed basis.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .basis import harmonic_energies, hermite_functions, x_power_matrix
from .errors import ChainMismatchError
from .flow import DEFAULT_GAP_FLOOR, FlowState, make_flat_rhs
from .integrator import IntegrationStats, IntegratorConfig, integrate
from .oracle import ModelKind

CHAIN_POINT = 0.5
DEFAULT_X_GRID = np.linspace(-6.0, 6.0, 601)


@dataclass
class ModelSpec:
    """What to flow: the kind of model, N, and for the double well the
    anharmonic FlowState at g = 1/2 it starts from."""

    kind: ModelKind
    n_states: int
    aho_at_half: Optional[FlowState] = None

    def __post_init__(self):
        self.kind = ModelKind(self.kind)
        if self.n_states < 2:
            raise ValueError("n_states must be >= 2")
        if self.kind is ModelKind.DWP:
            if self.aho_at_half is None:
                raise ValueError("a DWP model needs the AHO solution at g=1/2")
            if self.aho_at_half.n_states != self.n_states:
                raise ValueError("embedded AHO solution has a different N")

    def initial_state(self) -> FlowState:
        if self.kind is ModelKind.AHO:
            return aho_initial(self.n_states)
        return dwp_initial(self.aho_at_half)

    def base_overlaps(self) -> np.ndarray:
        """Map from this model's g=0 eigenbasis to the harmonic basis."""
        if self.kind is ModelKind.AHO:
            return np.eye(self.n_states)
        return self.aho_at_half.overlaps


@dataclass
class SpectrumTable:
    g_values: np.ndarray
    energies: np.ndarray  # shape (len(g_values), N)
    levels_requested: List[int]
    states: List[FlowState] = field(default_factory=list, repr=False)
    model: Optional[ModelSpec] = field(default=None, repr=False)
    stats: Optional[IntegrationStats] = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.energies) != len(self.g_values):
            raise ValueError("one energy vector is required per coupling value")

    def state_at(self, g: float) -> FlowState:
        idx = np.flatnonzero(np.isclose(self.g_values, g, rtol=0.0, atol=1e-12))
        if idx.size == 0:
            raise KeyError(f"g={g} is not among the solved couplings")
        return self.states[int(idx[0])]

    def rows(self):
        """(g, level, energy) triples for the requested levels."""
        for g, e in zip(self.g_values, self.energies):
            for lvl in self.levels_requested:
                yield float(g), lvl, float(e[lvl])


def aho_initial(n: int) -> FlowState:
    return FlowState(0.0, harmonic_energies(n), x_power_matrix(4, n), np.eye(n))


def dwp_initial(aho_state_at_half: FlowState) -> FlowState:
    """Initial DWP state at g' = 0 from the flowed AHO state at g = 1/2.

    The perturbation -x^2 is carried into the AHO eigenbasis by the
    congruence C (-X2) C^T, with C[i, k] = <k|psi_i^AHO(1/2)>.
    """
    if abs(aho_state_at_half.g - CHAIN_POINT) > 1e-12:
        raise ChainMismatchError(
            f"DWP chaining needs the AHO state at g={CHAIN_POINT}, got g={aho_state_at_half.g}"
        )
    n = aho_state_at_half.n_states
    c = aho_state_at_half.overlaps
    h = c @ (-x_power_matrix(2, n)) @ c.T
    h = np.triu(h) + np.triu(h, 1).T
    return FlowState(0.0, aho_state_at_half.energies.copy(), h, np.eye(n))


def run_flow(model: ModelSpec, targets: Sequence[float],
             config: IntegratorConfig = IntegratorConfig(),
             gap_floor: float = DEFAULT_GAP_FLOOR, levels=None) -> SpectrumTable:
    """Integrate one trajectory of ``model`` through all ``targets``."""
    targets = np.asarray(targets, dtype=float)
    if targets.ndim != 1 or targets.size == 0:
        raise ValueError("at least one coupling value is required")
    if targets[0] < 0 or np.any(np.diff(targets) <= 0):
        raise ValueError("coupling values must be non-negative and strictly increasing")
    n = model.n_states
    init = model.initial_state()
    stats = IntegrationStats()
    ys = integrate(make_flat_rhs(n, gap_floor), init.pack(), 0.0, targets, config, stats)
    states = [FlowState.unpack(float(g), y, n) for g, y in zip(targets, ys)]
    if levels is None:
        levels = list(range(min(n, 6)))
    return SpectrumTable(
        targets, np.array([s.energies for s in states]), list(levels), states, model, stats
    )


def solve_aho(n: int, g_targets, config: IntegratorConfig = IntegratorConfig(),
              levels=None, gap_floor: float = DEFAULT_GAP_FLOOR):
    """Flow the AHO from g = 0; returns ``(table, state at the last target)``."""
    table = run_flow(ModelSpec(ModelKind.AHO, n), g_targets, config, gap_floor, levels)
    return table, table.states[-1]


def dwp_model(n: int, config: IntegratorConfig = IntegratorConfig(),
              gap_floor: float = DEFAULT_GAP_FLOOR) -> ModelSpec:
    _, at_half = solve_aho(n, [CHAIN_POINT], config, gap_floor=gap_floor)
    return ModelSpec(ModelKind.DWP, n, at_half)


def solve_dwp(n: int, gp_targets, config: IntegratorConfig = IntegratorConfig(),
              levels=None, gap_floor: float = DEFAULT_GAP_FLOOR) -> SpectrumTable:
    return run_flow(dwp_model(n, config, gap_floor), gp_targets, config, gap_floor, levels)


@dataclass
class DensityResult:
    x: np.ndarray
    density: np.ndarray
    raw_norm: float
    grid_ok: bool


def wavefunction_density(table: SpectrumTable, level: int, g_value: float,
                         x_grid=None) -> DensityResult:
    """|psi_level(x)|^2 at a solved coupling, normalized on the grid.

    The harmonic-basis coefficients are the flowed overlaps composed with the
    model's base overlaps (identity for the AHO, the AHO overlaps at g=1/2 for
    the DWP).
    """
    x = DEFAULT_X_GRID if x_grid is None else np.asarray(x_grid, dtype=float)
    state = table.state_at(g_value)
    n = state.n_states
    if not 0 <= level < n:
        raise ValueError(f"level must be in [0, {n})")
    coeffs = state.overlaps[level] @ table.model.base_overlaps()
    psi = coeffs @ hermite_functions(n, x)
    raw = psi * psi
    norm = float(np.trapezoid(raw, x)) if x.size > 1 else 0.0
    ok = norm >= 0.999
    if not ok:
        warnings.warn(f"grid holds only {norm:.4f} of the probability", RuntimeWarning)
    density = raw / norm if norm > 0 else raw
    return DensityResult(x, density, norm, ok)


def potential_curve(g_prime: float, x_grid) -> np.ndarray:
    """x^2/2 + x^4/2 - g' x^2 on the grid."""
    x = np.asarray(x_grid, dtype=float)
    x2 = x * x
    return 0.5 * x2 + 0.5 * x2 * x2 - g_prime * x2


def potential_minima(g_prime: float) -> np.ndarray:
    """Stationary minima of the double-well potential."""
    if g_prime <= 0.5:
        return np.array([0.0])
    r = np.sqrt(g_prime - 0.5)
    return np.array([-r, r])
