"""Time-dependent evolution in the adiabatic basis for a linear ramp g = v t.

With a_n = alpha_n exp(-i Theta_n) the amplitudes obey

    d alpha_n/dg = sum_{m!=n} R_nm alpha_m exp(i(Theta_n - Theta_m))
    d Theta_n/dg = E_n / v

where R is the same antisymmetric connection that drives the eigenvectors
(R_nm = h_nm/(E_n - E_m)). The generator is anti-Hermitian, so the norm of
alpha is conserved. Amplitudes and phases are integrated together with the
flow in one real vector.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ZeroRampRateError
from .flow import DEFAULT_GAP_FLOOR, FlowDerivative, FlowState, connection, flat_size, split_flat
from .integrator import IntegrationStats, IntegratorConfig, integrate
from .models import ModelSpec

STEPS_PER_OSCILLATION = 8


@dataclass
class NonadiabaticState:
    flow: FlowState
    amplitudes: np.ndarray
    phases: np.ndarray
    ramp_rate: float

    @property
    def time(self) -> float:
        return self.flow.g / self.ramp_rate

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def lab_amplitudes(self) -> np.ndarray:
        """a_n = alpha_n exp(-i Theta_n)."""
        return self.amplitudes * np.exp(-1j * self.phases)

    def pack(self) -> np.ndarray:
        return np.concatenate([self.flow.pack(), self.amplitudes.real,
                               self.amplitudes.imag, self.phases])


def _split(y, n):
    base = flat_size(n)
    flow = y[:base]
    return flow, y[base:base + n], y[base + n:base + 2 * n], y[base + 2 * n:base + 3 * n]


def _amplitude_rhs(r, energies, alpha, theta, v):
    u = np.exp(1j * theta)
    d_alpha = u * (r @ (alpha * np.conj(u)))
    return d_alpha, energies / v


def nonadiabatic_rhs(state: NonadiabaticState, gap_floor: float = DEFAULT_GAP_FLOOR):
    """Derivatives ``(FlowDerivative, d amplitudes, d phases)`` with respect to g."""
    v = state.ramp_rate
    if v == 0:
        raise ZeroRampRateError("ramp rate must be nonzero")
    f = state.flow
    r = connection(f.energies, f.h_int, gap_floor, f.g)
    m = r @ f.h_int
    flow_d = FlowDerivative(np.diagonal(f.h_int).copy(), m + m.T, r @ f.overlaps)
    d_alpha, d_theta = _amplitude_rhs(r, f.energies, state.amplitudes, state.phases, v)
    return flow_d, d_alpha, d_theta


def make_augmented_rhs(n: int, v: float, gap_floor: float = DEFAULT_GAP_FLOOR):
    if v == 0:
        raise ZeroRampRateError("ramp rate must be nonzero")

    def rhs(g, y):
        flow, re, im, theta = _split(y, n)
        e, h, c = split_flat(flow, n)
        r = connection(e, h, gap_floor, g)
        m = r @ h
        d_alpha, d_theta = _amplitude_rhs(r, e, re + 1j * im, theta, v)
        out = np.empty_like(y)
        dflow, dre, dim, dtheta = _split(out, n)
        de, dh, dc = split_flat(dflow, n)
        de[:] = np.diagonal(h)
        dh[:] = m + m.T
        dc[:] = r @ c
        dre[:] = d_alpha.real
        dim[:] = d_alpha.imag
        dtheta[:] = d_theta
        return out

    return rhs


@dataclass
class RampTrajectory:
    g: np.ndarray
    t: np.ndarray
    probabilities: np.ndarray  # (samples, N)
    phases: np.ndarray  # (samples, N)
    energies: np.ndarray  # (samples, N)
    states: list
    ramp_rate: float
    max_step: float
    stats: IntegrationStats

    def unitarity_drift(self) -> np.ndarray:
        return np.abs(self.probabilities.sum(axis=1) - 1.0)


def oscillation_step_cap(energies, v: float) -> float:
    """Largest step resolving the fastest phase difference with 8 steps per period."""
    spread = float(np.max(energies) - np.min(energies))
    if spread == 0.0:
        return np.inf
    return abs(v) * 2.0 * np.pi / (STEPS_PER_OSCILLATION * spread)


def evolve_ramp(model: ModelSpec, v: float, g_max: float, init_level: int = 0,
                samples=None, config: IntegratorConfig = IntegratorConfig(),
                gap_floor: float = DEFAULT_GAP_FLOOR,
                cap_step: bool = False) -> RampTrajectory:
    """Evolve from the adiabatic state ``init_level`` along g = v t up to ``g_max``.

    ``samples`` are the couplings at which the state is recorded (default:
    61 evenly spaced points on [0, g_max]). Returns populations |alpha_n|^2
    and dynamical phases at each sample.
    """
    n = model.n_states
    if v == 0:
        raise ZeroRampRateError("ramp rate must be nonzero")
    if v < 0:
        raise ValueError("only increasing ramps (v > 0) are supported")
    if not 0 <= init_level < n:
        raise ValueError(f"init_level must be in [0, {n})")
    if g_max < 0:
        raise ValueError("g_max must be non-negative")
    if samples is None:
        samples = np.linspace(0.0, g_max, 61) if g_max > 0 else np.array([0.0])
    samples = np.asarray(samples, dtype=float)
    if samples[0] < 0 or samples[-1] > g_max + 1e-12 or np.any(np.diff(samples) <= 0):
        raise ValueError("samples must be strictly increasing within [0, g_max]")

    flow0 = model.initial_state()
    alpha0 = np.zeros(n, dtype=complex)
    alpha0[init_level] = 1.0
    start = NonadiabaticState(flow0, alpha0, np.zeros(n), v)

    max_step = config.max_step
    if cap_step:
        max_step = min(max_step, oscillation_step_cap(flow0.energies, v))
        config = replace(config, max_step=max_step,
                         initial_step=min(config.initial_step, max_step))

    stats = IntegrationStats()
    ys = integrate(make_augmented_rhs(n, v, gap_floor), start.pack(), 0.0, samples, config, stats)

    states = []
    for g, y in zip(samples, ys):
        flow, re, im, theta = _split(y, n)
        states.append(NonadiabaticState(FlowState.unpack(float(g), flow, n),
                                        re + 1j * im, theta.copy(), v))
    return RampTrajectory(
        g=samples,
        t=samples / v,
        probabilities=np.array([s.probabilities() for s in states]),
        phases=np.array([s.phases for s in states]),
        energies=np.array([s.flow.energies for s in states]),
        states=states,
        ramp_rate=v,
        max_step=max_step,
        stats=stats,
    )
