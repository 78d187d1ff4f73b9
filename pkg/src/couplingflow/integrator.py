"""Adaptive Dormand-Prince 5(4) integrator that lands exactly on requested points."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StepLimitExceeded, StepUnderflow

MIN_STEP = 1e-14
SAFETY = 0.9
FAC_MIN, FAC_MAX = 0.2, 5.0

# Dormand & Prince (1980), RK5(4)7M.
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B = np.array(A[6] + [0.0])
B_HAT = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                  -92097 / 339200, 187 / 2100, 1 / 40])
E = B - B_HAT
ORDER = 5


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    initial_step: float = 1e-3
    max_step: float = 0.05
    max_steps: int = 10_000_000

    def __post_init__(self):
        if min(self.rel_tol, self.abs_tol, self.initial_step) <= 0:
            raise ValueError("tolerances and initial_step must be positive")
        if self.max_step < self.initial_step:
            raise ValueError("max_step must be >= initial_step")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


@dataclass
class IntegrationStats:
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0


def _dp_step(rhs, g, y, h, k1):
    k = [k1]
    for s in range(1, 7):
        ys = y + h * sum(a * ki for a, ki in zip(A[s], k) if a != 0.0)
        k.append(rhs(g + C[s] * h, ys))
    # Stage 7 is evaluated at the 5th-order solution (FSAL).
    y_new = y + h * sum(b * ki for b, ki in zip(B, k) if b != 0.0)
    err = h * sum(e * ki for e, ki in zip(E, k) if e != 0.0)
    return y_new, err, k[6]


def integrate(rhs, y0, g0, g_targets, config: IntegratorConfig = IntegratorConfig(),
              stats: IntegrationStats | None = None):
    """Integrate ``y' = rhs(g, y)`` from ``g0`` and return ``y`` at each target.

    Each step is accepted when the embedded error estimate, scaled per
    component by ``max(abs_tol, rel_tol*|y|)``, has max-norm <= 1. Steps are
    clipped so every target is hit exactly. Errors raised by ``rhs``
    propagate unchanged.
    """
    targets = [float(t) for t in g_targets]
    if any(b <= a for a, b in zip(targets, targets[1:])):
        raise ValueError("g_targets must be strictly increasing")
    if targets and targets[0] < g0:
        raise ValueError("first target lies before g0")
    stats = stats if stats is not None else IntegrationStats()

    y = np.array(y0, dtype=float)
    g = float(g0)
    out = []
    h = min(config.initial_step, config.max_step)
    k1 = None
    steps = 0
    for target in targets:
        while g < target:
            if k1 is None:
                k1 = rhs(g, y)
                stats.evaluations += 1
            step = min(h, config.max_step)
            landing = g + step >= target
            if landing:
                step = target - g
            if steps >= config.max_steps:
                raise StepLimitExceeded(f"max_steps={config.max_steps} reached at g={g:.6g}")
            steps += 1
            y_new, err, k_last = _dp_step(rhs, g, y, step, k1)
            stats.evaluations += 6
            scale = np.maximum(config.abs_tol,
                               config.rel_tol * np.maximum(np.abs(y), np.abs(y_new)))
            ratio = float(np.max(np.abs(err) / scale)) if err.size else 0.0
            if not np.isfinite(ratio):
                ratio = np.inf
            if ratio <= 1.0:
                stats.accepted += 1
                g = target if landing else g + step
                y, k1 = y_new, k_last
                fac = FAC_MAX if ratio == 0.0 else SAFETY * ratio ** (-1.0 / ORDER)
                grown = step * min(FAC_MAX, max(FAC_MIN, fac))
                # A step shortened only to land on a target does not shrink h.
                h = max(h, grown) if landing else grown
            else:
                stats.rejected += 1
                fac = 0.0 if not np.isfinite(ratio) else SAFETY * ratio ** (-1.0 / ORDER)
                h = step * max(FAC_MIN, fac)
            if h < MIN_STEP:
                raise StepUnderflow(f"required step {h:.3e} below {MIN_STEP:g} at g={g:.6g}")
        out.append(y.copy())
    return out
