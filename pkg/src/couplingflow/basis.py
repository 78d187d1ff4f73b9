"""Harmonic-oscillator basis: energies, x-power matrix elements, eigenfunctions.

Units are m = omega = hbar = 1 throughout. Every operator is the N x N
top-left block of the infinite matrix in the number basis |0>, |1>, ...
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import UnsupportedPowerError

PI_QUARTER = np.pi ** -0.25


@dataclass(frozen=True)
class BasisConfig:
    n_states: int
    x_grid: Optional[Sequence[float]] = None

    def __post_init__(self):
        if int(self.n_states) != self.n_states or self.n_states < 2:
            raise ValueError(f"n_states must be an integer >= 2, got {self.n_states}")
        if self.x_grid is not None:
            grid = np.asarray(self.x_grid, dtype=float)
            if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
                raise ValueError("x_grid must be a strictly increasing 1-D sequence")


def _n(config) -> int:
    if isinstance(config, BasisConfig):
        return int(config.n_states)
    return int(BasisConfig(config).n_states)


def harmonic_energies(config) -> np.ndarray:
    """Return ``[i + 1/2 for i in range(N)]``."""
    return np.arange(_n(config), dtype=float) + 0.5


def x_power_matrix(power: int, config) -> np.ndarray:
    """Matrix of ``x**power`` in the harmonic basis for power in {1, 2, 4}.

    Closed forms follow from x = (a + a^dagger)/sqrt(2). Only the upper band
    is computed; the lower band is mirrored, so the result is exactly
    symmetric.
    """
    n = _n(config)
    i = np.arange(n, dtype=float)
    m = np.zeros((n, n))
    if power == 1:
        _set_band(m, 1, np.sqrt(i + 1.0) / np.sqrt(2.0))
    elif power == 2:
        m[np.diag_indices(n)] = i + 0.5
        _set_band(m, 2, np.sqrt((i + 1.0) * (i + 2.0)) / 2.0)
    elif power == 4:
        m[np.diag_indices(n)] = (6.0 * i * i + 6.0 * i + 3.0) / 4.0
        _set_band(m, 2, (2.0 * i + 3.0) * np.sqrt((i + 1.0) * (i + 2.0)) / 2.0)
        _set_band(m, 4, np.sqrt((i + 1.0) * (i + 2.0) * (i + 3.0) * (i + 4.0)) / 4.0)
    else:
        raise UnsupportedPowerError(f"x**{power} is not implemented (supported: 1, 2, 4)")
    return m


def _set_band(m, offset, values):
    """Write ``values[k]`` at (k, k+offset) and its mirror, for rows that fit."""
    count = max(m.shape[0] - offset, 0)
    rows = np.arange(count)
    values = values[:count]
    m[rows, rows + offset] = values
    m[rows + offset, rows] = values


def hermite_function(j: int, x):
    """Normalized harmonic-oscillator eigenfunction phi_j evaluated at ``x``.

    Uses the three-term recurrence on already-normalized functions,

        phi_{n+1} = x sqrt(2/(n+1)) phi_n - sqrt(n/(n+1)) phi_{n-1},

    so no factorials or raw Hermite polynomials appear. ``x`` may be a scalar
    or an array.
    """
    return hermite_functions(j + 1, x)[j]


def hermite_functions(n: int, x) -> np.ndarray:
    """All of phi_0..phi_{n-1} at ``x``; shape ``(n,) + np.shape(x)``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n,) + x.shape)
    out[0] = PI_QUARTER * np.exp(-0.5 * x * x)
    if n > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, n - 1):
        out[k + 1] = x * np.sqrt(2.0 / (k + 1)) * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out
