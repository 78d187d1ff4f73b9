"""Flow state and the exact right-hand sides of the coupling-flow equations.

For H(g) = H0 + g*V with instantaneous eigenpairs (E_i, psi_i) the flow is

    dE_i/dg    = V_ii
    dV_ij/dg   = sum_{k!=i} V_ik V_kj/(E_i-E_k) + sum_{k!=j} V_ik V_kj/(E_j-E_k)
    dc_ij/dg   = sum_{k!=i} V_ki/(E_i-E_k) c_kj

where V_ij = <psi_i(g)|V|psi_j(g)> and c_ij = <psi_j(0)|psi_i(g)>.

Writing the connection R_ik = V_ik/(E_i-E_k) (zero on the diagonal and for
uncoupled pairs), R is antisymmetric and the three right-hand sides become
diag(V), R V + (R V)^T and R C.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NearDegeneracyError

DEFAULT_GAP_FLOOR = 1e-8


@dataclass
class FlowState:
    """Eigen-data at one coupling value.

    ``overlaps[i, j] = <psi_j(0)|psi_i(g)>``: rows are flowed states, columns
    the initial basis.
    """

    g: float
    energies: np.ndarray
    h_int: np.ndarray
    overlaps: np.ndarray

    def __post_init__(self):
        self.energies = np.asarray(self.energies, dtype=float)
        self.h_int = np.asarray(self.h_int, dtype=float)
        self.overlaps = np.asarray(self.overlaps, dtype=float)
        n = self.energies.shape[0]
        if self.h_int.shape != (n, n) or self.overlaps.shape != (n, n):
            raise ValueError("h_int and overlaps must be N x N with N = len(energies)")
        if not np.array_equal(self.h_int, self.h_int.T):
            scale = max(1.0, float(np.abs(self.h_int).max()))
            if not np.allclose(self.h_int, self.h_int.T, rtol=0.0, atol=1e-10 * scale):
                raise ValueError("h_int must be symmetric")
            self.h_int = 0.5 * (self.h_int + self.h_int.T)

    @property
    def n_states(self) -> int:
        return self.energies.shape[0]

    def pack(self) -> np.ndarray:
        """Flat layout: energies, h_int (row-major), overlaps (row-major)."""
        return np.concatenate([self.energies, self.h_int.ravel(), self.overlaps.ravel()])

    @classmethod
    def unpack(cls, g, y, n) -> "FlowState":
        e, h, c = split_flat(y, n)
        return cls(g, e.copy(), h.copy(), c.copy())


@dataclass
class FlowDerivative:
    d_energies: np.ndarray
    d_h_int: np.ndarray
    d_overlaps: np.ndarray

    def pack(self) -> np.ndarray:
        return np.concatenate([self.d_energies, self.d_h_int.ravel(), self.d_overlaps.ravel()])


def flat_size(n: int) -> int:
    return n + 2 * n * n


def split_flat(y, n):
    """Views of the energies, h_int and overlaps blocks of a flat vector."""
    nn = n * n
    return y[:n], y[n:n + nn].reshape(n, n), y[n + nn:n + 2 * nn].reshape(n, n)


def connection(energies, h_int, gap_floor=DEFAULT_GAP_FLOOR, g=None):
    """Antisymmetric connection R_ik = h_ik/(E_i - E_k) over coupled pairs.

    Pairs with h_ik == 0 exactly (e.g. opposite parity) contribute nothing and
    may be degenerate or even cross. A coupled pair closer than ``gap_floor``
    raises NearDegeneracyError.
    """
    diff = energies[:, None] - energies[None, :]
    coupled = h_int != 0.0
    np.fill_diagonal(coupled, False)
    if coupled.any():
        gaps = np.where(coupled, np.abs(diff), np.inf)
        flat = int(np.argmin(gaps))
        if gaps.flat[flat] < gap_floor:
            i, k = divmod(flat, energies.shape[0])
            raise NearDegeneracyError((i, k), gaps.flat[flat], g)
    safe = np.where(coupled, diff, 1.0)
    r = np.where(coupled, h_int / safe, 0.0)
    assert np.array_equal(r, -r.T), "connection lost antisymmetry"
    return r


def flow_rhs_arrays(energies, h_int, overlaps, gap_floor=DEFAULT_GAP_FLOOR, g=None):
    r = connection(energies, h_int, gap_floor, g)
    m = r @ h_int
    # M + M^T is symmetric bit-for-bit, unlike R V - V R.
    return np.diagonal(h_int).copy(), m + m.T, r @ overlaps


def flow_rhs(state: FlowState, gap_floor: float = DEFAULT_GAP_FLOOR) -> FlowDerivative:
    de, dh, dc = flow_rhs_arrays(state.energies, state.h_int, state.overlaps, gap_floor, state.g)
    return FlowDerivative(de, dh, dc)


def make_flat_rhs(n: int, gap_floor: float = DEFAULT_GAP_FLOOR):
    """Right-hand side ``f(g, y)`` over the packed state vector."""

    def rhs(g, y):
        e, h, c = split_flat(y, n)
        de, dh, dc = flow_rhs_arrays(e, h, c, gap_floor, g)
        out = np.empty_like(y)
        oe, oh, oc = split_flat(out, n)
        oe[:] = de
        oh[:] = dh
        oc[:] = dc
        return out

    return rhs


def min_coupled_gap(state: FlowState, coupling_floor: float = 0.0):
    """Smallest |E_i - E_k| over pairs with |h_ik| > coupling_floor.

    Returns ``(gap, (i, k))`` or ``(inf, None)`` when no pair is coupled.
    """
    e = state.energies
    mask = np.abs(state.h_int) > coupling_floor
    np.fill_diagonal(mask, False)
    if not mask.any():
        return np.inf, None
    gaps = np.where(mask, np.abs(e[:, None] - e[None, :]), np.inf)
    flat = int(np.argmin(gaps))
    i, k = divmod(flat, e.shape[0])
    return float(gaps.flat[flat]), (min(i, k), max(i, k))
