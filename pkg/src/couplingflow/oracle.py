"""Brute-force check: assemble the truncated Hamiltonian and diagonalize it
with cyclic Jacobi rotations. Shares nothing with the flow code path except
the basis matrix elements."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .basis import harmonic_energies, x_power_matrix
from .errors import NoConvergenceError

MAX_SWEEPS = 100


class ModelKind(str, Enum):
    AHO = "aho"
    DWP = "dwp"


@dataclass
class OracleResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # column k pairs with eigenvalues[k]
    sweeps: int = 0


def build_hamiltonian(kind, g: float, n: int) -> np.ndarray:
    """AHO: H0 + g x^4.  DWP (g = g'): H0 + x^4/2 - g' x^2."""
    kind = ModelKind(kind)
    h = np.diag(harmonic_energies(n))
    if kind is ModelKind.AHO:
        return h + g * x_power_matrix(4, n)
    return h + 0.5 * x_power_matrix(4, n) - g * x_power_matrix(2, n)


def _off_norm(a):
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return np.linalg.norm(off)


def jacobi_diagonalize(m, sweep_tol: float = 1e-12) -> OracleResult:
    """Cyclic Jacobi eigen-decomposition of a real symmetric matrix.

    Sweeps over all (p, q) pairs until the off-diagonal Frobenius norm drops
    below ``sweep_tol`` times the norm of the diagonal. Eigenvalues come back
    ascending; exact ties are ordered by the row index of the largest
    eigenvector component.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0.0))):
        raise ValueError("matrix must be symmetric")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)

    sweeps = 0
    while True:
        off = _off_norm(a)
        if off <= sweep_tol * np.linalg.norm(np.diagonal(a)) or off == 0.0:
            break
        if sweeps >= MAX_SWEEPS:
            raise NoConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                small = 100.0 * abs(apq)
                if abs(a[p, p]) + small == abs(a[p, p]) and abs(a[q, q]) + small == abs(a[q, q]):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) plane rotation.
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]

    w = np.diagonal(a).copy()
    lead = np.argmax(np.abs(v), axis=0)
    order = np.lexsort((lead, w))
    return OracleResult(w[order], v[:, order], sweeps)


def oracle_spectrum(kind, g: float, n: int, sweep_tol: float = 1e-12) -> OracleResult:
    return jacobi_diagonalize(build_hamiltonian(kind, g, n), sweep_tol)
