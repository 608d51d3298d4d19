"""Dense complex linear algebra for small multiparty operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Parties are
numbered ``0..n-1`` from the most significant tensor factor, and every
multiparty operator travels with its list of local dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NotHermitian, TooLarge

HERMITIAN_TOL = 1e-12
MAX_DIM = 256

_JACOBI_OFF_TOL = 1e-13
_JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted ascending with matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise TooLarge(f"dimension {a.shape[0]} exceeds the cap of {MAX_DIM}")
    return a


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def check_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``m`` as a complex array, raising :class:`NotHermitian` if needed."""
    a = as_matrix(m)
    err = hermiticity_error(a)
    if err > tol:
        raise NotHermitian(f"matrix deviates from Hermitian by {err:.3e} > {tol:.1e}")
    return a


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(mats: Iterable) -> np.ndarray:
    return reduce(kron, mats, np.ones((1, 1), dtype=complex))


def _round_robin(d: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pair schedule covering every index pair once in ``d - 1`` rounds."""
    players = list(range(d + (d % 2)))
    k = len(players)
    rounds = []
    for _ in range(k - 1):
        ps, qs = [], []
        for i in range(k // 2):
            a, b = players[i], players[k - 1 - i]
            if a < d and b < d:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def hermitian_eig(m, tol: float = HERMITIAN_TOL) -> Spectrum:
    """Diagonalize a Hermitian matrix with cyclic complex Jacobi rotations.

    The input is checked against ``tol`` and symmetrized as ``(M + M^H)/2``
    before rotating. A sweep visits every index pair once in round-robin
    order, so the rotations of one round act on disjoint pairs and are
    applied together. Sweeps stop once the off-diagonal Frobenius norm is
    below ``1e-13 * max(1, ||M||_F)``, or after 100 sweeps.

    Parameters
    ----------
    m : array_like
        Square Hermitian matrix.
    tol : float
        Maximal allowed ``|M[j,k] - conj(M[k,j])|``.

    Returns
    -------
    Spectrum
        Ascending eigenvalues and orthonormal eigenvectors as columns.
    """
    a = hermitian_part(check_hermitian(m, tol)).copy()
    d = a.shape[0]
    v = np.eye(d, dtype=complex)
    if d <= 1:
        return Spectrum(a.diagonal().real.copy(), v)

    scale = max(1.0, float(np.linalg.norm(a)))
    target = _JACOBI_OFF_TOL * scale
    schedule = _round_robin(d)
    for _ in range(_JACOBI_MAX_SWEEPS):
        if np.linalg.norm(a - np.diag(a.diagonal())) < target:
            break
        for p, q in schedule:
            apq = a[p, q]
            r = np.abs(apq)
            live = r > 1e-18 * scale
            if not live.any():
                continue
            p, q, apq, r = p[live], q[live], apq[live], r[live]
            phase = (apq / r).conj()
            tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # columns (p, q) <- (p, q) @ [[c, s], [-s*phase, c*phase]]
            g21, g22 = -s * phase, c * phase
            ap, aq = a[:, p], a[:, q]
            a[:, p], a[:, q] = ap * c + aq * g21, ap * s + aq * g22
            rp, rq = a[p, :], a[q, :]
            a[p, :] = c[:, None] * rp + g21.conj()[:, None] * rq
            a[q, :] = s[:, None] * rp + g22.conj()[:, None] * rq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p], v[:, q]
            v[:, p], v[:, q] = vp * c + vq * g21, vp * s + vq * g22

    w = a.diagonal().real
    order = np.argsort(w, kind="stable")
    return Spectrum(w[order].copy(), v[:, order])


def eigvalsh(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    return hermitian_eig(m, tol).eigenvalues


def _party_indices(m, n: int) -> tuple[int, ...]:
    members = getattr(m, "members", m)
    parties = tuple(sorted(set(int(i) for i in members)))
    if any(i < 0 or i >= n for i in parties):
        raise DimensionMismatch(f"party indices {parties} invalid for {n} parties")
    return parties


def partial_transpose(rho, dims: Sequence[int], m) -> np.ndarray:
    """Transpose the indices of the parties listed in ``m``.

    ``m`` is a :class:`~gmn.negativity.Bipartition` or any iterable of party
    indices. The result is a pure permutation of the entries of ``rho``, so
    applying it twice returns the input bit for bit.
    """
    a = np.asarray(rho)
    dims = [int(x) for x in dims]
    total = int(np.prod(dims)) if dims else 1
    if a.ndim != 2 or a.shape != (total, total):
        raise DimensionMismatch(f"matrix of shape {a.shape} does not match dims {dims}")
    n = len(dims)
    parties = _party_indices(m, n)
    axes = list(range(2 * n))
    for i in parties:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    return a.reshape(dims + dims).transpose(axes).reshape(total, total)


def partial_transpose_permutation(dims: Sequence[int], m) -> np.ndarray:
    """Flat index map ``p`` with ``partial_transpose(V).ravel() == V.ravel()[p]``."""
    total = int(np.prod(dims))
    idx = np.arange(total * total).reshape(total, total)
    return partial_transpose(idx, dims, m).ravel()


def is_psd(m, tol: float = 1e-9) -> bool:
    return bool(min_eigenvalue(m) >= -tol)


def min_eigenvalue(m) -> float:
    w = eigvalsh(m)
    return float(w[0]) if w.size else 0.0
