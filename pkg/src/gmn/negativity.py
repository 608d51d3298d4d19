"""Bipartitions, bipartite negativity and the pure-state GMN."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NotPure, TooLarge
from .states import DensityMatrix

MAX_PARTIES = 8
NEGATIVE_EIGENVALUE_CUTOFF = 1e-10
PURITY_TOL = 1e-9


@dataclass(frozen=True, order=True)
class Bipartition:
    """Cut ``members | complement`` of ``n`` parties."""

    members: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        mem = tuple(sorted(set(int(i) for i in self.members)))
        if not mem or len(mem) >= self.n:
            raise DimensionMismatch(f"{mem} is not a nonempty proper subset of {self.n} parties")
        if mem[0] < 0 or mem[-1] >= self.n:
            raise DimensionMismatch(f"party indices {mem} out of range for {self.n} parties")
        object.__setattr__(self, "members", mem)

    def complement(self) -> "Bipartition":
        return Bipartition(tuple(i for i in range(self.n) if i not in self.members), self.n)

    def canonical(self) -> "Bipartition":
        return self if 0 in self.members else self.complement()

    def side_dims(self, dims: Sequence[int]) -> tuple[int, int]:
        inside = int(np.prod([dims[i] for i in self.members]))
        return inside, int(np.prod(dims)) // inside

    def label(self) -> str:
        rest = self.complement().members
        return "".join(map(str, self.members)) + "|" + "".join(map(str, rest))

    def __str__(self) -> str:
        return self.label()


PartitionSet = tuple[Bipartition, ...]


def enumerate_bipartitions(n: int) -> PartitionSet:
    """All ``2**(n-1) - 1`` cuts in canonical form (party 0 on the listed side)."""
    if n < 2:
        raise DimensionMismatch("at least two parties are needed for a bipartition")
    if n > MAX_PARTIES:
        raise TooLarge(f"{n} parties exceeds the limit of {MAX_PARTIES}")
    out = []
    for size in range(1, n):
        for rest in itertools.combinations(range(1, n), size - 1):
            out.append(Bipartition((0,) + rest, n))
    return tuple(out)


def negativity_of_matrix(mat: np.ndarray, dims: Sequence[int], m) -> float:
    """Sum of ``|lambda|`` over eigenvalues of the partial transpose below ``-1e-10``.

    ``mat`` need not be normalized; the result scales linearly with it.
    """
    w = linalg.eigvalsh(linalg.partial_transpose(mat, dims, m), tol=1e-10)
    return float(-w[w < -NEGATIVE_EIGENVALUE_CUTOFF].sum())


def bipartite_negativity(rho: DensityMatrix, m: Bipartition) -> float:
    if m.n != rho.n:
        raise DimensionMismatch(f"bipartition of {m.n} parties applied to a {rho.n}-party state")
    return negativity_of_matrix(rho.mat, rho.dims, m)


def negativity_bound(dims: Sequence[int], m: Bipartition) -> float:
    """``(d_min - 1) / 2`` with ``d_min`` the smaller side of the cut."""
    return (min(m.side_dims(dims)) - 1) / 2


def pure_state_gmn(psi: DensityMatrix) -> float:
    """Minimum bipartite negativity over all cuts of a pure state."""
    top = linalg.eigvalsh(psi.mat)[-1]
    if top < 1 - PURITY_TOL:
        raise NotPure(f"largest eigenvalue {top:.12g} below 1 - {PURITY_TOL}")
    return min(bipartite_negativity(psi, m) for m in enumerate_bipartitions(psi.n))


def min_negativity_cut(rho: DensityMatrix) -> tuple[Bipartition, float]:
    """Cut with the smallest negativity; ties go to the first enumerated cut."""
    best = None
    for m in enumerate_bipartitions(rho.n):
        v = bipartite_negativity(rho, m)
        if best is None or v < best[1] - 1e-12:
            best = (m, v)
    return best
