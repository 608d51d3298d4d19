"""Dense primal-dual interior-point method for block-diagonal Hermitian LMIs.

The solver handles problems of the form::

    minimize    sum_g Re tr(C_g V_g)
    subject to  S_b = F0_b + sum_t coef_t * T_t(V_{g(t)})  >= 0   for every block b

where each variable ``V_g`` is a real vector of coordinates in an
orthonormal basis (full Hermitian matrices, or a multiple of the
identity) and ``T_t`` is an entry permutation such as a partial
transpose. The dual multipliers ``Z_b`` satisfy ``A*(Z) = c`` at
optimality and give the dual objective ``-sum_b tr(F0_b Z_b)``.

Steps follow Mehrotra's predictor-corrector scheme with the HKM search
direction. The primal iterate is kept feasible from a strictly feasible
start, so the primal objective is an honest upper bound at every
iteration; the dual iterate starts infeasible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

STEP_FRACTION = 0.95


def hermitian_basis(d: int) -> np.ndarray:
    """Row-major ``vec`` of an orthonormal basis of ``d x d`` Hermitian matrices, as columns."""
    u = np.zeros((d * d, d * d), dtype=complex)
    col = 0
    for j in range(d):
        u[j * d + j, col] = 1.0
        col += 1
    r = 1 / math.sqrt(2)
    for j in range(d):
        for k in range(j + 1, d):
            u[j * d + k, col] = r
            u[k * d + j, col] = r
            u[j * d + k, col + 1] = 1j * r
            u[k * d + j, col + 1] = -1j * r
            col += 2
    return u


def identity_basis(d: int) -> np.ndarray:
    """One coordinate ``t`` standing for ``t * I``."""
    return np.eye(d, dtype=complex).reshape(d * d, 1)


@dataclass
class Group:
    dim: int
    basis: np.ndarray
    cost: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.basis.shape[1]


@dataclass
class Term:
    """Contribution ``coef * V^H T(X_g) V`` of group ``g`` to a block.

    ``perm`` is the flat entry permutation of ``T`` (identity when absent)
    and ``compress`` the isometry ``V`` (identity when absent).
    """

    group: int
    coef: float
    perm: np.ndarray | None = None
    compress: np.ndarray | None = None

    def inverse(self) -> np.ndarray | None:
        if self.perm is None:
            return None
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        return inv

    def apply(self, v: np.ndarray, d: int) -> np.ndarray:
        """Image of ``vec(X)`` as a flat block vector."""
        y = v if self.perm is None else v[self.perm]
        if self.compress is None:
            return y
        c = self.compress
        return (c.conj().T @ y.reshape(d, d) @ c).ravel()

    def pull(self, y: np.ndarray, pinv: np.ndarray | None) -> np.ndarray:
        """Adjoint map back to ``vec`` of the group matrix."""
        if self.compress is not None:
            c = self.compress
            k = c.shape[1]
            y = (c @ y.reshape(k, k) @ c.conj().T).ravel()
        return y if pinv is None else y[pinv]

    def image(self, basis: np.ndarray) -> np.ndarray:
        """Block-vector images of every basis element, as columns."""
        g = basis if self.perm is None else basis[self.perm]
        if self.compress is None:
            return g
        c = self.compress
        return np.kron(c.conj().T, c.T) @ g


@dataclass
class Block:
    const: np.ndarray
    terms: list[Term]
    name: str = ""

    @property
    def dim(self) -> int:
        return self.const.shape[0]


@dataclass
class Problem:
    groups: list[Group]
    blocks: list[Block]

    def __post_init__(self) -> None:
        self.offsets = np.cumsum([0] + [g.size for g in self.groups])
        self._inv = [[t.inverse() for t in b.terms] for b in self.blocks]
        self._images: list[list[np.ndarray | None]] = [[None] * len(b.terms) for b in self.blocks]
        for b, imgs in zip(self.blocks, self._images):
            if any(t.compress is not None for t in b.terms):
                imgs[:] = [t.image(self.groups[t.group].basis) for t in b.terms]

    @property
    def nvars(self) -> int:
        return int(self.offsets[-1])

    def split(self, x: np.ndarray) -> list[np.ndarray]:
        return [x[self.offsets[i]:self.offsets[i + 1]] for i in range(len(self.groups))]

    def group_matrix(self, g: int, xg: np.ndarray) -> np.ndarray:
        d = self.groups[g].dim
        return (self.groups[g].basis @ xg).reshape(d, d)

    def cost_vector(self) -> np.ndarray:
        parts = []
        for g in self.groups:
            if g.cost is None:
                parts.append(np.zeros(g.size))
            else:
                parts.append((g.basis.conj().T @ np.asarray(g.cost, dtype=complex).ravel()).real)
        return np.concatenate(parts)

    def linear(self, x: np.ndarray) -> list[np.ndarray]:
        """``A(x)`` block by block, without the constant part."""
        vecs = [g.basis @ xg for g, xg in zip(self.groups, self.split(x))]
        out = []
        for b in self.blocks:
            acc = np.zeros(b.dim * b.dim, dtype=complex)
            for t in b.terms:
                acc += t.coef * t.apply(vecs[t.group], self.groups[t.group].dim)
            out.append(acc.reshape(b.dim, b.dim))
        return out

    def slack(self, x: np.ndarray) -> list[np.ndarray]:
        return [b.const + a for b, a in zip(self.blocks, self.linear(x))]

    def adjoint(self, ys: Sequence[np.ndarray]) -> np.ndarray:
        """``A*(Y)_a = sum_b Re tr(F_{a,b} Y_b)``."""
        parts = [np.zeros(g.basis.shape[0], dtype=complex) for g in self.groups]
        for b, inv, y in zip(self.blocks, self._inv, ys):
            v = y.ravel()
            for t, pinv in zip(b.terms, inv):
                parts[t.group] += t.coef * t.pull(v, pinv)
        return np.concatenate(
            [(g.basis.conj().T @ p).real for g, p in zip(self.groups, parts)]
        )

    def schur(self, zs: Sequence[np.ndarray], sinvs: Sequence[np.ndarray]) -> np.ndarray:
        """``M_ab = Re tr(F_a Z F_b S^-1)`` summed over blocks."""
        acc: dict[tuple[int, int], np.ndarray] = {}
        m = np.zeros((self.nvars, self.nvars))
        off = self.offsets
        for b, inv, imgs, z, si in zip(self.blocks, self._inv, self._images, zs, sinvs):
            k = np.kron(z, si.T)
            if imgs[0] is not None:
                # dense path for compressed blocks
                for t, gt in zip(b.terms, imgs):
                    kg = k.conj().T @ gt
                    for u, gu in zip(b.terms, imgs):
                        g, h = t.group, u.group
                        m[off[g]:off[g + 1], off[h]:off[h + 1]] += (
                            t.coef * u.coef * (kg.conj().T @ gu).real
                        )
                continue
            for t, pt in zip(b.terms, inv):
                kt = k if pt is None else k[pt]
                for u, pu in zip(b.terms, inv):
                    if u.group < t.group:
                        continue
                    ktu = kt if pu is None else kt[:, pu]
                    key = (t.group, u.group)
                    if key in acc:
                        acc[key] += t.coef * u.coef * ktu
                    else:
                        acc[key] = t.coef * u.coef * ktu
        for (g, h), x in acc.items():
            blk = (self.groups[g].basis.conj().T @ x @ self.groups[h].basis).real
            m[off[g]:off[g + 1], off[h]:off[h + 1]] += blk
            if g != h:
                m[off[h]:off[h + 1], off[g]:off[g + 1]] += blk.T
        return 0.5 * (m + m.T)


@dataclass
class IpmResult:
    x: np.ndarray
    s: list[np.ndarray]
    z: list[np.ndarray]
    primal: float
    dual: float
    residual: float
    iterations: int
    status: str
    trace: list[dict] = field(default_factory=list)

    @property
    def gap(self) -> float:
        return self.primal - self.dual


def _herm(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def _inner(xs, ys) -> float:
    return float(sum(np.vdot(x, y).real for x, y in zip(xs, ys)))


def _max_step(xs, dxs) -> float:
    """Largest ``alpha <= 1`` keeping every ``X + alpha dX`` positive definite."""
    worst = 0.0
    for x, dx in zip(xs, dxs):
        l = np.linalg.cholesky(x)
        li = sla.solve_triangular(l, np.eye(l.shape[0]), lower=True)
        w = np.linalg.eigvalsh(_herm(li @ dx @ li.conj().T))
        worst = max(worst, -float(w[0]))
    return 1.0 if worst <= 1.0 else 1.0 / worst


def _inv_blocks(ss):
    out = []
    for s in ss:
        c = sla.cho_factor(s, lower=True)
        out.append(_herm(sla.cho_solve(c, np.eye(s.shape[0], dtype=complex))))
    return out


def solve(
    problem: Problem,
    x0: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 200,
    on_iteration: Callable[[dict], None] | None = None,
) -> IpmResult:
    """Run the predictor-corrector loop from a strictly feasible ``x0``."""
    c = problem.cost_vector()
    x = np.array(x0, dtype=float)
    s = problem.slack(x)
    for blk in s:
        np.linalg.cholesky(blk)
    z = [np.eye(b.dim, dtype=complex) for b in problem.blocks]
    nu = sum(b.dim for b in problem.blocks)
    consts = [b.const for b in problem.blocks]
    trace: list[dict] = []
    status = "max_iter"
    it = 0

    def record(k, pobj, dobj, res, mu):
        row = {"iteration": k, "primal": pobj, "dual": dobj, "gap": pobj - dobj,
               "dual_residual": res, "primal_residual": 0.0, "mu": mu}
        trace.append(row)
        if on_iteration is not None:
            on_iteration(row)

    try:
        for it in range(max_iter + 1):
            r = problem.adjoint(z) - c
            res = float(np.max(np.abs(r))) if r.size else 0.0
            pobj = float(c @ x)
            dobj = -_inner(consts, z)
            mu = _inner(z, s) / nu
            record(it, pobj, dobj, res, mu)
            if abs(pobj - dobj) <= tol and res <= tol:
                status = "optimal"
                break
            if it == max_iter:
                break
            if not all(np.all(np.isfinite(a)) for a in s + z):
                status = "numerical_failure"
                break

            sinv = _inv_blocks(s)
            m = problem.schur(z, sinv)
            try:
                fac = sla.cho_factor(m, lower=True)
            except np.linalg.LinAlgError:
                m = m + 1e-14 * max(1.0, float(np.max(np.abs(np.diag(m))))) * np.eye(m.shape[0])
                fac = sla.cho_factor(m, lower=True)

            # predictor
            dx = sla.cho_solve(fac, -c)
            ds = problem.linear(dx)
            dz = [-zi - _herm(zi @ dsi @ si) for zi, dsi, si in zip(z, ds, sinv)]
            ap = _max_step(s, ds)
            ad = _max_step(z, dz)
            mu_aff = _inner([zi + ad * d for zi, d in zip(z, dz)],
                            [si + ap * d for si, d in zip(s, ds)]) / nu
            sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

            # corrector
            rs = [sigma * mu * si - zi - dzi @ dsi @ si
                  for si, zi, dzi, dsi in zip(sinv, z, dz, ds)]
            rhs = problem.adjoint([_herm(a) for a in rs]) + r
            dx = sla.cho_solve(fac, rhs)
            ds = problem.linear(dx)
            dz = [_herm(a - zi @ dsi @ si) for a, zi, dsi, si in zip(rs, z, ds, sinv)]
            ap = min(1.0, STEP_FRACTION * _max_step(s, ds))
            ad = min(1.0, STEP_FRACTION * _max_step(z, dz))

            x = x + ap * dx
            s = problem.slack(x)
            z = [_herm(zi + ad * d) for zi, d in zip(z, dz)]
    except (np.linalg.LinAlgError, ValueError):
        status = "numerical_failure"

    r = problem.adjoint(z) - c
    return IpmResult(
        x=x, s=s, z=z,
        primal=float(c @ x),
        dual=-_inner(consts, z),
        residual=float(np.max(np.abs(r))) if r.size else 0.0,
        iterations=it,
        status=status,
        trace=trace,
    )


def write_trace(path, rows: Sequence[dict]) -> None:
    cols = ["iteration", "primal", "dual", "gap", "primal_residual", "dual_residual", "mu"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)
