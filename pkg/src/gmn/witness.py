"""Fully decomposable witnesses and their decomposition data.

A witness ``W`` certifies the lower bound ``-tr(W rho) <= N_g(rho)`` once
``W = P_m + Q_m^{T_m}`` holds for every cut ``m`` with ``0 <= Q_m <= 1``
and ``P_m >= 0`` (plus ``P_m <= 1`` for the original normalization).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _ipm, linalg
from .errors import DimensionMismatch, NotDecomposable, TooLarge
from .negativity import Bipartition, enumerate_bipartitions
from .states import (
    DensityMatrix,
    GraphSpec,
    graph_basis,
    index_signs,
    linear_cluster_graph,
    parse_signs,
    qubit_dims,
    sign_index,
)

NORMALIZATIONS = ("original", "renormalized")
DECOMPOSITION_TOL = 1e-8


def check_normalization(name: str) -> str:
    if name not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}, got {name!r}")
    return name


@dataclass(frozen=True)
class WitnessCertificate:
    """Witness operator with one ``(P_m, Q_m)`` pair per canonical cut."""

    w: np.ndarray
    dims: tuple[int, ...]
    per_partition: Mapping[Bipartition, tuple[np.ndarray, np.ndarray]]
    normalization: str = "renormalized"
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        check_normalization(self.normalization)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=complex))

    @property
    def n(self) -> int:
        return len(self.dims)

    def expectation(self, rho: DensityMatrix) -> float:
        if rho.mat.shape != self.w.shape:
            raise DimensionMismatch(f"witness of shape {self.w.shape} vs state {rho.mat.shape}")
        return float(np.vdot(self.w.conj().T, rho.mat).real)


def _with_transposed_q(w: np.ndarray, dims, normalization: str, label: str) -> WitnessCertificate:
    """Certificate with ``P_m = 0`` and ``Q_m = W^{T_m}`` on every cut."""
    zero = np.zeros_like(w)
    parts = {m: (zero, linalg.partial_transpose(w, dims, m))
             for m in enumerate_bipartitions(len(dims))}
    return WitnessCertificate(w, tuple(dims), parts, normalization, label)


def decomposition_defects(cert: WitnessCertificate) -> dict[str, float]:
    """Worst violation of each certificate condition (zero means exact)."""
    out = {"hermiticity": linalg.hermiticity_error(cert.w), "missing_cuts": 0.0,
           "p_negative": 0.0, "p_above_one": 0.0, "q_negative": 0.0,
           "q_above_one": 0.0, "mismatch": 0.0}
    cuts = enumerate_bipartitions(cert.n)
    out["missing_cuts"] = float(sum(1 for m in cuts if m not in cert.per_partition))
    for m in cuts:
        if m not in cert.per_partition:
            continue
        p, q = (np.asarray(a, dtype=complex) for a in cert.per_partition[m])
        wp = linalg.eigvalsh(linalg.hermitian_part(p), tol=np.inf)
        wq = linalg.eigvalsh(linalg.hermitian_part(q), tol=np.inf)
        resid = cert.w - p - linalg.partial_transpose(q, cert.dims, m)
        out["hermiticity"] = max(out["hermiticity"], linalg.hermiticity_error(p),
                                 linalg.hermiticity_error(q))
        out["p_negative"] = max(out["p_negative"], -wp[0])
        out["q_negative"] = max(out["q_negative"], -wq[0])
        out["q_above_one"] = max(out["q_above_one"], wq[-1] - 1)
        if cert.normalization == "original":
            out["p_above_one"] = max(out["p_above_one"], wp[-1] - 1)
        out["mismatch"] = max(out["mismatch"], float(np.max(np.abs(resid))))
    return {k: max(0.0, float(v)) for k, v in out.items()}


def verify_fully_decomposable(cert: WitnessCertificate, tol: float = DECOMPOSITION_TOL) -> bool:
    try:
        defects = decomposition_defects(cert)
    except (ValueError, ArithmeticError):
        return False
    return defects["missing_cuts"] == 0 and all(v <= tol for v in defects.values())


def witness_lower_bound(cert: WitnessCertificate, rho: DensityMatrix) -> float:
    """``-tr(W rho)`` for a verified certificate."""
    if not verify_fully_decomposable(cert):
        raise NotDecomposable(f"witness {cert.label or '<unnamed>'} fails the decomposition check")
    return -cert.expectation(rho)


# --------------------------------------------------------------------------
# GHZ witnesses


def ghz_position(position: int | str, n: int) -> int:
    """Index ``i < 2**(n-1)`` of the pair ``(x, xbar)`` with ``x`` starting at 0."""
    half = 2 ** (n - 1)
    if isinstance(position, str):
        bits = position.strip()
        if len(bits) != n or set(bits) - {"0", "1"}:
            raise ValueError(f"position {position!r} is not an {n}-bit string")
        i = int(bits, 2)
        return i if i < half else 2**n - 1 - i
    i = int(position)
    if not 0 <= i < half:
        raise ValueError(f"position {i} out of range for {n} qubits")
    return i


def ghz_witness(n: int, position: int | str = 0, phase: float = 0.0,
                normalization: str = "renormalized") -> WitnessCertificate:
    """``W = 1/2 - |phi><phi|`` with ``phi = (|x> + e^{i phase}|xbar>)/sqrt 2``.

    On a GHZ-diagonal state with entry ``mu_i`` at the chosen position,
    ``phase = -arg(mu_i)`` gives ``-tr(W rho) = |mu_i| - w_i``.
    """
    if n > 8:
        raise TooLarge(f"{n} qubits exceeds the limit of 8")
    i = ghz_position(position, n)
    d = 2**n
    phi = np.zeros(d, dtype=complex)
    phi[i] = 1 / np.sqrt(2)
    phi[d - 1 - i] = np.exp(1j * phase) / np.sqrt(2)
    w = 0.5 * np.eye(d) - np.outer(phi, phi.conj())
    label = f"ghz[{index_signs(i, n).replace('+', '0').replace('-', '1')}]"
    return _with_transposed_q(w, qubit_dims(n), normalization, label)


# --------------------------------------------------------------------------
# four-qubit cluster witnesses


def _flip(s: str) -> str:
    return "-" if s == "+" else "+"


def cluster_witness_1_weights(signs: str) -> dict[str, float]:
    """Graph-basis projector weights of ``W_{abcd}`` beyond the ``1/2`` offset."""
    a, _, _, d = parse_signs(signs, 4)
    out = {parse_signs(signs, 4): 1.0}
    for i in "+-":
        for j in "+-":
            out[_flip(a) + i + j + _flip(d)] = 0.5
    return out


def cluster_witness_2_weights(signs: str) -> dict[str, float]:
    s = parse_signs(signs, 6)
    a, _, _, d, mu, nu = s
    return {s[:4]: 1.0, _flip(a) + mu + nu + _flip(d): 1.0}


def _xor(a: str, b: str) -> str:
    return "".join("+" if x == y else "-" for x, y in zip(a, b))


def _graph_diagonal(weights: Mapping[str, float], graph: GraphSpec, offset: float = 0.0) -> np.ndarray:
    diag = np.full(2**graph.n, offset)
    for label, v in weights.items():
        diag[sign_index(label)] += v
    b = graph_basis(graph)
    return (b * diag) @ b.conj().T


def _cluster_matrix(weights: Mapping[str, float], graph: GraphSpec) -> np.ndarray:
    return _graph_diagonal({k: -v for k, v in weights.items()}, graph, 0.5)


# W_{++++}^{T_m} dips to -1/4 on the two cuts separating the chain ends
# from their neighbours; moving this graph-diagonal P_m out of W fixes it.
_W1_P_LABELS = ("+-++", "++-+")
_W1_P_CUTS = ((0, 2), (0, 3))


def cluster_witness_1(signs: str, normalization: str = "renormalized") -> WitnessCertificate:
    """``W_{abcd} = 1/2 - |abcd><abcd| - 1/2 sum_ij |a' i j d'><a' i j d'|`` (primes flip the sign).

    ``P_m = 0`` works on five cuts. On ``02|13`` and ``03|12`` the
    certificate uses ``P_m = (|a b' c d><..| + |a b c' d><..|) / 2``, which
    keeps ``Q_m`` within ``[0, 1]``.
    """
    s = parse_signs(signs, 4)
    g = linear_cluster_graph(4)
    w = _cluster_matrix(cluster_witness_1_weights(s), g)
    cert = _with_transposed_q(w, qubit_dims(4), normalization, f"W{s}")
    p = _graph_diagonal({_xor(lab, s): 0.5 for lab in _W1_P_LABELS}, g)
    parts = dict(cert.per_partition)
    for m in parts:
        if m.members in _W1_P_CUTS:
            parts[m] = (p, linalg.partial_transpose(w - p, cert.dims, m))
    return WitnessCertificate(w, cert.dims, parts, normalization, cert.label)


def cluster_witness_2(signs: str, normalization: str = "renormalized") -> WitnessCertificate:
    """``W_{abcdmn} = 1/2 - |abcd><abcd| - |a' m n d'><a' m n d'|``."""
    s = parse_signs(signs, 6)
    g = linear_cluster_graph(4)
    w = _cluster_matrix(cluster_witness_2_weights(s), g)
    return _with_transposed_q(w, qubit_dims(4), normalization, f"W{s}")


def cluster_witness_expectation(fidelities: Mapping[str, float], signs: str) -> float:
    """``tr(W rho)`` of a cluster witness on a cluster-diagonal state, from fidelities alone."""
    s = parse_signs(signs)
    weights = cluster_witness_1_weights(s) if len(s) == 4 else cluster_witness_2_weights(s)
    return 0.5 - sum(v * fidelities.get(k, 0.0) for k, v in weights.items())


def all_cluster_witness_labels() -> list[str]:
    """The 16 four-sign and 64 six-sign labels, each in lexicographic order with ``+`` first."""
    return [index_signs(k, 4) for k in range(16)] + [index_signs(k, 6) for k in range(64)]


def cluster_witness(signs: str, normalization: str = "renormalized") -> WitnessCertificate:
    s = parse_signs(signs)
    if len(s) == 4:
        return cluster_witness_1(s, normalization)
    return cluster_witness_2(s, normalization)


# --------------------------------------------------------------------------
# feasibility fallback for externally supplied witnesses


def find_decomposition(w, dims: Sequence[int], normalization: str = "renormalized",
                       tol: float = 1e-9) -> WitnessCertificate:
    """Search for ``(P_m, Q_m)`` numerically when a witness arrives without them.

    For each cut this minimizes a uniform slack ``t`` subject to
    ``Q + t >= 0``, ``1 + t - Q >= 0``, ``W - Q^{T_m} + t >= 0`` (and
    ``1 + t - W + Q^{T_m} >= 0`` under the original normalization). The
    witness is decomposable on that cut iff the optimal ``t`` is ``<= 0``.
    Raises :class:`NotDecomposable` when some cut needs ``t > tol``.
    """
    check_normalization(normalization)
    w = linalg.check_hermitian(w)
    dims = tuple(int(x) for x in dims)
    d = w.shape[0]
    if int(np.prod(dims)) != d:
        raise DimensionMismatch(f"dims {dims} do not match a {d}x{d} witness")
    basis = _ipm.hermitian_basis(d)
    eye = np.eye(d, dtype=complex)
    zero = np.zeros_like(eye)
    parts = {}
    for m in enumerate_bipartitions(len(dims)):
        perm = linalg.partial_transpose_permutation(dims, m)
        groups = [_ipm.Group(d, basis), _ipm.Group(d, _ipm.identity_basis(d), cost=eye / d)]
        t_term = _ipm.Term(1, 1.0)
        blocks = [
            _ipm.Block(zero, [_ipm.Term(0, 1.0), t_term]),
            _ipm.Block(eye, [_ipm.Term(0, -1.0), t_term]),
            _ipm.Block(w, [_ipm.Term(0, -1.0, perm), t_term]),
        ]
        if normalization == "original":
            blocks.append(_ipm.Block(eye - w, [_ipm.Term(0, 1.0, perm), t_term]))
        prob = _ipm.Problem(groups, blocks)
        wmin = float(np.linalg.eigvalsh(w)[0])
        wmax = float(np.linalg.eigvalsh(w)[-1])
        t0 = 1.0 + max(0.0, -wmin + 0.5, wmax - 0.5)
        x0 = np.concatenate([0.5 * (basis.conj().T @ eye.ravel()).real, [t0]])
        res = _ipm.solve(prob, x0, tol=min(tol, 1e-9))
        t = float(res.x[-1])
        if res.status == "numerical_failure" or t > tol:
            raise NotDecomposable(f"cut {m} needs slack {t:.3e}")
        q = linalg.hermitian_part(prob.group_matrix(0, prob.split(res.x)[0]))
        parts[m] = (w - linalg.partial_transpose(q, dims, m), q)
    return WitnessCertificate(w, dims, parts, normalization, "external")
