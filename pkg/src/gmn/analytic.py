"""Closed-form GMN for GHZ-diagonal and four-qubit cluster-diagonal states.

Both families come with matching certificates: a witness whose violation
is the value (lower bound) and an explicit decomposition into states that
are each PPT or entangled by exactly the right amount across one cut
(upper bound). The value is the same for both normalizations.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidSpec, PreconditionViolated, WrongGraph
from .negativity import Bipartition, bipartite_negativity, enumerate_bipartitions
from .states import (
    DensityMatrix,
    GhzDiagonalSpec,
    GraphDiagonalSpec,
    graph_basis,
    index_signs,
    linear_cluster_graph,
    qubit_dims,
    sign_index,
)
from .witness import (
    WitnessCertificate,
    all_cluster_witness_labels,
    check_normalization,
    cluster_witness,
    cluster_witness_expectation,
    ghz_witness,
)

METHODS = ("analytic-ghz", "analytic-cluster", "sdp")
BISEPARABLE_TOL = 1e-14
PPT_TOL = 1e-10
TIE_TOL = 1e-12


@dataclass(frozen=True)
class DecompositionTerm:
    weight: float
    state: DensityMatrix
    partition: Bipartition

    @cached_property
    def negativity(self) -> float:
        return bipartite_negativity(self.state, self.partition)


@dataclass(frozen=True)
class DecompositionCertificate:
    """Convex decomposition ``rho = sum_k p_k rho_k`` with one cut per term.

    ``certified_value`` is ``sum_k p_k N_{m_k}(rho_k)``, an upper bound on
    the renormalized GMN of the reconstructed state (and hence on the
    original one too).
    """

    terms: tuple[DecompositionTerm, ...]
    target: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if any(t.weight < 0 for t in self.terms):
            raise ValueError("decomposition weights must be nonnegative")

    @property
    def weight_sum(self) -> float:
        return float(sum(t.weight for t in self.terms))

    def reconstruct(self) -> np.ndarray:
        if not self.terms:
            raise ValueError("empty decomposition")
        return sum(t.weight * t.state.mat for t in self.terms)

    @cached_property
    def certified_value(self) -> float:
        return float(sum(t.weight * t.negativity for t in self.terms))

    def reconstruction_error(self, rho: DensityMatrix | np.ndarray | None = None) -> float:
        ref = self.target if rho is None else getattr(rho, "mat", rho)
        if ref is None:
            raise ValueError("no reference state to compare against")
        return float(np.max(np.abs(self.reconstruct() - ref)))

    def verify(self, rho: DensityMatrix, tol: float = 1e-9) -> bool:
        return abs(self.weight_sum - 1) <= 10 * tol and self.reconstruction_error(rho) <= tol


@dataclass(frozen=True)
class GmnResult:
    value: float
    lower_certificate: WitnessCertificate | None
    upper_certificate: DecompositionCertificate | None
    method: str
    normalization: str = "renormalized"
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")


# --------------------------------------------------------------------------
# GHZ-diagonal states


def _ghz_violations(spec: GhzDiagonalSpec) -> list[float]:
    return [abs(mu) - spec.weight_outside(i) for i, mu in enumerate(spec.mus)]


def _argmax_first(values: Iterable[float]) -> tuple[int, float]:
    """First index within ``TIE_TOL`` of the maximum, and the maximum."""
    vals = list(values)
    best = max(vals)
    i = next(k for k, v in enumerate(vals) if v >= best - TIE_TOL)
    return i, best


def ghz_biseparability_check(spec: GhzDiagonalSpec) -> bool:
    """``|mu_i| <= sum_{k != i} lambda_k`` for every ``i``."""
    if not isinstance(spec, GhzDiagonalSpec):
        raise InvalidSpec("expected a GhzDiagonalSpec")
    return all(v <= BISEPARABLE_TOL for v in _ghz_violations(spec))


def ghz_diagonal_gmn(spec: GhzDiagonalSpec, normalization: str = "renormalized") -> GmnResult:
    """``max_i {0, |mu_i| - w_i}`` with a witness and a decomposition when positive."""
    if not isinstance(spec, GhzDiagonalSpec):
        raise InvalidSpec("expected a GhzDiagonalSpec")
    check_normalization(normalization)
    i, best = _argmax_first(_ghz_violations(spec))
    if best <= BISEPARABLE_TOL:
        return GmnResult(0.0, None, None, "analytic-ghz", normalization,
                         {"biseparable": True})
    phase = -cmath.phase(spec.mus[i])
    lower = ghz_witness(spec.n, i, phase, normalization)
    upper = lemma5_decomposition(spec, i)
    return GmnResult(float(best), lower, upper, "analytic-ghz", normalization,
                     {"biseparable": False, "index": i, "phase": phase})


def _ghz_pair_block(n: int, i: int, lam: float, mu: complex) -> np.ndarray:
    d = 2**n
    m = np.zeros((d, d), dtype=complex)
    j = d - 1 - i
    m[i, i] = m[j, j] = lam
    m[i, j] = mu
    m[j, i] = np.conj(mu)
    return m


def _ghz_cut(n: int, i: int, k: int) -> Bipartition:
    """Cut splitting the parties where the bit strings of ``i`` and ``k`` differ."""
    diff = i ^ k
    members = [q for q in range(n) if (diff >> (n - 1 - q)) & 1]
    return Bipartition(tuple(members), n).canonical()


def lemma5_decomposition(spec: GhzDiagonalSpec, i_star: int) -> DecompositionCertificate:
    """Split ``rho`` into two-pair states ``rho_k`` built around the pair ``i_star``.

    With ``w = sum_{k != i*} lambda_k`` and ``p_k = lambda_k / w``, term ``k``
    holds ``p_k`` times the ``i*`` pair plus the whole ``k`` pair, has
    weight ``2 (p_k lambda_{i*} + lambda_k)`` and contributes
    ``p_k |mu_{i*}| - lambda_k`` across the cut separating where the bit
    strings of ``i*`` and ``k`` differ. The contributions add up to
    ``|mu_{i*}| - w``.
    """
    n, half = spec.n, spec.size
    if not 0 <= i_star < half:
        raise ValueError(f"index {i_star} out of range")
    lam, mus = spec.lambdas, spec.mus
    w = spec.weight_outside(i_star)
    if abs(mus[i_star]) < w - BISEPARABLE_TOL:
        raise PreconditionViolated(
            f"|mu_{i_star}| = {abs(mus[i_star]):.6g} < w = {w:.6g}; construction undefined"
        )
    dims = qubit_dims(n)
    target = _ghz_pair_block(n, i_star, lam[i_star], mus[i_star])
    terms = []
    if w <= 0:
        rho = DensityMatrix(target / (2 * lam[i_star]), dims)
        terms.append(DecompositionTerm(1.0, rho, Bipartition((0,), n)))
    else:
        for k in range(half):
            if k == i_star or lam[k] <= 0:
                continue
            p = lam[k] / w
            weight = 2 * (p * lam[i_star] + lam[k])
            block = (p * _ghz_pair_block(n, i_star, lam[i_star], mus[i_star])
                     + _ghz_pair_block(n, k, lam[k], mus[k]))
            terms.append(DecompositionTerm(weight, DensityMatrix(block / weight, dims),
                                           _ghz_cut(n, i_star, k)))
            target = target + _ghz_pair_block(n, k, lam[k], mus[k])
    return DecompositionCertificate(tuple(terms), target)


# --------------------------------------------------------------------------
# four-qubit cluster-diagonal states


def _xor(a: str, b: str) -> str:
    return "".join("+" if x == y else "-" for x, y in zip(a, b))


def _flip(s: str) -> str:
    return "-" if s == "+" else "+"


def _check_cluster(spec: GraphDiagonalSpec) -> None:
    if not isinstance(spec, GraphDiagonalSpec):
        raise InvalidSpec("expected a GraphDiagonalSpec")
    if spec.graph != linear_cluster_graph(4):
        raise WrongGraph(f"expected the 4-vertex linear chain, got edges {spec.graph.sorted_edges()}")


def cluster_violations(spec: GraphDiagonalSpec) -> dict[str, float]:
    """``-tr(W rho)`` for all 80 cluster witnesses, keyed by sign label."""
    _check_cluster(spec)
    f = spec.fidelities
    return {lab: -cluster_witness_expectation(f, lab) for lab in all_cluster_witness_labels()}


def cluster_biseparability_check(spec: GraphDiagonalSpec) -> bool:
    """No witness of either family is violated."""
    return all(v <= BISEPARABLE_TOL for v in cluster_violations(spec).values())


def _best_cluster_witness(spec: GraphDiagonalSpec, family: int | None = None) -> tuple[str, float]:
    viol = {k: v for k, v in cluster_violations(spec).items()
            if family is None or len(k) == family}
    labels = list(viol)
    i, best = _argmax_first(viol[k] for k in labels)
    return labels[i], best


def cluster_diagonal_gmn(spec: GraphDiagonalSpec, normalization: str = "renormalized") -> GmnResult:
    """Largest violation among the 16 + 64 cluster witnesses, clipped at zero."""
    check_normalization(normalization)
    lab, best = _best_cluster_witness(spec)
    if best <= BISEPARABLE_TOL:
        return GmnResult(0.0, None, None, "analytic-cluster", normalization,
                         {"biseparable": True})
    case = "two" if len(lab) == 4 else "three"
    lower = cluster_witness(lab, normalization)
    upper = appendixB_decomposition(spec, case)
    return GmnResult(float(best), lower, upper, "analytic-cluster", normalization,
                     {"biseparable": False, "witness": lab, "case": case})


@lru_cache(maxsize=None)
def _pair_cut(diff: str) -> Bipartition:
    """First cut on which ``(|a><a| + |b><b|)/2`` is PPT, for ``a XOR b = diff``."""
    rho = _graph_mixture({"++++": 0.5, diff: 0.5})
    for m in enumerate_bipartitions(4):
        if bipartite_negativity(rho, m) <= PPT_TOL:
            return m
    raise PreconditionViolated(f"labels differing by {diff} form no biseparable pair")


@lru_cache(maxsize=1)
def _cluster_basis() -> np.ndarray:
    return graph_basis(linear_cluster_graph(4))


def _graph_mixture(weights: Mapping[str, float]) -> DensityMatrix:
    b = _cluster_basis()
    diag = np.zeros(16)
    for lab, v in weights.items():
        diag[sign_index(lab)] += v
    if diag.min() < 0 or abs(diag.sum() - 1) > 1e-10:
        raise InvalidSpec("graph mixture weights must be a probability vector")
    # PSD by construction: nonnegative weights on an orthonormal basis
    return DensityMatrix((b * diag) @ b.conj().T, qubit_dims(4), check=False)


def _pure_term(weight: float, label: str) -> DecompositionTerm:
    return DecompositionTerm(weight, _graph_mixture({label: 1.0}), Bipartition((0,), 4))


def _pair_term(weight: float, a: str, b: str) -> DecompositionTerm:
    return DecompositionTerm(weight, _graph_mixture({a: 0.5, b: 0.5}), _pair_cut(_xor(a, b)))


def _half_turn_pairs(weights: Mapping[str, float]) -> list[tuple[float, str, str]]:
    """Split weights into equal-weight pairs of distinct labels.

    Lay the weights end to end on a circle of length ``S`` and pair every
    point with the one half a turn away. This is valid when no weight
    exceeds ``S / 2``.
    """
    items = [(k, v) for k, v in weights.items() if v > 0]
    total = sum(v for _, v in items)
    if not items:
        return []
    if max(v for _, v in items) > total / 2 + 1e-15:
        raise PreconditionViolated("one weight exceeds the others combined")
    half = total / 2
    cuts = [0.0]
    for _, v in items:
        cuts.append(cuts[-1] + v)
    cuts[-1] = total

    def owner(t: float) -> int:
        for idx in range(len(items)):
            if t < cuts[idx + 1]:
                return idx
        return len(items) - 1

    raw = sorted({c for c in cuts if c <= half} | {c - half for c in cuts if c >= half} | {half})
    # merge rounding slivers so no segment straddles a cut by 1 ulp
    eps = 1e-14 * total
    points = [raw[0]]
    for p in raw[1:]:
        if p - points[-1] > eps:
            points.append(p)
    points[-1] = half
    out = []
    for lo, hi in zip(points, points[1:]):
        mid = (lo + hi) / 2
        a, b = owner(mid), owner(mid + half)
        if a == b:
            raise PreconditionViolated("half-turn pairing met the same label twice")
        out.append((2 * (hi - lo), items[a][0], items[b][0]))
    return out


def _clip(x: float, what: str) -> float:
    if x < -1e-12:
        raise PreconditionViolated(f"{what} = {x:.3e} is negative")
    return max(0.0, x)


def _case_two(f: Mapping[str, float]) -> list[tuple]:
    """Terms for a largest violation at ``W_{++++}``, in the relabelled frame."""
    hub = "++++"
    mids = [i + j for i in "+-" for j in "+-"]
    partners = ([f"+{ij}+" for ij in mids if ij != "++"]
                + [f"+{ij}-" for ij in mids] + [f"-{ij}+" for ij in mids])
    ent = _clip(f[hub] - sum(f[p] for p in partners), "F_ent")
    terms: list[tuple] = [("pure", ent, hub)]
    terms += [("pair", 2 * f[p], hub, p) for p in partners]
    sigma = {f"-{ij}-": f[f"-{ij}-"] for ij in mids}
    terms += [("pair", w, a, b) for w, a, b in _half_turn_pairs(sigma)]
    return terms


def _case_three(f: Mapping[str, float], mu_nu: str) -> list[tuple]:
    """Terms for a largest violation at ``W_{++++ mu nu}``, in the relabelled frame."""
    plus = "++++"
    hub = f"-{mu_nu}-"
    mids = [i + j for i in "+-" for j in "+-"]
    plus_partners = [f"+{ij}+" for ij in mids if ij != "++"]
    hub_partners = [f"-{ij}-" for ij in mids if ij != mu_nu]
    t_plus = _clip(f[plus] - sum(f[p] for p in plus_partners), "F~_++++")
    t_hub = _clip(f[hub] - sum(f[p] for p in hub_partners), "F~_hub")
    loose = [f"+{ij}-" for ij in mids] + [f"-{ij}+" for ij in mids]
    b = sum(f[p] for p in loose)
    bs_plus = min(t_plus, b)
    bs_hub = b - bs_plus
    ent_plus = t_plus - bs_plus
    ent_hub = _clip(t_hub - bs_hub, "F_ent hub")
    terms: list[tuple] = [("pure", ent_plus, plus), ("pure", ent_hub, hub)]
    terms += [("pair", 2 * f[p], plus, p) for p in plus_partners]
    terms += [("pair", 2 * f[p], hub, p) for p in hub_partners]
    room = bs_plus
    for p in loose:
        to_plus = min(room, f[p])
        room -= to_plus
        terms.append(("pair", 2 * to_plus, plus, p))
        terms.append(("pair", 2 * (f[p] - to_plus), hub, p))
    return terms


def appendixB_decomposition(spec: GraphDiagonalSpec, case: str | None = None) -> DecompositionCertificate:
    """Decomposition certifying the largest witness violation as an upper bound.

    ``case`` is ``"two"`` (four-sign witness attains the maximum) or
    ``"three"`` (six-sign witness attains it); ``None`` picks it. Labels are
    XOR-shifted so that the maximizing witness sits at ``++++``, the
    construction is carried out there, and the labels are shifted back.
    Biseparable inputs (case one) have nothing to certify and raise
    :class:`PreconditionViolated`.
    """
    _check_cluster(spec)
    top_lab, top = _best_cluster_witness(spec)
    if case is None:
        case = "two" if len(top_lab) == 4 else "three"
    if case == "one" or top <= BISEPARABLE_TOL:
        raise PreconditionViolated("state is biseparable; no entangled part to certify")
    if case not in ("two", "three"):
        raise ValueError(f"unknown case {case!r}")
    family = 4 if case == "two" else 6
    lab, best = _best_cluster_witness(spec, family)
    if best < top - 1e-12:
        raise PreconditionViolated(
            f"largest violation {top:.6g} is not attained by a {family}-sign witness"
        )
    shift = lab[:4]
    f = {index_signs(k, 4): spec.fidelity(_xor(index_signs(k, 4), shift)) for k in range(16)}
    if case == "two":
        raw = _case_two(f)
    else:
        mu_nu = _xor(lab[4:], lab[1:3])
        raw = _case_three(f, mu_nu)
    terms = []
    for item in raw:
        if item[1] <= 0:
            continue
        if item[0] == "pure":
            terms.append(_pure_term(item[1], _xor(item[2], shift)))
        else:
            terms.append(_pair_term(item[1], _xor(item[2], shift), _xor(item[3], shift)))
    target = _graph_mixture(spec.fidelities).mat
    return DecompositionCertificate(tuple(terms), target)
