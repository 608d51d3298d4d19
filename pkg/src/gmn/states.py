"""Reference states: graph states, GHZ- and graph-diagonal families, noise.

Computational basis index ``b`` of an ``n``-qubit register stores qubit 0 in
the most significant bit. Graph-basis labels are strings over ``+``/``-``;
internally label ``a`` maps to the integer whose bit for qubit ``i`` (again
MSB first) is 1 when ``a[i] == '-'``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, InitVar
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, InvalidSpec, TooLarge

MAX_QUBITS = 8

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# (a, b) -> (power of i, letter) with a*b = i**power * letter
_PRODUCT = {
    ("I", "I"): (0, "I"), ("I", "X"): (0, "X"), ("I", "Y"): (0, "Y"), ("I", "Z"): (0, "Z"),
    ("X", "I"): (0, "X"), ("X", "X"): (0, "I"), ("X", "Y"): (1, "Z"), ("X", "Z"): (3, "Y"),
    ("Y", "I"): (0, "Y"), ("Y", "X"): (3, "Z"), ("Y", "Y"): (0, "I"), ("Y", "Z"): (1, "X"),
    ("Z", "I"): (0, "Z"), ("Z", "X"): (1, "Y"), ("Z", "Y"): (3, "X"), ("Z", "Z"): (0, "I"),
}


@dataclass(frozen=True)
class DensityMatrix:
    """Density operator together with the local dimension of each party.

    Construction checks Hermiticity (1e-12), unit trace (1e-10) and a
    minimal eigenvalue of at least -1e-9. Pass ``check=False`` only for
    intermediate objects whose validity is established elsewhere.
    """

    mat: np.ndarray
    dims: tuple[int, ...]
    check: InitVar[bool] = True

    def __post_init__(self, check: bool) -> None:
        m = linalg.as_matrix(self.mat).copy()
        dims = tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != m.shape[0]:
            raise DimensionMismatch(f"dims {dims} do not match matrix size {m.shape[0]}")
        if check:
            linalg.check_hermitian(m)
            tr = np.trace(m)
            if abs(tr - 1.0) > 1e-10:
                raise InvalidSpec(f"trace {tr.real:.12g} differs from 1")
            lo = linalg.min_eigenvalue(m)
            if lo < -1e-9:
                raise InvalidSpec(f"negative eigenvalue {lo:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_vector(cls, psi, dims: Sequence[int]) -> "DensityMatrix":
        v = np.asarray(psi, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()), tuple(dims))

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityMatrix":
        d = int(np.prod(dims))
        return cls(np.eye(d) / d, tuple(dims))

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def qubit_dims(n: int) -> tuple[int, ...]:
    return (2,) * n


# --------------------------------------------------------------------------
# Pauli strings and stabilizer groups


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis times ``1j ** phase``."""

    letters: str
    phase: int = 0

    def __post_init__(self) -> None:
        if any(c not in _SINGLE for c in self.letters):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls("I" * n)

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def sign(self) -> int:
        if self.phase % 2:
            raise ValueError(f"{self} is not Hermitian")
        return 1 if self.phase == 0 else -1

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise DimensionMismatch("Pauli strings act on different numbers of qubits")
        phase = self.phase + other.phase
        out = []
        for a, b in zip(self.letters, other.letters):
            k, c = _PRODUCT[(a, b)]
            phase += k
            out.append(c)
        return PauliString("".join(out), phase)

    def commutes_with(self, other: "PauliString") -> bool:
        anti = sum(1 for a, b in zip(self.letters, other.letters) if "I" not in (a, b) and a != b)
        return anti % 2 == 0

    def __str__(self) -> str:
        return ["+", "+i", "-", "-i"][self.phase] + self.letters

    def _action(self) -> tuple[int, np.ndarray]:
        # P|b> = phi[b] |b ^ flip>
        n = self.n
        b = np.arange(2**n)
        flip = 0
        phi = np.full(2**n, 1j**self.phase, dtype=complex)
        for i, c in enumerate(self.letters):
            bit = (b >> (n - 1 - i)) & 1
            if c in "XY":
                flip |= 1 << (n - 1 - i)
            if c == "Z":
                phi *= 1 - 2 * bit
            elif c == "Y":
                phi *= 1j * (1 - 2 * bit)
        return flip, phi

    def matrix(self) -> np.ndarray:
        return (1j**self.phase) * linalg.kron_all(_SINGLE[c] for c in self.letters)

    def conjugate(self, rho: np.ndarray) -> np.ndarray:
        """Return ``P rho P^dagger`` by permuting and rephasing entries."""
        flip, phi = self._action()
        idx = np.arange(len(phi)) ^ flip
        f = phi[idx]
        return np.outer(f, f.conj()) * np.asarray(rho)[np.ix_(idx, idx)]


@dataclass(frozen=True)
class StabilizerSet:
    generators: tuple[PauliString, ...]

    def __post_init__(self) -> None:
        gens = tuple(self.generators)
        if not gens:
            raise InvalidSpec("empty generator list")
        n = gens[0].n
        for g in gens:
            if g.n != n or g.phase % 2:
                raise InvalidSpec(f"generator {g} is not a Hermitian {n}-qubit Pauli string")
        for g, h in itertools.combinations(gens, 2):
            if not g.commutes_with(h):
                raise InvalidSpec(f"generators {g} and {h} do not commute")
        object.__setattr__(self, "generators", gens)

    @property
    def n(self) -> int:
        return self.generators[0].n

    def group(self) -> list[PauliString]:
        """All ``2**k`` products of generators, enumerated in Gray-code order."""
        elems = [PauliString.identity(self.n)]
        cur = elems[0]
        for k in range(1, 2 ** len(self.generators)):
            bit = (k & -k).bit_length() - 1
            cur = cur * self.generators[bit]
            elems.append(cur)
        return elems


# --------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class GraphSpec:
    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidSpec("a graph needs at least one vertex")
        canon = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise InvalidSpec(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidSpec(f"edge {(i, j)} out of range for {self.n} vertices")
            canon.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(canon))

    def neighbours(self, i: int) -> tuple[int, ...]:
        return tuple(sorted({b if a == i else a for a, b in self.edges if i in (a, b)}))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def stabilizers(self) -> StabilizerSet:
        gens = []
        for i in range(self.n):
            letters = ["I"] * self.n
            letters[i] = "X"
            for j in self.neighbours(i):
                letters[j] = "Z"
            gens.append(PauliString("".join(letters)))
        return StabilizerSet(tuple(gens))


def linear_cluster_graph(n: int = 4) -> GraphSpec:
    return GraphSpec(n, frozenset((i, i + 1) for i in range(n - 1)))


def star_graph(n: int) -> GraphSpec:
    return GraphSpec(n, frozenset((0, i) for i in range(1, n)))


def ghz_stabilizers(n: int) -> StabilizerSet:
    """``X...X`` and ``Z_0 Z_i``: the star-graph group with Hadamards on the leaves."""
    gens = [PauliString("X" * n)]
    for i in range(1, n):
        letters = ["I"] * n
        letters[0] = letters[i] = "Z"
        gens.append(PauliString("".join(letters)))
    return StabilizerSet(tuple(gens))


def parse_signs(signs: str | Sequence[int], n: int | None = None) -> str:
    if isinstance(signs, str):
        s = signs.replace("−", "-")
    else:
        s = "".join("+" if int(v) > 0 else "-" for v in signs)
    if any(c not in "+-" for c in s) or (n is not None and len(s) != n):
        raise InvalidSpec(f"invalid sign string {signs!r}")
    return s


def sign_index(signs: str) -> int:
    return int(parse_signs(signs).replace("+", "0").replace("-", "1"), 2)


def index_signs(k: int, n: int) -> str:
    return format(k, f"0{n}b").replace("0", "+").replace("1", "-")


def _check_size(n: int) -> None:
    if n > MAX_QUBITS:
        raise TooLarge(f"{n} qubits exceeds the limit of {MAX_QUBITS}")


def graph_basis(g: GraphSpec) -> np.ndarray:
    """Unitary whose column ``k`` is the graph-basis vector labelled ``index_signs(k)``."""
    _check_size(g.n)
    n, d = g.n, 2**g.n
    b = np.arange(d)
    bits = (b[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    parity = np.zeros(d, dtype=int)
    for i, j in g.edges:
        parity ^= bits[:, i] & bits[:, j]
    base = (1 - 2 * parity) / np.sqrt(d)
    # label k is Z^k |G>: Z on qubit i flips the eigenvalue of g_i only
    signs = 1 - 2 * ((bits @ bits.T) & 1)
    return (signs * base[:, None]).astype(complex)


def graph_basis_state(g: GraphSpec, signs: str) -> DensityMatrix:
    """Projector ``prod_i (1 + a_i g_i) / 2`` onto the graph-basis state ``signs``."""
    _check_size(g.n)
    s = parse_signs(signs, g.n)
    d = 2**g.n
    proj = np.eye(d, dtype=complex)
    for a, gen in zip(s, g.stabilizers().generators):
        proj = proj @ (0.5 * (np.eye(d) + (1 if a == "+" else -1) * gen.matrix()))
    return DensityMatrix(proj, qubit_dims(g.n))


def graph_state(g: GraphSpec) -> DensityMatrix:
    return graph_basis_state(g, "+" * g.n)


def ghz_vector(n: int) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return v


def ghz_state(n: int = 3) -> DensityMatrix:
    return DensityMatrix.from_vector(ghz_vector(n), qubit_dims(n))


def w_state(n: int = 3) -> DensityMatrix:
    v = np.zeros(2**n, dtype=complex)
    for i in range(n):
        v[1 << i] = 1.0
    return DensityMatrix.from_vector(v, qubit_dims(n))


def product_zero_state(n: int) -> DensityMatrix:
    v = np.zeros(2**n, dtype=complex)
    v[0] = 1.0
    return DensityMatrix.from_vector(v, qubit_dims(n))


# --------------------------------------------------------------------------
# GHZ-diagonal family


@dataclass(frozen=True)
class GhzDiagonalSpec:
    """Diagonal weights ``lambdas`` and anti-diagonal entries ``mus``.

    Entry ``i`` couples basis rows ``i`` and ``2**n - 1 - i`` for
    ``0 <= i < 2**(n-1)``: ``rho[i, i] = rho[j, j] = lambdas[i]`` and
    ``rho[i, j] = mus[i]`` with ``j = 2**n - 1 - i``.
    """

    n: int
    lambdas: tuple[float, ...]
    mus: tuple[complex, ...]

    def __post_init__(self) -> None:
        if self.n < 2:
            raise InvalidSpec("GHZ-diagonal states need at least two qubits")
        _check_size(self.n)
        half = 2 ** (self.n - 1)
        lam = tuple(float(x) for x in self.lambdas)
        mu = tuple(complex(x) for x in self.mus)
        if len(lam) != half or len(mu) != half:
            raise InvalidSpec(f"expected {half} lambdas and mus, got {len(lam)} and {len(mu)}")
        if any(x < -1e-12 for x in lam):
            raise InvalidSpec("lambdas must be nonnegative")
        if any(abs(m) > l + 1e-12 for l, m in zip(lam, mu)):
            raise InvalidSpec("|mu_i| <= lambda_i violated")
        if abs(2 * sum(lam) - 1) > 1e-10:
            raise InvalidSpec(f"2*sum(lambdas) = {2 * sum(lam):.12g}, expected 1")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "mus", mu)

    @property
    def size(self) -> int:
        return len(self.lambdas)

    def weight_outside(self, i: int) -> float:
        """``w_i``: sum of all lambdas except ``lambdas[i]``."""
        return float(sum(self.lambdas) - self.lambdas[i])

    def fidelities(self) -> np.ndarray:
        """Fidelities with ``(|x> + |xbar>)/sqrt 2`` (column 0) and the minus state."""
        lam = np.array(self.lambdas)
        re = np.real(np.array(self.mus))
        return np.stack([lam + re, lam - re], axis=1)


def build_ghz_diagonal(spec: GhzDiagonalSpec) -> DensityMatrix:
    d = 2**spec.n
    m = np.zeros((d, d), dtype=complex)
    for i, (lam, mu) in enumerate(zip(spec.lambdas, spec.mus)):
        j = d - 1 - i
        m[i, i] = m[j, j] = lam
        m[i, j] = mu
        m[j, i] = np.conj(mu)
    return DensityMatrix(m, qubit_dims(spec.n))


def ghz_spec_from_matrix(rho: DensityMatrix, tol: float = 1e-12) -> GhzDiagonalSpec | None:
    """Recognize a GHZ-diagonal matrix; ``None`` when any off-family entry exceeds ``tol``."""
    if any(d != 2 for d in rho.dims) or rho.n < 2:
        return None
    m = rho.mat
    d = m.shape[0]
    mask = np.eye(d, dtype=bool) | np.fliplr(np.eye(d, dtype=bool))
    if np.max(np.abs(np.where(mask, 0, m)), initial=0.0) > tol:
        return None
    diag = m.diagonal().real
    half = d // 2
    if np.max(np.abs(diag[:half] - diag[::-1][:half])) > tol:
        return None
    lam = tuple(diag[:half])
    mus = tuple(m[i, d - 1 - i] for i in range(half))
    try:
        return GhzDiagonalSpec(rho.n, lam, mus)
    except InvalidSpec:
        return None


def ghz_twirl(rho: DensityMatrix) -> GhzDiagonalSpec:
    """GHZ-diagonal state obtained by averaging over the GHZ stabilizer group."""
    out = symmetrize(rho, ghz_stabilizers(rho.n))
    spec = ghz_spec_from_matrix(out, tol=1e-10)
    if spec is None:
        raise InvalidSpec("twirled state is not GHZ-diagonal")
    return spec


def ghz_white_noise_spec(n: int, p: float) -> GhzDiagonalSpec:
    half = 2 ** (n - 1)
    lam = [(1 - p) / 2**n] * half
    lam[0] += p / 2
    mus = [0.0] * half
    mus[0] = p / 2
    return GhzDiagonalSpec(n, tuple(lam), tuple(mus))


# --------------------------------------------------------------------------
# graph-diagonal family


@dataclass(frozen=True)
class GraphDiagonalSpec:
    """Fidelities ``F_a`` with the graph-basis states of ``graph``.

    Labels missing from ``fidelities`` have fidelity zero.
    """

    graph: GraphSpec
    fidelities: Mapping[str, float]

    def __post_init__(self) -> None:
        n = self.graph.n
        _check_size(n)
        clean: dict[str, float] = {}
        for key, val in dict(self.fidelities).items():
            s = parse_signs(key, n)
            v = float(val)
            if v < -1e-12:
                raise InvalidSpec(f"negative fidelity {v} for {s}")
            clean[s] = clean.get(s, 0.0) + v
        total = sum(clean.values())
        if abs(total - 1) > 1e-10:
            raise InvalidSpec(f"fidelities sum to {total:.12g}, expected 1")
        object.__setattr__(self, "fidelities", clean)

    @classmethod
    def from_vector(cls, graph: GraphSpec, f: Iterable[float]) -> "GraphDiagonalSpec":
        vals = list(f)
        return cls(graph, {index_signs(k, graph.n): v for k, v in enumerate(vals) if v != 0})

    def vector(self) -> np.ndarray:
        f = np.zeros(2**self.graph.n)
        for s, v in self.fidelities.items():
            f[sign_index(s)] = v
        return f

    def fidelity(self, signs: str) -> float:
        return self.fidelities.get(parse_signs(signs, self.graph.n), 0.0)


def build_graph_diagonal(spec: GraphDiagonalSpec) -> DensityMatrix:
    u = graph_basis(spec.graph)
    f = spec.vector()
    return DensityMatrix((u * f) @ u.conj().T, qubit_dims(spec.graph.n))


def graph_spec_from_matrix(rho: DensityMatrix, g: GraphSpec, tol: float = 1e-12) -> GraphDiagonalSpec | None:
    if rho.dims != qubit_dims(g.n):
        return None
    u = graph_basis(g)
    inner = u.conj().T @ rho.mat @ u
    if np.max(np.abs(inner - np.diag(inner.diagonal()))) > tol:
        return None
    f = np.clip(inner.diagonal().real, 0.0, None)
    try:
        return GraphDiagonalSpec.from_vector(g, f / f.sum())
    except InvalidSpec:
        return None


def graph_white_noise_spec(spec: GraphDiagonalSpec, p: float) -> GraphDiagonalSpec:
    d = 2**spec.graph.n
    return GraphDiagonalSpec.from_vector(spec.graph, p * spec.vector() + (1 - p) / d)


def two_parameter_cluster_family(p1: float, p2: float) -> GraphDiagonalSpec:
    """``p1 |++++> + p2 |-++-> + (1 - p1 - p2)(sigma_1 + sigma_2)/2`` on the linear cluster.

    ``sigma_1`` mixes ``|++-+>`` and ``|+-++>``, ``sigma_2`` mixes ``|-+-->``
    and ``|--+->``, each with equal weight.
    """
    if p1 < 0 or p2 < 0 or p1 + p2 > 1 + 1e-12:
        raise InvalidSpec(f"(p1, p2) = ({p1}, {p2}) outside the simplex")
    q = max(1.0 - p1 - p2, 0.0) / 4
    fid = {"++++": p1, "-++-": p2, "++-+": q, "+-++": q, "-+--": q, "--+-": q}
    return GraphDiagonalSpec(linear_cluster_graph(4), fid)


# --------------------------------------------------------------------------
# channels


def symmetrize(rho: DensityMatrix, g: GraphSpec | StabilizerSet) -> DensityMatrix:
    """Average ``s rho s^dagger`` over the full stabilizer group."""
    stab = g.stabilizers() if isinstance(g, GraphSpec) else g
    if rho.dims != qubit_dims(stab.n):
        raise DimensionMismatch(f"state dims {rho.dims} do not match {stab.n} qubits")
    group = stab.group()
    acc = np.zeros_like(rho.mat)
    for s in group:
        acc = acc + s.conjugate(rho.mat)
    return DensityMatrix(acc / len(group), rho.dims)


def add_white_noise(rho: DensityMatrix, p: float) -> DensityMatrix:
    if not 0.0 <= p <= 1.0:
        raise InvalidSpec(f"mixing parameter {p} outside [0, 1]")
    d = rho.dim
    return DensityMatrix(p * rho.mat + (1 - p) * np.eye(d) / d, rho.dims)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (r.diagonal() / np.abs(r.diagonal()))


def random_pure_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_mixed_state(dims: Sequence[int], rng: np.random.Generator, k: int = 3) -> DensityMatrix:
    """Convex combination of ``k`` Haar-random pure states with Dirichlet weights."""
    d = int(np.prod(dims))
    w = rng.dirichlet(np.ones(k))
    m = np.zeros((d, d), dtype=complex)
    for wi in w:
        v = random_pure_vector(d, rng)
        m += wi * np.outer(v, v.conj())
    return DensityMatrix(linalg.hermitian_part(m), tuple(dims))


def random_local_unitary(dims: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    return linalg.kron_all(random_unitary(d, rng) for d in dims)
