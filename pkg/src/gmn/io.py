"""JSON state files, certificate serialization and run reports.

Complex numbers are stored as ``[re, im]`` pairs. A state file carries
exactly one of three representations::

    {"n_parties": 3, "dims": [2, 2, 2], "matrix": [[[re, im], ...], ...]}
    {"n_parties": 4, "dims": [...], "graph_diagonal": {"edges": [[0, 1], ...],
                                                       "fidelities": {"++++": 0.9, ...}}}
    {"n_parties": 3, "dims": [...], "ghz_diagonal": {"lambdas": [...], "mus": [[re, im], ...]}}
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .analytic import DecompositionCertificate, GmnResult
from .errors import GmnError, ParseError
from .negativity import Bipartition
from .states import (
    DensityMatrix,
    GhzDiagonalSpec,
    GraphDiagonalSpec,
    GraphSpec,
    build_ghz_diagonal,
    build_graph_diagonal,
    qubit_dims,
)
from .witness import WitnessCertificate

REPRESENTATIONS = ("matrix", "graph_diagonal", "ghz_diagonal")


def complex_to_pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(p: Any) -> complex:
    if not (isinstance(p, (list, tuple)) and len(p) == 2):
        raise ParseError(f"expected an [re, im] pair, got {p!r}")
    try:
        return complex(float(p[0]), float(p[1]))
    except (TypeError, ValueError):
        raise ParseError(f"non-numeric complex pair {p!r}") from None


def matrix_to_json(m: np.ndarray) -> list:
    return [[complex_to_pair(z) for z in row] for row in np.asarray(m)]


def matrix_from_json(data: Any) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ParseError("matrix must be a non-empty list of rows")
    width = len(data[0])
    if any(len(r) != width for r in data):
        raise ParseError("matrix rows have different lengths")
    return np.array([[pair_to_complex(p) for p in row] for row in data], dtype=complex)


@dataclass(frozen=True)
class StateFile:
    n_parties: int
    dims: tuple[int, ...]
    matrix: np.ndarray | None = None
    graph_diagonal: GraphDiagonalSpec | None = None
    ghz_diagonal: GhzDiagonalSpec | None = None

    def __post_init__(self) -> None:
        present = [k for k in REPRESENTATIONS if getattr(self, k) is not None]
        if len(present) != 1:
            raise ParseError(f"state file needs exactly one of {REPRESENTATIONS}, found {present or 'none'}")
        if len(self.dims) != self.n_parties:
            raise ParseError(f"n_parties={self.n_parties} but {len(self.dims)} dims given")

    @property
    def representation(self) -> str:
        return next(k for k in REPRESENTATIONS if getattr(self, k) is not None)

    def density(self) -> DensityMatrix:
        try:
            if self.matrix is not None:
                return DensityMatrix(self.matrix, self.dims)
            if self.graph_diagonal is not None:
                return build_graph_diagonal(self.graph_diagonal)
            return build_ghz_diagonal(self.ghz_diagonal)
        except GmnError as exc:
            raise ParseError(f"state does not describe a density matrix: {exc}") from exc

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"n_parties": self.n_parties, "dims": list(self.dims)}
        if self.matrix is not None:
            out["matrix"] = matrix_to_json(self.matrix)
        elif self.graph_diagonal is not None:
            g = self.graph_diagonal
            out["graph_diagonal"] = {"edges": [list(e) for e in g.graph.sorted_edges()],
                                     "fidelities": dict(sorted(g.fidelities.items()))}
        else:
            s = self.ghz_diagonal
            out["ghz_diagonal"] = {"lambdas": list(s.lambdas),
                                   "mus": [complex_to_pair(m) for m in s.mus]}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_density(cls, rho: DensityMatrix) -> "StateFile":
        return cls(rho.n, rho.dims, matrix=rho.mat.copy())

    @classmethod
    def from_graph_spec(cls, spec: GraphDiagonalSpec) -> "StateFile":
        n = spec.graph.n
        return cls(n, qubit_dims(n), graph_diagonal=spec)

    @classmethod
    def from_ghz_spec(cls, spec: GhzDiagonalSpec) -> "StateFile":
        return cls(spec.n, qubit_dims(spec.n), ghz_diagonal=spec)


def _count(data: dict, key: str) -> int:
    v = data.get(key)
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ParseError(f"{key!r} must be a positive integer")
    return v


def parse_state(data: Any) -> StateFile:
    """Build a :class:`StateFile` from decoded JSON."""
    if not isinstance(data, dict):
        raise ParseError("state file must be a JSON object")
    n = _count(data, "n_parties")
    dims = data.get("dims", [2] * n)
    if not isinstance(dims, list) or not all(isinstance(d, int) and d >= 2 for d in dims):
        raise ParseError("dims must be a list of integers >= 2")
    present = [k for k in REPRESENTATIONS if k in data]
    if len(present) != 1:
        raise ParseError(f"state file needs exactly one of {REPRESENTATIONS}, found {present or 'none'}")
    kind = present[0]
    body = data[kind]
    try:
        if kind == "matrix":
            return StateFile(n, tuple(dims), matrix=matrix_from_json(body))
        if any(d != 2 for d in dims):
            raise ParseError(f"{kind} states are qubit states")
        if not isinstance(body, dict):
            raise ParseError(f"{kind} must be an object")
        if kind == "graph_diagonal":
            edges = [tuple(e) for e in body.get("edges", [])]
            fid = body.get("fidelities")
            if not isinstance(fid, dict):
                raise ParseError("graph_diagonal.fidelities must be an object")
            spec = GraphDiagonalSpec(GraphSpec(n, edges), fid)
            return StateFile(n, tuple(dims), graph_diagonal=spec)
        lambdas = body.get("lambdas")
        mus = body.get("mus")
        if not isinstance(lambdas, list) or not isinstance(mus, list):
            raise ParseError("ghz_diagonal needs lambdas and mus lists")
        spec = GhzDiagonalSpec(n, tuple(float(x) for x in lambdas),
                               tuple(pair_to_complex(m) for m in mus))
        return StateFile(n, tuple(dims), ghz_diagonal=spec)
    except ParseError:
        raise
    except (GmnError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid {kind} state: {exc}") from exc


def loads_state(text: str) -> StateFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    return parse_state(data)


def load_state(path: str | Path) -> StateFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return loads_state(text)


def save_state(state: StateFile, path: str | Path) -> None:
    Path(path).write_text(state.to_json() + "\n")


# --------------------------------------------------------------------------
# certificates


def witness_to_dict(cert: WitnessCertificate) -> dict:
    return {
        "kind": "witness",
        "normalization": cert.normalization,
        "label": cert.label,
        "dims": list(cert.dims),
        "w": matrix_to_json(cert.w),
        "partitions": [
            {"cut": list(m.members), "P": matrix_to_json(p), "Q": matrix_to_json(q)}
            for m, (p, q) in cert.per_partition.items()
        ],
    }


def witness_from_dict(data: Any) -> WitnessCertificate:
    if not isinstance(data, dict) or data.get("kind", "witness") != "witness":
        raise ParseError("not a witness certificate")
    try:
        dims = tuple(int(d) for d in data["dims"])
        per = {}
        for entry in data.get("partitions", []):
            m = Bipartition(tuple(entry["cut"]), len(dims)).canonical()
            per[m] = (matrix_from_json(entry["P"]), matrix_from_json(entry["Q"]))
        return WitnessCertificate(matrix_from_json(data["w"]), dims, per,
                                  data.get("normalization", "renormalized"), data.get("label", ""))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed witness certificate: {exc}") from exc


def load_witness(path: str | Path) -> WitnessCertificate:
    try:
        return witness_from_dict(json.loads(Path(path).read_text()))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc


def decomposition_to_dict(cert: DecompositionCertificate) -> dict:
    out = {
        "kind": "decomposition",
        "certified_value": cert.certified_value,
        "terms": [
            {"weight": t.weight, "cut": list(t.partition.members), "negativity": t.negativity,
             "state": matrix_to_json(t.state.mat)}
            for t in cert.terms
        ],
    }
    if cert.target is not None:
        out["reconstruction_error"] = cert.reconstruction_error()
    return out


def digest(state: StateFile) -> str:
    canon = json.dumps(state.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


@dataclass
class RunReport:
    input_digest: str
    method: str
    normalization: str
    value: float
    lower_bound: float | None = None
    upper_bound: float | None = None
    certificates: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    defaults: dict = field(default_factory=dict)

    @classmethod
    def from_result(cls, state: StateFile, result: GmnResult, seconds: float,
                    defaults: dict | None = None) -> "RunReport":
        lower = upper = None
        certs: dict = {}
        if result.lower_certificate is not None:
            w = result.lower_certificate
            lower = -w.expectation(state.density())
            certs["witness"] = {"label": w.label, "normalization": w.normalization}
        if result.upper_certificate is not None:
            upper = result.upper_certificate.certified_value
            certs["decomposition"] = {"terms": len(result.upper_certificate.terms),
                                      "certified_value": upper}
        diag = {k: v for k, v in result.details.items() if _jsonable(v)}
        return cls(digest(state), result.method, result.normalization, result.value,
                   lower, upper, certs, {"total_seconds": seconds}, diag, dict(defaults or {}))

    def to_dict(self) -> dict:
        return {
            "input_digest": self.input_digest,
            "method": self.method,
            "normalization": self.normalization,
            "value": self.value,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "certificates": self.certificates,
            "timings": self.timings,
            "diagnostics": self.diagnostics,
            "defaults": self.defaults,
        }


def _jsonable(v: Any) -> bool:
    return isinstance(v, (str, int, float, bool)) or v is None
