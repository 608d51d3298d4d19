"""Genuine multiparticle negativity of qubit states.

Closed forms for GHZ-diagonal and four-qubit cluster-diagonal states, and
a dense interior-point SDP for everything else. Every value comes with a
witness (lower bound) and, where available, a decomposition (upper bound).
"""

from .analytic import (
    DecompositionCertificate,
    DecompositionTerm,
    GmnResult,
    appendixB_decomposition,
    cluster_biseparability_check,
    cluster_diagonal_gmn,
    ghz_biseparability_check,
    ghz_diagonal_gmn,
    lemma5_decomposition,
)
from .errors import (
    DimensionMismatch,
    DualInfeasible,
    GmnError,
    InvalidSpec,
    NotDecomposable,
    NotHermitian,
    NotPure,
    NumericalFailure,
    ParseError,
    PreconditionViolated,
    TooLarge,
    WrongGraph,
)
from .negativity import (
    Bipartition,
    bipartite_negativity,
    enumerate_bipartitions,
    pure_state_gmn,
)
from .sdp import GmnProgram, SdpSolution, encode, extract_decomposition, sdp_gmn, solve
from .states import (
    DensityMatrix,
    GhzDiagonalSpec,
    GraphDiagonalSpec,
    GraphSpec,
    ghz_state,
    graph_state,
    linear_cluster_graph,
    w_state,
)
from .witness import (
    WitnessCertificate,
    cluster_witness,
    ghz_witness,
    verify_fully_decomposable,
    witness_lower_bound,
)

__all__ = [
    "appendixB_decomposition",
    "bipartite_negativity",
    "Bipartition",
    "cluster_biseparability_check",
    "cluster_diagonal_gmn",
    "cluster_witness",
    "DecompositionCertificate",
    "DecompositionTerm",
    "DensityMatrix",
    "DimensionMismatch",
    "DualInfeasible",
    "encode",
    "enumerate_bipartitions",
    "extract_decomposition",
    "ghz_biseparability_check",
    "ghz_diagonal_gmn",
    "ghz_state",
    "ghz_witness",
    "GhzDiagonalSpec",
    "GmnError",
    "GmnProgram",
    "GmnResult",
    "graph_state",
    "GraphDiagonalSpec",
    "GraphSpec",
    "InvalidSpec",
    "lemma5_decomposition",
    "linear_cluster_graph",
    "NotDecomposable",
    "NotHermitian",
    "NotPure",
    "NumericalFailure",
    "ParseError",
    "PreconditionViolated",
    "pure_state_gmn",
    "sdp_gmn",
    "SdpSolution",
    "solve",
    "TooLarge",
    "verify_fully_decomposable",
    "w_state",
    "witness_lower_bound",
    "WitnessCertificate",
    "WrongGraph",
]

__version__ = "0.1.0"
