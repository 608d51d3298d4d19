"""GMN as a semidefinite program, solved by the in-repo interior-point method.

The primal variables are the witness ``W`` and one ``Q_m`` per cut, with
``P_m = W - Q_m^{T_m}`` eliminated. Per cut the blocks are::

    Q_m >= 0,   1 - Q_m >= 0,   W - Q_m^{T_m} >= 0   [, 1 - W + Q_m^{T_m} >= 0]

where the bracketed cap is only present for the original normalization.
The value is ``-min tr(rho W)``.

For the renormalized program with a rank-deficient ``rho`` the optimum is
not attained (``P_m`` wants to blow up on ``ker rho``), so the third block
is restricted to the support of ``rho``: ``W`` becomes an ``r x r`` matrix
``W~`` and the block reads ``W~ - V^H Q_m^{T_m} V >= 0`` with ``V`` an
isometry onto the support. The value is unchanged; a full-space witness is
rebuilt afterwards by :func:`_lift_witness` at a reported cost ``delta``.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import _ipm, linalg
from .analytic import DecompositionCertificate, DecompositionTerm, GmnResult
from .errors import DimensionMismatch, DualInfeasible, NumericalFailure, TooLarge
from .negativity import PartitionSet, enumerate_bipartitions
from .states import DensityMatrix
from .witness import WitnessCertificate, check_normalization, verify_fully_decomposable

log = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-8
DEFAULT_MAX_ITERATIONS = 200
DEFAULT_MAX_DIM = 16
MAX_DIM_ENV = "GMN_MAX_DIM"
RANK_TOL = 1e-12
DROP_WEIGHT = 1e-10
LIFT_SHIFT = 1e-8


def max_dim() -> int:
    raw = os.environ.get(MAX_DIM_ENV)
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{MAX_DIM_ENV} must be an integer, got {raw!r}") from None
    if value < 2:
        raise ValueError(f"{MAX_DIM_ENV} must be at least 2")
    return value


@dataclass(frozen=True)
class GmnProgram:
    rho: DensityMatrix
    partitions: PartitionSet | None = None
    normalization: str = "renormalized"
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self) -> None:
        check_normalization(self.normalization)
        if not 1e-12 <= self.tolerance <= 1e-4:
            raise ValueError(f"tolerance must lie in [1e-12, 1e-4], got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        n = self.rho.n
        if self.partitions is None:
            object.__setattr__(self, "partitions", enumerate_bipartitions(n))
        else:
            parts = tuple(self.partitions)
            if not parts:
                raise ValueError("at least one bipartition is required")
            for m in parts:
                if m.n != n:
                    raise DimensionMismatch(f"bipartition {m} is for {m.n} parties, state has {n}")
            object.__setattr__(self, "partitions", tuple(m.canonical() for m in parts))


@dataclass
class Encoding:
    """Standard-form problem plus what is needed to read the solution back."""

    program: GmnProgram
    problem: _ipm.Problem
    x0: np.ndarray
    support: np.ndarray | None
    kernel: np.ndarray | None
    block_names: list[str]

    @property
    def rank(self) -> int:
        return self.program.rho.dim if self.support is None else self.support.shape[1]

    @property
    def block_sizes(self) -> list[int]:
        return [b.dim for b in self.problem.blocks]


@dataclass(frozen=True)
class SdpSolution:
    value: float
    witness: WitnessCertificate | None
    decomposition: DecompositionCertificate | None
    gap: float
    iterations: int
    status: str
    normalization: str = "renormalized"
    dual_value: float = float("nan")
    lower_bound: float = float("nan")
    details: dict = field(default_factory=dict, compare=False)

    @property
    def upper_bound(self) -> float:
        if self.decomposition is None:
            return float("nan")
        return self.decomposition.certified_value

    def as_result(self) -> GmnResult:
        return GmnResult(self.value, self.witness, self.decomposition, "sdp",
                         self.normalization, dict(self.details, status=self.status))


def _support(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray] | None:
    """Orthonormal bases of ``supp rho`` and ``ker rho``, or None at full rank."""
    w, v = np.linalg.eigh(rho.mat)
    keep = w > RANK_TOL * max(1.0, float(w[-1]))
    return None if keep.all() else (v[:, keep], v[:, ~keep])


def encode(program: GmnProgram) -> Encoding:
    rho = program.rho
    d = rho.dim
    cap = max_dim()
    if d > cap:
        raise TooLarge(f"SDP path is capped at total dimension {cap} (got {d}); set {MAX_DIM_ENV} to raise it")
    original = program.normalization == "original"
    split = None if original else _support(rho)
    v = None if split is None else split[0]
    r = d if v is None else v.shape[1]
    basis = _ipm.hermitian_basis(d)
    wbasis = basis if v is None else _ipm.hermitian_basis(r)
    target = rho.mat if v is None else v.conj().T @ rho.mat @ v
    groups = [_ipm.Group(r, wbasis, target)] + [_ipm.Group(d, basis) for _ in program.partitions]

    eye = np.eye(d, dtype=complex)
    zero = np.zeros((d, d), dtype=complex)
    blocks = []
    for k, m in enumerate(program.partitions, 1):
        perm = linalg.partial_transpose_permutation(rho.dims, m)
        label = m.label()
        blocks += [
            _ipm.Block(zero, [_ipm.Term(k, 1.0)], f"Q[{label}]"),
            _ipm.Block(eye, [_ipm.Term(k, -1.0)], f"1-Q[{label}]"),
            _ipm.Block(np.zeros((r, r), dtype=complex),
                       [_ipm.Term(0, 1.0), _ipm.Term(k, -1.0, perm, v)], f"P[{label}]"),
        ]
        if original:
            blocks.append(_ipm.Block(eye, [_ipm.Term(0, -1.0), _ipm.Term(k, 1.0, perm)], f"1-P[{label}]"))
    names = [b.name for b in blocks]
    problem = _ipm.Problem(groups, blocks)

    # W = 1, Q_m = 1/2: strictly inside every block
    x0 = np.concatenate([(wbasis.conj().T @ np.eye(r).ravel()).real]
                        + [0.5 * (basis.conj().T @ eye.ravel()).real] * len(program.partitions))
    return Encoding(program, problem, x0, v, None if split is None else split[1], names)


def _variables(enc: Encoding, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    xs = enc.problem.split(x)
    mats = [linalg.hermitian_part(enc.problem.group_matrix(g, xg)) for g, xg in enumerate(xs)]
    return mats[0], mats[1:]


def _lift_witness(enc: Encoding, w_red: np.ndarray, qs: list[np.ndarray],
                  delta: float) -> tuple[np.ndarray, float]:
    """Full-space witness from a support-restricted solution.

    In the basis ``(V, V_perp)`` the witness is ``[[W~ + delta, C], [C^H, K]]``.
    ``C`` is a weighted mean of the off-diagonal blocks of the ``Q_m^{T_m}``
    and ``K`` the smallest multiple of the identity making every
    ``W - Q_m^{T_m}`` PSD (Schur complement against ``W~ + delta - a_m``).
    """
    rho = enc.program.rho
    v, vp = enc.support, enc.kernel
    r = v.shape[1]
    data = []
    for q, m in zip(qs, enc.program.partitions):
        t = linalg.partial_transpose(q, rho.dims, m)
        a = v.conj().T @ t @ v
        c = v.conj().T @ t @ vp
        b = vp.conj().T @ t @ vp
        ainv = np.linalg.inv(linalg.hermitian_part(w_red - a) + delta * np.eye(r))
        data.append((linalg.hermitian_part(ainv), c, b))
    c_bar = np.linalg.solve(sum(ai for ai, _, _ in data), sum(ai @ c for ai, c, _ in data))
    k = 0.0
    for ai, c, b in data:
        e = c_bar - c
        k = max(k, float(np.linalg.eigvalsh(linalg.hermitian_part(b + e.conj().T @ ai @ e))[-1]))
    k += delta * (1 + abs(k))
    u = np.hstack([v, vp])
    inner = np.block([[w_red + delta * np.eye(r), c_bar],
                      [c_bar.conj().T, k * np.eye(vp.shape[1])]])
    return linalg.hermitian_part(u @ inner @ u.conj().T), k


def _witness(enc: Encoding, res: _ipm.IpmResult) -> tuple[WitnessCertificate, dict]:
    w_red, qs = _variables(enc, res.x)
    prog = enc.program
    info: dict = {}
    if enc.support is None:
        w = w_red
    else:
        w, k = _lift_witness(enc, w_red, qs, LIFT_SHIFT)
        info.update(lift_shift=LIFT_SHIFT, lift_kernel_weight=k)
    per = {m: (linalg.hermitian_part(w - linalg.partial_transpose(q, prog.rho.dims, m)), q)
           for q, m in zip(qs, prog.partitions)}
    return WitnessCertificate(w, prog.rho.dims, per, prog.normalization, "sdp"), info


def extract_decomposition(enc: Encoding, z: list[np.ndarray],
                          tol: float | None = None) -> DecompositionCertificate:
    """Decomposition ``rho = sum_m Z_m`` from the multipliers of the ``P`` blocks.

    ``Z_m`` is PSD and ``Z_m^{T_m}`` splits as ``Z_Q - Z_{1-Q}``, so
    ``N_m(Z_m / tr Z_m) * tr Z_m <= tr Z_{1-Q}``: the certified value is at
    most the dual objective.
    """
    prog = enc.program
    if prog.normalization != "renormalized":
        raise DualInfeasible("a decomposition certificate exists only for the renormalized program")
    tol = prog.tolerance if tol is None else tol
    per_cut = 3
    if len(z) != per_cut * len(prog.partitions):
        raise DimensionMismatch("dual blocks do not match the encoding")
    v = enc.support
    mats = []
    for i, m in enumerate(prog.partitions):
        zy = linalg.hermitian_part(np.asarray(z[per_cut * i + 2], dtype=complex))
        zm = zy if v is None else v @ zy @ v.conj().T
        mats.append((m, linalg.hermitian_part(zm)))
    total = sum(zm for _, zm in mats)
    resid = float(np.max(np.abs(total - prog.rho.mat)))
    if resid > max(1e3 * tol, 1e-6):
        raise DualInfeasible(f"dual multipliers reproduce rho only to {resid:.2e}")
    for m, zm in mats:
        wmin = float(np.linalg.eigvalsh(zm)[0])
        if wmin < -max(1e3 * tol, 1e-6):
            raise DualInfeasible(f"dual multiplier for cut {m} has eigenvalue {wmin:.2e}")

    kept = [(m, zm, float(np.trace(zm).real)) for m, zm in mats]
    kept = [(m, zm, p) for m, zm, p in kept if p > DROP_WEIGHT]
    if not kept:
        raise DualInfeasible("every dual term has negligible weight")
    norm = sum(p for _, _, p in kept)
    terms = tuple(DecompositionTerm(p / norm, DensityMatrix(zm / p, prog.rho.dims), m)
                  for m, zm, p in kept)
    return DecompositionCertificate(terms, target=prog.rho.mat)


def solve(program: GmnProgram, trace=None, on_iteration=None) -> SdpSolution:
    """Solve the GMN program and return the value with both certificates.

    ``trace`` is an optional CSV path for the iteration log. A stalled
    solver raises :class:`NumericalFailure` carrying the partial solution
    as ``exc.solution``; running out of iterations is reported through
    ``status`` instead.
    """
    enc = encode(program)
    t0 = time.perf_counter()
    res = _ipm.solve(enc.problem, enc.x0, tol=program.tolerance,
                     max_iter=program.max_iterations, on_iteration=on_iteration)
    elapsed = time.perf_counter() - t0
    if trace is not None:
        _ipm.write_trace(trace, res.trace)
    log.debug("sdp %s: status=%s iterations=%d gap=%.2e", program.normalization,
              res.status, res.iterations, res.gap)

    details = {"rank": enc.rank, "blocks": len(enc.problem.blocks), "residual": res.residual,
               "solve_seconds": elapsed}
    witness, info = _witness(enc, res)
    details.update(info)
    lower = -witness.expectation(program.rho)
    decomposition = None
    if program.normalization == "renormalized":
        try:
            decomposition = extract_decomposition(enc, res.z)
            details["reconstruction_error"] = decomposition.reconstruction_error()
        except DualInfeasible as exc:
            details["decomposition_error"] = str(exc)
    else:
        details["dual_multipliers"] = [linalg.hermitian_part(a) for a in res.z]
    details["witness_verified"] = verify_fully_decomposable(witness)

    solution = SdpSolution(
        value=-res.primal,
        witness=witness,
        decomposition=decomposition,
        gap=abs(res.gap),
        iterations=res.iterations,
        status=res.status,
        normalization=program.normalization,
        dual_value=-res.dual,
        lower_bound=lower,
        details=details,
    )
    if res.status == "numerical_failure":
        exc = NumericalFailure(f"interior-point method broke down after {res.iterations} iterations "
                               f"(gap {res.gap:.2e}, residual {res.residual:.2e})")
        exc.solution = solution
        raise exc
    return solution


def sdp_gmn(rho: DensityMatrix, normalization: str = "renormalized",
            tolerance: float = DEFAULT_TOLERANCE, trace=None) -> SdpSolution:
    return solve(GmnProgram(rho, normalization=normalization, tolerance=tolerance), trace=trace)
