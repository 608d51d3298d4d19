"""Command-line front end.

Exit codes: 0 success, 1 witness not decomposable, 2 parse or usage
error, 3 numerical failure, 4 size cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io, sdp
from .analytic import (
    BISEPARABLE_TOL,
    GmnResult,
    cluster_diagonal_gmn,
    ghz_diagonal_gmn,
)
from .errors import GmnError, NotDecomposable, NumericalFailure, ParseError, TooLarge
from .states import (
    DensityMatrix,
    GhzDiagonalSpec,
    GraphDiagonalSpec,
    GraphSpec,
    add_white_noise,
    ghz_spec_from_matrix,
    ghz_white_noise_spec,
    graph_spec_from_matrix,
    graph_white_noise_spec,
    linear_cluster_graph,
    two_parameter_cluster_family,
    w_state,
)
from .witness import decomposition_defects, verify_fully_decomposable

log = logging.getLogger("gmn")

EXIT_OK = 0
EXIT_NOT_DECOMPOSABLE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_TOO_LARGE = 4

FAMILY_TOL = 1e-12
REGIONS = ("I", "II", "III")
# on region boundaries I and III win over II (the corners (0,1) and (1,0))
REGION_PRIORITY = (0, 2, 1)
THRESHOLD_TOL = 1e-7


class UsageError(Exception):
    pass


class _Once(argparse.Action):
    """Store action that rejects a repeated flag."""

    def __call__(self, parser, namespace, values, option_string=None):
        if getattr(namespace, f"_seen_{self.dest}", False):
            parser.error(f"{option_string} given more than once")
        setattr(namespace, f"_seen_{self.dest}", True)
        setattr(namespace, self.dest, values)


# --------------------------------------------------------------------------
# family detection and dispatch


def detect_family(state: io.StateFile) -> GhzDiagonalSpec | GraphDiagonalSpec | None:
    """Analytic family of a state, checking off-family entries against ``FAMILY_TOL``."""
    cluster = linear_cluster_graph(4)
    if state.ghz_diagonal is not None:
        return state.ghz_diagonal
    if state.graph_diagonal is not None:
        g = state.graph_diagonal.graph
        if g.n == 4 and g.sorted_edges() == cluster.sorted_edges():
            return state.graph_diagonal
    rho = state.density()
    spec = ghz_spec_from_matrix(rho, FAMILY_TOL)
    if spec is not None:
        return spec
    if rho.dims == (2, 2, 2, 2):
        return graph_spec_from_matrix(rho, cluster, FAMILY_TOL)
    return None


def analytic_result(family, normalization: str) -> GmnResult:
    if isinstance(family, GhzDiagonalSpec):
        return ghz_diagonal_gmn(family, normalization)
    return cluster_diagonal_gmn(family, normalization)


def compute(state: io.StateFile, method: str = "auto", normalization: str = "renormalized",
            tol: float = sdp.DEFAULT_TOLERANCE, trace=None) -> GmnResult:
    family = None
    if method in ("auto", "analytic"):
        family = detect_family(state)
        if family is None and method == "analytic":
            raise UsageError("state is neither GHZ-diagonal nor four-qubit cluster-diagonal; use --method sdp")
    if family is not None:
        return analytic_result(family, normalization)
    program = sdp.GmnProgram(state.density(), normalization=normalization, tolerance=tol)
    return sdp.solve(program, trace=trace).as_result()


# --------------------------------------------------------------------------
# two-parameter cluster scan


def fig2_row(p1: float, p2: float) -> dict:
    res = cluster_diagonal_gmn(two_parameter_cluster_family(p1, p2))
    formulas = ((p1 + 3 * p2 - 1) / 4, p1 + p2 - 0.5, (3 * p1 + p2 - 1) / 4)
    best = max(formulas)
    if best <= BISEPARABLE_TOL:
        region = "IV"
    else:
        region = REGIONS[next(k for k in REGION_PRIORITY if formulas[k] >= best - 1e-12)]
    return {"p1": p1, "p2": p2, "gmn": res.value, "region": region,
            "witness_id": res.details.get("witness", "")}


def _fig2_chunk(points):
    return [fig2_row(p1, p2) for p1, p2 in points]


def scan_fig2(grid: int, jobs: int = 1) -> list[dict]:
    if grid < 2:
        raise UsageError("--grid must be at least 2")
    step = grid - 1
    rows = [[(i / step, j / step) for j in range(grid - i)] for i in range(grid)]
    if jobs <= 1:
        chunks = [_fig2_chunk(r) for r in rows]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_fig2_chunk, rows))
    return [row for chunk in chunks for row in chunk]


def write_csv(path, rows: list[dict], columns: list[str]) -> None:
    fh = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


# --------------------------------------------------------------------------
# noise threshold


def _noisy_value(state: io.StateFile, family, p: float, method: str,
                 normalization: str, tol: float) -> float:
    if family is not None:
        if isinstance(family, GhzDiagonalSpec):
            half = family.size
            lam = tuple(p * x + (1 - p) / (2 * half) for x in family.lambdas)
            spec = GhzDiagonalSpec(family.n, lam, tuple(p * m for m in family.mus))
        else:
            spec = graph_white_noise_spec(family, p)
        return analytic_result(spec, normalization).value
    rho = add_white_noise(state.density(), p)
    program = sdp.GmnProgram(rho, normalization=normalization, tolerance=tol)
    return sdp.solve(program).value


def noise_threshold(state: io.StateFile, method: str = "auto", normalization: str = "renormalized",
                    tol: float = sdp.DEFAULT_TOLERANCE, precision: float = THRESHOLD_TOL) -> dict:
    """Smallest ``p`` with positive GMN for ``p rho + (1 - p) 1/d``, by bisection."""
    family = detect_family(state) if method in ("auto", "analytic") else None
    if family is None and method == "analytic":
        raise UsageError("no analytic formula for this state; use --method sdp")
    zero = BISEPARABLE_TOL if family is not None else 10 * tol

    def entangled(p: float) -> bool:
        return _noisy_value(state, family, p, method, normalization, tol) > zero

    used = "analytic" if family is not None else "sdp"
    if not entangled(1.0):
        return {"threshold": None, "verdict": "never entangled", "method": used}
    lo, hi = 0.0, 1.0
    steps = 0
    while hi - lo > precision:
        mid = 0.5 * (lo + hi)
        if entangled(mid):
            hi = mid
        else:
            lo = mid
        steps += 1
    return {"threshold": 0.5 * (lo + hi), "verdict": "entangled above threshold",
            "method": used, "bracket": [lo, hi], "steps": steps}


# --------------------------------------------------------------------------
# make-state


def _parse_edges(text: str) -> list[tuple[int, int]]:
    edges = []
    for item in text.replace(" ", "").split(","):
        if not item:
            continue
        try:
            a, b = item.split("-")
            edges.append((int(a), int(b)))
        except ValueError:
            raise UsageError(f"bad edge {item!r}; expected i-j") from None
    return edges


def make_state(kind: str, n: int | None, edges: str | None, noise: float | None) -> io.StateFile:
    p = 1.0 if noise is None else noise
    if not 0 <= p <= 1:
        raise UsageError("--noise must lie in [0, 1]")
    if kind == "ghz":
        return io.StateFile.from_ghz_spec(ghz_white_noise_spec(n or 3, p))
    if kind == "w":
        rho = w_state(n or 3)
        return io.StateFile.from_density(add_white_noise(rho, p) if noise is not None else rho)
    if kind == "cluster":
        g = linear_cluster_graph(n or 4)
    else:
        if edges is None:
            raise UsageError("make-state graph needs --edges")
        pairs = _parse_edges(edges)
        size = n or 1 + max((max(e) for e in pairs), default=1)
        g = GraphSpec(size, pairs)
    spec = GraphDiagonalSpec(g, {"+" * g.n: 1.0})
    return io.StateFile.from_graph_spec(graph_white_noise_spec(spec, p))


# --------------------------------------------------------------------------
# argument parsing and commands


def _add_common(p: argparse.ArgumentParser, method: bool = True) -> None:
    p.add_argument("--state", required=True, action=_Once, help="state file (JSON)")
    if method:
        p.add_argument("--method", choices=("auto", "analytic", "sdp"), default="auto", action=_Once)
    p.add_argument("--norm", choices=("original", "renormalized"), default="renormalized", action=_Once)
    p.add_argument("--tol", type=float, default=sdp.DEFAULT_TOLERANCE, action=_Once)
    p.add_argument("--out", action=_Once, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmn", description="Genuine multiparticle negativity toolkit")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="GMN of a state with certificates")
    _add_common(p)
    p.add_argument("--trace", action=_Once, help="CSV path for the SDP iteration log")
    p.add_argument("--witness-out", action=_Once, help="write the witness certificate here")
    p.add_argument("--decomposition-out", action=_Once, help="write the decomposition certificate here")

    p = sub.add_parser("scan-fig2", help="two-parameter cluster family over the simplex (CSV)")
    p.add_argument("--grid", type=int, default=101, action=_Once)
    p.add_argument("--out", action=_Once)
    p.add_argument("--jobs", type=int, default=1, action=_Once, help="worker processes")

    p = sub.add_parser("noise-threshold", help="white-noise threshold by bisection")
    _add_common(p)

    p = sub.add_parser("verify-witness", help="check a witness certificate against a state")
    p.add_argument("--witness", required=True, action=_Once)
    p.add_argument("--state", required=True, action=_Once)
    p.add_argument("--tol", type=float, default=1e-8, action=_Once)

    p = sub.add_parser("make-state", help="write a state file")
    p.add_argument("kind", choices=("ghz", "w", "cluster", "graph"))
    p.add_argument("--n", type=int, action=_Once)
    p.add_argument("--edges", action=_Once, help="comma separated i-j pairs")
    p.add_argument("--noise", type=float, action=_Once,
                   help="mix as p*state + (1-p)*1/d")
    p.add_argument("--out", action=_Once)
    return parser


def _emit(obj: dict, path) -> None:
    text = json.dumps(obj, indent=2, default=_json_default)
    if path in (None, "-"):
        print(text)
    else:
        Path(path).write_text(text + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def cmd_compute(args) -> int:
    state = io.load_state(args.state)
    t0 = time.perf_counter()
    result = compute(state, args.method, args.norm, args.tol, trace=args.trace)
    report = io.RunReport.from_result(state, result, time.perf_counter() - t0,
                                      {"method": args.method, "tolerance": args.tol,
                                       "max_dim": sdp.max_dim(), "family_tol": FAMILY_TOL})
    if args.witness_out and result.lower_certificate is not None:
        _emit(io.witness_to_dict(result.lower_certificate), args.witness_out)
    if args.decomposition_out and result.upper_certificate is not None:
        _emit(io.decomposition_to_dict(result.upper_certificate), args.decomposition_out)
    _emit(report.to_dict(), args.out)
    return EXIT_OK


def cmd_scan_fig2(args) -> int:
    rows = scan_fig2(args.grid, args.jobs)
    write_csv(args.out, rows, ["p1", "p2", "gmn", "region", "witness_id"])
    return EXIT_OK


def cmd_noise_threshold(args) -> int:
    state = io.load_state(args.state)
    out = noise_threshold(state, args.method, args.norm, args.tol)
    out["input_digest"] = io.digest(state)
    out["normalization"] = args.norm
    _emit(out, args.out)
    return EXIT_OK


def cmd_verify_witness(args) -> int:
    cert = io.load_witness(args.witness)
    rho: DensityMatrix = io.load_state(args.state).density()
    ok = verify_fully_decomposable(cert, args.tol)
    out = {"decomposable": ok, "expectation": cert.expectation(rho),
           "lower_bound": -cert.expectation(rho) if ok else None,
           "defects": decomposition_defects(cert)}
    _emit(out, None)
    if not ok:
        raise NotDecomposable("witness fails the decomposition check")
    return EXIT_OK


def cmd_make_state(args) -> int:
    state = make_state(args.kind, args.n, args.edges, args.noise)
    if args.out in (None, "-"):
        print(state.to_json())
    else:
        io.save_state(state, args.out)
    return EXIT_OK


COMMANDS = {
    "compute": cmd_compute,
    "scan-fig2": cmd_scan_fig2,
    "noise-threshold": cmd_noise_threshold,
    "verify-witness": cmd_verify_witness,
    "make-state": cmd_make_state,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParseError) as exc:
        print(f"gmn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TooLarge as exc:
        print(f"gmn: error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except NumericalFailure as exc:
        print(f"gmn: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NotDecomposable as exc:
        print(f"gmn: {exc}", file=sys.stderr)
        return EXIT_NOT_DECOMPOSABLE
    except (GmnError, ValueError) as exc:
        print(f"gmn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"gmn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
