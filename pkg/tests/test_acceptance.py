"""Acceptance criteria, each checked at its stated tolerance.

Every test prints one ``ACCEPTANCE <k> PASS|FAIL`` line, also when output
capture is on. ``python tests/test_acceptance.py`` runs all nine directly.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gmn import cli, io, linalg  # noqa: E402
from gmn.analytic import cluster_diagonal_gmn, ghz_diagonal_gmn  # noqa: E402
from gmn.negativity import Bipartition, bipartite_negativity, enumerate_bipartitions  # noqa: E402
from gmn.sdp import sdp_gmn  # noqa: E402
from gmn.states import (  # noqa: E402
    DensityMatrix,
    GraphDiagonalSpec,
    build_ghz_diagonal,
    build_graph_diagonal,
    ghz_spec_from_matrix,
    ghz_stabilizers,
    ghz_state,
    graph_white_noise_spec,
    linear_cluster_graph,
    random_local_unitary,
    random_mixed_state,
    symmetrize,
    w_state,
)
from gmn.witness import all_cluster_witness_labels, cluster_witness, witness_lower_bound  # noqa: E402

from _support import random_biseparable, random_cluster_spec, random_ghz_spec  # noqa: E402

CLUSTER = linear_cluster_graph(4)
PURE_CLUSTER = GraphDiagonalSpec(CLUSTER, {"++++": 1.0})


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def criterion_1():
    rho = ghz_state(3)
    checks = []
    for norm in ("renormalized", "original"):
        sol, dt = timed(sdp_gmn, rho, norm)
        checks.append((f"sdp-{norm}", sol.value, dt))
    res, dt = timed(ghz_diagonal_gmn, ghz_spec_from_matrix(rho))
    checks.append(("analytic", res.value, dt))
    ok = all(abs(v - 0.5) <= 1e-6 and dt < 5 for _, v, dt in checks)
    return ok, ", ".join(f"{k}={v:.9f} ({dt:.2f}s)" for k, v, dt in checks)


def criterion_2():
    rho = w_state(3)
    ren, t_ren = timed(sdp_gmn, rho, "renormalized")
    org, t_org = timed(sdp_gmn, rho, "original")
    ok_ren = abs(ren.value - math.sqrt(2) / 3) <= 1e-6 and t_ren < 5
    ok_org = abs(org.value - 0.43) <= 0.005 and t_org < 5
    return ok_ren and ok_org, (
        f"renormalized={ren.value:.9f} vs sqrt2/3={math.sqrt(2) / 3:.9f} "
        f"[{'ok' if ok_ren else 'off'}], original={org.value:.9f} vs 0.43+-0.005 "
        f"[{'ok' if ok_org else 'off'}]"
    )


def criterion_3():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        spec = random_ghz_spec(rng)
        rho = build_ghz_diagonal(spec)
        exact = ghz_diagonal_gmn(spec).value
        for norm in ("renormalized", "original"):
            worst = max(worst, abs(sdp_gmn(rho, norm).value - exact))
    dt = time.perf_counter() - t0
    return worst <= 1e-6 and dt < 600, f"max |analytic - sdp| = {worst:.2e} over 200 solves in {dt:.1f}s"


def criterion_4():
    parts = []
    exact_ok = True
    for p in (0.0, 0.2, 5 / 13, 0.6, 1.0):
        v = cluster_diagonal_gmn(graph_white_noise_spec(PURE_CLUSTER, p)).value
        expected = max((13 * p - 5) / 16, 0.0)
        exact_ok &= abs(v - expected) <= 1e-15
    parts.append(f"formula {'exact' if exact_ok else 'off'}")
    thr = cli.noise_threshold(io.StateFile.from_graph_spec(PURE_CLUSTER))["threshold"]
    thr_ok = abs(thr - 5 / 13) <= 1e-6
    parts.append(f"threshold={thr:.9f} (5/13={5 / 13:.9f})")
    sdp_ok = True
    for p in (0.5, 0.9):
        spec = graph_white_noise_spec(PURE_CLUSTER, p)
        sol, dt = timed(sdp_gmn, build_graph_diagonal(spec))
        sdp_ok &= abs(sol.value - (13 * p - 5) / 16) <= 1e-6 and dt < 60
        parts.append(f"sdp p={p}: {sol.value:.9f} ({dt:.1f}s)")
    return exact_ok and thr_ok and sdp_ok, ", ".join(parts)


def criterion_5():
    rows, dt = timed(cli.scan_fig2, 101)
    worst = 0.0
    labels = set()
    for r in rows:
        p1, p2 = r["p1"], r["p2"]
        f = ((p1 + 3 * p2 - 1) / 4, p1 + p2 - 0.5, (3 * p1 + p2 - 1) / 4)
        labels.add(r["region"])
        if r["region"] == "IV":
            worst = max(worst, abs(r["gmn"]), max(0.0, max(f)))
        else:
            k = cli.REGIONS.index(r["region"])
            worst = max(worst, abs(r["gmn"] - f[k]), max(f) - f[k])
    ok = worst <= 1e-12 and labels == {"I", "II", "III", "IV"} and dt < 60 and len(rows) == 5151
    return ok, f"{len(rows)} points, regions {sorted(labels)}, max formula error {worst:.1e}, {dt:.1f}s"


def criterion_6():
    rng = np.random.default_rng(6)
    worst = 0.0
    count = 0
    while count < 50:
        spec = random_cluster_spec(rng, rng.uniform(0.3, 0.9))
        res = cluster_diagonal_gmn(spec)
        if res.value <= 0:
            continue
        rho = build_graph_diagonal(spec)
        lower = witness_lower_bound(res.lower_certificate, rho)
        upper = res.upper_certificate.certified_value
        worst = max(worst, abs(lower - res.value), abs(upper - res.value),
                    res.upper_certificate.reconstruction_error(rho))
        count += 1
    return worst <= 1e-8, f"50 states, max |bound - value| = {worst:.1e}"


def criterion_7():
    bad = []
    found: set = set()
    for lab in all_cluster_witness_labels():
        w = cluster_witness(lab).w
        for m in enumerate_bipartitions(4):
            vals = linalg.eigvalsh(linalg.partial_transpose(w, (2,) * 4, m))
            found.update(np.round(vals, 6).tolist())
            if np.any(np.min(np.abs(vals[:, None] - np.array([0.0, 0.5])), axis=1) > 1e-10):
                bad.append((lab, m.label()))
    found = sorted({0.0 if v == 0 else v for v in found})
    return not bad, f"{len(bad)} of 560 (witness, cut) pairs outside {{0, 1/2}}; eigenvalues seen {found}"


def criterion_8():
    rng = np.random.default_rng(8)
    worst_spread = worst_gap = 0.0
    failures = []
    for i in range(30):
        rho = random_mixed_state((2, 2, 2), rng, k=int(rng.integers(2, 6)))
        sol = sdp_gmn(rho)
        lower, upper = sol.lower_bound, sol.upper_bound
        worst_spread = max(worst_spread, upper - lower)
        worst_gap = max(worst_gap, sol.gap)
        if not (sol.status == "optimal" and sol.gap <= 1e-8 and lower <= sol.value <= upper
                and upper - lower <= 1e-7):
            failures.append(i)
    return not failures, (f"30 states, max gap {worst_gap:.1e}, max spread {worst_spread:.1e}"
                          + (f", failing {failures}" if failures else ""))


def _property_suite():
    rng = np.random.default_rng(9)
    dims = (2, 2, 2)
    results = {}

    ok = True
    for _ in range(30):
        rho = random_mixed_state(dims, rng).mat
        parties = [q for q in range(3) if rng.integers(2)] or [0]
        ok &= np.array_equal(linalg.partial_transpose(linalg.partial_transpose(rho, dims, parties), dims, parties), rho)
    results["pt-involution"] = (ok, "exact")

    worst = -np.inf
    for _ in range(30):
        rho = random_mixed_state(dims, rng)
        worst = max(worst, sdp_gmn(rho, "original").value - sdp_gmn(rho).value)
    results["original<=renormalized"] = (worst <= 1e-7, f"max excess {worst:.1e}")

    worst = -np.inf
    for _ in range(30):
        a, b = random_mixed_state(dims, rng, k=1), random_mixed_state(dims, rng, k=2)
        t = rng.uniform(0.05, 0.95)
        mix = DensityMatrix(t * a.mat + (1 - t) * b.mat, dims)
        worst = max(worst, sdp_gmn(mix).value - t * sdp_gmn(a).value - (1 - t) * sdp_gmn(b).value)
    results["convexity"] = (worst <= 1e-6, f"max excess {worst:.1e}")

    worst = 0.0
    for _ in range(30):
        rho = random_mixed_state(dims, rng)
        u = random_local_unitary(dims, rng)
        worst = max(worst, abs(sdp_gmn(DensityMatrix(u @ rho.mat @ u.conj().T, dims)).value - sdp_gmn(rho).value))
    results["local-unitary"] = (worst <= 1e-6, f"max change {worst:.1e}")

    worst = 0.0
    for _ in range(30):
        d2 = (2, 2) if rng.integers(2) else (2, 3)
        rho = random_mixed_state(d2, rng, k=int(rng.integers(1, 4)))
        worst = max(worst, abs(sdp_gmn(rho).value - bipartite_negativity(rho, Bipartition((0,), 2))))
    results["two-party"] = (worst <= 1e-6, f"max deviation {worst:.1e}")

    worst = -np.inf
    stab = ghz_stabilizers(3)
    for _ in range(30):
        rho = random_mixed_state(dims, rng)
        worst = max(worst, sdp_gmn(symmetrize(rho, stab)).value - sdp_gmn(rho).value)
    results["symmetrization"] = (worst <= 1e-7, f"max increase {worst:.1e}")

    worst = -np.inf
    for _ in range(30):
        worst = max(worst, sdp_gmn(random_biseparable(rng, dims)).value)
    results["biseparable"] = (worst <= 1e-7, f"max value {worst:.1e}")
    return results


def criterion_9():
    results = _property_suite()
    ok = all(v[0] for v in results.values())
    return ok, "; ".join(f"{k} {'ok' if v[0] else 'FAIL'} ({v[1]})" for k, v in results.items())


CRITERIA = {
    1: ("GHZ value", criterion_1),
    2: ("W state", criterion_2),
    3: ("GHZ-diagonal analytic vs SDP", criterion_3),
    4: ("cluster white noise", criterion_4),
    5: ("two-parameter region scan", criterion_5),
    6: ("certificate pinching", criterion_6),
    7: ("cluster witness partial-transpose spectra", criterion_7),
    8: ("duality sandwich", criterion_8),
    9: ("property suite", criterion_9),
}


def check(k):
    name, fn = CRITERIA[k]
    ok, detail = fn()
    line = f"ACCEPTANCE {k} {'PASS' if ok else 'FAIL'} [{name}]: {detail}"
    return ok, line


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_acceptance(k, capsys):
    ok, line = check(k)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for k in sorted(CRITERIA):
        ok, line = check(k)
        print(line, flush=True)
        failed += not ok
    sys.exit(1 if failed else 0)
