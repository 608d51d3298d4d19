import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gmn import linalg
from gmn.errors import NotDecomposable, TooLarge
from gmn.negativity import enumerate_bipartitions
from gmn.sdp import GmnProgram, solve
from gmn.states import (
    DensityMatrix,
    GraphDiagonalSpec,
    add_white_noise,
    build_graph_diagonal,
    ghz_state,
    graph_state,
    linear_cluster_graph,
    two_parameter_cluster_family,
    w_state,
)
from gmn.witness import (
    WitnessCertificate,
    all_cluster_witness_labels,
    cluster_witness,
    cluster_witness_1,
    cluster_witness_2,
    cluster_witness_expectation,
    decomposition_defects,
    find_decomposition,
    ghz_position,
    ghz_witness,
    verify_fully_decomposable,
    witness_lower_bound,
)

from _support import random_biseparable

LABELS = all_cluster_witness_labels()
CLUSTER = linear_cluster_graph(4)
MIXED4 = DensityMatrix.maximally_mixed((2,) * 4)


# ---------------------------------------------------------------- GHZ witness


def test_ghz_witness_on_ghz_and_mixed():
    cert = ghz_witness(3, "000")
    assert cert.expectation(ghz_state(3)) == pytest.approx(-0.5, abs=1e-14)
    assert cert.expectation(DensityMatrix.maximally_mixed((2, 2, 2))) == pytest.approx(0.375)
    assert witness_lower_bound(cert, ghz_state(3)) == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("norm", ["original", "renormalized"])
def test_ghz_witness_partial_transposes_are_psd(n, norm):
    for i in range(2 ** (n - 1)):
        cert = ghz_witness(n, i, phase=0.3 * i, normalization=norm)
        for m in enumerate_bipartitions(n):
            assert linalg.eigvalsh(linalg.partial_transpose(cert.w, cert.dims, m))[0] >= -1e-12
        assert verify_fully_decomposable(cert)


def test_ghz_position_parsing():
    assert ghz_position("000", 3) == 0
    assert ghz_position("111", 3) == 0
    assert ghz_position("110", 3) == 1
    assert ghz_witness(3, "001").label == "ghz[001]"
    with pytest.raises(ValueError):
        ghz_position("01", 3)
    with pytest.raises(TooLarge):
        ghz_witness(9)


# ------------------------------------------------------------ cluster witness


def test_cluster_witness_on_pure_cluster():
    assert cluster_witness_1("++++").expectation(graph_state(CLUSTER)) == pytest.approx(-0.5, abs=1e-13)


@pytest.mark.parametrize("p1, p2", [(0.6, 0.2), (0.9, 0.0), (0.4, 0.4), (0.0, 1.0)])
def test_cluster_witnesses_on_fig2_states(p1, p2):
    rho = build_graph_diagonal(two_parameter_cluster_family(p1, p2))
    assert cluster_witness("++++").expectation(rho) == pytest.approx(-(3 * p1 + p2 - 1) / 4, abs=1e-13)
    assert cluster_witness("++++++").expectation(rho) == pytest.approx(-(p1 + p2 - 0.5), abs=1e-13)


def test_cluster_witness_2_fidelity_form():
    rng = np.random.default_rng(5)
    spec = GraphDiagonalSpec.from_vector(CLUSTER, rng.dirichlet(np.ones(16)))
    rho = build_graph_diagonal(spec)
    for lab in ("++++++", "+-+--+", "-+-+-+"):
        a, d, mu, nu = lab[0], lab[3], lab[4], lab[5]
        bar = {"+": "-", "-": "+"}
        expected = -spec.fidelity(lab[:4]) - spec.fidelity(bar[a] + mu + nu + bar[d]) + 0.5
        assert cluster_witness_2(lab).expectation(rho) == pytest.approx(expected, abs=1e-13)


def test_cluster_witness_on_maximally_mixed():
    assert cluster_witness_2("++++++").expectation(MIXED4) == pytest.approx(0.375)
    # four-sign witness: 1/2 - (1 + 4 * 1/2) / 16
    assert cluster_witness_1("++++").expectation(MIXED4) == pytest.approx(0.3125)


def test_white_noise_lower_bound():
    for p in (0.4, 0.7, 1.0):
        rho = add_white_noise(graph_state(CLUSTER), p)
        assert witness_lower_bound(cluster_witness("++++"), rho) == pytest.approx((13 * p - 5) / 16, abs=1e-13)


def test_label_enumeration():
    assert len(LABELS) == 80 == len(set(LABELS))
    assert LABELS[0] == "++++" and LABELS[16] == "++++++" and LABELS[-1] == "------"


@pytest.mark.parametrize("norm", ["original", "renormalized"])
def test_every_cluster_witness_is_decomposable(norm):
    for lab in LABELS:
        cert = cluster_witness(lab, norm)
        defects = decomposition_defects(cert)
        assert verify_fully_decomposable(cert), (lab, defects)


def test_cluster_witness_expectation_matches_matrix():
    rng = np.random.default_rng(11)
    spec = GraphDiagonalSpec.from_vector(CLUSTER, rng.dirichlet(np.ones(16)))
    rho = build_graph_diagonal(spec)
    for lab in LABELS[::7]:
        assert cluster_witness_expectation(spec.fidelities, lab) == pytest.approx(
            cluster_witness(lab).expectation(rho), abs=1e-13)


def test_six_sign_partial_transpose_spectra():
    # every cut: spectrum within {0, 1/2, 1}, so P_m = 0 and Q_m = W^{T_m} is valid
    for lab in LABELS[16:]:
        w = cluster_witness(lab).w
        for m in enumerate_bipartitions(4):
            vals = linalg.eigvalsh(linalg.partial_transpose(w, (2,) * 4, m))
            assert np.all(np.min(np.abs(vals[:, None] - np.array([0, 0.5, 1])), axis=1) < 1e-10)


def test_four_sign_witness_needs_p_on_two_cuts():
    # W_abcd^{T_m} has eigenvalue -1/4 on 02|13 and 03|12; the certificate moves
    # (|a b' c d><.| + |a b c' d><.|)/2 into P_m there and Q_m stays within [0, 3/4]
    for lab in LABELS[:16]:
        cert = cluster_witness(lab)
        for m in enumerate_bipartitions(4):
            vals = linalg.eigvalsh(linalg.partial_transpose(cert.w, cert.dims, m))
            p, q = cert.per_partition[m]
            wq = linalg.eigvalsh(q)
            if m.members in ((0, 2), (0, 3)):
                assert vals[0] == pytest.approx(-0.25, abs=1e-10)
                assert np.abs(p).max() > 0
                assert wq[0] >= -1e-10 and wq[-1] == pytest.approx(0.75, abs=1e-10)
            else:
                assert vals[0] >= -1e-10 and vals[-1] <= 1 + 1e-10
                assert np.abs(p).max() == 0


# --------------------------------------------------------------- verification


def test_negative_projector_is_rejected():
    psi = ghz_state(3).mat
    zero = np.zeros_like(psi)
    per = {m: (zero, zero) for m in enumerate_bipartitions(3)}
    cert = WitnessCertificate(-psi, (2, 2, 2), per)
    assert not verify_fully_decomposable(cert)
    with pytest.raises(NotDecomposable):
        witness_lower_bound(cert, ghz_state(3))


def test_missing_cut_is_rejected():
    cert = ghz_witness(3)
    parts = dict(cert.per_partition)
    parts.pop(next(iter(parts)))
    assert not verify_fully_decomposable(WitnessCertificate(cert.w, cert.dims, parts))


def test_original_requires_p_capped():
    cert = cluster_witness_1("++++", "original")
    assert decomposition_defects(cert)["p_above_one"] == 0
    w = 3 * np.eye(8)
    per = {m: (2 * np.eye(8), np.eye(8)) for m in enumerate_bipartitions(3)}
    assert verify_fully_decomposable(WitnessCertificate(w, (2, 2, 2), per, "renormalized"))
    assert not verify_fully_decomposable(WitnessCertificate(w, (2, 2, 2), per, "original"))


def test_sdp_witness_for_w_state_verifies():
    sol = solve(GmnProgram(w_state(3)))
    assert verify_fully_decomposable(sol.witness)


def test_find_decomposition_recovers_ghz_witness():
    cert = find_decomposition(ghz_witness(3).w, (2, 2, 2))
    assert verify_fully_decomposable(cert)
    with pytest.raises(NotDecomposable):
        find_decomposition(-ghz_state(3).mat, (2, 2, 2))


def test_find_decomposition_original_cap():
    # 3/2 * 1 is decomposable with P <= 1 only if Q^{T} carries 1/2
    cert = find_decomposition(1.5 * np.eye(8), (2, 2, 2), "original")
    assert verify_fully_decomposable(cert)
    with pytest.raises(NotDecomposable):
        find_decomposition(2.5 * np.eye(8), (2, 2, 2), "original")


@given(seed=st.integers(0, 2**32 - 1))
def test_witnesses_never_detect_biseparable_states(seed):
    rng = np.random.default_rng(seed)
    rho3 = random_biseparable(rng, (2, 2, 2))
    for i in range(4):
        assert witness_lower_bound(ghz_witness(3, i, rng.uniform(0, 6.3)), rho3) <= 1e-8
    rho4 = random_biseparable(rng, (2,) * 4)
    for lab in rng.choice(LABELS, 6, replace=False):
        assert -cluster_witness(str(lab)).expectation(rho4) <= 1e-8
