import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracwalk.errors import InsufficientData
from fracwalk.gauge import gauge_action
from fracwalk.graph_core import complete_graph, random_connected_graph
from fracwalk.recovery import (
    CanonicalRepresentative,
    assemble_canonical,
    factorization_gauge,
    full_rank_factorization,
    gauge_transform_pinv,
    hidden_products,
    insufficiency_witness,
    pseudoinverse,
    recover_canonical,
    recovered_vertex_count,
    verify_redundancy,
)
from fracwalk.walk_model import ObservationData, blocks, exact_observation_data, transition_matrix


def penrose_residuals(a, ap):
    return (
        np.abs(a @ ap @ a - a).max(),
        np.abs(ap @ a @ ap - ap).max(),
        np.abs((a @ ap).T - a @ ap).max(),
        np.abs((ap @ a).T - ap @ a).max(),
    )


def test_pinv_examples():
    np.testing.assert_allclose(pseudoinverse(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(pseudoinverse([[1.0, 2.0]]), [[0.2], [0.4]])
    np.testing.assert_array_equal(pseudoinverse(np.zeros((2, 3))), np.zeros((3, 2)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 4))
def test_penrose_conditions(seed, rank):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(6, rank)) @ rng.normal(size=(rank, 4))
    assert max(penrose_residuals(a, pseudoinverse(a))) <= 1e-10


def test_full_rank_factorization_examples():
    a = np.array([[1.0, 2.0], [2.0, 4.0]])
    r1, r2, r = full_rank_factorization(a)
    assert r == 1
    np.testing.assert_allclose(r1 @ r2, a, atol=1e-12)
    assert full_rank_factorization(np.eye(4))[2] == 4
    r1, r2, r = full_rank_factorization(np.zeros((3, 3)))
    assert r == 0 and r1.shape == (3, 0) and r2.shape == (0, 3)


def test_hidden_products_match_blocks(p5_transition):
    g2, g3 = hidden_products(exact_observation_data(p5_transition, 3))
    p11, p12, p21, p22 = blocks(p5_transition)
    np.testing.assert_allclose(g2, p12 @ p21, atol=1e-12)
    np.testing.assert_allclose(g3, p12 @ p22 @ p21, atol=1e-12)


def test_no_hidden_vertices():
    tm = transition_matrix(complete_graph(4, 4), None, 2.5)
    data = exact_observation_data(tm, 3)
    g2, g3 = hidden_products(data)
    assert np.abs(g2).max() < 1e-15 and np.abs(g3).max() < 1e-15
    rep = recover_canonical(data)
    assert rep.r == 0 and recovered_vertex_count(rep) == 4
    np.testing.assert_allclose(rep.Q, tm.P)


def test_needs_three_blocks(p5_transition):
    with pytest.raises(InsufficientData):
        recover_canonical(exact_observation_data(p5_transition, 2))


def test_p5_canonical(p5_transition):
    P = p5_transition.P
    rep = recover_canonical(exact_observation_data(p5_transition, 3))
    assert rep.r == 2 and recovered_vertex_count(rep) == 5 and not rep.rank_saturated
    np.testing.assert_array_equal(rep.Q[:3, :3], P[:3, :3])
    np.testing.assert_array_equal(rep.Q[:3, 3:], rep.R1)
    np.testing.assert_array_equal(rep.Q[3:, :3], rep.R2)
    A = factorization_gauge(P, 3, rep.R1)
    assert np.abs(rep.Q - gauge_transform_pinv(P, 3, A)).max() <= 1e-8
    assert verify_redundancy(P, rep.Q, 3, 10) <= 1e-8
    assert verify_redundancy(P, P, 3, 10) == 0.0


def test_rank_deficient_is_lower_bound():
    tm = transition_matrix(complete_graph(4, 1), None, 2.5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = recover_canonical(exact_observation_data(tm, 3))
    assert recovered_vertex_count(rep) < 4
    assert rep.rank_saturated


def test_perturbed_hidden_block_changes_data(p5_lazy):
    P2 = insufficiency_witness(p5_lazy.P, 3, eps=1e-3)
    assert verify_redundancy(p5_lazy.P, P2, 3, 2) <= 1e-15
    d3 = np.abs(np.linalg.matrix_power(p5_lazy.P, 3)[:3, :3] - np.linalg.matrix_power(P2, 3)[:3, :3]).max()
    assert d3 > 1e-6


def test_factorization_gauge_freedom(p5_lazy, rng):
    data = exact_observation_data(p5_lazy, 3)
    g2, g3 = hidden_products(data)
    r1, r2, r = full_rank_factorization(g2)
    q = assemble_canonical(data.mats[0], g3, r1, r2)
    R = rng.normal(size=(r, r)) + 3 * np.eye(r)
    q2 = assemble_canonical(data.mats[0], g3, r1 @ R, np.linalg.inv(R) @ r2)
    assert verify_redundancy(q, q2, 3, 10) <= 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_diagonal_gauge_leaves_data_unchanged(seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(9, rng, observable=6)
    P = transition_matrix(g, rng.uniform(0.5, 2, 9), 2.5).P
    A = np.diag(rng.uniform(0.5, 2, 3))
    P2 = gauge_action(A, P, 6)
    d1, d2 = exact_observation_data(P, 3, 6), exact_observation_data(P2, 3, 6)
    for a, b in zip(d1.mats, d2.mats):
        np.testing.assert_allclose(a, b, atol=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert recover_canonical(d1).r == recover_canonical(d2).r


def test_nan_data_rejected():
    m = np.full((2, 2), np.nan)
    with pytest.raises(InsufficientData):
        hidden_products(ObservationData(2, (m, m, m)))


def test_witness_requires_two_hidden(p5_lazy):
    with pytest.raises(Exception):
        insufficiency_witness(p5_lazy.P, 4)


def test_canonical_dataclass_saturation():
    rep = CanonicalRepresentative(N=2, r=2, Q=np.eye(4), R1=np.eye(2), R2=np.eye(2))
    assert rep.rank_saturated
