import numpy as np
import pytest

from fracwalk.errors import ConditionsViolated, RankDeficient, SingularGauge
from fracwalk.gauge import (
    check_A_prime,
    check_conditions,
    check_diagonal_preservation,
    gauge_action,
    preserves_ones,
    ratio_matrix,
    recover_interaction,
    solve_gauge,
    transitivity_defect,
)
from fracwalk.graph_core import complete_graph, path_graph
from fracwalk.walk_model import build_interaction, normalize, transition_matrix


def random_gauge(rng, m):
    return rng.normal(size=(m, m)) + 3 * np.eye(m)


def test_identity_and_group_law(p5_lazy, rng):
    P = p5_lazy.P
    np.testing.assert_allclose(gauge_action(np.eye(2), P, 3), P)
    A, B = random_gauge(rng, 2), random_gauge(rng, 2)
    np.testing.assert_allclose(gauge_action(A @ B, P, 3), gauge_action(A, gauge_action(B, P, 3), 3), atol=1e-10)


def test_diagonal_scaling(p5_transition):
    P = p5_transition.P
    Q = gauge_action(np.diag([2.0, 3.0]), P, 3)
    assert Q[0, 3] == pytest.approx(P[0, 3] / 2)


def test_singular_gauge(p5_lazy):
    with pytest.raises(SingularGauge):
        gauge_action(np.ones((2, 2)), p5_lazy.P, 3)


def test_forward_matrices_pass(p5_transition, p5_lazy, star):
    for P in (p5_transition.P, p5_lazy.P, transition_matrix(star, None, 2.5).P):
        assert check_conditions(P).overall
    assert check_conditions(p5_lazy.P, strict_positive=True).p1 == "positive"
    rep = check_conditions(p5_transition.P, strict_positive=True)
    assert rep.p1 == "nonnegative" and not rep.overall


def test_ratio_matrices_are_transitive(rng):
    v = rng.uniform(0.1, 10, 7)
    hat = v[None, :] / v[:, None]
    assert transitivity_defect(hat) <= 1e-12


def test_doubly_stochastic_fails_transitivity():
    P = np.array([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.2, 0.5]])
    rep = check_conditions(P)
    assert rep.p2_residual < 1e-15
    assert rep.p3_residual > 0.1 and not rep.overall


def test_zero_off_diagonal_makes_p3_inapplicable():
    P = np.array([[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]])
    rep = check_conditions(P)
    assert rep.p3_residual is None and not rep.overall


def test_recover_interaction_scale(rng):
    g = path_graph(6, 6)
    gamma = rng.uniform(0.5, 2, 6)
    ic = build_interaction(g, gamma, 2.5, 1.0)
    tm = normalize(ic)
    rec = recover_interaction(tm.P)
    lam = tm.m[0]
    np.testing.assert_allclose(rec.C, ic.C / lam, rtol=1e-12)
    assert np.abs(rec.C - rec.C.T).max() <= 1e-10
    assert rec.anchor == 0 and rec.m[0] == 1
    # renormalising gives the transition matrix back
    np.testing.assert_allclose(normalize(rec.C * lam, 6).P, tm.P, atol=1e-10)


def test_recover_interaction_p5_ratio(p5_transition):
    C = recover_interaction(p5_transition.P).C
    assert C[0, 1] / C[0, 2] == pytest.approx(4.0, abs=1e-12)


def test_recover_interaction_rejects():
    with pytest.raises(ConditionsViolated):
        recover_interaction(np.array([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.2, 0.5]]))


def test_a_prime(p5_lazy, rng):
    P = p5_lazy.P
    assert check_A_prime(np.eye(2), P, 3)
    A = rng.uniform(0.1, 1, (2, 2))
    A /= A.sum(axis=1, keepdims=True)
    A += np.array([[0.3, -0.3], [-0.2, 0.2]])
    assert preserves_ones(A)
    assert check_A_prime(A, P, 3) == preserves_ones(A) is True
    assert not check_A_prime(2 * np.eye(2), P, 3)
    assert not preserves_ones(2 * np.eye(2))


def test_diagonal_preservation(p5_lazy, rng):
    assert check_diagonal_preservation([1.0, 1.0], p5_lazy.P, 3).overall
    rep = check_diagonal_preservation(rng.uniform(0.5, 2, 2), p5_lazy.P, 3)
    assert rep.p1 == "positive" and rep.p3_residual <= 1e-10
    assert rep.p2_residual > 0
    assert check_diagonal_preservation([1.0, 1.5], p5_lazy.P, 3).p2_residual > 0


def test_solve_gauge(rng):
    g = path_graph(7, 4)
    Pt = transition_matrix(g, rng.uniform(0.5, 2, 7), 2.5).P
    np.testing.assert_allclose(solve_gauge(Pt, Pt, 4), np.eye(3), atol=1e-10)
    A0 = random_gauge(rng, 3)
    np.testing.assert_allclose(solve_gauge(gauge_action(A0, Pt, 4), Pt, 4), A0, atol=1e-8)
    other = rng.uniform(size=(7, 7))
    other /= other.sum(axis=1, keepdims=True)
    assert solve_gauge(other, Pt, 4) is None


def test_solve_gauge_rank_deficient():
    Pt = transition_matrix(complete_graph(4, 1), None, 2.5).P
    with pytest.raises(RankDeficient):
        solve_gauge(Pt, Pt, 1)


def test_gauge_preserves_ratio_form(p5_lazy):
    hat = ratio_matrix(p5_lazy.P)
    np.testing.assert_allclose(np.diag(hat), 1.0)
