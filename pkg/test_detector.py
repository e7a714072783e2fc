#!/usr/bin/env python
"""
Tests for belief updates, the detector DP and its decision thresholds
"""

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from detector import (
    belief_update,
    best_response_obeys,
    obedience_margins,
    obedient_cost,
    solve_dp,
    threshold_at,
    wait_value,
)
from errors import ParameterDomainError, UnsupportedPolicyError
from mechanisms import (
    SilentPathPolicy,
    TbpMechanism,
    full_info_policy,
    no_info_policy,
    static_policy,
    tbp_obedience,
    tbp_to_silent_path,
)
from model import ModelParams, jump_tables
from solver import _no_info_cost_vector, algorithm1

params_strategy = st.builds(
    ModelParams,
    mu=st.floats(0.0, 1.0),
    q=st.floats(0.0, 1.0),
    T=st.integers(1, 25),
    c=st.floats(0.0, 1.0),
)


@pytest.mark.parametrize("pi,rho_g,rho_b,q,expected", [
    (0.5, 1.0, 0.0, 0.0, 1.0),
    (0.5, 1.0, 1.0, 0.0, 0.5),
    (0.9, 1.0, 0.4, 0.3, 0.63 / (0.63 + 0.37 * 0.4)),
])
def test_belief_update_after_silence(pi, rho_g, rho_b, q, expected):
    assert belief_update(pi, rho_g, rho_b, q, "k") == pytest.approx(expected)


def test_belief_update_declaration_reveals_bad_state():
    assert belief_update(0.9, 1.0, 0.4, 0.3, "d") == 0.0


def test_belief_update_zero_probability_message():
    assert belief_update(0.5, 1.0, 1.0, 0.2, "d") is None
    assert belief_update(0.0, 1.0, 0.0, 0.2, "k") is None


def test_belief_update_domain():
    with pytest.raises(ParameterDomainError):
        belief_update(1.2, 1.0, 0.5, 0.2, "k")
    with pytest.raises(ParameterDomainError):
        belief_update(0.5, 1.0, 0.5, 0.2, "x")


@pytest.mark.parametrize("mu,c", [(0.3, 0.5), (0.9, 0.1), (0.5, 1.0)])
def test_single_period_value(mu, c):
    solution = solve_dp(ModelParams(mu=mu, q=0.3, T=1, c=c), no_info_policy(1))
    assert solution.values[0] == pytest.approx(min(mu, c * (1 - mu)))
    assert solution.expected_cost == pytest.approx(min(mu, c * (1 - mu)))


def test_full_information_costs_nothing():
    params = ModelParams(mu=0.9, q=0.3, T=8, c=0.4)
    solution = solve_dp(params, full_info_policy(8))
    assert solution.expected_cost == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(solution.beliefs.pi, [0.9] + [1.0] * 8)
    assert solution.wait_is_optimal.all()
    assert best_response_obeys(params, full_info_policy(8))


def test_optimal_mechanism_is_obeyed():
    params = ModelParams(mu=0.9, q=0.3, T=5, c=0.1)
    mechanism = algorithm1(params).mechanism
    solution = solve_dp(params, tbp_to_silent_path(mechanism, 5))
    assert solution.wait_is_optimal[:mechanism.n_p].all()
    assert best_response_obeys(params, tbp_to_silent_path(mechanism, 5))


def test_full_silence_is_not_obeyed():
    params = ModelParams(mu=0.9, q=0.3, T=50, c=0.1)
    assert not best_response_obeys(params, no_info_policy(50))
    assert not best_response_obeys(params, tbp_to_silent_path(TbpMechanism(50, 1.0), 50))
    solution = solve_dp(params, no_info_policy(50), with_thresholds=False)
    assert int(np.flatnonzero(~solution.wait_is_optimal)[0]) + 1 == 5


@given(params=params_strategy)
@settings(max_examples=100)
def test_no_information_value_is_best_fixed_time(params):
    solution = solve_dp(params, no_info_policy(params.T), with_thresholds=False)
    assert solution.expected_cost == pytest.approx(_no_info_cost_vector(params).min(), abs=1e-10)


@given(params=params_strategy, data=st.data())
@settings(max_examples=200)
def test_dp_obedience_matches_closed_form_slack(params, data):
    mech = TbpMechanism(data.draw(st.integers(1, params.T)), data.draw(st.floats(0.0, 1.0)))
    report = tbp_obedience(params, mech, tolerance=0.0)
    assume(abs(report.min_slack) > 1e-6)
    assert best_response_obeys(params, tbp_to_silent_path(mech, params.T)) == report.satisfied


@given(params=params_strategy, data=st.data())
@settings(max_examples=100)
def test_margins_scale_to_closed_form_slack(params, data):
    mech = TbpMechanism(data.draw(st.integers(1, params.T)), data.draw(st.floats(0.0, 1.0)))
    policy = tbp_to_silent_path(mech, params.T)
    margins = obedience_margins(params, policy)
    reach = solve_dp(params, policy, with_thresholds=False).reach
    slack = tbp_obedience(params, mech).slack
    for t in range(1, mech.n_p + 1):
        if margins[t - 1] is None:
            continue
        assert margins[t - 1] * reach[t - 1] == pytest.approx(slack[t - 1], abs=1e-9)


def test_value_function_is_concave_in_belief():
    params = ModelParams(mu=0.9, q=0.3, T=6, c=0.2)
    policy = static_policy(6, 0.6)
    grid = np.linspace(0.0, 1.0, 201)
    for t in range(1, 7):
        values = np.minimum(grid, wait_value(params, policy, t, grid))
        assert np.all(np.diff(values, 2) <= 1e-12)


def test_threshold_at_final_period():
    params = ModelParams(mu=0.9, q=0.3, T=5, c=0.25)
    assert threshold_at(params, static_policy(5, 0.5), 5) == pytest.approx(0.25 / 1.25, abs=1e-10)


def test_threshold_free_waiting():
    params = ModelParams(mu=0.9, q=0.3, T=5, c=0.0)
    for t in range(1, 6):
        assert threshold_at(params, no_info_policy(5), t) == 0.0


def test_thresholds_agree_with_decisions():
    params = ModelParams(mu=0.9, q=0.3, T=5, c=0.1)
    policy = tbp_to_silent_path(algorithm1(params).mechanism, 5)
    solution = solve_dp(params, policy)
    pi = solution.beliefs.pi[1:]
    for t in range(1, 6):
        if np.isnan(pi[t - 1]) or abs(pi[t - 1] - solution.thresholds[t - 1]) < 1e-6:
            continue
        assert solution.wait_is_optimal[t - 1] == (pi[t - 1] > solution.thresholds[t - 1])


def test_thresholds_agree_under_full_silence():
    params = ModelParams(mu=0.9, q=0.3, T=12, c=0.1)
    solution = solve_dp(params, no_info_policy(12))
    pi = solution.beliefs.pi[1:]
    for t in range(1, 13):
        if abs(pi[t - 1] - solution.thresholds[t - 1]) < 1e-6:
            continue
        assert solution.wait_is_optimal[t - 1] == (pi[t - 1] > solution.thresholds[t - 1])


@given(params=params_strategy, data=st.data())
@settings(max_examples=100)
def test_obedient_cost_equals_dp_cost_when_obeyed(params, data):
    mech = TbpMechanism(data.draw(st.integers(1, params.T)), data.draw(st.floats(0.0, 1.0)))
    policy = tbp_to_silent_path(mech, params.T)
    assume(tbp_obedience(params, mech, tolerance=0.0).min_slack > 1e-6)
    solution = solve_dp(params, policy, with_thresholds=False)
    assert obedient_cost(params, policy) == pytest.approx(solution.expected_cost, abs=1e-9)


def test_obedient_cost_counts_false_alarms():
    params = ModelParams(mu=1.0, q=0.0, T=3, c=0.1)
    policy = SilentPathPolicy(rho_g=np.array([0.5, 1.0, 1.0]), rho_b=np.array([0.0, 0.0, 0.0]))
    assert obedient_cost(params, policy) == pytest.approx(0.5)


def test_margins_allow_noisy_good_state():
    params = ModelParams(mu=0.9, q=0.3, T=4, c=0.1)
    policy = SilentPathPolicy(rho_g=np.array([0.9, 1.0, 1.0, 1.0]), rho_b=np.array([0.2, 0.2, 0.0, 0.0]))
    margins = obedience_margins(params, policy)
    assert len(margins) == 4
    assert all(m is not None for m in margins)


def test_unsupported_policies_rejected():
    params = ModelParams(mu=0.9, q=0.3, T=3, c=0.1)
    noisy = SilentPathPolicy(rho_g=np.array([0.9, 1.0, 1.0]), rho_b=np.zeros(3))
    with pytest.raises(UnsupportedPolicyError):
        solve_dp(params, noisy)
    with pytest.raises(UnsupportedPolicyError):
        best_response_obeys(params, noisy)
    with pytest.raises(ParameterDomainError):
        solve_dp(params, no_info_policy(4))


def test_unreachable_history_counts_as_obeyed():
    params = ModelParams(mu=0.0, q=0.3, T=4, c=0.2)
    solution = solve_dp(params, full_info_policy(4), with_thresholds=False)
    assert not solution.beliefs.reachable[1:].any()
    assert solution.wait_is_optimal.all()
    assert solution.to_dict()["beliefs"][1] is None
    assert jump_tables(params).surv[1] == 0.0
