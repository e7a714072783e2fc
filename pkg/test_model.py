#!/usr/bin/env python
"""
Tests for game primitives
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from errors import ParameterDomainError
from model import Episode, ModelParams, detector_cost, geometric_sum, jump_pmf, jump_tables, survival

probabilities = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
horizons = st.integers(min_value=1, max_value=80)
costs = st.floats(min_value=0.0, max_value=2.0, allow_nan=False)


def test_jump_pmf_surely_bad_start():
    pmf = jump_pmf(ModelParams(mu=0.0, q=0.3, T=3, c=0.1)).pmf
    np.testing.assert_allclose(pmf, [1.0, 0.0, 0.0, 0.0])


def test_jump_pmf_never_jumps():
    pmf = jump_pmf(ModelParams(mu=1.0, q=0.0, T=5, c=0.1)).pmf
    assert pmf[5] == 1.0
    assert pmf[:5].sum() == 0.0


def test_jump_pmf_reference_values():
    dist = jump_pmf(ModelParams(mu=0.9, q=0.3, T=3, c=0.1))
    np.testing.assert_allclose(dist.pmf, [0.1, 0.27, 0.189, 0.441], atol=1e-15)
    assert dist.prob(2) == pytest.approx(0.27)
    assert dist.cdf(2) == pytest.approx(0.37)


@given(mu=probabilities, q=probabilities, T=horizons)
@settings(max_examples=200)
def test_jump_pmf_sums_to_one(mu, q, T):
    pmf = jump_pmf(ModelParams(mu=mu, q=q, T=T, c=0.1)).pmf
    assert (pmf >= 0).all()
    assert abs(pmf.sum() - 1.0) <= 1e-12


@given(mu=probabilities, q=probabilities, T=horizons)
@settings(max_examples=100)
def test_survival_matches_pmf_tail(mu, q, T):
    params = ModelParams(mu=mu, q=q, T=T, c=0.1)
    pmf = jump_pmf(params).pmf
    tables = jump_tables(params)
    for t in range(T + 2):
        assert abs(survival(params, t) - pmf[t:].sum()) <= 1e-12
        assert abs(tables.surv[t] - survival(params, t)) <= 1e-12


def test_survival_examples():
    params = ModelParams(mu=0.9, q=0.3, T=10, c=0.1)
    assert survival(params, 0) == 1.0
    assert survival(params, 1) == pytest.approx(0.9)
    assert survival(params, 3) == pytest.approx(0.441)
    assert survival(params, 11) == 0.0


def test_survival_out_of_range():
    params = ModelParams(mu=0.9, q=0.3, T=4, c=0.1)
    with pytest.raises(IndexError):
        survival(params, 6)
    with pytest.raises(IndexError):
        survival(params, -1)


def test_jump_tables_are_read_only():
    tables = jump_tables(ModelParams(mu=0.9, q=0.3, T=4, c=0.1))
    with pytest.raises(ValueError):
        tables.surv[1] = 0.0


def test_detector_cost_examples():
    assert detector_cost(2, 5, 0.1) == 1.0
    assert detector_cost(5, 5, 0.1) == 0.0
    assert detector_cost(8, 5, 0.1) == pytest.approx(0.3)


@given(tau=st.integers(1, 30), theta=st.integers(1, 30), c=st.floats(0.01, 2.0))
def test_detector_cost_zero_only_at_exact_detection(tau, theta, c):
    assert (detector_cost(tau, theta, c) == 0) == (tau == theta)


def test_episode_realize():
    episode = Episode.realize(theta=3, tau=6, c=0.5)
    assert episode.detector_cost == pytest.approx(1.5)
    assert episode.principal_utility == 5.0
    assert episode.delay == 3
    assert not episode.false_alarm
    assert Episode.realize(theta=4, tau=2, c=0.5).false_alarm


@pytest.mark.parametrize("kwargs,field", [
    ({"mu": 1.5, "q": 0.3, "T": 5, "c": 0.1}, "mu"),
    ({"mu": 0.5, "q": -0.1, "T": 5, "c": 0.1}, "q"),
    ({"mu": 0.5, "q": 0.3, "T": 0, "c": 0.1}, "T"),
    ({"mu": 0.5, "q": 0.3, "T": 5, "c": -1.0}, "c"),
    ({"mu": float("nan"), "q": 0.3, "T": 5, "c": 0.1}, "mu"),
])
def test_model_params_domain(kwargs, field):
    with pytest.raises(ParameterDomainError) as err:
        ModelParams(**kwargs)
    assert err.value.field == field


def test_geometric_sum_small_q_limit():
    assert geometric_sum(1e-15, 10) == pytest.approx(10.0)
    assert geometric_sum(1.0, 0) == 0.0
    assert geometric_sum(0.5, 3) == pytest.approx(1.75)
