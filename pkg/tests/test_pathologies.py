import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ultradiff import pathologies as P
from ultradiff import weights
from ultradiff.errors import DomainError

from oracles import bump_derivative


@pytest.fixture(scope="module")
def profile():
    return P.lemma157_profile(n_max=1000, schedule=(100, 1000))


def test_template_norms_match_symbolic_oracle():
    u = np.linspace(-0.999, 0.999, 400001)
    for k in range(4):
        ref = np.trapezoid(np.abs(bump_derivative(u, k)), u)
        assert P.template_norm(k, 1.0) == pytest.approx(ref, rel=1e-4)


def test_table_gaps_below_one_percent(profile):
    for row in profile["table"]:
        assert row["rel_gap"] < 0.01, row


def test_train_is_nonnegative(profile):
    assert profile["nonnegative"]


def test_first_derivative_l1_grows_with_harmonic_sum(profile):
    growth = profile["l1_growth"]
    assert growth[1]["l1_dphi"] > growth[0]["l1_dphi"]
    for g in growth:
        assert abs(g["ratio"] - 1) < 0.05


@pytest.mark.xfail(strict=True, reason="the train has L1 mass sum 1/(n log n), which diverges")
def test_l1_masses_are_cauchy():
    m = P.lemma_l1_masses(schedule=(1000, 1001, 2000))
    assert m[1] - m[0] < 1e-6 and m[2] - m[0] < 1e-6


def test_l1_increment_matches_single_bump_mass():
    m = P.lemma_l1_masses(schedule=(1000, 1001))
    assert m[1] - m[0] == pytest.approx(P.template_norm(0, 1.0) / (1001 * math.log(1001)), rel=1e-6)


def test_table_rejects_p_one():
    with pytest.raises(DomainError):
        P.lemma157_profile(p_values=(1.0,))


def test_halflie_weights():
    b = P.halflie_weights(100)
    assert P.selected_indices(100) == [3, 8, 21, 55]
    assert b[2] == 1.0 and b[7] == 0.5 and b[54] == 0.25
    assert np.count_nonzero(b) == 4


@pytest.fixture(scope="module")
def divergence():
    return P.halflie_divergence(2.0, n_max=10000)


def test_first_term_grows_monotonically(divergence):
    masses = [r["term1_mass"] for r in divergence["rows"]]
    assert masses[0] < masses[1] < masses[2]
    assert divergence["lower_bound_holds"]


def test_second_term_increments_small(divergence):
    assert divergence["term2_max_increment_beyond_1000"] < 1e-3
    t2 = [r["term2_mass"] for r in divergence["rows"]]
    assert t2[2] - t2[1] < 1e-3


def test_halflie_rejects_bad_p():
    with pytest.raises(DomainError):
        P.halflie_divergence(1.0, n_max=100, schedule=(100,))


@settings(max_examples=10)
@given(st.lists(st.floats(0.0, 2.0), min_size=5, max_size=30))
def test_theta_matches_partial_sums(a):
    assert P.theta_check(a, range(1, len(a) + 1)) < 1e-8


def test_theta_harmonic():
    assert P.theta_check(P.harmonic_weights(500), [1, 10, 100, 500]) < 1e-8


def test_mu_sequence_asymptotics():
    M = weights.gevrey(2, 10000)
    rep = P.gevrey_mu_sequence(M, 10000)
    assert rep["r"][3] == pytest.approx(2 / 24 ** 0.125, abs=1e-12)
    assert rep["k_r"][99] > rep["k_r"][9]
    assert rep["r_strictly_decreasing"] and rep["k_r_strictly_increasing"] and rep["spacing_at_least_one"]


def test_mu_requires_normalized_sequence():
    with pytest.raises(DomainError):
        P.gevrey_mu_sequence(weights.make_sequence({"kind": "custom", "values": [2.0, 3.0, 4.0]}), 2)
