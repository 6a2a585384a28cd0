import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ultradiff import weights
from ultradiff.errors import DomainError

gevrey_orders = st.floats(min_value=1.0, max_value=3.0, allow_nan=False)


def test_gevrey_one_is_constant():
    M = weights.gevrey(1, 8)
    assert np.all(M.values == 1.0)


def test_gevrey_two_is_factorial():
    M = weights.make_sequence({"kind": "gevrey", "s": 2, "kmax": 8})
    assert [M.exact(k) for k in range(5)] == [1, 1, 2, 6, 24]


def test_gevrey_three_halves_matches_summed_logs():
    M = weights.gevrey(1.5, 60)
    ref = [0.5 * sum(math.log(j) for j in range(1, k + 1)) for k in range(61)]
    assert np.allclose(M.log_values, ref, rtol=1e-13, atol=1e-13)


def test_large_k_stays_finite():
    M = weights.gevrey(2, 10_000)
    assert np.all(np.isfinite(M.log_values))
    assert M.log(10_000) == pytest.approx(math.lgamma(10_001), rel=1e-12)


@pytest.mark.parametrize("spec", [
    {"kind": "gevrey", "s": 0.5, "kmax": 10},
    {"kind": "gevrey", "s": 2, "kmax": 5},
    {"kind": "custom", "values": [1, 1, 2, -1, 4, 5, 6, 7, 8]},
    {"kind": "custom", "values": [1, 2, 3]},
    {"kind": "nonsense", "kmax": 10},
])
def test_bad_generators_raise(spec):
    with pytest.raises(DomainError):
        weights.make_sequence(spec)


def test_constant_one_classification():
    rep = weights.check_conditions(weights.make_sequence("constant-one", 40))
    assert rep["log_convex"]["value"]
    assert rep["moderate_growth"]["sup_estimate"] == pytest.approx(1.0)


def test_gevrey_two_moderate_growth_tends_to_two():
    rep = weights.check_conditions(weights.gevrey(2, 200))
    assert rep["log_convex"]["value"]
    # brute force: max over j + k = s <= 30 of binom(s, j)^(1/s)
    brute = max(math.comb(s, j) ** (1.0 / s) for s in range(2, 31) for j in range(1, s))
    _, prof, _ = weights.moderate_growth_profile(weights.gevrey(2, 30).log_values)
    assert prof.max() == pytest.approx(brute, rel=1e-12)
    assert 1.9 < rep["moderate_growth"]["sup_estimate"] <= 2.0
    assert rep["moderate_growth"]["bounded"]


def test_beurling_eligibility():
    assert not weights.check_conditions(weights.gevrey(1, 100))["beurling_eligible"]["value"]
    assert weights.check_conditions(weights.gevrey(2, 100))["beurling_eligible"]["value"]


def test_gevrey_one_at_k1_partial_sum_is_one():
    rep = weights.quasianalytic_diagnostic(weights.gevrey(1, 8))
    assert rep["partial_sums"][0] == 1.0


def test_quasianalytic_verdicts():
    one = weights.quasianalytic_diagnostic(weights.gevrey(1, 10_000))
    assert one["verdict"] == "quasianalytic"
    assert abs(one["log_fit"]["c"] / math.e - 1) < 0.1
    two = weights.quasianalytic_diagnostic(weights.gevrey(2, 10_000))
    assert two["verdict"] == "non-quasianalytic"


def test_qa_terms_match_direct_evaluation():
    rep = weights.quasianalytic_diagnostic(weights.gevrey(1, 50))
    direct = [math.factorial(k) ** (-1.0 / k) for k in range(1, 51)]
    assert np.allclose(rep["terms"], direct, rtol=1e-12)


@given(gevrey_orders)
def test_log_convex_consequences(s):
    K = 40
    M = weights.gevrey(s, K)
    rep = weights.check_conditions(M)
    assert rep["log_convex"]["value"]
    lv = M.log_values
    for j in range(K + 1):
        for k in range(K + 1 - j):
            assert lv[j] + lv[k] <= lv[j + k] + 1e-9
    roots = lv[1:] / np.arange(1, K + 1)
    assert np.all(np.diff(roots) >= -1e-12)
    derived = rep["derived"]["value"]
    assert derived["composition_bound"] and derived["partition_bound"] and derived["supermultiplicative"]


@given(gevrey_orders)
def test_composition_bound_brute_force(s):
    lv = weights.gevrey(s, 10).log_values
    from itertools import combinations

    for k in range(1, 11):
        for j in range(1, k + 1):
            for cuts in combinations(range(1, k), j - 1):
                b = (0,) + cuts + (k,)
                alpha = [b[i + 1] - b[i] for i in range(j)]
                assert j * lv[1] + lv[k] >= lv[j] + sum(lv[a] for a in alpha) - 1e-9


@given(gevrey_orders)
def test_derivation_closed_bound(s):
    K = 60
    M = weights.gevrey(s, K)
    C = 2.0 * weights.check_conditions(M)["derivation_closed"]["sup_estimate"]
    lv = M.log_values
    lf = weights.log_factorials(K)
    for k in range(1, K // 2 + 1):
        for j in range(1, K // 2 + 1):
            lhs = lf[k + j] + lv[k + j]
            rhs = j * (k + j) * math.log(C) + lf[k] + lv[k]
            assert lhs <= rhs + 1e-9


@given(gevrey_orders)
def test_sequences_positive_and_normalized(s):
    M = weights.gevrey(s, 200)
    assert np.all(np.isfinite(M.log_values))
    assert M[0] == 1.0 and M[1] >= 1.0
    assert weights.check_conditions(M)["standing_assumptions"]["holds"]


def test_to_json_round_trip():
    M = weights.gevrey(2, 12)
    again = weights.make_sequence(M.to_json())
    assert np.array_equal(again.log_values, M.log_values)
