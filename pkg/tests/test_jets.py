from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ultradiff import jets, weights
from ultradiff.errors import DomainError, InvariantError

from oracles import compose_fractions, compose_polynomials, oracle_majorant, signed_catalan

small = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
rationals = st.fractions(min_value=-3, max_value=3, max_denominator=7)


def test_compose_with_identity_is_noop():
    f = jets.Jet([0.0, 2.0, -1.0, 0.5])
    assert jets.compose_jets(f, jets.identity_jet(3)).coeffs == f.coeffs


def test_square_of_x_plus_x2():
    f = jets.Jet([0, 0, 1, 0, 0])
    g = jets.Jet([0, 1, 1, 0, 0])
    assert jets.compose_jets(f, g).coeffs == (0, 0, 1, 2, 1)


@given(st.lists(small, min_size=8, max_size=8), st.lists(small, min_size=8, max_size=8))
def test_random_degree8_matches_polynomial_oracle(a, b):
    f0 = jets.Jet([0.3] + a)
    g = jets.Jet([0.0] + b)
    ref = compose_polynomials(f0.coeffs, g.coeffs, 8)
    got = jets.compose_jets(f0, g).coeffs
    assert np.allclose(got, ref, rtol=1e-12, atol=1e-12)


@given(st.lists(rationals, min_size=6, max_size=6), st.lists(rationals, min_size=6, max_size=6))
def test_exact_composition_matches_schoolbook(a, b):
    f = jets.Jet([Fraction(1)] + a)
    g = jets.Jet([Fraction(0)] + b)
    assert list(jets.compose_jets(f, g).coeffs) == compose_fractions(f.coeffs, g.coeffs, 6)


@given(st.lists(small, min_size=25, max_size=25), st.lists(small, min_size=25, max_size=25))
def test_partition_and_convolution_agree(a, b):
    f = jets.Jet([0.0] + a[:12])
    g = jets.Jet([0.0] + b[:12])
    p = jets.compose_jets(f, g, "partitions").coeffs
    c = jets.compose_jets(f, g, "convolution").coeffs
    assert np.allclose(p, c, rtol=1e-12, atol=1e-12)
    big = jets.compose_jets(jets.Jet([0.0] + a), jets.Jet([0.0] + b)).coeffs
    assert np.allclose(big, compose_polynomials([0.0] + a, [0.0] + b, 25), rtol=1e-10, atol=1e-10)


@given(*(st.lists(rationals, min_size=5, max_size=5) for _ in range(3)))
def test_associativity_exact(a, b, c):
    f, g, h = (jets.Jet([Fraction(0)] + x) for x in (a, b, c))
    left = jets.compose_jets(f, jets.compose_jets(g, h))
    right = jets.compose_jets(jets.compose_jets(f, g), h)
    assert left.coeffs == right.coeffs


@given(*(st.lists(small, min_size=6, max_size=6) for _ in range(3)))
def test_associativity_float(a, b, c):
    f, g, h = (jets.Jet([0.0] + x) for x in (a, b, c))
    left = np.array(jets.compose_jets(f, jets.compose_jets(g, h)).coeffs)
    right = np.array(jets.compose_jets(jets.compose_jets(f, g), h).coeffs)
    assert np.allclose(left, right, rtol=1e-12, atol=1e-12)


def test_compose_rejects_mismatches():
    with pytest.raises(DomainError):
        jets.compose_jets(jets.Jet([0.0, 1.0, 2.0]), jets.Jet([0.0, 1.0]))
    with pytest.raises(DomainError):
        jets.compose_jets(jets.Jet([0.0, 1.0, 2.0], base_point=1.0), jets.Jet([0.0, 1.0, 0.0]))


def test_inverse_of_identity():
    assert jets.invert_jet(jets.identity_jet(6, exact=True)).coeffs == jets.identity_jet(6, exact=True).coeffs


def test_inverse_of_x_plus_x2_is_signed_catalan():
    inv = jets.invert_jet(jets.Jet([0, 1, 1, 0, 0, 0]))
    assert list(inv.coeffs) == signed_catalan(5)
    back = jets.compose_jets(jets.Jet([0, 1, 1, 0, 0, 0]), inv)
    assert back.coeffs == (0, 1, 0, 0, 0, 0)


def test_inverse_linear():
    assert jets.invert_jet(jets.Jet([0, 2, 0, 0])).coeffs == (0, Fraction(1, 2), 0, 0)


@pytest.mark.parametrize("coeffs", [[1, 1, 0], [0, 0, 1]])
def test_invert_rejects_bad_germs(coeffs):
    with pytest.raises(DomainError):
        jets.invert_jet(jets.Jet(coeffs))


@given(st.fractions(min_value=Fraction(1, 4), max_value=4).filter(lambda v: v != 0),
       st.lists(rationals, min_size=6, max_size=6))
def test_inverse_round_trip_exact(a1, rest):
    f = jets.Jet([0, a1] + rest)
    inv = jets.invert_jet(f)
    assert jets.compose_jets(f, inv).coeffs == jets.identity_jet(7, exact=True).coeffs


def test_majorant_small_coefficients():
    maj = jets.majorant_series(1, 1, 1, weights.make_sequence("constant-one", 8), 6, exact=True)
    assert maj.g_coeffs[1:4] == (1, Fraction(1, 2), Fraction(5, 6))
    assert 2 * maj.g_coeffs[2] < 8


@pytest.mark.parametrize("params", [(1, 1, 1), (Fraction(1, 4), 4, 1), (4, Fraction(1, 4), Fraction(1, 4))])
def test_majorant_matches_fixed_point_oracle(params):
    M = weights.gevrey(2, 10)
    A, C, rho = (Fraction(v) for v in params)
    maj = jets.majorant_series(A, C, rho, M, 8, exact=True)
    assert list(maj.g_coeffs) == oracle_majorant(A, C, rho, M, 8)


@given(st.sampled_from([0.25, 1.0, 4.0]), st.sampled_from([0.25, 1.0, 4.0]), st.sampled_from([0.25, 1.0, 4.0]))
def test_majorant_first_coefficient_and_positivity(A, C, rho):
    maj = jets.majorant_series(A, C, rho, weights.gevrey(1, 12), 12)
    assert maj.g_coeffs[1] == A
    assert all(c > 0 for c in maj.g_coeffs[1:])
    assert all(r < 1 for r in maj.bound_ratios)


def test_majorant_check_raises_on_violation():
    M = weights.gevrey(1, 10)
    maj = jets.majorant_series(1, 1, 1, M, 6, check=False)
    assert all(r < 1 for r in maj.bound_ratios)
    with pytest.raises(DomainError):
        jets.majorant_series(-1, 1, 1, M, 6)
    assert issubclass(InvariantError, Exception)


@given(st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=11, max_size=11),
       st.sampled_from([0.25, 1.0]), st.sampled_from([1.0, 4.0]))
def test_inverse_dominated_by_majorant(u, A, C):
    N = 12
    M = weights.gevrey(2, N)
    maj = jets.majorant_series(A, C, 1.0, M, N)
    # phi with phi(0) = phi'(0) = 0 and |phi_j| <= psi_j
    phi = [0.0, 0.0] + [ui * maj.psi_coeffs[j] for j, ui in zip(range(2, N + 1), u)]
    f = jets.Jet([0.0, 1.0 / A] + [-p / A for p in phi[2:]])
    inv = jets.invert_jet(f)
    assert all(jets.dominated_by(inv, maj))


def test_fdb_single_partition_and_identity_term():
    M = weights.make_sequence("constant-one", 8)
    assert jets.fdb_lhs(1, 1, M, exact=True) == 1
    assert jets.fdb_lhs(0, 1, M, exact=True) == 1


def test_fdb_lhs_brute_force():
    # gamma = 3, M = 1: partitions 3, 2+1, 1+1+1 give A + 2A^2 + A^3
    M = weights.make_sequence("constant-one", 8)
    A = Fraction(1, 3)
    assert jets.fdb_lhs(3, A, M, exact=True) == A + 2 * A**2 + A**3


def test_fdb_fitted_constant_decreases_with_A():
    rep = jets.fdb_bound_check(1.0, weights.make_sequence("constant-one", 12), 10, A_values=[0.1, 0.01])
    Cs = [r["C"] for r in rep["fits"]]
    assert Cs[0] > Cs[1] > Cs[2]
    for r in rep["fits"]:
        g = np.arange(1, 11)
        assert np.all(np.array(r["normalized"]) <= r["B"] * r["C"] ** g * (1 + 1e-12))


def test_jet_csv_round_trip(tmp_path):
    f = jets.Jet([Fraction(1, 3), 2, Fraction(-5, 7)])
    f.to_csv(tmp_path / "j.csv")
    assert jets.Jet.from_csv(tmp_path / "j.csv", exact=True).coeffs == f.coeffs
    g = jets.Jet([0.1, 2.0, -0.3])
    g.to_csv(tmp_path / "g.csv")
    assert jets.Jet.from_csv(tmp_path / "g.csv").coeffs == g.coeffs
