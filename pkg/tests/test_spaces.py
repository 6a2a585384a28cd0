import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ultradiff import spaces, weights
from ultradiff.errors import DomainError, InvariantError

from oracles import bump_derivative, gaussian_derivative, trapezoid_fine

ONE = weights.make_sequence("constant-one", 40)
G2 = weights.gevrey(2, 40)


def gauss(window=(-10, 10), h=1e-3, **kw):
    return spaces.grid_function(dict({"kind": "gaussian_bump"}, **kw), window, h)


def test_grid_point_count():
    f = spaces.grid_function({"kind": "zero"}, (-1, 1), 0.1)
    assert f.n == 21
    assert f.x[-1] == pytest.approx(1.0, abs=1e-15)


def test_zero_descriptor():
    f = spaces.grid_function({"kind": "zero"}, (-3, 3), 0.01)
    assert not np.any(f.samples)
    for cls in ("B", "D"):
        assert spaces.seminorm(f, spaces.SeminormQuery(cls, 1.0, ONE)).value == 0.0


def test_gaussian_boundary_magnitude():
    assert gauss().boundary_magnitude() < 1e-43


def test_compact_bump_vanishes_outside_support():
    f = spaces.grid_function({"kind": "compact_bump"}, (-2, 2), 1e-3)
    assert np.all(f.samples[np.abs(f.x) >= 1.0] == 0.0)
    assert f.support == (-1.0, 1.0)


def test_window_checks():
    with pytest.raises(DomainError):
        gauss(window=(-2, 2))
    with pytest.raises(DomainError):
        spaces.grid_function({"kind": "compact_bump", "center": 1.5}, (-2, 2), 1e-3)


def test_sine_seminorm_is_one():
    f = spaces.grid_function({"kind": "sine"}, (-5, 5), 0.01)
    res = spaces.seminorm(f, spaces.SeminormQuery("B", 1.0, ONE, kmax=12))
    assert res.value == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("k", range(0, 7))
def test_bump_template_matches_sympy(k):
    u = np.linspace(-0.99, 0.99, 397)
    assert np.allclose(spaces.bump_template(u, k), bump_derivative(u, k), rtol=1e-9, atol=1e-9)


def test_gaussian_oracle_matches_scipy_hermite():
    f = gauss(amp=0.7, center=0.3, width=1.3)
    for k in range(11):
        ref = gaussian_derivative(f.x, k, 0.7, 0.3, 1.3)
        assert np.allclose(f.derivative(k), ref, rtol=1e-10, atol=1e-12)


def test_gaussian_w_seminorm_against_independent_quadrature():
    f = gauss(window=(-12, 12), h=1e-3)
    res = spaces.seminorm(f, spaces.SeminormQuery("W", 1.0, G2, p=2, kmax=10))
    ref = max(
        math.sqrt(trapezoid_fine(lambda x: gaussian_derivative(x, k) ** 2, -12, 12))
        / (math.factorial(k) * math.factorial(k))
        for k in range(11)
    )
    assert res.value == pytest.approx(ref, rel=1e-6)


# round-off in an order-k stencil grows like (width/h)^k relative to the
# signal, so the spacing follows the feature width
@pytest.mark.parametrize("desc,h", [
    ({"kind": "gaussian_bump", "amp": 1.0, "width": 1.0}, 0.04),
    ({"kind": "gaussian_bump", "amp": -0.4, "center": 0.5, "width": 1.5}, 0.06),
    ({"kind": "gaussian_bump", "amp": 2.0, "center": -1.0, "width": 0.8}, 0.03),
    ({"kind": "sine", "freq": 2.0}, 0.04),
])
def test_finite_differences_track_oracle(desc, h):
    f = spaces.grid_function(desc, (-9, 9), h)
    for k in range(1, 7):
        fd = f.derivative(k, fd_order=8, use_oracle=False)
        ex = f.derivative(k)
        inner = slice(10, -10)
        scale = np.max(np.abs(ex))
        assert np.max(np.abs(fd[inner] - ex[inner])) <= 1e-6 * scale


@given(st.sampled_from([-2.0, 0.0, 0.5]), st.sampled_from(["B", "W", "D"]))
def test_absolute_homogeneity(lam, cls):
    f = spaces.grid_function({"kind": "compact_bump", "amp": 0.7, "width": 1.2}, (-2, 2), 2e-3)
    q = spaces.SeminormQuery(cls, 2.0, G2, kmax=8)
    base = spaces.seminorm(f, q).value
    assert spaces.seminorm(f.scaled(lam), q).value == pytest.approx(abs(lam) * base, rel=1e-13, abs=1e-300)


@given(st.lists(st.floats(min_value=0.25, max_value=32.0), min_size=2, max_size=5, unique=True),
       st.sampled_from(["B", "W", "S"]))
def test_rho_monotonicity(rhos, cls):
    f = gauss(window=(-10, 10), h=5e-3, amp=0.9, width=0.8)
    rhos = sorted(rhos)
    vals = [spaces.seminorm(f, spaces.SeminormQuery(cls, r, G2, kmax=8, L=G2)).value for r in rhos]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


def test_compact_bump_finite_in_gevrey2():
    f = spaces.grid_function({"kind": "compact_bump"}, (-2, 2), 2e-3)
    rep = spaces.class_diagnostic(f, "D", G2, [4, 8, 16])
    assert rep["finite_at_all_rho"]


def test_diagnostic_on_zero():
    f = spaces.grid_function({"kind": "zero"}, (-2, 2), 1e-2)
    rep = spaces.class_diagnostic(f, "B", ONE, [1, 2])
    assert all(r["value"] == 0.0 for r in rep["rows"])


def test_diagnostic_rejects_unsorted_grid():
    f = spaces.grid_function({"kind": "zero"}, (-2, 2), 1e-2)
    with pytest.raises(DomainError):
        spaces.class_diagnostic(f, "B", ONE, [2, 1])
    assert issubclass(InvariantError, Exception)


def test_holder_between_w_and_b_on_compact_support():
    f = spaces.grid_function({"kind": "compact_bump", "amp": 0.5, "width": 0.9}, (-1, 1), 1e-3)
    b = spaces.seminorm(f, spaces.SeminormQuery("B", 2.0, G2, kmax=6)).profile
    w = spaces.seminorm(f, spaces.SeminormQuery("W", 2.0, G2, p=2, kmax=6)).profile
    length = f.x_max - f.x_min
    assert all(wk <= math.sqrt(length) * bk * (1 + 1e-6) for wk, bk in zip(w, b))


def test_interpolation_inequality_gaussian():
    rep = spaces.inclusion_report(gauss(window=(-12, 12)), 1.0, 2.0)
    assert rep["interpolation"]["ratio"] <= 1 + 1e-8


def test_inclusions_of_zero():
    f = spaces.grid_function({"kind": "zero"}, (-2, 2), 1e-2)
    rep = spaces.inclusion_report(f, 1.0, 2.0)
    assert rep["weighted"]["ratio"] == rep["sobolev"]["ratio"] == rep["interpolation"]["ratio"] == 0.0


def test_weighted_inequality_for_bump_second_derivative():
    f = spaces.grid_function({"kind": "compact_bump"}, (-2, 2), 1e-3)
    rep = spaces.inclusion_report(f, 1.0, 2.0, alpha=2)
    assert rep["weighted"]["C"] == pytest.approx(2.0)
    assert rep["weighted"]["ratio"] <= 1.0


def test_sobolev_ratio_bounded_on_corpus():
    from ultradiff.corpus import bump_corpus

    ratios = []
    for d in bump_corpus(10):
        f = spaces.grid_function(d, (-4, 4), 1e-3)
        ratios.append(spaces.inclusion_report(f, 1.0, 2.0)["sobolev"]["ratio"])
    assert max(ratios) < 1.0


def test_csv_round_trip(tmp_path):
    f = gauss(window=(-10, 10), h=0.05)
    f.to_csv(tmp_path / "f.csv")
    g = spaces.read_csv(tmp_path / "f.csv")
    assert np.array_equal(g.samples, f.samples)
    assert g.h == pytest.approx(f.h)
