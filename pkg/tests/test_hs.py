import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ultradiff import hs, spaces
from ultradiff.corpus import bump_corpus, rng
from ultradiff.errors import ConstraintError, DomainError, StepError

WIN = (-6.0, 6.0)
H = 2e-3


def cb(amp, center=0.0, width=1.0):
    return {"kind": "compact_bump", "amp": amp, "center": center, "width": width}


def phi_of(amp, center=0.0, width=1.0, mode="f"):
    return hs.from_descriptor(cb(amp, center, width), WIN, H, mode=mode)


def test_identity_maps_to_zero():
    g = hs.r_transform(hs.identity(WIN, H))
    assert not np.any(g.samples)


@pytest.mark.parametrize("desc", bump_corpus(4, amp=(-0.25, 0.25)))
def test_round_trips(desc):
    phi = hs.from_descriptor(desc, WIN, H)
    back = hs.r_inverse(hs.r_transform(phi))
    assert np.max(np.abs(back.values - phi.values)) < 1e-9
    g = hs.r_transform(phi)
    assert np.max(np.abs(hs.r_transform(hs.r_inverse(g)).samples - g.samples)) < 1e-9


def test_gamma_is_minus_two_where_derivative_vanishes():
    # f' = -bump with peak 1 gives phi' = 0 at the centre
    phi = phi_of(-1.0, mode="df")
    assert not phi.in_group
    g = hs.r_transform(phi)
    centre = np.argmin(np.abs(phi.x))
    assert g.samples[centre] == -2.0
    assert g.floor == -2.0


def test_rejects_nonzero_left_edge_and_negative_slope():
    with pytest.raises(DomainError):
        hs.from_descriptor({"kind": "gaussian_bump", "amp": 0.3, "center": -6.0}, WIN, H)
    with pytest.raises(DomainError):
        phi_of(-1.5, mode="df")


def test_collapse_of_interval():
    # phi' = 0 on a plateau: the interval collapses to a point
    x = spaces.grid_points(*WIN, H)
    df = np.where(np.abs(x) < 0.5, -1.0, 0.0)
    f = spaces.GridFunction(WIN[0], WIN[1], H, np.cumsum(df) * H, "sampled", "none")
    phi = hs.hs_diffeo(f, df)
    inside = np.abs(x) < 0.49
    assert np.ptp(phi.phi[inside]) < 1e-12
    assert np.all(hs.r_transform(phi).samples[inside] == -2.0)


def test_geodesic_endpoints():
    p0, p1 = phi_of(0.3, -1.0), phi_of(-0.4, 1.0, 0.8, mode="df")
    assert np.max(np.abs(hs.geodesic_bvp(p0, p1, 0.0).values - p0.values)) < 1e-10
    assert np.max(np.abs(hs.geodesic_bvp(p0, p1, 1.0).values - p1.values)) < 1e-10


def test_constant_path():
    p = phi_of(0.3, 0.5, mode="df")
    for t in (0.0, 0.3, 1.0, 1.7):
        assert np.max(np.abs(hs.geodesic_bvp(p, p, t).values - p.values)) < 1e-10


def test_zero_velocity_stays_put():
    p = phi_of(0.3, 0.5, mode="df")
    zero = spaces.grid_function({"kind": "zero"}, WIN, H)
    assert np.max(np.abs(hs.geodesic_ivp(p, zero, 0.8).values - p.values)) < 1e-10


def test_geodesic_support_is_localized():
    p0, p1 = phi_of(0.4, -1.0, 0.8, mode="df"), phi_of(-0.4, 1.5, 0.8, mode="df")
    mid = hs.geodesic_bvp(p0, p1, 0.5)
    outside = (np.abs(p0.x + 1.0) >= 0.8) & (np.abs(p0.x - 1.5) >= 0.8)
    assert np.all(mid.df[outside] == 0.0)


@pytest.mark.parametrize("m", [0.5, 1.0, 2.5])
def test_blowup_time_from_identity(m):
    u = spaces.grid_function(cb(1.0), WIN, H)
    # tangent whose derivative has minimum exactly -m
    du = u.derivative(1)
    scale = m / -du.min()
    u = spaces.GridFunction(WIN[0], WIN[1], H, u.samples * scale, "sampled", "none")
    rep = hs.blowup_monoid(hs.identity(WIN, H), u, mode="ivp")
    gb = hs.tangent_direction(hs.identity(WIN, H), u)
    assert rep.t1 == pytest.approx(2.0 / -gb.min(), rel=1e-14)
    assert rep.t1 == pytest.approx(2.0 / m, rel=1e-3)


def test_small_time_expansion():
    u = spaces.grid_function({"kind": "gaussian_bump", "amp": 0.5, "center": -1.0}, (-10, 10), 5e-3)
    phi0 = hs.identity((-10, 10), 5e-3)
    errs = []
    for t in (0.02, 0.01):
        ft = hs.geodesic_ivp(phi0, u, t).values
        errs.append(np.max(np.abs(ft / t - u.samples)))
    # first-order term is u; the remainder is linear in t
    assert errs[1] < errs[0] and errs[0] / errs[1] == pytest.approx(2.0, rel=0.05)


def test_blowup_never_returns():
    p0 = hs.identity(WIN, H)
    p1 = phi_of(-0.9, mode="df")
    rep = hs.blowup_monoid(p0, p1)
    assert rep.t1 == pytest.approx(2 / (2 - 2 * math.sqrt(0.1)), rel=1e-3)
    for t in (rep.t1 * 1.01, rep.t1 * 1.5, rep.t1 * 3):
        s = rep.sample(t)
        assert not s["in_group"] and s["monotone"] and s["surjective"]
        assert s["floor"] < -2.0


def test_monoid_reached_at_finite_distance():
    p0 = hs.identity(WIN, H)
    p1 = phi_of(-0.9, mode="df")
    rep = hs.blowup_monoid(p0, p1)
    edge = hs.geodesic_bvp(p0, p1, rep.t1)
    assert edge.meta["monoid"] and not edge.in_group
    d = hs.distance(p0, edge)
    assert math.isfinite(d)
    assert d == pytest.approx(rep.t1 * hs.distance(p0, p1), rel=1e-8)


def test_distance_basics():
    p0, p1 = phi_of(0.3, -1.0, mode="df"), phi_of(-0.5, 1.0, mode="df")
    assert hs.distance(p0, p0) == 0.0
    assert hs.distance(p0, p1) == pytest.approx(hs.distance(p1, p0), rel=1e-14)


@settings(max_examples=20)
@given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8), st.floats(-2, 2), st.floats(0.6, 1.5))
def test_distance_identity_and_triangle(a, b, c, w):
    p0, p1 = phi_of(a, c, w, mode="df"), phi_of(b, -c, w, mode="df")
    d = hs.distance(p0, p1)  # raises if quadrature and R-coordinate norms disagree
    mid = hs.geodesic_bvp(p0, p1, 0.5)
    assert hs.distance(p0, mid) == pytest.approx(0.5 * d, rel=1e-6, abs=1e-12)


def test_shift_formula_on_calibrated_pair():
    g1 = hs.calibrated_pair_gamma(0.4, cb(1.0, -2.0, 0.8), cb(1.0, 1.5, 0.8), WIN, H)
    g2 = hs.calibrated_pair_gamma(-0.3, cb(1.0, -1.0, 0.8), cb(1.0, 2.5, 0.8), WIN, H)
    p0, p1 = hs.from_gamma(g1, WIN, H), hs.from_gamma(g2, WIN, H)
    assert abs(p0.right_value) < 1e-12 and abs(p1.right_value) < 1e-12
    for t in (0.0, 1.0):
        assert abs(hs.shift_r(p0, p1, t)["measured"]) < 1e-12
    half = hs.shift_r(p0, p1, 0.5)
    assert half["closed_form"] == pytest.approx(-half["dR_sq"] / 16, rel=1e-12)
    assert half["measured"] == pytest.approx(half["closed_form"], rel=1e-6)
    assert half["intersection_times"] == pytest.approx([0.0, 1.0], abs=1e-9)


def test_shift_requires_calibration():
    p0, p1 = phi_of(0.3, mode="df"), phi_of(-0.3, mode="df")
    with pytest.raises(ConstraintError):
        hs.shift_r(p0, p1, 0.5)


def test_pde_oracle_zero_data():
    u0 = spaces.grid_function({"kind": "zero"}, WIN, 0.05)
    run = hs.pde_oracle(u0, 1.0, 0.01)
    assert not np.any(run.u[-1])
    assert np.array_equal(run.markers[-1], run.markers_x)


def test_pde_oracle_cfl():
    u0 = spaces.grid_function({"kind": "gaussian_bump", "amp": 0.5}, (-10, 10), 0.01)
    with pytest.raises(StepError):
        hs.pde_oracle(u0, 0.1, 0.1)


def test_pde_oracle_agrees_with_geodesic_coarse():
    u0 = spaces.grid_function({"kind": "gaussian_bump", "amp": 0.5}, (-10, 10), 0.01)
    gap = hs.oracle_gap(u0, 0.5, 5e-4)
    assert gap["sup_error"] < 1e-3


def test_validate_bundle():
    gen = rng(7)
    p0 = hs.from_descriptor(cb(float(gen.uniform(-0.5, 0.5)), -1.0), WIN, H, mode="df")
    p1 = hs.from_descriptor(cb(float(gen.uniform(-0.5, 0.5)), 1.0), WIN, H, mode="df")
    rep = hs.validate(p0, p1)
    assert rep["pass"], rep["checks"]
