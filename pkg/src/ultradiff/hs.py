"""Hunter-Saxton geodesics through the R-transform.

``R(phi) = 2 (sqrt(phi') - 1)`` maps the group of maps ``Id + f`` with
``f(-inf) = 0`` onto an open subset of a flat L2 space, so geodesics are
straight lines ``gamma(t) = gamma_a + t gamma_b`` pulled back by
``R^{-1}(gamma) = Id + 1/4 int_{-inf}^x (gamma^2 + 4 gamma)``.  The
left window edge stands in for ``-inf``.

``pde_oracle`` integrates the Hunter-Saxton equation directly with a
method-of-lines scheme; it shares no quadrature with the R-transform path.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintError, DomainError, InvariantError, StepError, WindowError
from .numerics import fd_derivative, hermite_eval, lp_norm, prefix_integral, simpson
from .spaces import GridFunction, grid_function, grid_points

MONOID_TOL = 1e-10  # gamma <= -2 + MONOID_TOL counts as boundary contact
FLOOR_CLAMP = 1e-14  # |phi'| below this is treated as 0
LEFT_TOL = 1e-8
SUPPORT_TOL = 1e-10


@dataclass(frozen=True)
class HSDiffeo:
    """``phi = Id + f`` with ``f(-inf) = 0`` and ``phi' = 1 + df >= 0``."""

    f: GridFunction
    df: np.ndarray
    derivative_floor: float
    in_group: bool
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def x(self) -> np.ndarray:
        return self.f.x

    @property
    def values(self) -> np.ndarray:
        return self.f.samples

    @property
    def phi(self) -> np.ndarray:
        return self.f.x + self.f.samples

    @property
    def right_value(self) -> float:
        """Surrogate of ``ev_inf``: f at the right window edge."""
        return float(self.f.samples[-1])

    def same_grid(self, other: "HSDiffeo") -> bool:
        a, b = self.f, other.f
        return a.x_min == b.x_min and a.h == b.h and a.n == b.n


def hs_diffeo(f: GridFunction, df=None, meta: dict | None = None) -> HSDiffeo:
    """Validate and wrap ``Id + f``.

    Raises :class:`DomainError` when f does not vanish at the left edge or
    when ``1 + f'`` is negative somewhere.
    """
    df = np.asarray(f.derivative(1) if df is None else df, dtype=float)
    scale = max(1.0, f.scale)
    if abs(f.samples[0]) > LEFT_TOL * scale:
        raise DomainError(f"f does not vanish at the left edge (f = {f.samples[0]:.3e})")
    dphi = 1.0 + df
    if np.any(dphi < -FLOOR_CLAMP):
        raise DomainError(f"phi' = 1 + f' is negative (min {dphi.min():.3e})")
    floor = float(max(dphi.min(), 0.0))
    if floor < FLOOR_CLAMP:
        floor = 0.0
    return HSDiffeo(f, df, floor, floor > 0.0, dict(meta or {}))


def from_descriptor(descriptor: dict, window, h: float, mode: str = "f") -> HSDiffeo:
    """Build ``Id + f`` from a descriptor for f (``mode="f"``) or for f' (``mode="df"``)."""
    g = grid_function(descriptor, window, h)
    if mode == "f":
        return hs_diffeo(g, meta={"descriptor": descriptor})
    if mode == "df":
        f = prefix_integral(g.samples, h)
        gf = GridFunction(g.x_min, g.x_max, g.h, f, "sampled", "none")
        return hs_diffeo(gf, g.samples, meta={"derivative_descriptor": descriptor})
    raise DomainError(f"unknown mode {mode!r}")


def identity(window, h: float) -> HSDiffeo:
    x = grid_points(float(window[0]), float(window[1]), h)
    z = np.zeros_like(x)
    return HSDiffeo(GridFunction(float(window[0]), float(window[1]), float(h), z, "sampled", "D"), z, 1.0, True)


@dataclass(frozen=True)
class RCoord:
    gamma: GridFunction
    floor: float
    basepoint: float | None = None  # None: left window edge
    continued: bool = False  # beyond the monoid boundary (floor < -2 allowed)

    def __post_init__(self):
        if not self.continued and self.floor < -2.0 - MONOID_TOL:
            raise DomainError(f"R-coordinate floor {self.floor:.6g} is below -2")

    @property
    def samples(self) -> np.ndarray:
        return self.gamma.samples

    @property
    def x(self) -> np.ndarray:
        return self.gamma.x


def _rcoord(template: GridFunction, gamma, basepoint=None, continued=False) -> RCoord:
    gamma = np.asarray(gamma, dtype=float)
    gf = GridFunction(template.x_min, template.x_max, template.h, gamma, "sampled", "none")
    return RCoord(gf, float(gamma.min()), basepoint, continued)


def r_transform(phi: HSDiffeo, basepoint: float | None = None) -> RCoord:
    """``gamma = 2 (sqrt(1 + f') - 1)``, evaluated as ``2 f' / (sqrt(1 + f') + 1)``."""
    dphi = 1.0 + phi.df
    if np.any(dphi < -FLOOR_CLAMP):
        raise DomainError("1 + f' < 0 at a node")
    dphi = np.where(dphi < FLOOR_CLAMP, 0.0, dphi)
    root = np.sqrt(dphi)
    gamma = np.where(dphi == 0.0, -2.0, 2.0 * phi.df / (root + 1.0))
    return _rcoord(phi.f, gamma, basepoint)


def r_inverse(gamma: RCoord, tail_tol: float = 1e-6) -> HSDiffeo:
    """``f = 1/4 int (gamma^2 + 4 gamma)`` from the basepoint; ``f' = gamma + gamma^2/4``.

    Raises :class:`DomainError` when gamma is still large at the window
    edges (the truncated integral would not approximate the one over R).
    """
    g = gamma.gamma
    y = g.samples
    scale = max(1.0, float(np.max(np.abs(y))))
    edge = max(abs(y[0]), abs(y[-1]))
    if edge > tail_tol * scale:
        raise DomainError(f"gamma is not integrable on the window (edge magnitude {edge:.3e})")
    integrand = y * y + 4.0 * y
    f = 0.25 * prefix_integral(integrand, g.h)
    if gamma.basepoint is not None:
        f = f - 0.25 * _value_at(f * 4.0, integrand, g, gamma.basepoint)
    df = y + 0.25 * y * y
    gf = GridFunction(g.x_min, g.x_max, g.h, f, "sampled", "none")
    dphi = 1.0 + df
    floor = float(max(dphi.min(), 0.0))
    if floor < FLOOR_CLAMP:
        floor = 0.0
    meta = {"tail": float(edge), "continued": gamma.continued}
    return HSDiffeo(gf, df, floor, floor > 0.0 and not gamma.continued, meta)


def _value_at(F, dF, g: GridFunction, x0: float) -> float:
    if not g.x_min <= x0 <= g.x_max:
        raise DomainError("basepoint outside the window")
    return float(hermite_eval(g.x_min, g.h, F, dF, np.array([x0]))[0])


# ---------------------------------------------------------------------------
# geodesics
# ---------------------------------------------------------------------------


def _check_grids(*phis):
    for p in phis[1:]:
        if not phis[0].same_grid(p):
            raise DomainError("diffeomorphisms live on different grids")


def _support_localized(df_t, df0, df1) -> int:
    live = (df0 != 0.0) | (df1 != 0.0)
    return int(np.count_nonzero((np.abs(df_t) > SUPPORT_TOL) & ~live))


def geodesic_bvp(phi0: HSDiffeo, phi1: HSDiffeo, t: float) -> HSDiffeo:
    """Point at time t on the geodesic with ``phi(0) = phi0`` and ``phi(1) = phi1``.

    Outside the blow-up interval the result is a monoid element
    (``in_group`` false, ``meta["monoid"]`` set).
    """
    _check_grids(phi0, phi1)
    g0 = r_transform(phi0).samples
    g1 = r_transform(phi1).samples
    gt = (1.0 - t) * g0 + t * g1
    continued = bool(gt.min() < -2.0)
    out = r_inverse(_rcoord(phi0.f, gt, continued=continued))
    bad = _support_localized(out.df, phi0.df, phi1.df)
    if bad:
        raise InvariantError("support-localization", f"{bad} nodes outside supp f0' u supp f1'")
    out.meta.update({"t": float(t), "monoid": bool(gt.min() <= -2.0 + MONOID_TOL)})
    return out


def tangent_direction(phi0: HSDiffeo, h: GridFunction, dh=None) -> np.ndarray:
    """``dR_phi0(h) = h' / sqrt(phi0')``."""
    if phi0.derivative_floor <= 0:
        raise DomainError("phi0 must be a group element")
    if abs(h.samples[0]) > LEFT_TOL * max(1.0, h.scale):
        raise DomainError("tangent vector must vanish at the left edge")
    dh = h.derivative(1) if dh is None else np.asarray(dh, dtype=float)
    return dh / np.sqrt(1.0 + phi0.df)


def geodesic_ivp(phi0: HSDiffeo, h: GridFunction, t: float, dh=None) -> HSDiffeo:
    """Geodesic from phi0 with initial velocity ``h`` (tangent at phi0), at time t."""
    if phi0.f.h != h.h or phi0.f.n != h.n or phi0.f.x_min != h.x_min:
        raise DomainError("tangent lives on a different grid")
    ga = r_transform(phi0).samples
    gb = tangent_direction(phi0, h, dh)
    gt = ga + t * gb
    continued = bool(gt.min() < -2.0)
    out = r_inverse(_rcoord(phi0.f, gt, continued=continued))
    out.meta.update({"t": float(t), "monoid": bool(gt.min() <= -2.0 + MONOID_TOL)})
    return out


def geodesic_velocity(phi0: HSDiffeo, h: GridFunction, t: float, dh=None) -> np.ndarray:
    """``d/dt f(t, x) = 1/2 int_{-inf}^x (gamma(t) + 2) gamma_b`` on the grid."""
    ga = r_transform(phi0).samples
    gb = tangent_direction(phi0, h, dh)
    return 0.5 * prefix_integral((ga + t * gb + 2.0) * gb, h.h)


def _l2_sq(y, h) -> float:
    return simpson(np.asarray(y) ** 2, h)[0]


def distance(phi0: HSDiffeo, phi1: HSDiffeo, rtol: float = 1e-8, tail_tol: float = 1e-8) -> float:
    """Geodesic distance ``sqrt(4 int (sqrt(phi1') - sqrt(phi0'))^2)``.

    Also evaluates ``||R(phi0) - R(phi1)||_{L2}`` and raises
    :class:`InvariantError` if the two differ by more than ``rtol``.
    """
    _check_grids(phi0, phi1)
    h = phi0.f.h
    s0 = np.sqrt(np.clip(1.0 + phi0.df, 0.0, None))
    s1 = np.sqrt(np.clip(1.0 + phi1.df, 0.0, None))
    integrand = 4.0 * (s1 - s0) ** 2
    peak = float(integrand.max())
    if peak > 0 and max(integrand[0], integrand[-1]) > tail_tol * peak:
        raise WindowError("distance integrand does not decay inside the window")
    d2_quad = simpson(integrand, h)[0]
    g0, g1 = r_transform(phi0).samples, r_transform(phi1).samples
    d2_r = _l2_sq(g1 - g0, h)
    # coincident endpoints leave only round-off in both numbers
    floor = 1e-14 * (_l2_sq(g0, h) + _l2_sq(g1, h))
    if abs(d2_quad - d2_r) > rtol * max(d2_quad, d2_r) + floor:
        raise InvariantError("distance-identity", f"{d2_quad!r} vs {d2_r!r}")
    return math.sqrt(max(d2_quad, 0.0))


def constraint_residual(phi: HSDiffeo) -> tuple[float, float]:
    """``int gamma (gamma + 4)`` (= 4 f(inf)) and a scale for it."""
    g = r_transform(phi).samples
    h = phi.f.h
    val = float(prefix_integral(g * (g + 4.0), h)[-1])
    scale = float(simpson(g * g + 4.0 * np.abs(g), h)[0])
    return val, scale


def shift_r(phi0: HSDiffeo, phi1: HSDiffeo, t: float, rtol: float = 1e-6, ctol: float = 1e-6) -> dict:
    """Right-end shift of the geodesic at time t: closed form and measurement.

    Requires ``int gamma_i (gamma_i + 4) = 0`` for both endpoints.  The
    closed form is ``(t^2 - t)/4 ||R(phi0) - R(phi1)||^2``; the measurement
    is f(t, .) at the right window edge.  The two roots in t of the
    measured quadratic are the times the geodesic meets maps with
    ``f(inf) = 0``.
    """
    _check_grids(phi0, phi1)
    for name, p in (("phi0", phi0), ("phi1", phi1)):
        val, scale = constraint_residual(p)
        if abs(val) > ctol * max(scale, 1e-300):
            raise ConstraintError(f"{name}: int gamma(gamma+4) = {val:.3e} is not zero")
    h = phi0.f.h
    g0 = r_transform(phi0).samples
    g1 = r_transform(phi1).samples
    dg2 = _l2_sq(g1 - g0, h)
    closed = (t * t - t) / 4.0 * dg2
    measured = geodesic_bvp(phi0, phi1, t).right_value
    # f_inf(t) = a t^2 + b t + c, read off the endpoint integrals
    I = lambda y: float(prefix_integral(y, h)[-1])  # noqa: E731
    a = 0.25 * I((g1 - g0) ** 2)
    b = 0.25 * I(2.0 * g0 * (g1 - g0) + 4.0 * (g1 - g0))
    c = 0.25 * I(g0 * g0 + 4.0 * g0)
    roots = sorted(np.roots([a, b, c]).real.tolist()) if a > 0 else []
    agree = abs(measured - closed) <= rtol * max(abs(closed), 1e-300) if closed != 0 else abs(measured) <= 1e-12
    if not agree:
        raise InvariantError("shift-identity", f"measured {measured!r} vs closed form {closed!r}")
    return {"t": t, "closed_form": closed, "measured": measured, "dR_sq": dg2, "intersection_times": roots}


def calibrated_pair_gamma(c1: float, bump1: dict, bump2: dict, window, h: float) -> np.ndarray:
    """``gamma = c1 b1 + c2 b2`` with c2 chosen so that ``int gamma (gamma + 4) = 0``.

    b1, b2 must have disjoint supports; c2 is the nonzero root of
    ``c^2 int b2^2 + 4 c int b2 = -(c1^2 int b1^2 + 4 c1 int b1)`` computed
    with the same quadrature as r_inverse, taking the root of smaller
    magnitude.
    """
    b1 = grid_function(bump1, window, h).samples
    b2 = grid_function(bump2, window, h).samples
    if np.any((b1 != 0) & (b2 != 0)):
        raise DomainError("calibration bumps must have disjoint supports")
    I = lambda y: float(prefix_integral(y, h)[-1])  # noqa: E731
    A2, S2 = I(b2 * b2), I(b2)
    rhs = c1 * c1 * I(b1 * b1) + 4.0 * c1 * I(b1)
    disc = 16.0 * S2 * S2 - 4.0 * A2 * rhs
    if disc < 0:
        raise DomainError("no real calibration coefficient")
    roots = [(-4.0 * S2 + sgn * math.sqrt(disc)) / (2.0 * A2) for sgn in (1.0, -1.0)]
    c2 = min(roots, key=abs)
    gamma = c1 * b1 + c2 * b2
    if gamma.min() <= -2.0:
        raise DomainError("calibrated gamma leaves the group (min <= -2)")
    return gamma


def from_gamma(gamma, window, h: float) -> HSDiffeo:
    x = grid_points(float(window[0]), float(window[1]), h)
    template = GridFunction(float(window[0]), float(window[1]), float(h), np.zeros_like(x))
    return r_inverse(_rcoord(template, gamma))


# ---------------------------------------------------------------------------
# blow-up and monoid continuation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlowupReport:
    t0: float
    t1: float
    argmin_t1: float | None  # node where gamma(t) first reaches -2 for t > 0
    gamma_a: np.ndarray = field(repr=False)
    gamma_b: np.ndarray = field(repr=False)
    template: GridFunction = field(repr=False)

    def gamma(self, t: float) -> np.ndarray:
        return self.gamma_a + t * self.gamma_b

    def first_contact(self, t: float) -> float:
        """``x(gamma(t))``: first node with ``gamma <= -2 + tol`` (inf if none)."""
        hit = np.nonzero(self.gamma(t) <= -2.0 + MONOID_TOL)[0]
        return float(self.template.x[hit[0]]) if hit.size else math.inf

    def sample(self, t: float) -> dict:
        """Point of the (continued) path at t with monoid diagnostics."""
        g = self.gamma(t)
        phi = r_inverse(_rcoord(self.template, g, continued=bool(g.min() < -2.0)))
        values = phi.phi
        monotone = bool(np.all(np.diff(values) >= -1e-12))
        surjective = bool(np.isfinite(values[0]) and np.isfinite(values[-1]) and values[-1] > values[0])
        if not (monotone and surjective):
            raise InvariantError("monoid-continuation", f"t={t}: monotone={monotone}, surjective={surjective}")
        return {
            "t": t,
            "phi": phi,
            "floor": float(g.min()),
            "in_group": self.t0 < t < self.t1,
            "x_gamma": self.first_contact(t),
            "monotone": monotone,
            "surjective": surjective,
        }

    def to_json(self) -> dict:
        return {"t0": self.t0, "t1": self.t1, "x_at_t1": self.argmin_t1}


def blowup_interval(gamma_a, gamma_b) -> tuple[float, float, int | None]:
    """Largest open (t0, t1) with ``gamma_a + t gamma_b > -2`` at every node."""
    ga = np.asarray(gamma_a, dtype=float)
    gb = np.asarray(gamma_b, dtype=float)
    if np.any(ga <= -2.0):
        raise DomainError("starting point is not a group element")
    slack = ga + 2.0
    neg = gb < 0
    pos = gb > 0
    t1, arg = math.inf, None
    if np.any(neg):
        tt = slack[neg] / -gb[neg]
        j = int(np.argmin(tt))
        t1 = float(tt[j])
        arg = int(np.nonzero(neg)[0][j])
    t0 = float(np.max(-slack[pos] / gb[pos])) if np.any(pos) else -math.inf
    return t0, t1, arg


def blowup_monoid(phi0: HSDiffeo, target, mode: str = "bvp") -> BlowupReport:
    """Blow-up interval of the straight line in R-coordinates.

    ``mode="bvp"``: target is phi1 and the line is ``(1-t) R(phi0) + t R(phi1)``.
    ``mode="ivp"``: target is a tangent GridFunction h and the line is
    ``R(phi0) + t h'/sqrt(phi0')``.
    """
    ga = r_transform(phi0).samples
    if mode == "bvp":
        _check_grids(phi0, target)
        gb = r_transform(target).samples - ga
    elif mode == "ivp":
        gb = tangent_direction(phi0, target)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    t0, t1, arg = blowup_interval(ga, gb)
    x_arg = float(phi0.x[arg]) if arg is not None else None
    return BlowupReport(t0, t1, x_arg, ga, gb, phi0.f)


# ---------------------------------------------------------------------------
# direct PDE integration
# ---------------------------------------------------------------------------


@dataclass
class OracleRun:
    times: list
    u: list  # velocity snapshots on the grid
    markers_x: np.ndarray  # initial marker positions
    markers: list  # marker positions phi(t, X) at each snapshot
    h: float
    dt: float
    window: tuple
    blowup_warning: bool = False


def _hs_rhs(u, h):
    ux = fd_derivative(u, h, 1, order=4, check=False)
    return -u * ux + 0.5 * prefix_integral(ux * ux, h, order=4), ux


def pde_oracle(u0: GridFunction, t_final: float, dt: float, t_grid=None, marker_stride: int = 10) -> OracleRun:
    """Method-of-lines solution of ``u_t = -u u_x + 1/2 int_{-inf}^x u_x^2``.

    Fourth-order centered differences, cubic prefix integral, classical
    RK4; Lagrangian markers ``phi_t = u(t, phi)`` ride along (interpolated
    with cubic Hermite on u and u_x) so that ``phi(t)`` can be compared with
    the R-transform geodesic.
    """
    h = u0.h
    u = np.array(u0.samples, dtype=float)
    umax = max(float(np.max(np.abs(u))), 1e-300)
    if dt > 0.1 * h / umax * (1 + 1e-12):
        raise StepError(f"dt = {dt:g} violates dt <= 0.1 h / max|u| = {0.1 * h / umax:g}")
    times = sorted(float(t) for t in (t_grid if t_grid is not None else [t_final]))
    X = u0.x[::marker_stride].copy()
    phi = X.copy()
    _, ux0 = _hs_rhs(u, h)
    grad0 = max(float(np.max(np.abs(ux0))), 1e-300)
    run = OracleRun([], [], X, [], h, dt, (u0.x_min, u0.x_max))
    t = 0.0

    def marker_vel(uu, uux, p):
        return hermite_eval(u0.x_min, h, uu, uux, p)

    for target in times:
        span = target - t
        if span > 0:
            n = max(1, math.ceil(span / dt - 1e-9))
            step = span / n
            for _ in range(n):
                k1, ux1 = _hs_rhs(u, h)
                m1 = marker_vel(u, ux1, phi)
                u2 = u + 0.5 * step * k1
                k2, ux2 = _hs_rhs(u2, h)
                m2 = marker_vel(u2, ux2, phi + 0.5 * step * m1)
                u3 = u + 0.5 * step * k2
                k3, ux3 = _hs_rhs(u3, h)
                m3 = marker_vel(u3, ux3, phi + 0.5 * step * m2)
                u4 = u + step * k3
                k4, ux4 = _hs_rhs(u4, h)
                m4 = marker_vel(u4, ux4, phi + step * m3)
                u = u + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                phi = phi + step / 6.0 * (m1 + 2 * m2 + 2 * m3 + m4)
                cur = max(float(np.max(np.abs(u))), 1e-300)
                if step > 0.1 * h / cur * (1 + 1e-12):
                    raise StepError(f"CFL violated at t={t:.6g}: max|u| = {cur:.6g}")
                t += step
            t = target
        _, ux = _hs_rhs(u, h)
        if float(np.max(np.abs(ux))) > 1e3 * grad0 and not run.blowup_warning:
            run.blowup_warning = True
            warnings.warn(f"gradient near blow-up at t={t:.6g}", RuntimeWarning, stacklevel=2)
        run.times.append(t)
        run.u.append(u.copy())
        run.markers.append(phi.copy())
    return run


def oracle_gap(u0: GridFunction, t: float, dt: float, marker_stride: int = 10) -> dict:
    """Compare the PDE oracle with the geodesic from Id with velocity u0 at time t.

    The exact solution satisfies ``u(t, phi(t, x)) = d/dt phi(t, x)``; the
    gap is the larger of the velocity gap at the exact particle positions
    and the marker position gap, in sup norm (L2 of the velocity gap is
    reported too).
    """
    phi0 = identity((u0.x_min, u0.x_max), u0.h)
    run = pde_oracle(u0, t, dt, [t], marker_stride)
    geo = geodesic_ivp(phi0, u0, t)
    vel = geodesic_velocity(phi0, u0, t)
    pos = geo.phi
    u = run.u[-1]
    ux = fd_derivative(u, u0.h, 1, order=4, check=False)
    inside = (pos >= u0.x_min) & (pos <= u0.x_max)
    u_at = hermite_eval(u0.x_min, u0.h, u, ux, pos[inside])
    du = np.abs(u_at - vel[inside])
    marker_exact = pos[::marker_stride]
    dphi = np.abs(run.markers[-1] - marker_exact)
    sup = float(max(du.max(), dphi.max()))
    return {
        "t": t,
        "h": u0.h,
        "dt": dt,
        "sup_error": sup,
        "u_sup_error": float(du.max()),
        "phi_sup_error": float(dphi.max()),
        "l2_error": float(math.sqrt(simpson(du**2, u0.h)[0])) if du.size > 4 else float("nan"),
        "blowup_warning": run.blowup_warning,
    }


# ---------------------------------------------------------------------------
# validation bundle
# ---------------------------------------------------------------------------


def validate(phi0: HSDiffeo, phi1: HSDiffeo, s_grid=(0.0, 0.25, 0.5, 0.75), eps: float = 1e-3) -> dict:
    """Round trips, isometry, affine reparametrization and support localization."""
    _check_grids(phi0, phi1)
    h = phi0.f.h
    checks = {}
    rt = 0.0
    for p in (phi0, phi1):
        back = r_inverse(r_transform(p))
        rt = max(rt, float(np.max(np.abs(back.values - p.values))))
    checks["round_trip_phi"] = {"sup_error": rt, "pass": rt < 1e-9}
    g = r_transform(phi1)
    back = r_transform(r_inverse(g))
    e = float(np.max(np.abs(back.samples - g.samples)))
    checks["round_trip_gamma"] = {"sup_error": e, "pass": e < 1e-9}
    d = distance(phi0, phi1)
    speeds = []
    for s in s_grid:
        a = r_transform(geodesic_bvp(phi0, phi1, s)).samples
        b = r_transform(geodesic_bvp(phi0, phi1, s + eps)).samples
        speeds.append(math.sqrt(_l2_sq((b - a) / eps, h)))
    spread = (max(speeds) - min(speeds)) / max(d, 1e-300)
    gap = abs(speeds[0] - d) / max(d, 1e-300)
    checks["isometry"] = {"speeds": speeds, "distance": d, "pass": spread < 1e-4 and gap < 1e-4}
    worst = 0.0
    for s, t in ((0.0, 0.5), (0.25, 0.75), (0.1, 0.9)):
        ds = distance(geodesic_bvp(phi0, phi1, s), geodesic_bvp(phi0, phi1, t))
        worst = max(worst, abs(ds - abs(t - s) * d) / max(d, 1e-300))
    checks["affine_reparametrization"] = {"max_rel_error": worst, "pass": worst < 1e-6}
    bad = _support_localized(geodesic_bvp(phi0, phi1, 0.5).df, phi0.df, phi1.df)
    checks["support_localization"] = {"violations": bad, "pass": bad == 0}
    return {"distance": d, "checks": checks, "pass": all(c["pass"] for c in checks.values())}
