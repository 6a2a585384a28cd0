"""Diffeomorphisms ``Id + f`` of the line sampled on a uniform grid.

Off-grid values of f come from quintic Hermite interpolation on the
samples of f, f' and f''.  Cells where the Fritsch-Carlson limiter for the
increasing map ``Id + f`` would alter the end slopes use the limited cubic
instead, so the interpolant never loses monotonicity.
Outside the window f is extended by zero, except for class B where the
edge value is held constant.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BracketError,
    ConstraintError,
    DomainError,
    InvariantError,
    NotADiffeomorphismError,
    StepError,
    StiffnessError,
)
from .numerics import fd_derivative, fritsch_carlson_slopes, gauss_legendre_01, hermite5_eval, hermite_eval
from .spaces import GridFunction, grid_function, grid_points

SNAP = 1e-9  # query points this close (in cells) to a node use the node sample


def _support_hull(x: np.ndarray, y: np.ndarray):
    nz = np.nonzero(y)[0]
    if nz.size == 0:
        return None
    return (float(x[nz[0]]), float(x[nz[-1]]))


def _merge_class(a: str, b: str) -> str:
    if a == b:
        return a
    if "B" in (a, b) or "none" in (a, b):
        return "B" if "none" not in (a, b) else "none"
    if {a, b} <= {"S", "D"}:
        return "S"
    return "W"


@dataclass(frozen=True)
class Diffeo:
    f: GridFunction
    df: np.ndarray
    witness: float
    provenance: dict = field(default_factory=dict, compare=False)
    ddf: np.ndarray | None = field(default=None, compare=False, repr=False)
    _slopes: np.ndarray = field(default=None, compare=False, repr=False)
    _curv: np.ndarray = field(default=None, compare=False, repr=False)
    _limited: np.ndarray = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        df = np.array(self.df, dtype=float)
        if df.shape != self.f.samples.shape or not np.all(np.isfinite(df)):
            raise DomainError("derivative samples must match f")
        df.setflags(write=False)
        object.__setattr__(self, "df", df)
        if not self.witness > 0:
            raise NotADiffeomorphismError(f"monotonicity witness inf(1+f') = {self.witness:.6g} is not positive")
        phi = self.f.x + self.f.samples
        raw = 1.0 + df
        limited = fritsch_carlson_slopes(phi, raw, self.f.h)
        lim = limited - 1.0
        lim.setflags(write=False)
        object.__setattr__(self, "_slopes", lim)
        if self.ddf is not None:
            curv = np.array(self.ddf, dtype=float)
        elif df.size >= 5:
            curv = fd_derivative(df, self.f.h, 1, order=4, check=False)
        else:
            curv = np.zeros_like(df)
        curv.setflags(write=False)
        object.__setattr__(self, "_curv", curv)
        changed = limited != raw
        object.__setattr__(self, "_limited", changed[:-1] | changed[1:])

    @property
    def x(self) -> np.ndarray:
        return self.f.x

    @property
    def values(self) -> np.ndarray:
        return self.f.samples

    @property
    def class_claim(self) -> str:
        return self.f.decay_class

    @property
    def is_identity(self) -> bool:
        return not np.any(self.f.samples) and not np.any(self.df)

    def _edge_values(self):
        if self.class_claim == "B":
            return float(self.f.samples[0]), float(self.f.samples[-1])
        return 0.0, 0.0

    def eval(self, xq, derivative: bool = False):
        """f (and f') at arbitrary points, with the decay-class extension outside."""
        v, d, _ = self.eval_jet(xq)
        return (v, d) if derivative else v

    def eval_jet(self, xq):
        """``(f, f', f'')`` at arbitrary points."""
        xq = np.asarray(xq, dtype=float)
        g = self.f
        val = np.empty_like(xq)
        der = np.zeros_like(xq)
        der2 = np.zeros_like(xq)
        s = (xq - g.x_min) / g.h
        inside = (s >= -SNAP) & (s <= g.n - 1 + SNAP)
        lo_val, hi_val = self._edge_values()
        val[~inside] = np.where(s[~inside] < 0, lo_val, hi_val)
        if np.any(inside):
            si = s[inside]
            r = np.rint(si)
            snap = np.abs(si - r) < SNAP
            v = np.empty(si.shape)
            d = np.empty(si.shape)
            dd = np.empty(si.shape)
            if np.any(snap):
                idx = np.clip(r[snap].astype(np.int64), 0, g.n - 1)
                v[snap] = g.samples[idx]
                d[snap] = self.df[idx]
                dd[snap] = self._curv[idx]
            if np.any(~snap):
                xo = xq[inside][~snap]
                vo, do, ddo = hermite5_eval(g.x_min, g.h, g.samples, self.df, self._curv, xo, nder=2)
                cell = np.clip(np.floor(si[~snap]).astype(np.int64), 0, g.n - 2)
                lim = self._limited[cell]
                if np.any(lim):
                    vo[lim] = hermite_eval(g.x_min, g.h, g.samples, self._slopes, xo[lim])
                v[~snap] = vo
                d[~snap] = do
                dd[~snap] = ddo
            val[inside] = v
            der[inside] = d
            der2[inside] = dd
        return val, der, der2

    def apply(self, xq):
        xq = np.asarray(xq, dtype=float)
        return xq + self.eval(xq)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "f", "df"])
            for row in zip(self.x, self.values, self.df):
                w.writerow([repr(float(v)) for v in row])


def make_diffeo(f: GridFunction, df=None, fd_order: int = 4, provenance: dict | None = None) -> Diffeo:
    """Wrap ``Id + f``; f' comes from ``df``, the oracle, or finite differences."""
    ddf = None
    if df is None:
        df = f.derivative(1, fd_order)
        if f.oracle is not None:
            ddf = f.derivative(2)
    df = np.asarray(df, dtype=float)
    return Diffeo(f, df, float(np.min(1.0 + df)), dict(provenance or {}), ddf)


def from_descriptor(descriptor: dict, window, h: float) -> Diffeo:
    return make_diffeo(grid_function(descriptor, window, h), provenance={"descriptor": descriptor})


def identity(window, h: float) -> Diffeo:
    x = grid_points(float(window[0]), float(window[1]), h)
    z = np.zeros_like(x)
    gf = GridFunction(float(window[0]), float(window[1]), float(h), z, "sampled", "D", None)
    return Diffeo(gf, z, 1.0, {"op": "identity"})


def _rebuild(template: GridFunction, samples, df, cls: str, provenance: dict, ddf=None) -> Diffeo:
    x = template.x
    samples = np.asarray(samples, dtype=float)
    support = _support_hull(x, samples) if cls == "D" else None
    if cls == "D" and (samples[0] != 0.0 or samples[-1] != 0.0):
        cls = "S"
        support = None
    gf = GridFunction(template.x_min, template.x_max, template.h, samples, "sampled", cls, support)
    return Diffeo(gf, df, float(np.min(1.0 + np.asarray(df))), provenance, ddf)


def read_csv(path, decay_class: str = "none") -> Diffeo:
    xs, fs, dfs = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        has_df = reader.fieldnames is not None and ("df" in reader.fieldnames or "f'" in reader.fieldnames)
        for row in reader:
            xs.append(float(row["x"]))
            fs.append(float(row["f"]))
            if has_df:
                dfs.append(float(row.get("df", row.get("f'"))))
    xs = np.asarray(xs)
    h = (xs[-1] - xs[0]) / (len(xs) - 1)
    gf = GridFunction(float(xs[0]), float(xs[-1]), float(h), fs, "sampled", decay_class, None)
    return make_diffeo(gf, dfs if dfs else None, provenance={"source": str(path)})


# ---------------------------------------------------------------------------
# group operations
# ---------------------------------------------------------------------------


def compose(F: Diffeo, G: Diffeo) -> Diffeo:
    """``F o G`` sampled on G's grid: ``h(x) = g(x) + f(x + g(x))``."""
    if F.is_identity:
        return G
    if G.is_identity and F.f.x_min == G.f.x_min and F.f.h == G.f.h and F.f.n == G.f.n:
        return F
    x = G.x
    g = G.values
    y = x + g
    fy, dfy, ddfy = F.eval_jet(y)
    h = g + fy
    dh = (1.0 + dfy) * (1.0 + G.df) - 1.0
    ddh = ddfy * (1.0 + G.df) ** 2 + (1.0 + dfy) * G._curv
    witness = float(np.min((1.0 + dfy) * (1.0 + G.df)))
    if not witness > 0:
        raise NotADiffeomorphismError(f"composition witness {witness:.6g} is not positive")
    cls = _merge_class(F.class_claim, G.class_claim)
    return _rebuild(G.f, h, dh, cls, {"op": "compose", "extension": F.class_claim}, ddh)


def _solve_cell(F: Diffeo, y: np.ndarray, cell: np.ndarray, iters: int = 60) -> np.ndarray:
    g = F.f
    lo = g.x_min + g.h * cell
    hi = lo + g.h
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = mid + F.eval(mid) < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(1.0, np.abs(mid))):
            break
    x = 0.5 * (lo + hi)
    for _ in range(2):
        v, d = F.eval(x, derivative=True)
        step = (x + v - y) / (1.0 + d)
        x = np.clip(x - step, lo - g.h * 1e-6, hi + g.h * 1e-6)
    return x


def invert(F: Diffeo, residual_tol: float = 1e-12) -> Diffeo:
    """``G = F^{-1}`` on F's grid by bracketed bisection plus Newton polish.

    ``g(y) = x - y`` where ``x + f(x) = y``; ``g'(y) = 1/(1 + f'(x)) - 1``.
    The residual ``max |f(x) + g(x + f(x))|`` over the grid is recorded in
    the provenance.  For class D the support of g equals that of f.
    """
    if F.is_identity:
        return F
    gf = F.f
    x = gf.x
    phi = x + gf.samples
    if np.any(np.diff(phi) <= 0):
        raise BracketError("Id + f is not strictly increasing on the grid; refine the grid")
    y = x
    xs = np.empty_like(y)
    lo_val, hi_val = F._edge_values()
    left = y < phi[0]
    right = y > phi[-1]
    xs[left] = y[left] - lo_val
    xs[right] = y[right] - hi_val
    mid = ~(left | right)
    cell = np.clip(np.searchsorted(phi, y[mid], side="right") - 1, 0, gf.n - 2)
    xs[mid] = _solve_cell(F, y[mid], cell)
    fx, dfx, ddfx = F.eval_jet(xs)
    res = np.abs(xs + fx - y)
    if np.max(res) > residual_tol * max(1.0, float(np.max(np.abs(y)))):
        raise BracketError(f"inversion residual {np.max(res):.3e} above tolerance; refine the grid")
    g = xs - y
    dg = 1.0 / (1.0 + dfx) - 1.0
    ddg = -ddfx / (1.0 + dfx) ** 3
    if F.class_claim == "D" and gf.support is not None:
        a, b = gf.support
        off = (y < a) | (y > b)
        g[off] = 0.0
        dg[off] = 0.0
        ddg[off] = 0.0
    G = _rebuild(gf, g, dg, F.class_claim, {"op": "invert"}, ddg)
    if G.class_claim == "D" and gf.support is not None:
        G = Diffeo(
            GridFunction(gf.x_min, gf.x_max, gf.h, G.values, "sampled", "D", gf.support), G.df, G.witness,
            G.provenance, G._curv,
        )
    resid = float(np.max(np.abs(gf.samples + G.eval(phi))))
    G.provenance["residual"] = resid
    return G


def inversion_residual(F: Diffeo, G: Diffeo) -> float:
    """``max_x |f(x) + g(x + f(x))|`` over F's grid."""
    return float(np.max(np.abs(F.values + G.eval(F.x + F.values))))


def conjugate(G: Diffeo, H: Diffeo, tol: float = 1e-8, nodes: int = 16) -> tuple[Diffeo, dict]:
    """``G^{-1} o H o G`` by chained operations and by the integral closed form.

    With ``y = x + g(x)`` and ``G^{-1} = Id + k``, the closed form reads
    ``h(y) * (1 + int_0^1 k'(y + t h(y)) dt)``; the integral uses
    Gauss-Legendre, doubling the node count until it settles.  Raises
    :class:`InvariantError` when the two results differ by more than
    ``tol`` in sup norm.
    """
    Ginv = invert(G)
    chained = compose(Ginv, compose(H, G))
    x = G.x
    y = x + G.values
    hy = H.eval(y)

    def average(n):
        t, w = gauss_legendre_01(n)
        acc = np.zeros_like(y)
        for tj, wj in zip(t, w):
            _, dk = Ginv.eval(y + tj * hy, derivative=True)
            acc += wj * dk
        return acc

    # k' is only C-infinity, so the rule is doubled until it settles
    acc = average(nodes)
    while nodes < 512:
        nodes *= 2
        finer = average(nodes)
        settled = np.max(np.abs(hy * (finer - acc))) < 0.01 * tol
        acc = finer
        if settled:
            break
    closed = hy * (1.0 + acc)
    gap = float(np.max(np.abs(closed - chained.values)))
    if gap > tol:
        raise InvariantError("conjugation-closed-form", f"sup gap {gap:.3e} exceeds {tol:g}")
    result = _rebuild(G.f, closed, chained.df, chained.class_claim, {"op": "conjugate", "gap": gap}, chained._curv)
    report = {
        "sup_gap": gap,
        "class": result.class_claim,
        "support": result.f.support,
        "sup_norm": float(np.max(np.abs(closed))),
        "quadrature_nodes": nodes,
    }
    return result, report


# ---------------------------------------------------------------------------
# evolution of time-dependent vector fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorField:
    """``X(t, x) = m(t0 + t) * p(x)`` for a function descriptor p.

    ``modulation`` is ``const`` (m = 1) or ``cos`` (m = cos(omega t)).
    """

    profile: dict
    modulation: str = "const"
    omega: float = 1.0
    t0: float = 0.0

    def __post_init__(self):
        if self.modulation not in ("const", "cos"):
            raise DomainError(f"unknown modulation {self.modulation!r}")
        from .spaces import _builder

        oracle, cls, support = _builder(self.profile)
        object.__setattr__(self, "_oracle", oracle)
        object.__setattr__(self, "_cls", cls)
        object.__setattr__(self, "_support", support)

    def _m(self, t):
        return 1.0 if self.modulation == "const" else math.cos(self.omega * (self.t0 + t))

    def __call__(self, t: float, x):
        return self._m(t) * self._oracle(0, x)

    def dx(self, t: float, x):
        return self._m(t) * self._oracle(1, x)

    def shifted(self, s: float) -> "VectorField":
        return VectorField(self.profile, self.modulation, self.omega, self.t0 + s)

    @property
    def decay_class(self) -> str:
        return self._cls

    @property
    def support_radius(self) -> float | None:
        if self._cls != "D" or self._support is None:
            return None
        return max(abs(self._support[0]), abs(self._support[1]))

    def bound(self, window) -> float:
        """``max |p|`` (modulation bounded by 1), sampled finely on the window."""
        if self._support is not None:
            a, b = self._support
        else:
            a, b = window
        xs = np.linspace(a, b, 20001)
        return float(np.max(np.abs(self._oracle(0, xs))))

    @classmethod
    def from_json(cls, d: dict) -> "VectorField":
        return cls(d["profile"], d.get("modulation", "const"), float(d.get("omega", 1.0)), float(d.get("t0", 0.0)))


@dataclass(frozen=True)
class EvolutionPath:
    times: tuple
    diffeos: tuple
    dt: float
    bound: float
    support_radius: float | None
    violations: int

    def to_rows(self):
        for t, D in zip(self.times, self.diffeos):
            for xi, fi in zip(D.x, D.values):
                yield (t, float(xi), float(fi))


def evolve(X: VectorField, t_final: float, window, h: float, t_grid=None, dt: float | None = None) -> EvolutionPath:
    """Integrate ``d/dt z = X(t, z)``, ``z(0) = x`` per grid node with RK4.

    Returns ``Id + f(t, .)`` with ``f = z - x`` at each time of ``t_grid``
    (default: just ``t_final``).  The spatial derivative comes from the
    variational equation ``d/dt z_x = X_x(t, z) z_x``.  For compactly
    supported X the bounds ``|f| <= t B`` and ``supp f(t) within
    B_{r + tB}`` are asserted node by node.
    """
    if t_final < 0:
        raise DomainError("t_final must be nonnegative")
    x = grid_points(float(window[0]), float(window[1]), h)
    B = X.bound(window)
    dt_max = 1e-3 if B == 0 else min(1e-3, 0.1 * h / B)
    if dt is None:
        dt = dt_max
    elif dt > dt_max * (1 + 1e-12):
        raise StepError(f"dt = {dt:g} exceeds the stability limit {dt_max:g}")
    if dt < 1e-12:
        raise StiffnessError(f"time step {dt:g} underflows")
    times = sorted(set([float(t) for t in (t_grid if t_grid is not None else [t_final])]))
    if times and (times[0] < 0 or times[-1] > t_final + 1e-15):
        raise DomainError("t_grid must lie in [0, t_final]")
    r = X.support_radius
    # nodes outside the support of X never move
    active = np.ones_like(x, dtype=bool) if r is None else (np.abs(x) <= r)
    z = x[active].copy()
    zx = np.ones_like(z)
    t = 0.0
    out = []
    violations = 0
    for target in times:
        span = target - t
        if span > 0:
            n = max(1, math.ceil(span / dt - 1e-9))
            step = span / n
            for _ in range(n):
                k1 = X(t, z)
                j1 = X.dx(t, z) * zx
                k2 = X(t + step / 2, z + step / 2 * k1)
                j2 = X.dx(t + step / 2, z + step / 2 * k1) * (zx + step / 2 * j1)
                k3 = X(t + step / 2, z + step / 2 * k2)
                j3 = X.dx(t + step / 2, z + step / 2 * k2) * (zx + step / 2 * j2)
                k4 = X(t + step, z + step * k3)
                j4 = X.dx(t + step, z + step * k3) * (zx + step * j3)
                z = z + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                zx = zx + step / 6 * (j1 + 2 * j2 + 2 * j3 + j4)
                t += step
            t = target
        f = np.zeros_like(x)
        df = np.zeros_like(x)
        f[active] = z - x[active]
        df[active] = zx - 1.0
        if r is not None:
            bad = np.abs(f) > t * B + 1e-12
            bad |= (np.abs(x) > r + t * B) & (f != 0.0)
            violations += int(np.count_nonzero(bad))
        cls = "D" if X.decay_class == "D" else "B"
        gf = GridFunction(float(window[0]), float(window[1]), float(h), f, "sampled", cls,
                          _support_hull(x, f) if cls == "D" else None)
        out.append(Diffeo(gf, df, float(np.min(1.0 + df)), {"op": "evolve", "t": t}))
    if violations:
        raise InvariantError("case-D-support-bound", f"{violations} grid violations")
    return EvolutionPath(tuple(times), tuple(out), dt, B, r, violations)


def flow_property_error(X: VectorField, s: float, t: float, window, h: float) -> float:
    """``sup |Evol_{s+t} - Evol^{shifted}_t o Evol_s|`` on the grid."""
    Fs = evolve(X, s, window, h).diffeos[-1]
    Ft = evolve(X.shifted(s), t, window, h).diffeos[-1]
    Fst = evolve(X, s + t, window, h).diffeos[-1]
    return float(np.max(np.abs(compose(Ft, Fs).values - Fst.values)))


# ---------------------------------------------------------------------------
# matrix inverse bound
# ---------------------------------------------------------------------------


def charpoly(S) -> np.ndarray:
    # Faddeev-LeVerrier: coefficients of det(lambda I - S), leading 1
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    coeffs = [1.0]
    Mk = np.zeros_like(S)
    I = np.eye(n)
    for k in range(1, n + 1):
        Mk = S @ Mk + coeffs[-1] * I
        coeffs.append(-np.trace(S @ Mk) / k)
    return np.array(coeffs)


def singular_values(A) -> np.ndarray:
    """Singular values in decreasing order.

    Roots of the characteristic polynomial of ``A^T A`` lose half the digits at
    repeated eigenvalues, so the SVD is used; ``charpoly`` remains available as a
    cross-check.
    """
    return np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)


def inverse_norm_bound(A) -> dict:
    """Check ``||A^{-1}|| <= |det A|^{-1} ||A||^{n-1}`` for operator norms."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or not 1 <= A.shape[0] <= 4:
        raise DomainError("need a square matrix of size at most 4")
    n = A.shape[0]
    det = float(np.linalg.det(A))
    if abs(det) <= 1e-12:
        raise ConstraintError(f"matrix is near singular (det = {det:.3e})")
    sv = singular_values(A)
    norm = float(sv[0])
    # smallest singular value from |det| / prod(others) is more stable than the root
    inv_norm = float(np.prod(sv[:-1]) / abs(det)) if n > 1 else 1.0 / abs(det)
    bound = norm ** (n - 1) / abs(det)
    holds = inv_norm <= bound * (1 + 1e-12)
    if not holds:
        raise InvariantError("inverse-norm-bound", f"{inv_norm!r} > {bound!r}")
    return {"n": n, "det": det, "norm": norm, "inverse_norm": inv_norm, "bound": bound, "holds": holds,
            "singular_values": sv.tolist()}
