"""Functions sampled on a uniform window and the ultradifferentiable seminorms.

A :class:`GridFunction` couples samples with an optional analytic
derivative oracle ``oracle(k, x)``.  Derivatives come from the oracle when
one exists and from finite differences otherwise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DomainError, InvariantError
from .numerics import fd_derivative, lp_norm, simpson
from .weights import WeightSequence, log_factorials

DECAY_CLASSES = ("B", "W", "S", "D", "none")
# boundary magnitude (relative to peak) tolerated for decaying claims
DECAY_TOL = 1e-8


# ---------------------------------------------------------------------------
# compact bump template
# ---------------------------------------------------------------------------


def _q_derivative(u: np.ndarray, m: int) -> np.ndarray:
    # m-th derivative of q(u) = 1 - 1/(1-u^2), m >= 1
    c = -0.5 * math.factorial(m)
    return c * ((1.0 - u) ** (-(m + 1)) + (-1) ** m * (1.0 + u) ** (-(m + 1)))


def bump_template(u, k: int = 0) -> np.ndarray:
    """k-th derivative of ``chi(u) = exp(1 - 1/(1 - u^2))`` on [-1, 1], zero outside.

    ``chi(0) = 1``.  Derivatives use the Leibniz recursion for ``exp(q)``:
    ``chi^(m+1) = sum_j binom(m, j) q^(j+1) chi^(m-j)``.
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros((k + 1,) + u.shape)
    inside = np.abs(u) < 1.0
    if not np.any(inside):
        return out[k]
    ui = u[inside]
    q = 1.0 - 1.0 / (1.0 - ui * ui)
    # below exp(-700) chi underflows; skip to avoid inf*0 in the q-derivatives
    live = q > -700.0
    uu = ui[live]
    derivs = np.zeros((k + 1, uu.size))
    derivs[0] = np.exp(q[live])
    qd = [None] + [_q_derivative(uu, m) for m in range(1, k + 1)]
    for m in range(k):
        acc = np.zeros(uu.size)
        for j in range(m + 1):
            acc += math.comb(m, j) * qd[j + 1] * derivs[m - j]
        derivs[m + 1] = acc
    block = np.zeros((k + 1, ui.size))
    block[:, live] = derivs
    out[:, inside] = block
    return out[k]


def hermite_polys(u: np.ndarray, k: int) -> np.ndarray:
    """Physicists' Hermite polynomials H_k(u) by ``H_{k+1} = 2u H_k - 2k H_{k-1}``."""
    h0 = np.ones_like(u)
    if k == 0:
        return h0
    h1 = 2.0 * u
    for j in range(1, k):
        h0, h1 = h1, 2.0 * u * h1 - 2.0 * j * h0
    return h1


# ---------------------------------------------------------------------------
# grid functions
# ---------------------------------------------------------------------------


def grid_points(x_min: float, x_max: float, h: float) -> np.ndarray:
    if not (x_max > x_min):
        raise DomainError("window must be non-degenerate")
    if not h > 0:
        raise DomainError("step must be positive")
    cells = (x_max - x_min) / h
    n = int(round(cells))
    if n < 2 or abs(n - cells) > 1e-9 * max(1.0, cells):
        raise DomainError(f"window length is not a multiple of h (cells = {cells!r})")
    return x_min + h * np.arange(n + 1)


@dataclass(frozen=True)
class GridFunction:
    x_min: float
    x_max: float
    h: float
    samples: np.ndarray
    source: str = "sampled"
    decay_class: str = "none"
    support: tuple | None = None
    oracle: Callable | None = field(default=None, compare=False, repr=False)
    descriptor: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        y = np.array(self.samples, dtype=float)
        n = len(grid_points(self.x_min, self.x_max, self.h))
        if y.shape != (n,):
            raise DomainError(f"expected {n} samples, got {y.shape}")
        if not np.all(np.isfinite(y)):
            raise DomainError("samples must be finite")
        if self.decay_class not in DECAY_CLASSES:
            raise DomainError(f"unknown decay class {self.decay_class!r}")
        y.setflags(write=False)
        object.__setattr__(self, "samples", y)
        if self.decay_class == "D" and self.support is not None:
            a, b = self.support
            x = self.x
            outside = (x < a) | (x > b)
            if np.any(y[outside] != 0.0):
                raise DomainError("class D samples do not vanish outside the recorded support")

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(len(self.samples))

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def boundary_magnitude(self) -> float:
        return float(max(abs(self.samples[0]), abs(self.samples[-1])))

    def derivative(self, k: int, fd_order: int = 4, use_oracle: bool = True) -> np.ndarray:
        """Samples of ``f^(k)``: the oracle if registered, else finite differences."""
        if k == 0:
            return np.array(self.samples)
        if use_oracle and self.oracle is not None:
            return np.asarray(self.oracle(k, self.x), dtype=float)
        return fd_derivative(self.samples, self.h, k, order=fd_order)

    def scaled(self, lam: float) -> "GridFunction":
        oracle = None
        if self.oracle is not None:
            base = self.oracle
            oracle = lambda k, x: lam * base(k, x)  # noqa: E731
        return GridFunction(
            self.x_min, self.x_max, self.h, lam * self.samples, self.source, self.decay_class,
            self.support, oracle, self.descriptor,
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "f"])
            for xi, yi in zip(self.x, self.samples):
                w.writerow([repr(float(xi)), repr(float(yi))])


def from_samples(samples, window, h, decay_class="none", support=None) -> GridFunction:
    return GridFunction(float(window[0]), float(window[1]), float(h), samples, "sampled", decay_class, support)


def read_csv(path, decay_class="none") -> GridFunction:
    xs, ys = [], []
    with open(Path(path), newline="") as fh:
        for row in csv.DictReader(fh):
            xs.append(float(row["x"]))
            ys.append(float(row["f"]))
    if len(xs) < 3:
        raise DomainError("sampled CSV needs at least three rows")
    xs = np.asarray(xs)
    h = (xs[-1] - xs[0]) / (len(xs) - 1)
    if np.max(np.abs(np.diff(xs) - h)) > 1e-9 * max(1.0, abs(h)):
        raise DomainError("sampled CSV is not on a uniform grid")
    return from_samples(ys, (xs[0], xs[-1]), h, decay_class)


# descriptor builders: each returns (oracle(k, x), decay_class, support)


def _gaussian(d):
    amp = float(d.get("amp", 1.0))
    c = float(d.get("center", 0.0))
    w = float(d.get("width", 1.0))
    if w <= 0:
        raise DomainError("width must be positive")

    def oracle(k, x):
        u = (np.asarray(x, dtype=float) - c) / w
        return amp * (-1) ** k * hermite_polys(u, k) * np.exp(-u * u) / w**k

    return oracle, "S", None


def _compact_bump(d):
    amp = float(d.get("amp", 1.0))
    c = float(d.get("center", 0.0))
    w = float(d.get("width", 1.0))
    if w <= 0:
        raise DomainError("width must be positive")

    def oracle(k, x):
        u = (np.asarray(x, dtype=float) - c) / w
        return amp * bump_template(u, k) / w**k

    return oracle, "D", (c - w, c + w)


def _sine(d):
    amp = float(d.get("amp", 1.0))
    freq = float(d.get("freq", 1.0))
    phase = float(d.get("phase", 0.0))

    def oracle(k, x):
        return amp * freq**k * np.sin(freq * np.asarray(x, dtype=float) + phase + k * math.pi / 2)

    return oracle, "B", None


def _zero(d):
    return (lambda k, x: np.zeros_like(np.asarray(x, dtype=float))), "D", None


def _sum(d):
    parts = [_builder(t) for t in d["terms"]]
    classes = {p[1] for p in parts}
    if classes == {"D"}:
        sups = [p[2] for p in parts if p[2] is not None]
        support = (min(s[0] for s in sups), max(s[1] for s in sups)) if sups else None
        cls = "D"
    else:
        support = None
        cls = "B" if "B" in classes else ("S" if classes <= {"S", "D"} else "W")

    def oracle(k, x):
        return sum(p[0](k, x) for p in parts)

    return oracle, cls, support


def _pathology(d):
    from . import pathologies

    return pathologies.descriptor_oracle(d)


_BUILDERS = {
    "zero": _zero,
    "gaussian_bump": _gaussian,
    "gaussian": _gaussian,
    "compact_bump": _compact_bump,
    "sine": _sine,
    "sum": _sum,
    "lemma157": _pathology,
    "theta_series": _pathology,
}


def _builder(d):
    kind = d.get("kind")
    if kind not in _BUILDERS:
        raise DomainError(f"unknown function descriptor {kind!r}")
    return _BUILDERS[kind](d)


def grid_function(descriptor: dict, window, h: float, decay_class: str | None = None) -> GridFunction:
    """Sample a function descriptor on ``[window[0], window[1]]`` with step h.

    Descriptors: ``zero``, ``gaussian_bump`` (amp, center, width),
    ``compact_bump`` (amp, center, width; template ``exp(1 - 1/(1-u^2))``),
    ``sine`` (amp, freq, phase), ``custom`` (samples), ``sum`` (terms),
    ``lemma157`` and ``theta_series``.  Raises :class:`DomainError` when the
    window cuts off more than the claimed decay class allows.
    """
    x_min, x_max = float(window[0]), float(window[1])
    x = grid_points(x_min, x_max, h)
    if descriptor.get("kind") == "custom":
        cls = decay_class or descriptor.get("decay_class", "none")
        gf = GridFunction(x_min, x_max, float(h), descriptor["samples"], "sampled", cls, None, None, dict(descriptor))
        check_window(gf)
        return gf
    oracle, cls, support = _builder(descriptor)
    cls = decay_class or descriptor.get("decay_class", cls)
    y = oracle(0, x)
    if cls == "D" and support is not None:
        y = np.where((x < support[0]) | (x > support[1]), 0.0, y)
    gf = GridFunction(
        x_min, x_max, float(h), y, "analytic", cls, support if cls == "D" else None, oracle, dict(descriptor)
    )
    check_window(gf)
    return gf


def check_window(f: GridFunction) -> float:
    """Boundary magnitude; raises if it contradicts the decay-class claim."""
    mag = f.boundary_magnitude()
    if f.decay_class == "D":
        if f.support is not None:
            a, b = f.support
            if a < f.x_min or b > f.x_max:
                raise DomainError(f"support [{a}, {b}] exceeds the window (boundary magnitude {mag:.3e})")
        elif mag != 0.0:
            raise DomainError(f"class D function nonzero at the window edge (boundary magnitude {mag:.3e})")
    elif f.decay_class in ("W", "S"):
        scale = f.scale
        if scale > 0 and mag > DECAY_TOL * scale:
            raise DomainError(f"window too small: boundary magnitude {mag:.3e} vs peak {scale:.3e}")
    return mag


# ---------------------------------------------------------------------------
# seminorms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeminormQuery:
    cls: str
    rho: float
    M: WeightSequence
    p: float = 2.0
    kmax: int = 12
    pmax: int = 8
    L: WeightSequence | None = None
    fd_order: int = 4
    use_oracle: bool = True

    def __post_init__(self):
        if self.cls not in ("B", "W", "S", "D"):
            raise DomainError(f"unknown seminorm class {self.cls!r}")
        if not self.rho > 0:
            raise DomainError("rho must be positive")
        if self.kmax < 1:
            raise DomainError("kmax must be at least 1")
        if self.kmax > self.M.kmax:
            raise DomainError("weight sequence shorter than kmax")
        if self.cls == "W" and self.p < 1:
            raise DomainError("p must be >= 1")
        if self.cls == "S":
            if self.L is None:
                raise DomainError("class S needs a second weight sequence L")
            if self.pmax > self.L.kmax:
                raise DomainError("L shorter than pmax")


@dataclass(frozen=True)
class SeminormResult:
    value: float
    witness: dict
    profile: tuple  # per-k (or per-(p,q)) maxima of the quotient
    method: str
    truncated: bool = True

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "witness": self.witness,
            "profile": list(self.profile),
            "method": self.method,
            "truncated": self.truncated,
        }


def _derivative_stack(f: GridFunction, kmax: int, q: SeminormQuery) -> tuple[list, str]:
    method = "oracle" if (q.use_oracle and f.oracle is not None) else f"fd{q.fd_order}"
    return [f.derivative(k, q.fd_order, q.use_oracle) for k in range(kmax + 1)], method


def _log_denominators(rho: float, M: WeightSequence, kmax: int) -> np.ndarray:
    k = np.arange(kmax + 1)
    return k * math.log(rho) + log_factorials(kmax) + M.log_values[: kmax + 1]


def is_compactly_supported(f: GridFunction) -> bool:
    if f.support is not None:
        return f.support[0] >= f.x_min and f.support[1] <= f.x_max
    y = f.samples
    return y[0] == 0.0 and y[-1] == 0.0


def seminorm(f: GridFunction, q: SeminormQuery) -> SeminormResult:
    """Truncated seminorm of f for the class in ``q`` with its argmax witness.

    B: ``sup_{k,x} |f^(k)| / (rho^k k! M_k)``;
    W: ``sup_k ||f^(k)||_p / (sigma^k k! M_k)``;
    S: ``sup_{p,q,x} (1+|x|)^p |f^(q)| / (sigma^(p+q) p! q! L_p M_q)``;
    D: the B quotient, after checking compact support.
    """
    if q.cls == "D" and not is_compactly_supported(f):
        raise DomainError("class D seminorm needs a compactly supported function")
    if not np.any(f.samples) and f.oracle is None:
        return SeminormResult(0.0, {"k": 0}, tuple([0.0] * (q.kmax + 1)), "trivial")
    derivs, method = _derivative_stack(f, q.kmax, q)
    logden = _log_denominators(q.rho, q.M, q.kmax)
    x = f.x
    if q.cls in ("B", "D"):
        profile, where = [], []
        for k, d in enumerate(derivs):
            i = int(np.argmax(np.abs(d)))
            profile.append(abs(d[i]) * math.exp(-logden[k]))
            where.append(float(x[i]))
        k = int(np.argmax(profile))
        return SeminormResult(float(profile[k]), {"k": k, "x": where[k]}, tuple(profile), method)
    if q.cls == "W":
        profile = [lp_norm(d, f.h, q.p) * math.exp(-logden[k]) for k, d in enumerate(derivs)]
        k = int(np.argmax(profile))
        return SeminormResult(float(profile[k]), {"k": k}, tuple(profile), method)
    # class S
    lw = np.log1p(np.abs(x))
    logL = log_factorials(q.pmax) + q.L.log_values[: q.pmax + 1]
    best, wit, profile = -1.0, None, []
    for pp in range(q.pmax + 1):
        for qq, d in enumerate(derivs):
            with np.errstate(divide="ignore"):
                lv = pp * lw + np.log(np.abs(d))
            lv = lv - (pp + qq) * math.log(q.rho) - logL[pp] - (logden[qq] - qq * math.log(q.rho))
            i = int(np.argmax(lv))
            val = math.exp(lv[i]) if np.isfinite(lv[i]) else 0.0
            profile.append(val)
            if val > best:
                best, wit = val, {"p": pp, "q": qq, "x": float(x[i])}
    return SeminormResult(float(best), wit, tuple(profile), method)


def class_diagnostic(f: GridFunction, cls: str, M: WeightSequence, rho_grid, L=None, **opts) -> dict:
    """Sweep the seminorm over an increasing rho grid.

    Each row carries a bounded-tail verdict from the per-order profile: the
    quotient is treated as finite when its maximum over the last third of
    the orders does not exceed the maximum over the rest (truncation-based).
    """
    rho_grid = [float(r) for r in rho_grid]
    if any(b <= a for a, b in zip(rho_grid, rho_grid[1:])):
        raise DomainError("rho_grid must be strictly increasing")
    rows = []
    for rho in rho_grid:
        res = seminorm(f, SeminormQuery(cls, rho, M, L=L, **opts))
        prof = np.asarray(res.profile)
        cut = max(1, (2 * len(prof)) // 3)
        finite = bool(prof[cut:].max(initial=0.0) <= prof[:cut].max(initial=0.0))
        rows.append({"rho": rho, "value": res.value, "witness": res.witness, "finite": finite})
    vals = [r["value"] for r in rows]
    for a, b in zip(vals, vals[1:]):
        if b > a * (1 + 1e-12) + 1e-300:
            raise InvariantError("rho-monotonicity", f"seminorm increased from {a!r} to {b!r}")
    return {
        "class": cls,
        "rows": rows,
        "finite_at_some_rho": any(r["finite"] for r in rows),
        "finite_at_all_rho": all(r["finite"] for r in rows),
        "confidence": "truncation-based",
    }


# ---------------------------------------------------------------------------
# inclusion inequalities
# ---------------------------------------------------------------------------


def weight_integral(p: float) -> float:
    """``int_R (1+|x|)^(-2p) dx = 2/(2p-1)``."""
    return 2.0 / (2.0 * p - 1.0)


def inclusion_report(f: GridFunction, p: float, q: float, alpha: int = 0, fd_order: int = 4) -> dict:
    """Evaluate the three 1-d inclusion chains for f and report their ratios.

    weighted: ``||f^(a)||_p`` against ``C^(1/p) sup (1+|x|)^2 |f^(a)|`` with
    the weight integral C; sobolev: ``sup|f| / ||f||_{W^{k,p}}`` with
    ``k = floor(1/p) + 1``; interpolation: ``||f||_q`` against
    ``||f||_p^(p/q) ||f||_inf^(1-p/q)``.  Ratios are lhs/rhs (0 when both
    sides vanish).
    """
    if not (1 <= p < q):
        raise DomainError("need 1 <= p < q")
    scale = f.scale
    if scale > 0 and f.boundary_magnitude() > DECAY_TOL * scale:
        raise DomainError("function does not decay at the window boundary")

    def ratio(a, b):
        return 0.0 if a == 0.0 else a / b

    x = f.x
    da = f.derivative(alpha, fd_order)
    lhs1 = lp_norm(da, f.h, p)
    rhs1 = weight_integral(p) ** (1.0 / p) * float(np.max((1.0 + np.abs(x)) ** 2 * np.abs(da)))
    ks = math.floor(1.0 / p) + 1
    sob = sum(lp_norm(f.derivative(j, fd_order), f.h, p) for j in range(ks + 1))
    sup = float(np.max(np.abs(f.samples)))
    lq = lp_norm(f.samples, f.h, q)
    lp = lp_norm(f.samples, f.h, p)
    rhs3 = lp ** (p / q) * sup ** (1.0 - p / q) if sup > 0 else 0.0
    _, quad_err = simpson(np.abs(f.samples) ** q, f.h)
    return {
        "p": p,
        "q": q,
        "alpha": alpha,
        "weighted": {"lhs": lhs1, "rhs": rhs1, "C": weight_integral(p), "ratio": ratio(lhs1, rhs1)},
        "sobolev": {"k": ks, "sup": sup, "w_norm": sob, "ratio": ratio(sup, sob)},
        "interpolation": {"lhs": lq, "rhs": rhs3, "ratio": ratio(lq, rhs3), "quad_err": quad_err},
        "boundary_magnitude": f.boundary_magnitude(),
    }
