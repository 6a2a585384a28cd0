"""Bump-train counterexamples and the mu_k asymptotics.

All constructions use the compact template ``chi(u) = exp(1 - 1/(1-u^2))``
from :mod:`ultradiff.spaces`.  Train members have pairwise disjoint
supports, so every point lies in at most one bump, namely the one with
``n = round(x / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, InvariantError
from .numerics import simpson
from .spaces import bump_template
from .weights import WeightSequence

# smallest index of the dilated train whose support (radius 1/log n) stays
# clear of its neighbours; n = 2 has radius 1/log 2 > 1
LEMMA_N_MIN = 3
SCHEDULE = (100, 1000, 10000)


@lru_cache(maxsize=32)
def template_norm(k: int, p: float, npts: int = 40001) -> float:
    """``||chi^(k)||_{L^p}`` by Simpson on [-1, 1]."""
    u = np.linspace(-1.0, 1.0, npts)
    val, _ = simpson(np.abs(bump_template(u, k)) ** p, u[1] - u[0])
    return val ** (1.0 / p)


@lru_cache(maxsize=4)
def _antiderivative_table(npts: int = 20001):
    u = np.linspace(-1.0, 1.0, npts)
    chi = bump_template(u)
    from .numerics import prefix_integral

    return u, prefix_integral(chi, u[1] - u[0]), chi


def chi_antiderivative(u) -> np.ndarray:
    """``int_{-1}^u chi``, Hermite-interpolated from a fine table (clamped outside)."""
    from .numerics import hermite_eval

    table_u, vals, chi = _antiderivative_table()
    u = np.clip(np.asarray(u, dtype=float), -1.0, 1.0)
    return hermite_eval(-1.0, table_u[1] - table_u[0], vals, chi, u)


# ---------------------------------------------------------------------------
# Lemma train phi(t) = sum 1/n chi(log(n) (t - 2n))
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BumpTrain:
    """``sum_n a_n chi(lambda_n (x - 2n))`` for ``n_min <= n <= n_max``."""

    amplitudes: np.ndarray  # index n - n_min
    dilations: np.ndarray
    n_min: int
    n_max: int

    def __post_init__(self):
        if np.any(self.dilations <= 0):
            raise DomainError("dilations must be positive")
        # radius 1/lambda_n; neighbouring bumps sit 2 apart
        radius = 1.0 / self.dilations
        if np.any(radius[:-1] + radius[1:] >= 2.0):
            raise DomainError("train members overlap; increase n_min or the dilations")

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        n = np.rint(x / 2.0).astype(np.int64)
        ok = (n >= self.n_min) & (n <= self.n_max)
        return x, n, ok

    def derivative(self, k: int, x) -> np.ndarray:
        x, n, ok = self._locate(x)
        out = np.zeros_like(x)
        if np.any(ok):
            i = n[ok] - self.n_min
            lam = self.dilations[i]
            out[ok] = self.amplitudes[i] * lam**k * bump_template(lam * (x[ok] - 2.0 * n[ok]), k)
        return out

    def __call__(self, x):
        return self.derivative(0, x)


def lemma_train(n_max: int, n_min: int = LEMMA_N_MIN) -> BumpTrain:
    n = np.arange(n_min, n_max + 1, dtype=float)
    return BumpTrain(1.0 / n, np.log(n), n_min, n_max)


def _train_norm_quadrature(train: BumpTrain, k: int, p: float, npts: int = 801) -> float:
    """``||train^(k)||_p^p`` by Simpson on each bump support, evaluated through the train."""
    total = 0.0
    n = np.arange(train.n_min, train.n_max + 1)
    radius = 1.0 / train.dilations
    # process bumps in blocks to keep memory bounded
    s = np.linspace(-1.0, 1.0, npts)
    for lo in range(0, n.size, 2048):
        nn = n[lo : lo + 2048]
        rr = radius[lo : lo + 2048]
        x = 2.0 * nn[:, None] + rr[:, None] * s[None, :]
        vals = np.abs(train.derivative(k, x.ravel()).reshape(x.shape)) ** p
        hs = rr * (s[1] - s[0])
        # Simpson row by row with per-row spacing
        w = np.ones(npts)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        total += float(np.sum((vals @ w) * hs / 3.0))
    return total


def lemma_series(k: int, p: float, n_max: int, n_min: int = LEMMA_N_MIN) -> float:
    """``||chi^(k)||_p^p sum_n log(n)^(kp-1) / n^p`` over the train indices."""
    n = np.arange(n_min, n_max + 1, dtype=float)
    ln = np.log(n)
    return template_norm(k, p) ** p * float(np.sum(np.exp((k * p - 1.0) * np.log(ln) - p * np.log(n))))


def lemma157_profile(p_values=(1.5, 2.0, 4.0), n_max: int = 1000, k_max: int = 3,
                     schedule=SCHEDULE, n_min: int = LEMMA_N_MIN) -> dict:
    """Norm table of the dilated train plus its L1 growth for the first derivative.

    For every ``k <= k_max`` and p, the p-th power of ``||phi^(k)||_p`` is
    computed by quadrature and by the closed series.  For ``k = 1, p = 1``
    the windowed ``||phi'||_1`` over ``[-1, 2N+1]`` is compared with
    ``||chi'||_1`` times the harmonic sum over the train indices (and, for
    reference, with the full harmonic number ``H_N``).
    """
    if any(p <= 1 for p in p_values):
        raise DomainError("table exponents must exceed 1")
    train = lemma_train(n_max, n_min)
    rows = []
    for k in range(k_max + 1):
        for p in p_values:
            quad = _train_norm_quadrature(train, k, p)
            series = lemma_series(k, p, n_max, n_min)
            rows.append({
                "k": k, "p": p, "series_value": series, "quadrature_value": quad,
                "rel_gap": abs(quad - series) / series,
            })
    chi1 = template_norm(1, 1.0)
    growth = []
    for N in schedule:
        tr = lemma_train(N, n_min)
        l1 = _train_norm_quadrature(tr, 1, 1.0)
        train_h = float(np.sum(1.0 / np.arange(n_min, N + 1)))
        full_h = float(np.sum(1.0 / np.arange(1, N + 1)))
        growth.append({
            "N": N, "window_right_edge": 2 * N + 1, "l1_dphi": l1,
            "predicted": chi1 * train_h, "ratio": l1 / (chi1 * train_h),
            "ratio_full_harmonic": l1 / (chi1 * full_h),
        })
    nonneg = bool(np.all(train(np.linspace(-1.0, 2 * n_max + 1, 200001)) >= 0.0))
    return {"n_min": n_min, "n_max": n_max, "table": rows, "l1_growth": growth, "nonnegative": nonneg,
            "chi_prime_l1": chi1}


def lemma_l1_masses(schedule=SCHEDULE, n_min: int = LEMMA_N_MIN) -> list[float]:
    """Windowed ``||phi||_1`` over ``[-1, 2N+1]`` for each N of the schedule."""
    return [_train_norm_quadrature(lemma_train(N, n_min), 0, 1.0) for N in schedule]


# ---------------------------------------------------------------------------
# unit-spaced train phi_a(x) = sum a_n chi(x - 2n) and theta_a = int_0^x phi_a
# ---------------------------------------------------------------------------


def harmonic_weights(n_max: int) -> np.ndarray:
    """``a_n = 1/n`` for n = 1..n_max (index n - 1)."""
    return 1.0 / np.arange(1, n_max + 1, dtype=float)


def halflie_weights(n_max: int) -> np.ndarray:
    """``b_n = 1/k`` if ``n = ceil(e^k)``, else 0, for n = 1..n_max."""
    b = np.zeros(n_max)
    k = 1
    while True:
        n = math.ceil(math.exp(k))
        if n > n_max:
            break
        b[n - 1] = 1.0 / k
        k += 1
    return b


def selected_indices(n_max: int) -> list[int]:
    return [i + 1 for i in np.nonzero(halflie_weights(n_max))[0]]


@dataclass(frozen=True)
class UnitTrain:
    a: np.ndarray  # a_n for n = 1..len(a)

    @property
    def n_max(self) -> int:
        return len(self.a)

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        n = np.rint(x / 2.0).astype(np.int64)
        ok = (n >= 1) & (n <= self.n_max)
        return x, n, ok

    def phi(self, x, k: int = 0) -> np.ndarray:
        x, n, ok = self._locate(x)
        out = np.zeros_like(x)
        if np.any(ok):
            out[ok] = self.a[n[ok] - 1] * bump_template(x[ok] - 2.0 * n[ok], k)
        return out

    def theta(self, x) -> np.ndarray:
        """``theta_a(x) = int_0^x phi_a``."""
        x, n, ok = self._locate(x)
        chi1 = template_norm(0, 1.0)
        cum = np.concatenate([[0.0], np.cumsum(self.a)])
        out = np.zeros_like(x)
        nn = np.clip(n, 1, self.n_max)
        inner = cum[nn - 1] * chi1 + self.a[nn - 1] * chi_antiderivative(x - 2.0 * nn)
        out = np.where(ok, inner, out)
        out = np.where(n > self.n_max, cum[-1] * chi1, out)
        return out


def _cell_quadrature(func, centers, npts: int = 4001) -> np.ndarray:
    """Simpson over ``[c - 1, c + 1]`` for each center; returns per-cell integrals."""
    s = np.linspace(-1.0, 1.0, npts)
    x = np.asarray(centers, dtype=float)[:, None] + s[None, :]
    vals = func(x.ravel()).reshape(x.shape)
    w = np.ones(npts)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return vals @ w * (s[1] - s[0]) / 3.0


def halflie_divergence(p: float = 2.0, n_max: int = 10000, schedule=SCHEDULE) -> dict:
    """Windowed L^p masses of the two terms of ``h_tx(0, .)`` for the b-train.

    term1 = ``phi_b' theta_(1/n)``, term2 = ``phi_b phi_(1/n)``; masses are
    ``int |term|^p`` over ``[-1, 2N+1]``.  Only cells with ``b_n != 0``
    contribute, so the integrals are taken cell by cell.
    """
    if not 1 < p < math.inf:
        raise DomainError("p must lie in (1, inf)")
    N = max(max(schedule), n_max)
    A = UnitTrain(harmonic_weights(N))
    Bt = UnitTrain(halflie_weights(N))
    sel = selected_indices(N)
    centers = 2.0 * np.array(sel, dtype=float)
    t1 = _cell_quadrature(lambda x: np.abs(Bt.phi(x, 1) * A.theta(x)) ** p, centers)
    t2 = _cell_quadrature(lambda x: np.abs(Bt.phi(x) * A.phi(x)) ** p, centers)
    chi1 = template_norm(0, 1.0)
    lower = [float(Bt.a[n - 1] * A.theta(np.array([2.0 * n - 1]))[0]) for n in sel]
    bound_ok = all(lb >= chi1 * Bt.a[n - 1] * math.log(n) * (1 - 1e-12) for lb, n in zip(lower, sel))
    rows = []
    for Nw in schedule:
        m = [i for i, n in enumerate(sel) if n <= Nw]
        rows.append({
            "N": Nw, "window_right_edge": 2 * Nw + 1, "K": len(m),
            "term1_mass": float(np.sum(t1[m])), "term2_mass": float(np.sum(t2[m])),
        })
    K = np.arange(1, len(sel) + 1)
    cum1 = np.cumsum(t1)
    c_fit = float(np.sum(K * cum1) / np.sum(K * K))
    # term-2 increments past n = 1000
    late = [i for i, n in enumerate(sel) if n > 1000]
    incr2 = float(np.max(t2[late])) if late else 0.0
    return {
        "p": p, "selected": sel, "rows": rows, "per_index_term1": t1.tolist(), "per_index_term2": t2.tolist(),
        "c_fit": c_fit, "term2_max_increment_beyond_1000": incr2,
        "lower_bound_holds": bound_ok, "lower_bound_values": lower,
    }


def theta_check(a, n_values) -> float:
    """Max |theta_a(2n+1) - ||chi||_1 sum_{k<=n} a_k| by quadrature of phi_a."""
    a = np.asarray(a, dtype=float)
    tr = UnitTrain(a)
    chi1 = template_norm(0, 1.0)
    worst = 0.0
    cells = _cell_quadrature(lambda x: tr.phi(x), 2.0 * np.arange(1, len(a) + 1))
    cum = np.cumsum(cells)
    for n in n_values:
        worst = max(worst, abs(cum[n - 1] - chi1 * float(np.sum(a[:n]))))
    return worst


# ---------------------------------------------------------------------------
# mu_k asymptotics
# ---------------------------------------------------------------------------


def gevrey_mu_sequence(M: WeightSequence, k_max: int) -> dict:
    """``mu_k = 2^k sqrt(k!) M_k`` and ``r_k = (mu_k / (k! M_k))^(1/k)`` in log domain.

    Asserts r_k strictly decreasing, k r_k strictly increasing (k >= 1) and
    ``mu_{k+1} - mu_k >= 1``.
    """
    if k_max + 1 > len(M.log_values):
        raise DomainError("weight sequence shorter than k_max")
    lv = M.log_values[: k_max + 1]
    if abs(lv[0]) > 1e-12 or np.any(np.diff(lv) < -1e-12):
        raise DomainError("M must satisfy 1 = M_0 <= M_1 <= ...")
    k = np.arange(k_max + 1, dtype=float)
    lgam = np.array([math.lgamma(j + 1.0) for j in range(k_max + 1)])
    log_mu = k * math.log(2.0) + 0.5 * lgam + lv
    kk = k[1:]
    log_r = math.log(2.0) - lgam[1:] / (2.0 * kk)
    log_kr = np.log(kk) + log_r
    dec = bool(np.all(np.diff(log_r) < 0))
    inc = bool(np.all(np.diff(log_kr) > 0))
    step = np.diff(log_mu)
    spacing = log_mu[:-1] + np.log(np.expm1(step))
    spaced = bool(np.all(spacing >= -1e-12))
    if not (dec and inc and spaced):
        raise InvariantError("mu-asymptotics", f"decreasing={dec}, k*r_k increasing={inc}, spacing={spaced}")
    return {
        "k": kk.astype(int).tolist(),
        "log_mu": log_mu.tolist(),
        "r": np.exp(log_r).tolist(),
        "k_r": np.exp(log_kr).tolist(),
        "r_strictly_decreasing": dec,
        "k_r_strictly_increasing": inc,
        "spacing_at_least_one": spaced,
        "min_log_spacing": float(spacing.min()),
    }


# ---------------------------------------------------------------------------
# descriptor hook for spaces.grid_function
# ---------------------------------------------------------------------------


def descriptor_oracle(d: dict):
    kind = d["kind"]
    if kind == "lemma157":
        train = lemma_train(int(d.get("n_max", 100)), int(d.get("n_min", LEMMA_N_MIN)))
        return (lambda k, x: train.derivative(k, x)), "none", None
    if kind == "theta_series":
        n_max = int(d.get("n_max", 100))
        a = d.get("a", "harmonic")
        if a == "harmonic":
            a = harmonic_weights(n_max)
        elif a == "halflie":
            a = halflie_weights(n_max)
        tr = UnitTrain(np.asarray(a, dtype=float))

        def oracle(k, x):
            return tr.theta(x) if k == 0 else tr.phi(x, k - 1)

        return oracle, "none", None
    raise DomainError(f"unknown pathology descriptor {kind!r}")
