"""Low-level numerical kernels on uniform grids.

Finite-difference weights, quadrature (composite Simpson and prefix
integrals), cubic and quintic Hermite interpolation with a monotonicity limiter, and
the log-log tail fit used by the truncation-based verdicts.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import PrecisionError

EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


def fornberg_weights(z: float, nodes, m: int) -> np.ndarray:
    """Weights of the m-th derivative at ``z`` from values at ``nodes``.

    Fornberg's recursion (Math. Comp. 51, 1988); exact for polynomials of
    degree ``len(nodes) - 1``.
    """
    x = np.asarray(nodes, dtype=float)
    n = len(x)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


@lru_cache(maxsize=256)
@lru_cache(maxsize=None)
def _stencil(k: int, order: int, shift: int) -> tuple[np.ndarray, np.ndarray]:
    # shift = 0: centered; shift = +i / -i: node i cells from the left / right edge
    half = (k + order - 1) // 2
    if shift == 0:
        offsets = np.arange(-half, half + 1)
    elif shift > 0:
        offsets = np.arange(k + order) - (shift - 1)
    else:
        offsets = -(np.arange(k + order) - (-shift - 1))[::-1]
    w = fornberg_weights(0.0, offsets, k)
    offsets.flags.writeable = False
    w.flags.writeable = False
    return offsets, w


def stencil_noise_gain(k: int, order: int) -> float:
    """Sum of |weights| of the centered stencil at unit spacing."""
    return float(np.abs(_stencil(k, order, 0)[1]).sum())


def fd_derivative(y, h: float, k: int, order: int = 4, check: bool = True) -> np.ndarray:
    """k-th derivative of uniformly sampled ``y`` with accuracy ``O(h**order)``.

    Centered stencils in the interior, shifted (one-sided) ones near the
    edges.  With ``check`` set, raises :class:`PrecisionError` when the
    round-off amplification ``h**-k * eps`` exceeds 1e-6 of the signal.
    """
    y = np.asarray(y, dtype=float)
    if k == 0:
        return y.copy()
    if order < 2 or order % 2:
        raise ValueError("order must be an even integer >= 2")
    n = len(y)
    half = (k + order - 1) // 2
    if n < k + order:
        raise PrecisionError(f"grid of {n} points too short for an order-{order} k={k} stencil")
    scale = float(np.max(np.abs(y)))
    if check and scale > 0.0:
        noise = h ** (-k) * EPS * scale
        if noise > 1e-6 * scale:
            raise PrecisionError(
                f"order-{k} stencil unstable at h={h:g}: noise estimate "
                f"{noise:.3e} exceeds 1e-6 of signal {scale:.3e}"
            )
    out = np.empty(n)
    offsets, w = _stencil(k, order, 0)
    out[half : n - half] = np.correlate(y, w, "valid")
    for i in range(half):
        for idx, shift in ((i, i + 1), (n - 1 - i, -(i + 1))):
            offs, ww = _stencil(k, order, shift)
            out[idx] = float(np.dot(ww, y[idx + offs]))
    return out / h**k


def max_trustworthy_order(h: float, order: int = 4, tol: float = 1e-6) -> int:
    """Largest k whose stencil round-off stays below ``tol`` (relative)."""
    k = 0
    while k < 64 and stencil_noise_gain(k + 1, order) * EPS * h ** (-(k + 1)) <= tol:
        k += 1
    return k


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def _simpson_plain(y: np.ndarray, h: float) -> float:
    n = len(y)
    if n == 1:
        return 0.0
    if n == 2:
        return 0.5 * h * (y[0] + y[1])
    if n % 2 == 1:
        return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())
    # even point count: Simpson 3/8 on the last three intervals
    head = _simpson_plain(y[:-3], h) if n > 4 else 0.0
    tail = 3.0 * h / 8.0 * (y[-4] + 3.0 * y[-3] + 3.0 * y[-2] + y[-1])
    return head + tail


def simpson(y, h: float) -> tuple[float, float]:
    """Composite Simpson integral and Richardson error estimate.

    The estimate is ``|S_h - S_2h| / 15`` when the point count allows a
    2h subgrid over the same interval, else NaN.
    """
    y = np.asarray(y, dtype=float)
    val = _simpson_plain(y, h)
    n = len(y)
    if n >= 5 and (n - 1) % 2 == 0:
        coarse = _simpson_plain(y[::2], 2.0 * h)
        err = abs(val - coarse) / 15.0
    else:
        err = float("nan")
    return val, err


def lp_norm(y, h: float, p: float) -> float:
    """Windowed L^p norm by composite Simpson."""
    y = np.abs(np.asarray(y, dtype=float))
    if not np.any(y):
        return 0.0
    if np.isinf(p):
        return float(y.max())
    val, _ = simpson(y**p, h)
    return max(val, 0.0) ** (1.0 / p)


@lru_cache(maxsize=32)
@lru_cache(maxsize=None)
def _interval_weights(npts: int, start: int) -> np.ndarray:
    # integral over [start, start+1] (node units) of the Lagrange basis on 0..npts-1
    nodes = np.arange(npts, dtype=float)
    w = np.empty(npts)
    for j in range(npts):
        others = np.delete(nodes, j)
        poly = np.poly1d(others, r=True) / np.prod(nodes[j] - others)
        anti = np.polyint(poly)
        w[j] = anti(start + 1) - anti(start)
    w.flags.writeable = False
    return w


def prefix_integral(y, h: float, order: int = 6) -> np.ndarray:
    """Cumulative integral ``F[i] = int_{x_0}^{x_i} y`` on a uniform grid.

    Each cell integral comes from the interpolating polynomial through
    ``order`` neighbouring nodes (centered in the interior, shifted at the
    ends), so the result is ``O(h**order)`` accurate.  ``order=4`` is the
    cubic (Simpson-class) rule.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    out = np.zeros(n)
    if n < 2:
        return out
    npts = min(order, n)
    left = npts // 2 - 1
    cells = np.empty(n - 1)
    # interior cells: stencil i-left .. i-left+npts-1
    lo = left
    hi = n - npts + left  # last cell index with a centered stencil
    if hi >= lo:
        w = _interval_weights(npts, left)
        cells[lo : hi + 1] = np.correlate(y[: hi - lo + npts], w, "valid")
    for i in list(range(0, min(lo, n - 1))) + list(range(max(hi + 1, 0), n - 1)):
        s = min(max(i - left, 0), n - npts)
        w = _interval_weights(npts, i - s)
        cells[i] = float(np.dot(w, y[s : s + npts]))
    out[1:] = np.cumsum(cells) * h
    return out


def gauss_legendre_01(npts: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    t, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (t + 1.0), 0.5 * w


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------


def fritsch_carlson_slopes(values, slopes, h: float) -> np.ndarray:
    """Limit Hermite slopes so the interpolant of monotone data stays monotone.

    Slopes of flat intervals are zeroed; where ``alpha**2 + beta**2 > 9``
    both end slopes are scaled back onto the circle of radius 3.
    Non-monotone data pass through unchanged.
    """
    v = np.asarray(values, dtype=float)
    d = np.array(slopes, dtype=float)
    delta = np.diff(v) / h
    if not (np.all(delta >= 0) or np.all(delta <= 0)):
        return d
    alpha = np.zeros_like(delta)
    beta = np.zeros_like(delta)
    nz = delta != 0
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        alpha[nz] = d[:-1][nz] / delta[nz]
        beta[nz] = d[1:][nz] / delta[nz]
    # a subnormal secant overflows the ratios; treat it as flat
    flat = ~nz | ~np.isfinite(alpha) | ~np.isfinite(beta)
    d[:-1][flat] = 0.0
    d[1:][flat] = 0.0
    alpha[flat] = 0.0
    beta[flat] = 0.0
    neg_a = alpha < 0
    neg_b = beta < 0
    d[:-1][neg_a] = 0.0
    d[1:][neg_b] = 0.0
    alpha[neg_a] = 0.0
    beta[neg_b] = 0.0
    radius = np.hypot(alpha, beta)
    over = radius > 3.0
    if np.any(over):
        tau = 3.0 / radius[over]
        idx = np.nonzero(over)[0]
        # a node shared by two limited intervals keeps the smaller slope
        mag = np.abs(d)
        np.minimum.at(mag, idx, np.abs(tau * alpha[over] * delta[over]))
        np.minimum.at(mag, idx + 1, np.abs(tau * beta[over] * delta[over]))
        d = np.copysign(mag, d)
    return d


def hermite_eval(x0: float, h: float, values, slopes, xq, derivative: bool = False):
    """Evaluate the cubic Hermite interpolant on the uniform grid ``x0 + i*h``.

    Points outside the grid are clamped to the end cells (callers handle
    extension).  Returns the interpolant, or with ``derivative`` set the pair
    (value, derivative).
    """
    v = np.asarray(values, dtype=float)
    d = np.asarray(slopes, dtype=float)
    xq = np.asarray(xq, dtype=float)
    n = len(v)
    s = (xq - x0) / h
    i = np.clip(np.floor(s).astype(np.int64), 0, n - 2)
    t = s - i
    y0, y1 = v[i], v[i + 1]
    m0, m1 = d[i] * h, d[i + 1] * h
    t2 = t * t
    t3 = t2 * t
    val = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1
    if not derivative:
        return val
    dval = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) / h
    return val, dval


def hermite5_eval(x0: float, h: float, values, slopes, curvatures, xq, nder: int = 0):
    """Quintic Hermite interpolant from values, first and second derivatives.

    Same grid and clamping conventions as :func:`hermite_eval`.  With
    ``nder`` of 1 or 2 the derivatives of the interpolant up to that order
    are returned alongside the value.
    """
    v = np.asarray(values, dtype=float)
    d = np.asarray(slopes, dtype=float)
    c = np.asarray(curvatures, dtype=float)
    xq = np.asarray(xq, dtype=float)
    n = len(v)
    s = (xq - x0) / h
    i = np.clip(np.floor(s).astype(np.int64), 0, n - 2)
    t = s - i
    y0, y1 = v[i], v[i + 1]
    m0, m1 = d[i] * h, d[i + 1] * h
    c0, c1 = c[i] * h * h, c[i + 1] * h * h
    t2 = t * t
    t3 = t2 * t
    t4 = t3 * t
    t5 = t4 * t
    b0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
    b1 = t - 6 * t3 + 8 * t4 - 3 * t5
    b2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5)
    b3 = 0.5 * (t3 - 2 * t4 + t5)
    b4 = -4 * t3 + 7 * t4 - 3 * t5
    val = b0 * (y0 - y1) + y1 + b1 * m0 + b2 * c0 + b3 * c1 + b4 * m1
    if nder == 0:
        return val
    e0 = -30 * t2 + 60 * t3 - 30 * t4
    e1 = 1 - 18 * t2 + 32 * t3 - 15 * t4
    e2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4)
    e3 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4)
    e4 = -12 * t2 + 28 * t3 - 15 * t4
    d1 = (e0 * (y0 - y1) + e1 * m0 + e2 * c0 + e3 * c1 + e4 * m1) / h
    if nder == 1:
        return val, d1
    q0 = -60 * t + 180 * t2 - 120 * t3
    q1 = -36 * t + 96 * t2 - 60 * t3
    q2 = 1 - 9 * t + 18 * t2 - 10 * t3
    q3 = 3 * t - 12 * t2 + 10 * t3
    q4 = -24 * t + 84 * t2 - 60 * t3
    d2 = (q0 * (y0 - y1) + q1 * m0 + q2 * c0 + q3 * c1 + q4 * m1) / (h * h)
    return val, d1, d2


# ---------------------------------------------------------------------------
# trend fits
# ---------------------------------------------------------------------------


def tail_loglog_slope(k, values) -> float:
    """Least-squares slope of log(values) against log(k) over the last half."""
    k = np.asarray(k, dtype=float)
    v = np.asarray(values, dtype=float)
    m = len(k) // 2
    kk, vv = k[m:], v[m:]
    keep = vv > 0
    if keep.sum() < 2:
        return float("-inf")
    slope, _ = np.polyfit(np.log(kk[keep]), np.log(vv[keep]), 1)
    return float(slope)
