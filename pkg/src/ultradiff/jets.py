"""Truncated univariate Taylor series.

A :class:`Jet` stores normalized Taylor coefficients ``a_k = f^(k)(x0)/k!``.
Every operation runs in either floating point or exact rational arithmetic;
a jet built from ``Fraction``/``int`` coefficients (or with ``exact=True``)
stays exact through composition, reversion and the majorant recursion.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DomainError, InvariantError
from .weights import WeightSequence

# beyond this degree composition switches from partition enumeration to
# iterated convolution
PARTITION_DEGREE_CAP = 20


def _coerce(values, exact: bool) -> tuple:
    if exact:
        return tuple(Fraction(v) for v in values)
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class Jet:
    coeffs: tuple
    base_point: float | Fraction = 0
    exact: bool = False

    def __init__(self, coeffs, base_point=0, exact: bool | None = None):
        coeffs = list(coeffs)
        if exact is None:
            exact = all(isinstance(c, (int, Fraction)) for c in coeffs) and isinstance(base_point, (int, Fraction))
        if len(coeffs) < 2:
            raise DomainError("jet degree must be at least 1")
        vals = _coerce(coeffs, exact)
        if not exact and not all(math.isfinite(v) for v in vals):
            raise DomainError("jet coefficients must be finite")
        object.__setattr__(self, "coeffs", vals)
        object.__setattr__(self, "base_point", Fraction(base_point) if exact else float(base_point))
        object.__setattr__(self, "exact", exact)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def derivatives(self) -> list:
        """``f^(k)(x0)`` for k = 0..N."""
        return [c * math.factorial(k) for k, c in enumerate(self.coeffs)]

    def as_float(self) -> "Jet":
        return Jet([float(c) for c in self.coeffs], float(self.base_point), exact=False)

    def as_exact(self) -> "Jet":
        return Jet([Fraction(c) for c in self.coeffs], Fraction(self.base_point), exact=True)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "a_k"])
            for k, c in enumerate(self.coeffs):
                w.writerow([k, str(c) if self.exact else repr(float(c))])

    @classmethod
    def from_csv(cls, path, base_point=0, exact: bool = False) -> "Jet":
        rows = []
        with open(Path(path), newline="") as fh:
            for row in csv.DictReader(fh):
                rows.append((int(row["k"]), row["a_k"]))
        rows.sort()
        if [k for k, _ in rows] != list(range(len(rows))):
            raise DomainError("jet CSV must list k = 0..N exactly once")
        conv = Fraction if exact else float
        return cls([conv(v) for _, v in rows], base_point, exact=exact)


def identity_jet(degree: int, base_point=0, exact: bool = False) -> Jet:
    c = [0] * (degree + 1)
    c[0] = base_point
    c[1] = 1
    return Jet(c, base_point, exact=exact)


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------


def partitions_multiset(n: int, max_part: int | None = None):
    """Partitions of n as dicts ``{part: multiplicity}``, largest part first."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield {}
        return
    for first in range(min(n, max_part), 0, -1):
        for mult in range(n // first, 0, -1):
            rest = n - mult * first
            for tail in partitions_multiset(rest, first - 1):
                d = {first: mult}
                d.update(tail)
                yield d


def _multinomial(mults) -> int:
    total = sum(mults)
    out = math.factorial(total)
    for k in mults:
        out //= math.factorial(k)
    return out


# ---------------------------------------------------------------------------
# composition and reversion
# ---------------------------------------------------------------------------


def _zero(exact: bool):
    return Fraction(0) if exact else 0.0


def _series_mul(a: list, b: list, n: int, exact: bool) -> list:
    out = [_zero(exact)] * (n + 1)
    for i, ai in enumerate(a[: n + 1]):
        if ai == 0:
            continue
        for j in range(0, n + 1 - i):
            bj = b[j]
            if bj != 0:
                out[i + j] += ai * bj
    return out


def _compose_partitions(a: tuple, b: tuple, N: int, exact: bool) -> list:
    out = [a[0]] + [_zero(exact)] * N
    for n in range(1, N + 1):
        acc = _zero(exact)
        for part in partitions_multiset(n):
            alpha = sum(part.values())
            term = a[alpha] * _multinomial(part.values())
            for delta, k in part.items():
                term *= b[delta] ** k
            acc += term
        out[n] = acc
    return out


def _compose_convolution(a: tuple, b: tuple, N: int, exact: bool) -> list:
    inner = [_zero(exact)] + list(b[1:])
    out = [a[0]] + [_zero(exact)] * N
    power = [_zero(exact)] * (N + 1)
    power[0] = Fraction(1) if exact else 1.0
    for k in range(1, N + 1):
        power = _series_mul(power, inner, N, exact)
        ak = a[k]
        if ak != 0:
            for n in range(k, N + 1):
                out[n] += ak * power[n]
    return out


def compose_jets(f: Jet, g: Jet, method: str = "auto") -> Jet:
    """Jet of ``f o g`` at ``g.base_point`` by Faa di Bruno's formula.

    ``f`` must be expanded at the inner value ``g.coeffs[0]`` (the caller
    aligns base points; nothing is re-centered here).  ``method`` is
    ``"partitions"``, ``"convolution"`` or ``"auto"`` (partitions up to
    degree 20).
    """
    if f.degree != g.degree:
        raise DomainError(f"degree mismatch: {f.degree} vs {g.degree}")
    exact = f.exact and g.exact
    if not exact:
        f, g = f.as_float(), g.as_float()
    gap = g.coeffs[0] - f.base_point
    if (gap != 0) if exact else abs(gap) > 1e-12 * max(1.0, abs(f.base_point)):
        raise DomainError("inner jet value does not match the outer base point")
    N = f.degree
    if method == "auto":
        method = "partitions" if N <= PARTITION_DEGREE_CAP else "convolution"
    if method == "partitions":
        out = _compose_partitions(f.coeffs, g.coeffs, N, exact)
    elif method == "convolution":
        out = _compose_convolution(f.coeffs, g.coeffs, N, exact)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Jet(out, g.base_point, exact=exact)


def invert_jet(f: Jet) -> Jet:
    """Compositional inverse of a germ with ``a_0 = 0`` and ``a_1 != 0``.

    With ``T = 1/a_1`` and ``phi = Id - T*f``, iterates ``G <- T + phi o G``;
    the degree-i coefficient is final after i sweeps.  The inverse is
    expanded at 0 and its constant coefficient is ``f.base_point``.
    """
    exact = f.exact
    a = f.coeffs
    if a[0] != 0:
        raise DomainError("germ must be normalized (a_0 = 0)")
    if a[1] == 0:
        raise DomainError("singular germ: a_1 = 0")
    N = f.degree
    T = (Fraction(1) / a[1]) if exact else 1.0 / a[1]
    zero = _zero(exact)
    phi = [zero, zero] + [-T * c for c in a[2:]]
    phi_jet = Jet(phi, 0, exact=exact)
    g = [zero, T] + [zero] * (N - 1)
    for _ in range(N):
        comp = compose_jets(phi_jet, Jet(g, 0, exact=exact)).coeffs
        new = [zero, T + comp[1]] + list(comp[2:])
        if new == g:
            break
        g = new
    g[0] = f.base_point
    return Jet(g, 0, exact=exact)


# ---------------------------------------------------------------------------
# majorant series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MajorantSeries:
    A: object
    C: object
    rho: object
    N: int
    psi_coeffs: tuple  # index j -> coefficient of t^j (0 for j < 2)
    g_coeffs: tuple  # index i -> c_i (index 0 unused, = 0)
    bound_ratios: tuple  # i*c_i / bound_i for i = 2..N
    exact: bool

    def bound(self, i: int, M: WeightSequence):
        return self.A * (4 * self.A * (self.C * self.A + 1) * self.rho) ** (i - 1) * (
            M.exact(i - 1) if self.exact else M[i - 1]
        )


def _weight(M: WeightSequence, k: int, exact: bool):
    return M.exact(k) if exact else M[k]


def majorant_series(A, C, rho, M: WeightSequence, N: int, exact: bool = False, check: bool = True) -> MajorantSeries:
    """Solve ``g = A s + psi_N(g)`` degree by degree and check the majorant bound.

    ``psi_N(t) = C A sum_{j=2}^N rho^{j-1} M_{j-1} t^j / j``.  Raises
    :class:`InvariantError` if some ``i c_i`` fails the strict bound
    ``i c_i < A (4A(CA+1) rho)^{i-1} M_{i-1}``, since that bound is a theorem.
    """
    if N < 2:
        raise DomainError("N must be at least 2")
    if N - 1 > M.kmax:
        raise DomainError("weight sequence too short for N")
    if exact:
        A, C, rho = Fraction(A), Fraction(C), Fraction(rho)
    else:
        A, C, rho = float(A), float(C), float(rho)
    if not (A > 0 and C > 0 and rho > 0):
        raise DomainError("A, C, rho must be positive")
    zero = _zero(exact)
    psi = [zero, zero] + [C * A * rho ** (j - 1) * _weight(M, j - 1, exact) / j for j in range(2, N + 1)]

    # P[j][m] = [s^m] g^j, filled degree by degree
    c = [zero] * (N + 1)
    P = [[zero] * (N + 1) for _ in range(N + 1)]
    P[0][0] = Fraction(1) if exact else 1.0
    c[1] = A
    P[1][1] = A
    for n in range(2, N + 1):
        # [s^n] g^j for j >= 2 only involves c_1..c_{n-1}
        for j in range(2, n + 1):
            acc = zero
            row = P[j - 1]
            for b in range(1, n - j + 2):
                cb = c[b]
                if cb != 0 and row[n - b] != 0:
                    acc += row[n - b] * cb
            P[j][n] = acc
        c[n] = sum((psi[j] * P[j][n] for j in range(2, n + 1)), zero)
        P[1][n] = c[n]

    ratios = []
    for i in range(2, N + 1):
        if exact:
            bound = A * (4 * A * (C * A + 1) * rho) ** (i - 1) * M.exact(i - 1)
            ratios.append(i * c[i] / bound)
        else:
            log_bound = math.log(A) + (i - 1) * math.log(4 * A * (C * A + 1) * rho) + M.log(i - 1)
            ratios.append(math.exp(math.log(i * c[i]) - log_bound) if c[i] > 0 else 0.0)
    maj = MajorantSeries(A, C, rho, N, tuple(psi), tuple(c), tuple(ratios), exact)
    if check:
        for i, r in zip(range(2, N + 1), ratios):
            if not (c[i] > 0 and r < 1):
                raise InvariantError("majorant-bound", f"i={i}: i*c_i/bound = {float(r):.6g}")
    return maj


def dominated_by(jet: Jet, maj: MajorantSeries) -> list[bool]:
    """Per degree 1..N: is ``|jet coefficient| <= c_i``?"""
    n = min(jet.degree, maj.N)
    slack = 0 if jet.exact and maj.exact else 1e-12
    return [abs(jet.coeffs[i]) <= maj.g_coeffs[i] * (1 + slack) for i in range(1, n + 1)]


# ---------------------------------------------------------------------------
# Faa di Bruno constant check
# ---------------------------------------------------------------------------


def fdb_lhs(gamma: int, A, M: WeightSequence, exact: bool = False):
    """Left-hand sum of the composition bound for one index gamma.

    Sum over partitions gamma = sum k_i delta_i of
    ``alpha!/prod k_i! * A^alpha * M_alpha * prod M_{delta_i}^{k_i}``.
    gamma = 0 returns the identity term ``M_0``.
    """
    if gamma == 0:
        return _weight(M, 0, exact)
    total = _zero(exact)
    for part in partitions_multiset(gamma):
        alpha = sum(part.values())
        term = _multinomial(part.values()) * A**alpha * _weight(M, alpha, exact)
        for delta, k in part.items():
            term *= _weight(M, delta, exact) ** k
        total += term
    return total


def fdb_bound_check(A, M: WeightSequence, gamma_max: int, A_values=None) -> dict:
    """Evaluate the composition sums and fit ``LHS <= B C^gamma M_gamma``.

    For each A (``A`` first, then ``A_values``) the normalized sums
    ``LHS/M_gamma`` for gamma = 1..gamma_max are fitted log-linearly;
    C is the fitted growth rate and B the smallest constant making the
    inequality hold on the whole range.
    """
    if gamma_max < 2:
        raise DomainError("gamma_max must be at least 2")
    if gamma_max > M.kmax:
        raise DomainError("weight sequence too short")
    As = [A] + list(A_values or [])
    rows = []
    for a in As:
        if a <= 0:
            raise DomainError("A must be positive")
        g = np.arange(1, gamma_max + 1)
        lhs = np.array([float(fdb_lhs(int(k), a, M)) for k in g])
        norm = lhs / np.exp(M.log_values[1 : gamma_max + 1])
        slope, _ = np.polyfit(g, np.log(norm), 1)
        C_fit = float(np.exp(slope))
        B_fit = float(np.max(norm / C_fit**g))
        rows.append(
            {
                "A": float(a),
                "lhs": lhs.tolist(),
                "normalized": norm.tolist(),
                "C": C_fit,
                "B": B_fit,
            }
        )
    return {"gamma_max": gamma_max, "fits": rows}
