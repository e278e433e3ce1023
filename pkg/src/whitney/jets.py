"""Multi-index combinatorics and arithmetic of truncated Taylor polynomials.

A jet of degree m in n variables is stored as its Taylor coefficients about a
base point y:

    P(x) = sum_{|a| <= m} c_a (x - y)^a,      c_a = d^a P(y) / a!

Coefficients are kept in graded-lexicographic order: total degree ascending,
plain tuple-lexicographic order within each degree.  That order is the
canonical serialization order used by the JSON and CSV interfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import GuardError, ValidationError

# Exact integer/rational arithmetic is guaranteed only within these caps.
MAX_N = 16
MAX_DEGREE = 8

MultiIndex = tuple[int, ...]


def order(alpha: MultiIndex) -> int:
    """Total order |a| of a multi-index."""
    return sum(alpha)


def _check_caps(n: int, m: int) -> None:
    if not 1 <= n <= MAX_N:
        raise GuardError("jets", "dimension_cap", f"n={n} outside [1, {MAX_N}]")
    if not 0 <= m <= MAX_DEGREE:
        raise GuardError("jets", "degree_cap", f"m={m} outside [0, {MAX_DEGREE}]")


def _indices_of_degree(n: int, d: int) -> Iterator[MultiIndex]:
    # lexicographically ascending tuples with fixed total degree d
    if n == 1:
        yield (d,)
        return
    for first in range(d + 1):
        for rest in _indices_of_degree(n - 1, d - first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def multi_indices(n: int, m: int) -> tuple[MultiIndex, ...]:
    """All multi-indices with |a| <= m in graded-lex order."""
    _check_caps(n, m)
    out: list[MultiIndex] = []
    for d in range(m + 1):
        out.extend(_indices_of_degree(n, d))
    assert len(out) == math.comb(n + m, m)
    return tuple(out)


@lru_cache(maxsize=None)
def _index_lookup(n: int, m: int) -> dict[MultiIndex, int]:
    return {alpha: i for i, alpha in enumerate(multi_indices(n, m))}


def index_of(alpha: MultiIndex, m: int) -> int:
    """Position of a multi-index in the graded-lex enumeration for degree m."""
    table = _index_lookup(len(alpha), m)
    try:
        return table[tuple(alpha)]
    except KeyError:
        raise ValidationError("jets", "index_range", f"|{alpha}| > m={m}") from None


def num_coeffs(n: int, m: int) -> int:
    return math.comb(n + m, m)


def factorial_of(alpha: MultiIndex) -> int:
    """a! = prod a_i!"""
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def binom_of(alpha: MultiIndex, beta: MultiIndex) -> int:
    """Product of per-coordinate binomials C(a_i, b_i)."""
    out = 1
    for a, b in zip(alpha, beta):
        out *= math.comb(a, b)
    return out


def indices_below(alpha: MultiIndex) -> Iterator[MultiIndex]:
    """All b with 0 <= b <= a componentwise (includes 0 and a itself)."""
    if not alpha:
        yield ()
        return
    for first in range(alpha[0] + 1):
        for rest in indices_below(alpha[1:]):
            yield (first,) + rest


@dataclass(frozen=True)
class Jet:
    """Taylor polynomial of degree <= m about ``base``.

    ``coeffs[i]`` is the coefficient for ``multi_indices(n, m)[i]`` in Taylor
    form, i.e. d^a P(base) / a!.
    """

    base: tuple[float, ...]
    m: int
    coeffs: tuple[float, ...]

    def __post_init__(self):
        expect = num_coeffs(len(self.base), self.m)
        if len(self.coeffs) != expect:
            raise ValidationError(
                "jets", "coeff_count",
                f"need {expect} coefficients for n={len(self.base)}, m={self.m}, "
                f"got {len(self.coeffs)}")

    @property
    def n(self) -> int:
        return len(self.base)

    def coeff(self, alpha: MultiIndex) -> float:
        return self.coeffs[index_of(alpha, self.m)]

    def deriv_at_base(self, alpha: MultiIndex) -> float:
        """d^a P(base) = a! * c_a."""
        return factorial_of(alpha) * self.coeff(alpha)


def jet_from_coeff_map(base: Sequence[float], m: int,
                       coeff_map: dict[MultiIndex, float]) -> Jet:
    """Build a jet from a sparse {multi-index: coefficient} map."""
    base = tuple(float(b) for b in base)
    n = len(base)
    coeffs = [0.0] * num_coeffs(n, m)
    for alpha, c in coeff_map.items():
        coeffs[index_of(tuple(alpha), m)] = float(c)
    return Jet(base, m, tuple(coeffs))


def _monomials(n: int, m: int, dx: np.ndarray) -> np.ndarray:
    """(x - base)^a for every |a| <= m, dx of shape (..., n)."""
    idx = multi_indices(n, m)
    out = np.empty(dx.shape[:-1] + (len(idx),))
    # per-coordinate power tables, then products per index
    ptab = np.ones(dx.shape[:-1] + (n, m + 1))
    for k in range(1, m + 1):
        ptab[..., k] = ptab[..., k - 1] * dx
    for j, alpha in enumerate(idx):
        acc = np.ones(dx.shape[:-1])
        for i, a in enumerate(alpha):
            if a:
                acc = acc * ptab[..., i, a]
        out[..., j] = acc
    return out


def eval_jet(jet: Jet, x: Sequence[float]) -> float:
    """Evaluate the polynomial at a point."""
    x = np.asarray(x, dtype=float)
    if x.shape != (jet.n,):
        raise ValidationError("jets", "dim_mismatch",
                              f"point has shape {x.shape}, jet has n={jet.n}")
    dx = x - np.asarray(jet.base)
    return float(_monomials(jet.n, jet.m, dx) @ np.asarray(jet.coeffs))


def eval_jet_many(jet: Jet, xs: np.ndarray) -> np.ndarray:
    """Evaluate at a batch of points, shape (k, n) -> (k,)."""
    xs = np.asarray(xs, dtype=float)
    dx = xs - np.asarray(jet.base)
    return _monomials(jet.n, jet.m, dx) @ np.asarray(jet.coeffs)


def diff_jet(jet: Jet, alpha: MultiIndex) -> Jet:
    """Jet of d^a P: degree m - |a|, same base point.

    In Taylor form the new coefficient for g equals
    c_{g+a} * (g+a)! / g!  (a falling-factorial shift).
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != jet.n:
        raise ValidationError("jets", "dim_mismatch",
                              f"alpha {alpha} has wrong length for n={jet.n}")
    k = order(alpha)
    if k > jet.m:
        raise ValidationError("jets", "order_exceeds_degree",
                              f"|{alpha}|={k} > m={jet.m}")
    new_m = jet.m - k
    out = [0.0] * num_coeffs(jet.n, new_m)
    for i, gamma in enumerate(multi_indices(jet.n, new_m)):
        src = tuple(g + a for g, a in zip(gamma, alpha))
        mult = 1
        for g, a in zip(gamma, alpha):
            # (g+a)! / g! computed as an exact integer product
            for q in range(g + 1, g + a + 1):
                mult *= q
        out[i] = mult * jet.coeffs[index_of(src, jet.m)]
    return Jet(jet.base, new_m, tuple(out))


def deriv_at(jet: Jet, alpha: MultiIndex, x: Sequence[float]) -> float:
    """d^a P evaluated at x; zero when |a| exceeds the degree."""
    if order(alpha) > jet.m:
        return 0.0
    return eval_jet(diff_jet(jet, alpha), x)


def recenter_jet(jet: Jet, new_base: Sequence[float]) -> Jet:
    """Re-express the same polynomial about another base point (exact identity)."""
    new_base = tuple(float(b) for b in new_base)
    if len(new_base) != jet.n:
        raise ValidationError("jets", "dim_mismatch",
                              f"base {new_base} has wrong length for n={jet.n}")
    coeffs = []
    for gamma in multi_indices(jet.n, jet.m):
        val = eval_jet(diff_jet(jet, gamma), new_base)
        coeffs.append(val / factorial_of(gamma))
    return Jet(new_base, jet.m, tuple(coeffs))


def sum_reciprocal_factorials(n: int, r: int) -> Fraction:
    """sum over |b| = r of 1/b! by explicit enumeration, as an exact rational.

    Equals n^r / r! (a multinomial identity; checked exactly in the tests).
    """
    if n < 1 or r < 0:
        raise ValidationError("jets", "bad_arguments", f"need n >= 1, r >= 0; got {n}, {r}")
    if n > MAX_N or r > MAX_DEGREE:
        raise GuardError("jets", "factorial_cap",
                         f"(n={n}, r={r}) beyond exact-arithmetic caps ({MAX_N}, {MAX_DEGREE})")
    total = Fraction(0)
    for beta in _indices_of_degree(n, r):
        total += Fraction(1, factorial_of(beta))
    return total
