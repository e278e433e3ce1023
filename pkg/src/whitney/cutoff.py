"""Smooth cutoffs: the step sigma, the interval cutoff theta, tensor cubes.

The step is the two-sided exponential glue

    sigma(x) = h(x+1) / (h(x+1) + h(-x)),   h(u) = exp(-1/u) for u > 0 else 0,

so sigma = 0 on (-inf, -1], 1 on [0, inf), nondecreasing, C-infinity.
Derivatives of h follow the exact recurrence

    h^(j)(u) = R_j(1/u) exp(-1/u),   R_0 = 1,  R_{j+1}(v) = v^2 (R_j(v) - R_j'(v)),

and derivatives of sigma come from Leibniz on sigma * (h1 + h2) = h1.

theta is the five-piece cutoff of [0, 1]:

    0 on (-inf,-t],  sigma(x/t) on [-t,0],  1 on [0,1],
    sigma((1-x)/t) on [1,1+t],  0 on [1+t,inf),

and the n-dimensional cube cutoff is the product Theta(x) = prod theta(x_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .jets import MultiIndex

MAX_ORDER = 8

# Below this argument, exp(-1/u) underflows double precision by hundreds of
# orders; h and all derivatives are returned as exact zero limits.  This also
# keeps R_j(1/u) from being evaluated at huge arguments.
H_CROSSOVER = 1e-3


def _build_r_polys(max_order: int) -> list[list[int]]:
    """Coefficient lists (ascending powers of v) for R_0..R_max_order."""
    polys = [[1]]
    for _ in range(max_order):
        r = polys[-1]
        dr = [k * c for k, c in enumerate(r)][1:] or [0]
        diff = [c - (dr[k] if k < len(dr) else 0) for k, c in enumerate(r)]
        # multiply by v^2
        polys.append([0, 0] + diff)
    return polys


class SigmaProfile:
    """The smooth step and its derivatives up to ``max_order``."""

    def __init__(self, max_order: int = MAX_ORDER):
        if not 0 <= max_order <= MAX_ORDER:
            raise ValidationError("cutoff", "max_order",
                                  f"max_order={max_order} outside [0, {MAX_ORDER}]")
        self.max_order = max_order
        self._r = _build_r_polys(max_order)
        self._binom = [[math.comb(j, k) for k in range(j + 1)]
                       for j in range(max_order + 1)]
        self._sups: dict[int, float] = {}

    def h_derivs(self, u: float) -> list[float]:
        """[h(u), h'(u), ..., h^(K)(u)]."""
        if u < H_CROSSOVER:
            return [0.0] * (self.max_order + 1)
        e = math.exp(-1.0 / u)
        v = 1.0 / u
        out = []
        for poly in self._r:
            acc = 0.0
            for c in reversed(poly):
                acc = acc * v + c
            out.append(acc * e)
        return out

    def derivs(self, x: float) -> list[float]:
        """[sigma(x), sigma'(x), ..., sigma^(K)(x)]."""
        K = self.max_order
        if x <= -1.0:
            return [0.0] * (K + 1)
        if x >= 0.0:
            return [1.0] + [0.0] * K
        f = self.h_derivs(x + 1.0)                 # numerator h(x+1)
        h2 = self.h_derivs(-x)                     # h(-x), chain sign below
        g = [f[j] + (h2[j] if j % 2 == 0 else -h2[j]) for j in range(K + 1)]
        s = [f[0] / g[0]]
        for j in range(1, K + 1):
            acc = f[j]
            for k in range(j):
                acc -= self._binom[j][k] * s[k] * g[j - k]
            s.append(acc / g[0])
        return s

    def deriv(self, x: float, j: int) -> float:
        if j > self.max_order:
            raise ValidationError("cutoff", "order_cap",
                                  f"j={j} > max_order={self.max_order}")
        return self.derivs(x)[j]

    def __call__(self, x: float) -> float:
        if x <= -1.0:
            return 0.0
        if x >= 0.0:
            return 1.0
        f0 = self.h_derivs(x + 1.0)[0]
        g0 = f0 + self.h_derivs(-x)[0]
        return f0 / g0

    def sup_deriv(self, j: int, grid: int = 4001) -> float:
        """Numerical sup of |sigma^(j)| over [-1, 0] (cached per order)."""
        if j not in self._sups:
            xs = np.linspace(-1.0, 0.0, grid)
            self._sups[j] = max(abs(self.derivs(float(x))[j]) for x in xs)
        return self._sups[j]


@dataclass(frozen=True)
class CutoffParams:
    """Transition width t in (0, 1/4) plus the step profile."""

    t: float
    sigma: SigmaProfile = field(default_factory=SigmaProfile)

    def __post_init__(self):
        if not 0.0 < self.t < 0.25:
            raise ValidationError("cutoff", "t_range",
                                  f"t={self.t} outside (0, 1/4)")


def sigma_deriv(x: float, j: int, profile: SigmaProfile | None = None) -> float:
    """j-th derivative of the smooth step at x."""
    profile = profile or _DEFAULT_SIGMA
    return profile.deriv(x, j)


_DEFAULT_SIGMA = SigmaProfile()


def theta1_deriv(x: float, j: int, params: CutoffParams) -> float:
    """j-th derivative of the interval cutoff theta at x.

    Chain rule brings a factor t^-j on the ascending piece and (-1)^j t^-j on
    the descending one.
    """
    t = params.t
    if x <= -t or x >= 1.0 + t:
        return 0.0
    if 0.0 <= x <= 1.0:
        return 1.0 if j == 0 else 0.0
    if x < 0.0:
        return params.sigma.deriv(x / t, j) / t ** j
    val = params.sigma.deriv((1.0 - x) / t, j) / t ** j
    return val if j % 2 == 0 else -val


def theta1_table(x: float, max_j: int, params: CutoffParams) -> list[float]:
    """[theta(x), theta'(x), ...] up to max_j, sharing one sigma evaluation."""
    t = params.t
    if x <= -t or x >= 1.0 + t:
        return [0.0] * (max_j + 1)
    if 0.0 <= x <= 1.0:
        return [1.0] + [0.0] * max_j
    if x < 0.0:
        s = params.sigma.derivs(x / t)
        return [s[j] / t ** j for j in range(max_j + 1)]
    s = params.sigma.derivs((1.0 - x) / t)
    return [s[j] / t ** j * (1 if j % 2 == 0 else -1) for j in range(max_j + 1)]


def theta_n_deriv(x, alpha: MultiIndex, params: CutoffParams) -> float:
    """Mixed partial of the tensor cube cutoff Theta(x) = prod theta(x_i)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (len(alpha),):
        raise ValidationError("cutoff", "dim_mismatch",
                              f"x has shape {x.shape}, alpha has length {len(alpha)}")
    out = 1.0
    for xi, ai in zip(x, alpha):
        out *= theta1_deriv(float(xi), int(ai), params)
        if out == 0.0:
            return 0.0
    return out


def phi_cube_deriv(x, lower, side: float, alpha: MultiIndex,
                   params: CutoffParams) -> float:
    """Mixed partial of the cutoff of the cube [lower, lower + side]^n.

    phi(x) = Theta((x - lower) / side), so each derivative order contributes
    a factor 1/side.
    """
    x = np.asarray(x, dtype=float)
    lower = np.asarray(lower, dtype=float)
    u = (x - lower) / side
    val = theta_n_deriv(u, alpha, params)
    if val == 0.0:
        return 0.0
    return val / side ** sum(alpha)


def psi(x: float, t: float) -> int:
    """1 if x is within t of the integer lattice, else 0."""
    if not 0.0 < t:
        raise ValidationError("cutoff", "t_range", f"t={t} must be positive")
    return 1 if abs(x - round(x)) <= t else 0


def psi_array(x: np.ndarray, t: float) -> np.ndarray:
    """Vectorized near-integer indicator."""
    x = np.asarray(x, dtype=float)
    return (np.abs(x - np.round(x)) <= t).astype(float)


def lattice_theta_sum(x, alpha: MultiIndex, params: CutoffParams) -> float:
    """sum over the integer lattice a of |d^alpha Theta(x - a)|.

    Factorizes over coordinates; at most two translates contribute per
    coordinate because theta is supported on (-t, 1 + t).
    """
    x = np.asarray(x, dtype=float)
    out = 1.0
    for xi, ai in zip(x, alpha):
        out *= lattice_theta1_sum(float(xi), int(ai), params)
        if out == 0.0:
            return 0.0
    return out


def lattice_theta1_sum(x: float, j: int, params: CutoffParams) -> float:
    """One-dimensional lattice sum of |theta^(j)(x - k)|."""
    t = params.t
    lo = math.floor(x - t)       # need x - k in (-t, 1 + t)
    hi = math.ceil(x + t)
    total = 0.0
    for k in range(lo - 1, hi + 1):
        total += abs(theta1_deriv(x - k, j, params))
    return total
