"""The single-origin extension operator and its analytic derivatives.

On the complement of E the extension is the partition-of-unity blend

    F(x) = sum'_k P_{p_k}(x) phi_k(x) / S(x),      S(x) = sum_k phi_k(x),

where the k-sum runs over Whitney cubes whose expansion contains x, p_k is a
nearest point of E to the cube Q_k, and the primed sum keeps only cubes with
dist(Q_k, E) <= truncation.  S always sums over all covering cubes so the
weights form a partition of unity regardless of truncation.

Derivatives are exact: per-cube cutoff derivatives from the cutoff module,
derivatives of 1/S by the reciprocal recurrence

    d^g (1/S) = -(1/S) * sum_{0 < b <= g} C(g, b) d^b S d^(g-b) (1/S),

and a double Leibniz pass over P * phi * (1/S).  Values at points of E come
from the jets themselves; derivatives at E are limit statements and are not
evaluated pointwise.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np

from .cutoff import CutoffParams, SigmaProfile, psi, theta1_table
from .cubes import DistanceOracle, SupportCube, support_cubes
from .errors import GuardError, ValidationError
from .fields import WhitneyField
from .jets import (MultiIndex, binom_of, diff_jet, eval_jet,
                   indices_below, order)

K_CAP = 8

_SHARED_SIGMA = SigmaProfile()


def default_t(n: int) -> float:
    """1/n, clamped into the admissible range (0, 1/4) for small n."""
    return 1.0 / max(n, 5)


def _is_power_of_two(v: float) -> bool:
    mant, _ = math.frexp(v)
    return mant == 0.5


@dataclass(frozen=True)
class ExtensionConfig:
    """Operator parameters.

    ``t`` of None resolves to 1/n (clamped below 1/4); ``origin`` of None
    resolves to 0.  ``c1p`` and ``c2p`` bracket the dyadic scales entering
    the lattice-proximity weight and must be powers of two.
    """

    m: int
    t: float | None = None
    origin: tuple[float, ...] | None = None
    truncation: float = 1.0
    max_order: int | None = None
    c1p: float = 1.0 / 32.0
    c2p: float = 8.0

    def __post_init__(self):
        if self.m < 0:
            raise ValidationError("extension", "degree", f"m={self.m} must be >= 0")
        if self.t is not None and not 0.0 < self.t < 0.25:
            raise ValidationError("extension", "t_range", f"t={self.t} outside (0, 1/4)")
        if self.truncation <= 0.0:
            raise ValidationError("extension", "truncation", "truncation must be positive")
        if not (self.c1p < self.c2p and _is_power_of_two(self.c1p)
                and _is_power_of_two(self.c2p)):
            raise ValidationError("extension", "p_bracket",
                                  "need c1p < c2p, both powers of two")

    @property
    def k_order(self) -> int:
        if self.max_order is not None:
            return min(self.max_order, K_CAP)
        return min(self.m + 2, K_CAP)

    def t_for(self, n: int) -> float:
        return self.t if self.t is not None else default_t(n)

    def origin_for(self, n: int) -> np.ndarray:
        if self.origin is None:
            return np.zeros(n)
        return np.asarray(self.origin, dtype=float)

    def params_for(self, n: int) -> CutoffParams:
        return CutoffParams(self.t_for(n), _SHARED_SIGMA)

    def with_origin(self, origin) -> "ExtensionConfig":
        return ExtensionConfig(self.m, self.t, tuple(float(b) for b in origin),
                               self.truncation, self.max_order, self.c1p, self.c2p)


_ORACLES: "weakref.WeakKeyDictionary[WhitneyField, DistanceOracle]" = weakref.WeakKeyDictionary()


def oracle_for(f: WhitneyField) -> DistanceOracle:
    oracle = _ORACLES.get(f)
    if oracle is None:
        oracle = DistanceOracle(f.points)
        _ORACLES[f] = oracle
    return oracle


def _kahan_add(total: float, comp: float, term: float) -> tuple[float, float]:
    y = term - comp
    t = total + y
    return t, (t - total) - y


@dataclass
class LocalFrame:
    """Everything needed to evaluate the operator and derivatives at one x."""

    x: np.ndarray
    delta_x: float
    cubes: list[SupportCube]
    theta_tabs: list[np.ndarray]    # per cube: (n, kmax+1) table of theta derivs
    params: CutoffParams
    kmax: int

    def phi_deriv(self, k: int, beta: MultiIndex) -> float:
        """d^beta of the k-th cube's cutoff at x."""
        tab = self.theta_tabs[k]
        out = 1.0
        for i, b in enumerate(beta):
            out *= tab[i, b]
            if out == 0.0:
                return 0.0
        return out / self.cubes[k].cube.side ** sum(beta)

    def s_deriv(self, beta: MultiIndex) -> float:
        total, comp = 0.0, 0.0
        for k in range(len(self.cubes)):
            total, comp = _kahan_add(total, comp, self.phi_deriv(k, beta))
        return total


def build_frame(f: WhitneyField, x, cfg: ExtensionConfig, kmax: int = 0,
                origin=None) -> LocalFrame:
    """Collect covering cubes and cutoff derivative tables at x (x not in E)."""
    oracle = oracle_for(f)
    x = np.asarray(x, dtype=float)
    b = cfg.origin_for(f.n) if origin is None else np.asarray(origin, dtype=float)
    params = cfg.params_for(f.n)
    hits = support_cubes(oracle, x, b, params.t)
    delta_x, _ = oracle.delta(x)
    sqrt_n = math.sqrt(f.n)
    # dyadic-scale bracket: every p in [s/4, 4s] must lie inside
    # [c1p, c2p] * delta(x) / sqrt(n); violation is a hard error
    lo = cfg.c1p * delta_x / sqrt_n
    hi = cfg.c2p * delta_x / sqrt_n
    for h in hits:
        s = h.cube.side
        if s / 4.0 < lo or 4.0 * s > hi:
            raise GuardError("extension", "p_bracket_containment",
                             f"cube side {s:g} escapes [{lo:g}, {hi:g}] at x={x}")
    tabs = []
    for h in hits:
        lower = h.cube.lower
        s = h.cube.side
        tab = np.empty((f.n, kmax + 1))
        for i in range(f.n):
            u = (float(x[i]) - float(lower[i])) / s
            tab[i, :] = theta1_table(u, kmax, params)
        tabs.append(tab)
    frame = LocalFrame(x, delta_x, hits, tabs, params, kmax)
    s0 = frame.s_deriv((0,) * f.n)
    if s0 < 1.0 - 1e-9:
        raise GuardError("extension", "partition_floor",
                         f"S(x)={s0:g} < 1; covering search is incomplete")
    return frame


def _point_index(f: WhitneyField, x: np.ndarray) -> int | None:
    match = np.all(f.points == x, axis=1)
    hit = np.nonzero(match)[0]
    return int(hit[0]) if hit.size else None


def eval_extension(f: WhitneyField, x, cfg: ExtensionConfig, origin=None) -> float:
    """The extension value at x (jet value on E itself).

    Off E this is exactly the derivative path at order zero, so the blend,
    its derivatives, and the degenerate one-sample average all share one
    accumulation order.
    """
    x = np.asarray(x, dtype=float)
    idx = _point_index(f, x)
    if idx is not None:
        return f.jets[idx].coeffs[0]
    return eval_extension_deriv(f, x, (0,) * f.n, cfg, origin=origin)


def _reciprocal_derivs(frame: LocalFrame, betas: list[MultiIndex]
                       ) -> tuple[dict[MultiIndex, float], dict[MultiIndex, float]]:
    """(d^b S, d^b (1/S)) for every b in betas (betas closed under <=, sorted)."""
    s_derivs = {b: frame.s_deriv(b) for b in betas}
    zero = betas[0]
    inv = {zero: 1.0 / s_derivs[zero]}
    for gamma in betas[1:]:
        acc = 0.0
        for beta in indices_below(gamma):
            if sum(beta) == 0:
                continue
            rest = tuple(g - bb for g, bb in zip(gamma, beta))
            acc += binom_of(gamma, beta) * s_derivs[beta] * inv[rest]
        inv[gamma] = -inv[zero] * acc
    return s_derivs, inv


def eval_extension_deriv(f: WhitneyField, x, alpha: MultiIndex,
                         cfg: ExtensionConfig, origin=None,
                         frame: LocalFrame | None = None) -> float:
    """Exact d^alpha of the extension at x in the complement of E."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != f.n:
        raise ValidationError("extension", "dim_mismatch",
                              f"alpha {alpha} has wrong length for n={f.n}")
    if order(alpha) > cfg.k_order:
        raise ValidationError("extension", "order_cap",
                              f"|alpha|={order(alpha)} > K={cfg.k_order}")
    x = np.asarray(x, dtype=float)
    if _point_index(f, x) is not None:
        raise ValidationError("extension", "point_in_E",
                              "derivatives are limit statements on E; evaluate off E")
    if frame is None:
        frame = build_frame(f, x, cfg, kmax=max(alpha), origin=origin)
    betas = sorted(indices_below(alpha), key=lambda b: (sum(b), b))
    _, inv = _reciprocal_derivs(frame, betas)
    jet_deriv_cache: dict[tuple[int, MultiIndex], float] = {}

    def jet_deriv(anchor_idx: int, beta: MultiIndex) -> float:
        if order(beta) > f.m:
            return 0.0
        key = (anchor_idx, beta)
        if key not in jet_deriv_cache:
            jet_deriv_cache[key] = eval_jet(diff_jet(f.jets[anchor_idx], beta), x)
        return jet_deriv_cache[key]

    total, comp = 0.0, 0.0
    for k, h in enumerate(frame.cubes):
        if h.dist_to_E > cfg.truncation:
            continue
        # d^alpha (P * phi * 1/S) via nested Leibniz
        term = 0.0
        for beta in betas:                     # derivative applied to P
            pd = jet_deriv(h.anchor_index, beta)
            if pd == 0.0:
                continue
            rest = tuple(a - b for a, b in zip(alpha, beta))
            inner = 0.0
            for gamma in indices_below(rest):  # applied to phi
                pg = frame.phi_deriv(k, gamma)
                if pg == 0.0:
                    continue
                tail = tuple(r - g for r, g in zip(rest, gamma))
                inner += binom_of(rest, gamma) * pg * inv[tail]
            term += binom_of(alpha, beta) * pd * inner
        total, comp = _kahan_add(total, comp, term)
    return total


def partition_derivative_sum(f: WhitneyField, x, alpha: MultiIndex,
                             cfg: ExtensionConfig, origin=None) -> float:
    """sum_k |d^alpha phi*_k(x)| over all covering cubes (diagnostic)."""
    alpha = tuple(int(a) for a in alpha)
    x = np.asarray(x, dtype=float)
    frame = build_frame(f, x, cfg, kmax=max(alpha) if alpha else 0, origin=origin)
    betas = sorted(indices_below(alpha), key=lambda b: (sum(b), b))
    _, inv = _reciprocal_derivs(frame, betas)
    total = 0.0
    for k in range(len(frame.cubes)):
        val = 0.0
        for gamma in betas:
            pg = frame.phi_deriv(k, gamma)
            if pg == 0.0:
                continue
            tail = tuple(a - g for a, g in zip(alpha, gamma))
            val += binom_of(alpha, gamma) * pg * inv[tail]
        total += abs(val)
    return total


def dyadic_powers_in(lo: float, hi: float) -> list[float]:
    """All powers of two in the closed interval [lo, hi]."""
    if lo <= 0.0 or hi < lo:
        raise ValidationError("extension", "p_range", f"bad bracket [{lo}, {hi}]")
    e = math.ceil(math.log2(lo))
    # guard against rounding at the boundary
    while 2.0 ** (e - 1) >= lo:
        e -= 1
    out = []
    while 2.0 ** e <= hi:
        out.append(2.0 ** e)
        e += 1
    return out


def psi_bracket(f_or_oracle, x, cfg: ExtensionConfig) -> list[float]:
    """The dyadic scales p entering the lattice-proximity weight at x."""
    oracle = f_or_oracle if isinstance(f_or_oracle, DistanceOracle) else oracle_for(f_or_oracle)
    d, _ = oracle.delta(np.asarray(x, dtype=float))
    if d == 0.0:
        raise ValidationError("extension", "point_in_E", "x lies in E")
    rt = math.sqrt(oracle.n)
    ps = dyadic_powers_in(cfg.c1p * d / rt, cfg.c2p * d / rt)
    if not ps:
        raise GuardError("extension", "empty_p_range",
                         "no dyadic scale in bracket; c2p/c1p must be >= 2")
    return ps


def psi_b(f_or_oracle, x, cfg: ExtensionConfig, origin=None,
          t: float | None = None) -> float:
    """Lattice-proximity weight: sum over dyadic scales p in the bracket of
    prod_i (psi((x_i - b_i)/p) + 1).

    ``t`` overrides the cutoff width for the indicator only (the weight makes
    sense for any t in (0, 1]).
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    b = cfg.origin_for(n) if origin is None else np.asarray(origin, dtype=float)
    tt = t if t is not None else cfg.t_for(n)
    total = 0.0
    for p in psi_bracket(f_or_oracle, x, cfg):
        prod = 1.0
        for xi, bi in zip(x, b):
            prod *= psi((float(xi) - float(bi)) / p, tt) + 1.0
        total += prod
    return total
