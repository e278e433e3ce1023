"""Origin averaging of the extension operator.

For fixed x off E, the map b -> extension-with-origin-b evaluated at x is
periodic with period 16 * s0, where s0 is the side of the Whitney cube at x
for origin 0 (any power-of-two multiple of a period is again a period).  The
averaged operator integrates over one period cell; here the integral is
replaced by seeded Monte Carlo over b = tau * u with u uniform on [0,1)^n,
reporting the sample mean and its standard error.  Derivative-of-average is
represented as average-of-derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .cutoff import psi_array
from .cubes import whitney_cube_at
from .errors import ValidationError
from .extension import (ExtensionConfig, build_frame, eval_extension_deriv,
                        oracle_for, psi_bracket)
from .fields import WhitneyField
from .jets import MultiIndex


def period_at(f_or_oracle, x, cfg: ExtensionConfig | None = None) -> float:
    """16 * (side of the origin-0 Whitney cube at x); a power of two."""
    oracle = f_or_oracle if not isinstance(f_or_oracle, WhitneyField) else oracle_for(f_or_oracle)
    cube = whitney_cube_at(oracle, x, origin=None)
    return 16.0 * cube.side


@dataclass
class AveragingPlan:
    """Sampling plan for the Monte Carlo average over origins.

    ``tau`` of None resolves per query point to ``period_at``; an explicit
    tau must be a power of two and at least the local period (any
    power-of-two multiple of a period is a period, so one shared tau can
    cover a whole probe region).  ``b_samples`` pins the origin draws
    explicitly; with ``b_samples=[origin]`` the plan degenerates to the
    classical single-origin operator.
    """

    n_samples: int
    seed: int
    tau: float | None = None
    common_random: bool = False
    b_samples: np.ndarray | None = None
    _u_cache: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValidationError("averaging", "sample_count", "need N >= 1")
        if self.tau is not None:
            mant, _ = math.frexp(self.tau)
            if mant != 0.5:
                raise ValidationError("averaging", "period_pow2",
                                      f"tau={self.tau} is not a power of two")
        if self.common_random and self.tau is None and self.b_samples is None:
            raise ValidationError("averaging", "shared_period",
                                  "common-random-numbers mode needs a shared tau")

    def unit_samples(self, n: int) -> np.ndarray:
        """One (N, n) block of uniform draws, cached so every evaluation in
        an experiment sees the same numbers."""
        if n not in self._u_cache:
            rng = np.random.default_rng(self.seed)
            self._u_cache[n] = rng.random((self.n_samples, n))
        return self._u_cache[n]

    def origins(self, x, f_or_oracle, cfg: ExtensionConfig) -> np.ndarray:
        if self.b_samples is not None:
            b = np.atleast_2d(np.asarray(self.b_samples, dtype=float))
            if b.shape[0] != self.n_samples:
                raise ValidationError("averaging", "sample_count",
                                      "b_samples length must equal n_samples")
            return b
        tau = self.tau
        local = period_at(f_or_oracle, x, cfg)
        if tau is None:
            tau = local
        elif tau < local or math.frexp(tau / local)[0] != 0.5:
            raise ValidationError(
                "averaging", "invalid_period",
                f"tau={tau} is not a power-of-two multiple of the local period {local}")
        n = np.asarray(x).shape[0]
        return tau * self.unit_samples(n)


def extension_origin_values(f: WhitneyField, x, alpha: MultiIndex,
                            plan: AveragingPlan, cfg: ExtensionConfig) -> np.ndarray:
    """Per-origin-sample values of d^alpha of the extension at x."""
    x = np.asarray(x, dtype=float)
    alpha = tuple(int(a) for a in alpha)
    origins = plan.origins(x, f, cfg)
    kmax = max(alpha) if alpha else 0
    vals = np.empty(origins.shape[0])
    for i, b in enumerate(origins):
        frame = build_frame(f, x, cfg, kmax=kmax, origin=b)
        vals[i] = eval_extension_deriv(f, x, alpha, cfg, frame=frame)
    return vals


def _mean_stderr(vals: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(vals))
    if vals.size < 2:
        return mean, 0.0
    return mean, float(np.std(vals, ddof=1) / math.sqrt(vals.size))


def averaged_extension(f: WhitneyField, x, alpha: MultiIndex,
                       plan: AveragingPlan, cfg: ExtensionConfig,
                       absolute: bool = False) -> tuple[float, float]:
    """Monte Carlo mean and standard error of the origin-averaged operator.

    With ``absolute`` the mean of |d^alpha F_b(x)| is returned instead (the
    envelope that the dimension-growth diagnostics track).
    """
    vals = extension_origin_values(f, x, alpha, plan, cfg)
    if absolute:
        vals = np.abs(vals)
    return _mean_stderr(vals)


def psi_power_samples(f_or_oracle, x, k: int, n_samples: int, seed: int,
                      cfg: ExtensionConfig, t: float | None = None) -> np.ndarray:
    """Samples of the k-th power of the lattice-proximity weight over b."""
    if k < 1:
        raise ValidationError("averaging", "power_range", "need k >= 1")
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    tt = t if t is not None else cfg.t_for(n)
    ps = psi_bracket(f_or_oracle, x, cfg)
    oracle = f_or_oracle if not isinstance(f_or_oracle, WhitneyField) else oracle_for(f_or_oracle)
    hi = cfg.c2p * oracle.delta(x)[0] / math.sqrt(n)
    tau = 2.0 ** math.ceil(math.log2(hi))
    if tau < hi:
        tau *= 2.0
    rng = np.random.default_rng(seed)
    b = tau * rng.random((n_samples, n))
    total = np.zeros(n_samples)
    for p in ps:
        total += np.prod(psi_array((x - b) / p, tt) + 1.0, axis=1)
    return total ** k


def avg_psi_power(f_or_oracle, x, k: int, n_samples: int, seed: int,
                  cfg: ExtensionConfig, t: float | None = None) -> tuple[float, float]:
    """Monte Carlo estimate of the averaged k-th power of the weight."""
    return _mean_stderr(psi_power_samples(f_or_oracle, x, k, n_samples, seed, cfg, t))
