import math

import numpy as np
import pytest

from whitney.averaging import (AveragingPlan, averaged_extension, avg_psi_power,
                               extension_origin_values, period_at)
from whitney.cubes import DistanceOracle
from whitney.cutoff import psi_array
from whitney.errors import ValidationError
from whitney.extension import (ExtensionConfig, eval_extension_deriv,
                               oracle_for, psi_bracket)
from whitney.fields import random_field
from whitney.harness import interior_probes
from whitney.jets import eval_jet

CFG = ExtensionConfig(m=1, t=0.125)


def test_period_unit_example():
    oracle = DistanceOracle([[0.0]])
    assert period_at(oracle, [1.5]) == 16.0


def test_period_scales_dyadically():
    oracle = DistanceOracle([[0.0]])
    assert period_at(oracle, [3.0]) == 2.0 * period_at(oracle, [1.5])
    mant, _ = math.frexp(period_at(oracle, [0.37]))
    assert mant == 0.5


def test_periodicity_of_origin():
    f = random_field(2, 1, 8, seed=21)
    oracle = oracle_for(f)
    rng = np.random.default_rng(2)
    done = 0
    while done < 12:
        x = rng.random(2)
        if not 1e-3 < oracle.delta(x)[0] <= 0.5:
            continue
        done += 1
        tau = period_at(f, x, CFG)
        b = rng.random(2)
        v0 = eval_extension_deriv(f, x, (0, 0), CFG, origin=b)
        for mult, axis in ((1.0, 0), (2.0, 1)):
            shifted = b.copy()
            shifted[axis] += mult * tau
            v1 = eval_extension_deriv(f, x, (0, 0), CFG, origin=shifted)
            assert abs(v1 - v0) <= 1e-12 * max(1.0, abs(v0))


def test_degenerate_plan_is_classical():
    f = random_field(2, 1, 8, seed=22)
    rng = np.random.default_rng(3)
    x = interior_probes(oracle_for(f), rng, 1)[0]
    plan = AveragingPlan(1, seed=0, b_samples=np.zeros((1, 2)))
    mean, se = averaged_extension(f, x, (1, 0), plan, CFG)
    assert mean == eval_extension_deriv(f, x, (1, 0), CFG)
    assert se == 0.0


def test_single_anchor_zero_variance():
    pts = np.zeros((1, 2))
    f = random_field(2, 1, 1, seed=23)
    rng = np.random.default_rng(4)
    x = None
    while x is None:
        c = rng.uniform(-0.4, 0.4, 2)
        if 0.05 < np.linalg.norm(c - f.points[0]) <= 0.5:
            x = c
    plan = AveragingPlan(32, seed=5)
    mean, se = averaged_extension(f, x, (0, 0), plan, CFG)
    assert se <= 1e-14
    assert mean == pytest.approx(eval_jet(f.jets[0], x), rel=1e-12)


def test_plan_validation():
    with pytest.raises(ValidationError):
        AveragingPlan(0, seed=1)
    with pytest.raises(ValidationError):
        AveragingPlan(4, seed=1, tau=0.75)
    with pytest.raises(ValidationError):
        AveragingPlan(4, seed=1, common_random=True)   # needs shared tau


def test_invalid_period_rejected():
    f = random_field(1, 1, 2, seed=24)
    rng = np.random.default_rng(6)
    x = interior_probes(oracle_for(f), rng, 1, d_min=0.05)[0]
    local = period_at(f, x, CFG)
    plan = AveragingPlan(4, seed=0, tau=local / 2.0)
    with pytest.raises(ValidationError):
        extension_origin_values(f, x, (0,), plan, CFG)


def test_shared_tau_multiple_is_valid():
    f = random_field(1, 1, 2, seed=25)
    rng = np.random.default_rng(7)
    x = interior_probes(oracle_for(f), rng, 1, d_min=0.05)[0]
    local = period_at(f, x, CFG)
    plan = AveragingPlan(8, seed=0, tau=4.0 * local)
    vals = extension_origin_values(f, x, (0,), plan, CFG)
    assert vals.shape == (8,)


def test_unit_samples_cached_and_deterministic():
    plan = AveragingPlan(16, seed=9)
    u1 = plan.unit_samples(3)
    u2 = plan.unit_samples(3)
    assert u1 is u2
    plan2 = AveragingPlan(16, seed=9)
    assert np.array_equal(plan2.unit_samples(3), u1)


def test_one_dimensional_closed_form():
    # mean over b in [0,1] of (1 + psi(b))^k = 1 + 2t(2^k - 1); k=1, t=0.1 -> 1.2
    rng = np.random.default_rng(10)
    b = rng.random(200000)
    t = 0.1
    for k, expect in ((1, 1.2), (2, 1.0 + 0.2 * 3), (3, 1.0 + 0.2 * 7)):
        vals = (1.0 + psi_array(b, t)) ** k
        se = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
        assert abs(float(np.mean(vals)) - expect) <= 3.0 * se


def test_psi_power_t_to_zero_limit():
    oracle = DistanceOracle([[0.0]])
    x = np.array([math.pi])
    cfg = ExtensionConfig(m=1, t=0.125)
    n_p = len(psi_bracket(oracle, x, cfg))
    for k in (1, 2):
        mean, se = avg_psi_power(oracle, x, k, 4000, 11, cfg, t=1e-9)
        assert mean == pytest.approx(float(n_p) ** k, abs=1e-6)


def test_psi_power_holder_gate():
    oracle = DistanceOracle([[0.0, 0.0]])
    x = np.array([1.3, 2.1])
    cfg = ExtensionConfig(m=1)
    n = 2
    for k in (1, 2, 3):
        t_lit = 1.0 / n
        mean, se = avg_psi_power(oracle, x, k, 4096, 12 + k, cfg, t=t_lit)
        n_p = len(psi_bracket(oracle, x, cfg))
        bound = n_p ** k * (1.0 + t_lit * 2.0 ** (k + 1)) ** n + 3.0 * se
        assert mean <= bound


def test_psi_power_k_validation():
    oracle = DistanceOracle([[0.0]])
    with pytest.raises(ValidationError):
        avg_psi_power(oracle, [1.0], 0, 16, 0, CFG)


def test_interchange_small():
    f = random_field(2, 1, 8, seed=26)
    oracle = oracle_for(f)
    rng = np.random.default_rng(13)
    x = interior_probes(oracle, rng, 1)[0]
    h = 1e-3 * oracle.delta(x)[0]
    e = np.array([h, 0.0])
    taus = [period_at(f, p, CFG) for p in (x, x + e, x - e)]
    plan = AveragingPlan(2048, seed=14, tau=max(taus), common_random=True)
    vp = extension_origin_values(f, x + e, (0, 0), plan, CFG)
    vm = extension_origin_values(f, x - e, (0, 0), plan, CFG)
    vd = extension_origin_values(f, x, (1, 0), plan, CFG)
    d = (vp - vm) / (2.0 * h) - vd
    se = float(np.std(d, ddof=1) / math.sqrt(len(d)))
    assert abs(float(np.mean(d))) <= max(1e-5 * max(abs(float(np.mean(vd))), 1.0),
                                         3.0 * se)


def test_absolute_mode():
    f = random_field(1, 1, 4, seed=27)
    rng = np.random.default_rng(15)
    x = interior_probes(oracle_for(f), rng, 1, d_min=0.03)[0]
    plan = AveragingPlan(64, seed=16)
    mean_abs, _ = averaged_extension(f, x, (1,), plan, CFG, absolute=True)
    mean, _ = averaged_extension(f, x, (1,), plan, CFG)
    assert mean_abs >= abs(mean) - 1e-15
