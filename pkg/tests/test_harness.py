import numpy as np
import pytest

from whitney.errors import ValidationError
from whitney.extension import oracle_for
from whitney.fields import SmoothTestFunction, random_field
from whitney.harness import (ACCEPTANCE_MAP, ExperimentReport, ReportRow,
                             SuiteConfig, SUITES, approach_sequence,
                             corner_probes, fit_loglog_slope, interior_probes,
                             norm_growth_study, restriction_norm_study,
                             verify_suite)


def test_fit_loglog_slope_exact():
    ns = np.array([1, 2, 4, 8], dtype=float)
    ys = 3.0 * ns ** 2.5
    assert fit_loglog_slope(ns, ys) == pytest.approx(2.5, abs=1e-12)
    with pytest.raises(ValidationError):
        fit_loglog_slope([1.0], [2.0])


def test_report_csv_round_trip():
    rep = ExperimentReport([
        ReportRow(2, 1, 0.125, "classical", 0, "interior", 0.123456789012345,
                  None, 1, 7, 0.5),
        ReportRow(3, 1, 1 / 3, "averaged", 1, "corner", 9.87e-3, 2.5, 64, 7, None),
    ])
    text = rep.to_csv()
    back = ExperimentReport.from_csv(text)
    assert back.rows[0].sup_value == rep.rows[0].sup_value
    assert back.rows[1].fitted_exponent == rep.rows[1].fitted_exponent
    assert back.rows[0].runtime_s is None          # volatile column excluded
    assert back.rows[1].t == rep.rows[1].t
    # acceptance-gate mapping is emitted in the header
    for key, (suite, check) in ACCEPTANCE_MAP.items():
        assert f"# gate {key} -> suite {suite}, check {check}" in text


def test_report_bytes_deterministic():
    rep1 = restriction_norm_study(None, 1, range(1, 3), seed=5, sets_per_n=2,
                                  set_size=10)
    rep2 = restriction_norm_study(None, 1, range(1, 3), seed=5, sets_per_n=2,
                                  set_size=10)
    assert rep1.to_csv() == rep2.to_csv()
    assert rep1.to_csv(include_runtime=True) != ""


def test_interior_probes_in_band():
    f = random_field(2, 1, 8, seed=31)
    oracle = oracle_for(f)
    rng = np.random.default_rng(1)
    probes = interior_probes(oracle, rng, 20, d_max=0.4, d_min=0.05)
    for x in probes:
        assert 0.05 < oracle.delta(x)[0] <= 0.4


def test_corner_probes_near_lattice():
    f = random_field(2, 1, 10, seed=32)
    oracle = oracle_for(f)
    rng = np.random.default_rng(2)
    t = 0.125
    probes = corner_probes(oracle, rng, 10, t)
    from whitney.cubes import whitney_cube_at
    for x in probes:
        assert 0.0 < oracle.delta(x)[0] <= 0.5
        # each coordinate lies within t*s of the dyadic lattice at the local scale
        cube = whitney_cube_at(oracle, x)
        u = (x - cube.origin) / cube.side
        assert np.all(np.abs(u - np.round(u)) <= t)


def test_approach_sequence_geometry():
    a = np.array([0.5, 0.5])
    seq = approach_sequence(a, np.array([1.0, 0.0]), range(3, 7))
    dists = np.linalg.norm(seq - a, axis=1)
    assert np.allclose(dists, [2.0 ** -j for j in range(3, 7)])


def test_restriction_norm_study_constant_like():
    # a linear coordinate function has restriction norm exactly 1 at every n
    rep_rows = []
    for n in (1, 2, 3):
        fn = SmoothTestFunction("monomial", n, gamma=(1,) + (0,) * (n - 1))
        rep = restriction_norm_study(fn, 1, [n], seed=3, sets_per_n=2, set_size=8)
        rep_rows.extend(rep.rows)
    for row in rep_rows:
        assert row.sup_value == pytest.approx(1.0, abs=1e-12)


def test_restriction_norm_gate_small():
    rep = restriction_norm_study(None, 1, range(1, 5), seed=4, sets_per_n=2,
                                 set_size=16)
    slope = rep.rows[0].fitted_exponent
    assert slope is not None and slope <= 1.3


def test_norm_growth_study_rows_and_curves():
    rep = norm_growth_study(range(1, 3), 1, probes_per_kind=4, n_samples=16,
                            seed=6, random_set_size=10)
    ops = {r.operator for r in rep.rows}
    kinds = {r.probe_kind for r in rep.rows}
    assert ops == {"classical", "averaged"}
    assert kinds == {"interior", "corner"}
    ns, sups = rep.curve("averaged")
    assert list(ns) == [1, 2]
    assert np.all(sups > 0)
    # averaged operator t follows the 1/n rule (clamped), classical stays fixed
    for r in rep.rows:
        if r.operator == "averaged":
            assert r.t == pytest.approx(0.2)
        else:
            assert r.t == pytest.approx(0.125)


def test_verify_suite_unknown():
    with pytest.raises(ValidationError):
        verify_suite("nope")


def test_verify_suite_all_is_union():
    cfg = SuiteConfig(n=1, m=1, n_samples=128, probes=10)
    all_rep = verify_suite("all", cfg, seed=3)
    names_all = [(c.suite, c.name) for c in all_rep.checks]
    names_each = []
    for key in SUITES:
        names_each.extend((c.suite, c.name) for c in verify_suite(key, cfg, 3).checks)
    assert names_all == names_each


def test_acceptance_map_targets_exist():
    cfg = SuiteConfig(n=1, m=1, n_samples=64, probes=8)
    for key, (suite, check) in ACCEPTANCE_MAP.items():
        rep = verify_suite(suite, cfg, seed=2)
        assert any(c.name == check for c in rep.checks), (suite, check)
