import json

import numpy as np
import pytest

from whitney.errors import ValidationError
from whitney.fields import (SmoothTestFunction, WhitneyField, adversarial_field,
                            cm_norm, field_from_json, field_to_json,
                            load_points_csv, random_field, restrict,
                            save_points_csv)
from whitney.jets import Jet, jet_from_coeff_map


def constant_field(points, value, m=0):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[1]
    jets = tuple(jet_from_coeff_map(p, m, {(0,) * n: value}) for p in pts)
    return WhitneyField(n, m, pts, jets)


def test_cm_norm_single_constant():
    f = constant_field([[0.0]], 1.0)
    assert cm_norm(f) == 1.0


def test_cm_norm_two_point_m0():
    f = WhitneyField(1, 0, np.array([[0.0], [1.0]]),
                     (Jet((0.0,), 0, (0.0,)), Jet((1.0,), 0, (1.0,))))
    assert cm_norm(f) == pytest.approx(1.0, abs=1e-15)


def test_cm_norm_empty_rejected():
    with pytest.raises(ValidationError):
        WhitneyField(1, 0, np.empty((0, 1)), ())


def test_distinct_points_enforced():
    with pytest.raises(ValidationError):
        constant_field([[0.0], [0.0]], 1.0)


def test_restrict_constant():
    fn = SmoothTestFunction("constant", 2, value=3.5)
    f = restrict(fn, [[0.1, 0.2], [0.5, 0.9]], 2)
    for jet in f.jets:
        assert jet.coeffs[0] == 3.5
        assert all(c == 0.0 for c in jet.coeffs[1:])


def test_restrict_linear_coordinate():
    fn = SmoothTestFunction("monomial", 2, gamma=(1, 0))
    f = restrict(fn, [[0.3, 0.4]], 1)
    jet = f.jets[0]
    assert jet.coeffs[0] == pytest.approx(0.3)
    assert jet.deriv_at_base((1, 0)) == 1.0
    assert jet.deriv_at_base((0, 1)) == 0.0
    assert cm_norm(f) == 1.0


def test_restrict_sines_norm_bounded():
    fn = SmoothTestFunction("sines", 2, omega=1.0)
    pts = np.random.default_rng(3).random((12, 2))
    f = restrict(fn, pts, 2)
    val = cm_norm(f)
    assert np.isfinite(val)
    # unit-norm function: restriction norm grows at most polynomially, and
    # at this size stays within a small constant times n^m
    assert val <= 8.0 * 2 ** 2


def test_sines_norm_scaling():
    fn = SmoothTestFunction("sines", 1, omega=4.0, m_norm=2)
    assert fn.value == pytest.approx(4.0 ** -2)


def test_gaussian_derivatives_fd():
    fn = SmoothTestFunction("gaussian", 2, center=[0.4, 0.6], width=0.7)
    rng = np.random.default_rng(1)
    for x in rng.random((10, 2)):
        for i in range(2):
            alpha = (1, 0) if i == 0 else (0, 1)
            e = np.zeros(2)
            e[i] = 1e-4
            fd = (fn.deriv((0, 0), x + e) - fn.deriv((0, 0), x - e)) / 2e-4
            assert abs(fd - fn.deriv(alpha, x)) <= 1e-8 * max(1.0, abs(fd))


def test_random_field_determinism_and_norm():
    f1 = random_field(2, 1, 9, seed=5)
    f2 = random_field(2, 1, 9, seed=5)
    assert np.array_equal(f1.points, f2.points)
    assert all(a.coeffs == b.coeffs for a, b in zip(f1.jets, f2.jets))
    assert cm_norm(f1) == pytest.approx(1.0, abs=1e-12)


def test_adversarial_field_shape():
    f = adversarial_field(2, 1, seed=4)
    assert f.size == 3 ** 2 - 1
    assert cm_norm(f) == pytest.approx(1.0, abs=1e-12)
    center = np.full(2, 0.5)
    assert not np.any(np.all(f.points == center, axis=1))


def test_norm_homogeneous_subadditive():
    f = random_field(2, 1, 7, seed=11)
    g_jets = tuple(Jet(j.base, j.m, tuple(reversed(j.coeffs))) for j in f.jets)
    g = WhitneyField(f.n, f.m, f.points.copy(), g_jets)
    lam = 3.25
    assert cm_norm(f.scaled(lam)) == pytest.approx(lam * cm_norm(f), rel=1e-12)
    summed = WhitneyField(f.n, f.m, f.points.copy(), tuple(
        Jet(a.base, a.m, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))
        for a, b in zip(f.jets, g.jets)))
    assert cm_norm(summed) <= cm_norm(f) + cm_norm(g) + 1e-12


def test_json_round_trip():
    f = random_field(3, 2, 5, seed=8)
    text = field_to_json(f)
    g = field_from_json(text)
    assert g.n == f.n and g.m == f.m
    assert np.array_equal(g.points, f.points)
    assert all(a.coeffs == b.coeffs for a, b in zip(f.jets, g.jets))
    payload = json.loads(text)
    assert set(payload) == {"n", "m", "points"}
    assert set(payload["points"][0]) == {"y", "coeffs"}


def test_json_schema_errors():
    with pytest.raises(ValidationError):
        field_from_json("{\"n\": 1}")


def test_points_csv_round_trip(tmp_path):
    pts = np.random.default_rng(0).random((6, 3))
    path = tmp_path / "pts.csv"
    save_points_csv(pts, path)
    back = load_points_csv(path, 3)
    assert np.array_equal(back, pts)
