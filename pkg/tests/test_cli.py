import csv
import json

import numpy as np
import pytest

from whitney.averaging import AveragingPlan, averaged_extension
from whitney.cli import main
from whitney.extension import ExtensionConfig
from whitney.fields import load_field, random_field, save_field, save_points_csv


@pytest.fixture()
def workdir(tmp_path):
    f = random_field(2, 1, 8, seed=11)
    save_field(f, tmp_path / "f.json")
    rng = np.random.default_rng(5)
    from whitney.extension import oracle_for
    oracle = oracle_for(f)
    pts = []
    while len(pts) < 4:
        c = rng.random(2)
        if 0.05 < oracle.delta(c)[0] <= 0.5:
            pts.append(c)
    save_points_csv(np.array(pts), tmp_path / "p.csv")
    save_points_csv(np.array([[0.0, 0.0]]), tmp_path / "E.csv")
    return tmp_path


def run(args):
    return main([str(a) for a in args])


def test_extend_averaged_columns(workdir):
    out = workdir / "v.csv"
    code = run(["extend", "--field", workdir / "f.json", "--points",
                workdir / "p.csv", "--m", "1", "--mode", "averaged",
                "--samples", "16", "--seed", "42", "--alpha-max", "1",
                "--out", out])
    assert code == 0
    rows = list(csv.DictReader(open(out)))
    assert set(rows[0]) == {"x0", "x1", "alpha_index", "value", "n_samples",
                            "seed", "std_error"}
    assert len(rows) == 4 * 3      # four points, alpha orders 0..1 -> 3 indices


def test_extend_deterministic_bytes(workdir):
    a, b = workdir / "a.csv", workdir / "b.csv"
    args = ["extend", "--field", workdir / "f.json", "--points", workdir / "p.csv",
            "--m", "1", "--mode", "averaged", "--samples", "8", "--seed", "9"]
    assert run(args + ["--out", a]) == 0
    assert run(args + ["--out", b]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_classical_equals_degenerate_average(workdir):
    out = workdir / "c.csv"
    assert run(["extend", "--field", workdir / "f.json", "--points",
                workdir / "p.csv", "--m", "1", "--mode", "classical",
                "--samples", "1", "--origin", "0", "--alpha-max", "1",
                "--out", out]) == 0
    f = load_field(workdir / "f.json")
    cfg = ExtensionConfig(m=1, t=0.125)
    alphas = [(0, 0), (0, 1), (1, 0)]
    for row in csv.DictReader(open(out)):
        x = np.array([float(row["x0"]), float(row["x1"])])
        alpha = alphas[int(row["alpha_index"])]
        plan = AveragingPlan(1, seed=0, b_samples=np.zeros((1, 2)))
        mean, se = averaged_extension(f, x, alpha, plan, cfg)
        assert repr(float(mean)) == row["value"]
        assert se == 0.0


def test_restrict_writes_field(workdir):
    out = workdir / "rf.json"
    assert run(["restrict", "--set", workdir / "p.csv", "--m", "2",
                "--function", "sines", "--out", out]) == 0
    payload = json.loads(out.read_text())
    assert payload["m"] == 2 and payload["n"] == 2
    assert len(payload["points"][0]["coeffs"]) == 6


def test_decompose_dumps_unit_cube_analogue(workdir):
    out = workdir / "cubes.json"
    assert run(["decompose", "--set", workdir / "E.csv", "--box", "0,0,4,4",
                "--out", out]) == 0
    cubes = json.loads(out.read_text())
    assert {"level": 0, "anchor": [1, 1],
            "dist_to_E": pytest.approx(np.sqrt(2.0))} in [
        {"level": c["level"], "anchor": c["anchor"],
         "dist_to_E": c["dist_to_E"]} for c in cubes]
    # deterministic ordering by (level, anchor)
    keys = [(c["level"], tuple(c["anchor"])) for c in cubes]
    assert keys == sorted(keys)


def test_decompose_box_validation(workdir, capsys):
    code = run(["decompose", "--set", workdir / "E.csv", "--box", "0,0,4",
                "--out", workdir / "x.json"])
    assert code == 1
    assert "E:cli:box_shape" in capsys.readouterr().err


def test_verify_exit_codes(workdir):
    assert run(["verify", "--suite", "jets", "--n", "2", "--m", "1",
                "--seed", "7"]) == 0
    assert run(["verify", "--suite", "bogus"]) == 1


def test_bench_norms_outputs(workdir):
    out = workdir / "rep.csv"
    code = run(["bench-norms", "--n", "2", "--m", "1", "--samples", "8",
                "--probes", "3", "--seed", "3", "--study", "both",
                "--out", out])
    assert code in (0, 2)      # gates may be noisy at this tiny scale
    assert out.exists()
    assert (workdir / "rep_growth.png").exists()
    assert (workdir / "rep_restriction.png").exists()
    assert (workdir / "rep_classical_corner.dat").exists()
    text = out.read_text()
    assert text.startswith("# gate 1_multinomial_identity")


def test_bench_norms_deterministic(workdir):
    args = ["bench-norms", "--n", "2", "--m", "1", "--samples", "8",
            "--probes", "3", "--seed", "3", "--study", "restriction"]
    d1, d2 = workdir / "r1", workdir / "r2"
    d1.mkdir(); d2.mkdir()
    run(args + ["--out", d1 / "rep.csv"])
    run(args + ["--out", d2 / "rep.csv"])
    assert (d1 / "rep.csv").read_bytes() == (d2 / "rep.csv").read_bytes()
    assert (d1 / "rep_restriction.png").read_bytes() == (d2 / "rep_restriction.png").read_bytes()


def test_error_prefix_on_bad_field(workdir, capsys):
    bad = workdir / "bad.json"
    bad.write_text("{\"n\": 2}")
    code = run(["extend", "--field", bad, "--points", workdir / "p.csv",
                "--m", "1", "--out", workdir / "v.csv"])
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("E:fields:")
