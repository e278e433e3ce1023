"""Experiment drivers: dimension-growth studies, invariant suites, reports.

The headline diagnostic compares two operators across the dimension n: the
fixed-t single-origin operator probed at cube corners (where up to ~2^n
cutoff supports overlap and the proof-side lattice weights peak) versus the
origin-averaged operator with t = 1/n.  Slopes of log sup versus log n are
the reproducible signal; absolute constants depend on the chosen step
profile and are fitted, never asserted as universal.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .averaging import (AveragingPlan, averaged_extension, avg_psi_power,
                        extension_origin_values, period_at)
from .cubes import DistanceOracle, whitney_cube_at, support_cubes
from .cutoff import CutoffParams, psi_array, theta1_deriv, lattice_theta1_sum
from .errors import GuardError, ValidationError
from .extension import (ExtensionConfig, build_frame, default_t,
                        eval_extension, eval_extension_deriv, oracle_for,
                        partition_derivative_sum, psi_bracket)
from .fields import (SmoothTestFunction, WhitneyField, adversarial_field,
                     cm_norm, random_field, restrict)
from .jets import (Jet, diff_jet, eval_jet, index_of, multi_indices,
                   recenter_jet, sum_reciprocal_factorials)

# ---------------------------------------------------------------------------
# report rows

REPORT_COLUMNS = ("n", "m", "t", "operator", "alpha_order", "probe_kind",
                  "sup_value", "fitted_exponent", "n_samples", "seed",
                  "runtime_s")

# acceptance gate -> (suite, check) implementing it; emitted in report headers
ACCEPTANCE_MAP = {
    "1_multinomial_identity": ("jets", "sum_reciprocal_factorials"),
    "2_partition_of_unity": ("extension", "partition_of_unity"),
    "3_cube_geometry": ("cubes", "geometry_brackets"),
    "4_derivative_oracle": ("extension", "derivative_fd_oracle"),
    "5_jet_reproduction": ("extension", "jet_reproduction"),
    "6_averaging_bound": ("averaging", "psi_moment_bound"),
    "7_periodicity": ("averaging", "periodicity"),
    "8_interchange": ("averaging", "derivative_interchange"),
    "9_norm_growth": ("harness", "norm_growth_slopes"),
    "10_restriction_norm": ("harness", "restriction_norm_slope"),
    "11_determinism": ("harness", "report_determinism"),
}


@dataclass(frozen=True)
class ReportRow:
    n: int
    m: int
    t: float
    operator: str            # classical | averaged | restriction
    alpha_order: int
    probe_kind: str          # interior | corner | approach | set
    sup_value: float
    fitted_exponent: float | None
    n_samples: int
    seed: int
    runtime_s: float | None = None


@dataclass
class ExperimentReport:
    rows: list[ReportRow] = dc_field(default_factory=list)

    def to_csv(self, include_runtime: bool = False) -> str:
        """Canonical CSV; wall-clock runtimes are volatile and are omitted by
        default so files reproduce byte-identically for a fixed seed."""
        buf = io.StringIO()
        for key, (suite, check) in ACCEPTANCE_MAP.items():
            buf.write(f"# gate {key} -> suite {suite}, check {check}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in self.rows:
            w.writerow([
                r.n, r.m, repr(float(r.t)), r.operator, r.alpha_order, r.probe_kind,
                repr(float(r.sup_value)),
                "" if r.fitted_exponent is None else repr(float(r.fitted_exponent)),
                r.n_samples, r.seed,
                "" if (r.runtime_s is None or not include_runtime) else repr(float(r.runtime_s)),
            ])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ExperimentReport":
        rows = []
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        reader = csv.reader(lines)
        header = next(reader)
        if tuple(header) != REPORT_COLUMNS:
            raise ValidationError("harness", "csv_schema", f"unexpected header {header}")
        for rec in reader:
            rows.append(ReportRow(
                int(rec[0]), int(rec[1]), float(rec[2]), rec[3], int(rec[4]),
                rec[5], float(rec[6]),
                None if rec[7] == "" else float(rec[7]),
                int(rec[8]), int(rec[9]),
                None if rec[10] == "" else float(rec[10])))
        return cls(rows)

    def curve(self, operator: str, probe_kind: str | None = None
              ) -> tuple[np.ndarray, np.ndarray]:
        """(n values, sup over rows grouped per n) for one operator."""
        per_n: dict[int, float] = {}
        for r in self.rows:
            if r.operator != operator:
                continue
            if probe_kind is not None and r.probe_kind != probe_kind:
                continue
            per_n[r.n] = max(per_n.get(r.n, 0.0), r.sup_value)
        ns = sorted(per_n)
        return np.array(ns, dtype=float), np.array([per_n[k] for k in ns])


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y against log x (needs >= 2 points)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = (xs > 0) & (ys > 0)
    if np.count_nonzero(keep) < 2:
        raise ValidationError("harness", "fit_points", "need >= 2 positive points")
    return float(np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)[0])


# ---------------------------------------------------------------------------
# probe generators

def interior_probes(oracle: DistanceOracle, rng: np.random.Generator,
                    count: int, d_max: float = 0.5, d_min: float = 1e-3,
                    box=(0.0, 1.0)) -> np.ndarray:
    """Random points of the complement with delta(x) in (d_min, d_max]."""
    out = []
    attempts = 0
    while len(out) < count:
        x = box[0] + (box[1] - box[0]) * rng.random(oracle.n)
        d, _ = oracle.delta(x)
        if d_min < d <= d_max:
            out.append(x)
        attempts += 1
        if attempts > 2000 * count:
            raise ValidationError("harness", "probe_generation",
                                  f"could not draw {count} interior probes")
    return np.array(out)


def corner_probes(oracle: DistanceOracle, rng: np.random.Generator,
                  count: int, t: float, d_max: float = 0.5,
                  d_min: float = 1e-6, depth=(0.0, 0.5),
                  box=(0.35, 0.65)) -> np.ndarray:
    """Points within t*s of a full corner of an origin-0 Whitney cube.

    Every coordinate lands near the cube's own dyadic lattice, which is where
    the per-coordinate cutoff transitions pile up multiplicatively.  ``depth``
    brackets the per-coordinate offset as a fraction of t*s; pinning it near
    0.5 parks each coordinate where the step derivative peaks, which removes
    the dominant per-probe variance from sup estimates.
    """
    out = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 5000 * count:
            raise ValidationError("harness", "probe_generation",
                                  f"could not draw {count} corner probes")
        z = box[0] + (box[1] - box[0]) * rng.random(oracle.n)
        d, _ = oracle.delta(z)
        if not max(d_min, 1e-3) < d <= d_max:
            continue
        cube = whitney_cube_at(oracle, z)
        corner = cube.lower + cube.side * rng.integers(0, 2, size=oracle.n)
        sgn = rng.choice([-1.0, 1.0], size=oracle.n)
        mag = depth[0] + (depth[1] - depth[0]) * rng.random(oracle.n)
        x = corner + cube.side * t * sgn * mag
        d, _ = oracle.delta(x)
        if not d_min < d <= d_max:
            continue
        own = whitney_cube_at(oracle, x)
        u = (x - np.asarray(own.origin)) / own.side
        if np.all(np.abs(u - np.round(u)) <= t):
            out.append(x)
    return np.array(out)


def approach_sequence(a: np.ndarray, direction: np.ndarray,
                      j_range=range(3, 13)) -> np.ndarray:
    """x_j = a + 2^-j * unit direction."""
    u = direction / np.linalg.norm(direction)
    return np.array([a + 2.0 ** (-j) * u for j in j_range])


def basin_sequence(f: WhitneyField, rng: np.random.Generator,
                   j_range=range(3, 13), tries: int = 25):
    """(anchor index, sequence, distances) approaching an E point from outside.

    The anchor is extremal in a random outward direction, so it stays the
    nearest point of E along the whole sequence and the jet-reproduction
    estimate is exercised in its meaningful regime (verified, retried on
    failure).
    """
    oracle = oracle_for(f)
    for _ in range(tries):
        v = rng.standard_normal(f.n)
        v /= np.linalg.norm(v)
        ai = int(np.argmax(f.points @ v))
        a = f.points[ai]
        seq = approach_sequence(a, v, j_range)
        if all(oracle.delta(x)[1] == ai for x in seq):
            return ai, seq, np.linalg.norm(seq - a, axis=1)
    raise ValidationError("harness", "basin_sequence",
                          "no outward approach direction found")


def mixed_anchor_sequence(f: WhitneyField, rng: np.random.Generator,
                          j_range=range(3, 13)):
    """Approach one point of the closest pair of E with a component toward
    its partner, so covering cubes keep drawing anchors from both points of
    the pair for as long as the scales allow.

    The jet reproduction estimate compares against the target's jet whether
    or not the target stays nearest, so no basin condition is imposed.
    Returns (anchor index, sequence, distances to the target).
    """
    pts = f.points
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    np.fill_diagonal(d2, np.inf)
    ai, bi = np.unravel_index(int(np.argmin(d2)), d2.shape)
    a = pts[int(ai)]
    axis = pts[int(bi)] - a
    axis = axis / np.linalg.norm(axis)
    if f.n == 1:
        v = axis
    else:
        w = rng.standard_normal(f.n)
        w -= (w @ axis) * axis
        nrm = np.linalg.norm(w)
        v = axis if nrm < 1e-9 else (w / nrm + 0.45 * axis)
        v /= np.linalg.norm(v)
    seq = approach_sequence(a, v, j_range)
    return int(ai), seq, np.linalg.norm(seq - a, axis=1)


# ---------------------------------------------------------------------------
# finite-difference oracle for extension derivatives

# central difference stencils of fourth-order accuracy; exact on polynomials
# of degree <= order + 3, which covers every flat-zone jet blend
_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
    2: ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
    3: ((-3, -2, -1, 1, 2, 3), (1 / 8, -8 / 8, 13 / 8, -13 / 8, 8 / 8, -1 / 8)),
    4: ((-3, -2, -1, 0, 1, 2, 3),
        (-1 / 6, 12 / 6, -39 / 6, 56 / 6, -39 / 6, 12 / 6, -1 / 6)),
}

# transition-zone step as a fraction of t * s, per total derivative order;
# balances stencil truncation against roundoff amplification 1/h^order
_FD_STEP_FACTOR = {1: 2e-4, 2: 4e-3, 3: 5e-3, 4: 1e-2}

# smallest step (absolute units, unit-norm fields) for which eps / h^order
# roundoff stays well under the gate when the derivative scale is O(1)
_FD_ROUNDOFF_FLOOR = {1: 3e-7, 2: 2e-5, 3: 1.5e-3, 4: 8e-3}


def _zone_clearance(u: float, t: float) -> float:
    """Distance from cube coordinate u to the transitions [-t,0] and [1,1+t]."""
    if -t <= u <= 0.0 or 1.0 <= u <= 1.0 + t:
        return 0.0
    gaps = [abs(u - v) for v in (-t, 0.0, 1.0, 1.0 + t)]
    return min(gaps)


def _stencil_cubes(f: WhitneyField, x, cfg: ExtensionConfig, dims,
                   halfwidth: float, origin=None) -> list:
    """Covering cubes of every point in the stencil box x +- halfwidth.

    Collected from the frames at x and at every box corner; the box is much
    smaller than any cube side, so a cube meeting its interior necessarily
    covers one of those corners.
    """
    x = np.asarray(x, dtype=float)
    oracle = oracle_for(f)
    b = cfg.origin_for(f.n) if origin is None else np.asarray(origin, dtype=float)
    t = cfg.t_for(f.n)
    corners = [x]
    for signs in np.ndindex(*(2,) * len(dims)):
        p = x.copy()
        for d, sg in zip(dims, signs):
            p[d] += halfwidth if sg else -halfwidth
        corners.append(p)
    seen: dict[tuple, object] = {}
    for p in corners:
        for h in support_cubes(oracle, p, b, t):
            seen[(h.cube.level, h.cube.anchor)] = h
    return list(seen.values())


def stencil_flat_margin(f: WhitneyField, x, cfg: ExtensionConfig, dims,
                        halfwidth: float, origin=None) -> float:
    """Smallest clearance (absolute units) from x to a cutoff transition of
    any cube whose support meets the stencil box x +- halfwidth along dims."""
    x = np.asarray(x, dtype=float)
    t = cfg.t_for(f.n)
    margin = math.inf
    for h in _stencil_cubes(f, x, cfg, dims, halfwidth, origin):
        s = h.cube.side
        lower = h.cube.lower
        for d in dims:
            u = (float(x[d]) - float(lower[d])) / s
            margin = min(margin, s * _zone_clearance(u, t))
    return margin


def fd_extension_deriv(f: WhitneyField, x, alpha, cfg: ExtensionConfig,
                       steps) -> float:
    """Tensor-product central differences with one step per coordinate."""
    x = np.asarray(x, dtype=float)
    alpha = tuple(int(a) for a in alpha)
    steps = np.broadcast_to(np.asarray(steps, dtype=float), (len(alpha),))
    grids = [_STENCILS[a] for a in alpha]
    total = 0.0
    offsets = [()]
    for offs, _ in grids:
        offsets = [o + (q,) for o in offsets for q in offs]
    for off in offsets:
        coeff = 1.0
        for (offs, ws), q in zip(grids, off):
            coeff *= ws[offs.index(q)]
        if coeff == 0.0:
            continue
        pt = x + steps * np.asarray(off, dtype=float)
        total += coeff * eval_extension(f, pt, cfg)
    scale = 1.0
    for h, a in zip(steps, alpha):
        scale *= h ** a
    return total / scale


def fd_oracle_check(f: WhitneyField, x, alpha, cfg: ExtensionConfig,
                    tol: float) -> tuple[bool, float, float]:
    """Compare the analytic derivative with a step-tuned central difference.

    Inside cutoff transition zones the step is a small fraction of t*s; in
    locally flat zones the extension restricted to the stencil is a
    polynomial of degree <= m, so a large step inside the flat margin is
    exact up to roundoff.  The error is scaled against the largest analytic
    value within a quarter transition width of x (floor 1): transition
    derivatives swing through zero on that scale, and comparing against the
    local envelope keeps crossings from masquerading as failures.

    Returns (passed, scaled_error, analytic_value).
    """
    x = np.asarray(x, dtype=float)
    alpha = tuple(int(a) for a in alpha)
    an = eval_extension_deriv(f, x, alpha, cfg)
    ks = [k for k, a in enumerate(alpha) if a > 0]
    if not ks:
        return True, 0.0, an
    frame = build_frame(f, x, cfg, kmax=0)
    s_min = min(h.cube.side for h in frame.cubes)
    t = cfg.t_for(f.n)
    box = _stencil_cubes(f, x, cfg, ks, 0.2 * s_min)
    margins = np.full(f.n, math.inf)
    for h in box:
        s = h.cube.side
        lower = h.cube.lower
        for d in ks:
            u = (float(x[d]) - float(lower[d])) / s
            margins[d] = min(margins[d], s * _zone_clearance(u, t))
    # one shared untruncated anchor makes the blend that anchor's polynomial
    # on the whole box, whatever the cutoffs do
    single_anchor = (len({h.anchor_index for h in box}) == 1
                     and all(h.dist_to_E <= cfg.truncation for h in box))
    order = sum(alpha)
    h_trans = _FD_STEP_FACTOR[min(order, 4)] * t * s_min
    steps = np.zeros(f.n)
    zone: list[int] = []
    for d in ks:
        reach_d = max(abs(q) for q in _STENCILS[alpha[d]][0])
        flat_d = min(0.45 * margins[d] / reach_d, 0.05 * s_min)
        if single_anchor:
            steps[d] = 0.05 * s_min
        elif flat_d >= max(_FD_ROUNDOFF_FLOOR[min(order, 4)], h_trans):
            steps[d] = flat_d
        else:
            steps[d] = h_trans
            zone.append(d)
    steps[steps == 0.0] = 1.0           # unused coordinates
    if zone and order >= 2:
        # pick the step scale by internal agreement of neighbouring rungs:
        # roundoff noise prefers coarse steps, live-zone truncation fine ones
        cands = []
        for mult in (1.0, 4.0, 16.0):
            trial = steps.copy()
            trial[zone] *= mult
            cands.append(fd_extension_deriv(f, x, alpha, cfg, trial))
        fd = cands[0] if abs(cands[0] - cands[1]) <= abs(cands[1] - cands[2]) else cands[1]
    else:
        fd = fd_extension_deriv(f, x, alpha, cfg, steps)
    scale = abs(an)
    for mode in ("stencil", "zone"):
        for sign in (-1.0, 1.0):
            probe = x.copy()
            for d in ks:
                reach_d = max(abs(q) for q in _STENCILS[alpha[d]][0])
                if mode == "stencil":
                    off = steps[d] * reach_d
                else:
                    off = min(margins[d], 0.2 * s_min) + 0.25 * t * s_min
                probe[d] += sign * off
            try:
                scale = max(scale, abs(eval_extension_deriv(f, probe, alpha, cfg)))
            except (ValidationError, GuardError):
                pass
    err = abs(fd - an) / max(scale, 1.0)
    return err <= tol, err, an


# ---------------------------------------------------------------------------
# experiment drivers

def _sup_classical(f: WhitneyField, probes: np.ndarray, m: int,
                   cfg: ExtensionConfig) -> dict[int, float]:
    """Per derivative order, sup over probes and |alpha| = order."""
    sups = {k: 0.0 for k in range(m + 1)}
    idx = multi_indices(f.n, m)
    for x in probes:
        frame = build_frame(f, x, cfg, kmax=m)
        for alpha in idx:
            v = eval_extension_deriv(f, x, alpha, cfg, frame=frame)
            k = sum(alpha)
            sups[k] = max(sups[k], abs(v))
    return sups


def _sup_averaged(f: WhitneyField, probes: np.ndarray, m: int,
                  cfg: ExtensionConfig, plan: AveragingPlan) -> dict[int, float]:
    sups = {k: 0.0 for k in range(m + 1)}
    idx = multi_indices(f.n, m)
    for x in probes:
        origins = plan.origins(x, f, cfg)
        means = {alpha: 0.0 for alpha in idx}
        for b in origins:
            frame = build_frame(f, x, cfg, kmax=m, origin=b)
            for alpha in idx:
                means[alpha] += eval_extension_deriv(f, x, alpha, cfg, frame=frame)
        for alpha in idx:
            k = sum(alpha)
            sups[k] = max(sups[k], abs(means[alpha] / len(origins)))
    return sups


def norm_growth_study(n_range, m: int, field_family: str = "both",
                      probes_per_kind: int = 12, n_samples: int = 96,
                      seed: int = 0, t_classical: float = 0.125,
                      random_set_size: int = 30,
                      corner_band=(1e-3, 0.5)) -> ExperimentReport:
    """Probe sup of |d^a F| for both operators across dimensions.

    The averaged operator runs at t = 1/n (clamped under 1/4); the classical
    baseline keeps t fixed so the corner mechanism stays dimension-coupled.
    Corner probes sit at peak transition depth inside a pinned distance band
    so the sup curves track the dimension rather than probe-placement luck.
    """
    report = ExperimentReport()
    for n in n_range:
        t_start = time.perf_counter()
        fields = []
        if field_family in ("adversarial", "both"):
            fields.append(("adversarial", adversarial_field(n, m, seed + 7 * n)))
        if field_family in ("random", "both"):
            size = min(random_set_size, 4 + 5 * (n - 1))
            fields.append(("random", random_field(n, m, size, seed + 7 * n + 1)))
        cfg_cl = ExtensionConfig(m=m, t=t_classical)
        cfg_av = ExtensionConfig(m=m, t=default_t(n))
        plan = AveragingPlan(n_samples, seed + 13 * n)
        sup_by = {("classical", "interior"): {}, ("classical", "corner"): {},
                  ("averaged", "interior"): {}, ("averaged", "corner"): {}}
        for kind_i, (fam, f) in enumerate(fields):
            rng = np.random.default_rng(seed + 101 * n + kind_i)
            oracle = oracle_for(f)
            probe_sets = {
                "interior": interior_probes(oracle, rng, probes_per_kind,
                                            d_min=0.05),
                "corner": corner_probes(oracle, rng, probes_per_kind,
                                        t_classical, d_min=corner_band[0],
                                        d_max=corner_band[1],
                                        depth=(0.45, 0.5)),
            }
            for kind, probes in probe_sets.items():
                for op, sups in (("classical", _sup_classical(f, probes, m, cfg_cl)),
                                 ("averaged", _sup_averaged(f, probes, m, cfg_av, plan))):
                    tgt = sup_by[(op, kind)]
                    for k, v in sups.items():
                        tgt[k] = max(tgt.get(k, 0.0), v)
        elapsed = time.perf_counter() - t_start
        for (op, kind), sups in sup_by.items():
            t_used = t_classical if op == "classical" else default_t(n)
            for k, v in sorted(sups.items()):
                report.rows.append(ReportRow(
                    n, m, t_used, op, k, kind, v, None,
                    n_samples if op == "averaged" else 1, seed, elapsed))
    # fit one exponent per (operator, probe kind) on the max over orders
    for op in ("classical", "averaged"):
        for kind in ("interior", "corner"):
            ns, sups = ExperimentReport(
                [r for r in report.rows if r.operator == op and r.probe_kind == kind]
            ).curve(op, kind)
            if len(ns) >= 2 and np.all(sups > 0):
                slope = fit_loglog_slope(ns, sups)
                report.rows = [
                    replace(r, fitted_exponent=slope)
                    if r.operator == op and r.probe_kind == kind else r
                    for r in report.rows]
    return report


def restriction_norm_study(func: SmoothTestFunction | None, m: int, n_range,
                           seed: int = 0, sets_per_n: int = 3,
                           set_size: int = 28) -> ExperimentReport:
    """cm_norm of the restriction of a unit-norm function across dimensions."""
    report = ExperimentReport()
    for n in n_range:
        t_start = time.perf_counter()
        fn = func if func is not None and func.n == n else SmoothTestFunction(
            "sines", n, omega=1.0)
        rng = np.random.default_rng(seed + 31 * n)
        worst = 0.0
        for _ in range(sets_per_n):
            pts = rng.random((set_size, n))
            worst = max(worst, cm_norm(restrict(fn, pts, m)))
        report.rows.append(ReportRow(
            n, m, 0.0, "restriction", m, "set", worst, None, sets_per_n, seed,
            time.perf_counter() - t_start))
    ns, sups = report.curve("restriction")
    if len(ns) >= 2:
        slope = fit_loglog_slope(ns, sups)
        report.rows = [replace(r, fitted_exponent=slope) for r in report.rows]
    return report

# ---------------------------------------------------------------------------
# invariant suites

@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


@dataclass
class SuiteReport:
    checks: list[CheckResult] = dc_field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [f"# gate {k} -> suite {s}, check {c}"
               for k, (s, c) in ACCEPTANCE_MAP.items()]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            out.append(f"{status} {c.suite}.{c.name} measured={c.measured:.6g} "
                       f"tolerance={c.tolerance:.6g}{' ' + c.detail if c.detail else ''}")
        return out


@dataclass(frozen=True)
class SuiteConfig:
    """Scale knobs for the invariant suites (desk-scale defaults)."""

    n: int = 2
    m: int = 1
    n_samples: int = 1024
    probes: int = 60


def _suite_jets(cfg: SuiteConfig, seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    checks = []
    # multinomial identity, exact rationals
    from fractions import Fraction
    ok = all(sum_reciprocal_factorials(n, r) == Fraction(n ** r, math.factorial(r))
             for n in range(1, 9) for r in range(7))
    checks.append(CheckResult("jets", "sum_reciprocal_factorials", ok,
                              0.0 if ok else 1.0, 0.0, "n<=8, r<=6 exact"))
    # graded-lex round trip
    ok = True
    for n in range(1, 11):
        for m in range(0, 7):
            idx = multi_indices(n, m)
            ok = ok and all(index_of(a, m) == i for i, a in enumerate(idx))
            ok = ok and len(set(idx)) == math.comb(n + m, m)
    checks.append(CheckResult("jets", "graded_lex_roundtrip", ok,
                              0.0 if ok else 1.0, 0.0, "n<=10, m<=6"))
    # Leibniz consistency on integer-coefficient jets (exact float products)
    n, m = cfg.n, min(cfg.m + 1, 4)
    idx = multi_indices(n, m)
    coeffs = tuple(float(c) for c in rng.integers(-9, 10, size=len(idx)))
    base = tuple(float(v) for v in rng.integers(-3, 4, size=n))
    jet = Jet(base, m, coeffs)
    ok = True
    for alpha in multi_indices(n, m):
        for beta in multi_indices(n, m - sum(alpha)):
            ab = tuple(a + b for a, b in zip(alpha, beta))
            j1 = diff_jet(diff_jet(jet, alpha), beta)
            j2 = diff_jet(jet, ab)
            ok = ok and j1.coeffs == j2.coeffs and j1.m == j2.m
    checks.append(CheckResult("jets", "leibniz_consistency", ok,
                              0.0 if ok else 1.0, 0.0, "integer jets, exact"))
    # recentering: group action + evaluation agreement
    jet = Jet(tuple(rng.random(n)), m, tuple(rng.standard_normal(len(idx))))
    b1, b2 = rng.random(n), rng.random(n)
    two_step = recenter_jet(recenter_jet(jet, b1), b2)
    one_step = recenter_jet(jet, b2)
    err = max(abs(a - b) for a, b in zip(two_step.coeffs, one_step.coeffs))
    xs = rng.random((20, n))
    err_eval = max(abs(eval_jet(recenter_jet(jet, b1), x) - eval_jet(jet, x))
                   for x in xs)
    worst = max(err, err_eval)
    checks.append(CheckResult("jets", "recenter_group_action", worst <= 1e-10,
                              worst, 1e-10))
    return checks


def _field_linear_comb(a: float, f: WhitneyField, b: float, g: WhitneyField) -> WhitneyField:
    jets = tuple(Jet(jf.base, jf.m,
                     tuple(a * cf + b * cg for cf, cg in zip(jf.coeffs, jg.coeffs)))
                 for jf, jg in zip(f.jets, g.jets))
    return WhitneyField(f.n, f.m, f.points.copy(), jets)


class _ComboFunction:
    """a*F + b*G with exact derivatives, for linearity checks."""

    def __init__(self, a, F, b, G):
        self.a, self.F, self.b, self.G = a, F, b, G
        self.n = F.n

    def deriv(self, alpha, x):
        return self.a * self.F.deriv(alpha, x) + self.b * self.G.deriv(alpha, x)


def _suite_fields(cfg: SuiteConfig, seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    checks = []
    n, m = cfg.n, cfg.m
    f = random_field(n, m, 8, seed + 1)
    g = random_field(n, m, 8, seed + 1)     # same seed -> same points
    g = _field_linear_comb(0.0, g, 1.0, random_rejets(g, seed + 2))
    lam = 2.75
    err = abs(cm_norm(f.scaled(lam)) - lam * cm_norm(f))
    checks.append(CheckResult("fields", "norm_homogeneity", err <= 1e-10, err, 1e-10))
    s = cm_norm(_field_linear_comb(1.0, f, 1.0, g))
    bound = cm_norm(f) + cm_norm(g) + 1e-10
    checks.append(CheckResult("fields", "norm_subadditive", s <= bound, s, bound))
    # restriction linearity, coefficient-exact with dyadic weights
    F = SmoothTestFunction("sines", n, omega=1.0)
    G = SmoothTestFunction("gaussian", n, center=[0.3] * n, width=0.8)
    pts = rng.random((6, n))
    combo = restrict(_ComboFunction(0.5, F, 0.25, G), pts, m)
    manual = _field_linear_comb(0.5, restrict(F, pts, m), 0.25, restrict(G, pts, m))
    err = max(abs(a - b) for jc, jm in zip(combo.jets, manual.jets)
              for a, b in zip(jc.coeffs, jm.coeffs))
    checks.append(CheckResult("fields", "restrict_linear", err == 0.0, err, 0.0,
                              "dyadic weights, exact"))
    # closed-form derivatives of the built-ins vs central differences
    worst = 0.0
    for fn in (F, G):
        for _ in range(10):
            x = rng.random(n)
            for i in range(n):
                alpha = tuple(1 if j == i else 0 for j in range(n))
                e = np.zeros(n); e[i] = 1e-4
                fd = (fn.deriv((0,) * n, x + e) - fn.deriv((0,) * n, x - e)) / 2e-4
                an = fn.deriv(alpha, x)
                worst = max(worst, abs(fd - an) / max(abs(an), 1.0))
    checks.append(CheckResult("fields", "testfunc_deriv_fd", worst <= 1e-8,
                              worst, 1e-8, "step 1e-4"))
    # generator determinism and normalization
    f1 = random_field(n, m, 10, seed + 5)
    f2 = random_field(n, m, 10, seed + 5)
    same = np.array_equal(f1.points, f2.points) and all(
        j1.coeffs == j2.coeffs for j1, j2 in zip(f1.jets, f2.jets))
    nrm = abs(cm_norm(f1) - 1.0)
    adv = abs(cm_norm(adversarial_field(n, m, seed + 6)) - 1.0)
    checks.append(CheckResult("fields", "generator_determinism", same,
                              0.0 if same else 1.0, 0.0))
    worst = max(nrm, adv)
    checks.append(CheckResult("fields", "generator_unit_norm", worst <= 1e-12,
                              worst, 1e-12))
    return checks


def random_rejets(f: WhitneyField, seed: int) -> WhitneyField:
    """Fresh random jets over the same points (helper for suite checks)."""
    rng = np.random.default_rng(seed)
    jets = tuple(Jet(j.base, j.m, tuple(rng.standard_normal(len(j.coeffs))))
                 for j in f.jets)
    return WhitneyField(f.n, f.m, f.points.copy(), jets)


def _suite_cutoff(cfg: SuiteConfig, seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    checks = []
    params = CutoffParams(min(default_t(cfg.n), 0.2))
    t = params.t
    K = min(cfg.m + 2, 6)
    # partition generator: sum_k theta(x - k) >= 1, == 1 away from lattice
    xs = rng.uniform(-3, 3, 400)
    worst_low, worst_eq = 0.0, 0.0
    for x in xs:
        s = sum(theta1_deriv(x - k, 0, params) for k in range(math.floor(x) - 2,
                                                             math.ceil(x) + 3))
        worst_low = max(worst_low, 1.0 - s)
        if abs(x - round(x)) > t:
            worst_eq = max(worst_eq, abs(s - 1.0))
    checks.append(CheckResult("cutoff", "partition_generator",
                              worst_low <= 1e-12 and worst_eq <= 1e-12,
                              max(worst_low, worst_eq), 1e-12))
    # derivative continuity across the five-piece breakpoints
    eps = 1e-9
    worst = 0.0
    for brk in (-t, 0.0, 1.0, 1.0 + t):
        for j in range(K + 1):
            a = theta1_deriv(brk - eps, j, params)
            b = theta1_deriv(brk + eps, j, params)
            worst = max(worst, abs(a - b))
    checks.append(CheckResult("cutoff", "breakpoint_continuity", worst <= 1e-7,
                              worst, 1e-7))
    # one-dimensional lattice estimate with c_j = 2 sup |sigma^(j)|
    probe = np.linspace(-2.0, 2.0, 1000)
    ok = True
    margin = 0.0
    for j in range(K + 1):
        c_j = 2.0 * params.sigma.sup_deriv(j)
        for x in probe:
            lhs = lattice_theta1_sum(float(x), j, params)
            rhs = c_j * t ** (-j) * (psi_array(np.array([x]), t)[0] + 1.0)
            margin = max(margin, lhs - rhs)
            ok = ok and lhs <= rhs + 1e-9
    checks.append(CheckResult("cutoff", "lattice_sum_estimate", ok, margin, 0.0,
                              f"j<={K}, 1000-point grid"))
    # tensorization vs 2-d finite differences
    from .cutoff import theta_n_deriv
    worst = 0.0
    for _ in range(25):
        x = rng.uniform(-0.5, 1.5, 2)
        an = theta_n_deriv(x, (1, 1), params)
        h = 1e-5
        vals = []
        for sx in (1, -1):
            for sy in (1, -1):
                p = x + h * np.array([sx, sy])
                vals.append(sx * sy * theta1_deriv(p[0], 0, params)
                            * theta1_deriv(p[1], 0, params))
        fd = sum(vals) / (4 * h * h)
        worst = max(worst, abs(fd - an) / max(abs(an), 1.0))
    checks.append(CheckResult("cutoff", "tensorization_fd", worst <= 1e-5,
                              worst, 1e-5))
    return checks


def _suite_cubes(cfg: SuiteConfig, seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    checks = []
    n = cfg.n
    f = random_field(n, cfg.m, 10, seed + 3)
    oracle = oracle_for(f)
    t = min(default_t(n), 0.2)
    probes = interior_probes(oracle, rng, cfg.probes)
    sound, bracket_ok, ratio_ok = True, True, True
    worst_ratio = 0.0
    cubes_seen = []
    for x in probes:
        own = whitney_cube_at(oracle, x)
        d = oracle.box_dist(own.lower, own.upper)[0]
        sound = sound and own.diam <= d <= 4.0 * own.diam
        cubes_seen.append(own)
        hits = support_cubes(oracle, x, None, t)
        dd = oracle.delta(x)[0]
        for h in hits:
            sound = sound and h.cube.diam <= h.dist_to_E <= 4.0 * h.cube.diam
            r = dd / (h.cube.side * math.sqrt(n))
            bracket_ok = bracket_ok and 0.5 <= r <= 5.5
        for a in hits:
            for b in hits:
                q = a.cube.side / b.cube.side
                worst_ratio = max(worst_ratio, q)
                ratio_ok = ratio_ok and 0.25 <= q <= 4.0
    checks.append(CheckResult("cubes", "selection_soundness", sound,
                              0.0 if sound else 1.0, 0.0, "diam<=dist<=4diam"))
    checks.append(CheckResult("cubes", "geometry_brackets",
                              bracket_ok and ratio_ok, worst_ratio, 4.0,
                              "side ratios and delta bracket"))
    # disjointness of distinct selected cubes
    ok = True
    for i in range(len(cubes_seen)):
        for j in range(i + 1, len(cubes_seen)):
            a, b = cubes_seen[i], cubes_seen[j]
            if (a.level, a.anchor) == (b.level, b.anchor):
                continue
            lo = np.maximum(a.lower, b.lower)
            hi = np.minimum(a.upper, b.upper)
            ok = ok and not bool(np.all(lo < hi))
    checks.append(CheckResult("cubes", "partition_disjoint", ok,
                              0.0 if ok else 1.0, 0.0))
    # origin equivariance on a dyadic grid (exact arithmetic)
    ok = True
    scale = 2.0 ** -20
    for _ in range(20):
        x = scale * rng.integers(0, 2 ** 21, size=n)
        if oracle.delta(x)[0] <= 0:
            continue
        v = scale * rng.integers(-2 ** 18, 2 ** 18, size=n)
        b = scale * rng.integers(-2 ** 18, 2 ** 18, size=n)
        pts2 = f.points + v
        oracle2 = DistanceOracle(pts2)
        c1 = whitney_cube_at(oracle, x, b)
        c2 = whitney_cube_at(oracle2, x + v, b + v)
        ok = ok and c1.level == c2.level and c1.anchor == c2.anchor
    checks.append(CheckResult("cubes", "origin_equivariance", ok,
                              0.0 if ok else 1.0, 0.0, "dyadic probes, exact"))
    return checks


def _suite_extension(cfg: SuiteConfig, seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    checks = []
    n, m = cfg.n, cfg.m
    f = random_field(n, m, 10, seed + 4)
    oracle = oracle_for(f)
    ext_cfg = ExtensionConfig(m=m, t=min(default_t(n), 0.2))
    # partition of unity
    worst = 0.0
    for x in interior_probes(oracle, rng, cfg.probes):
        worst = max(worst, abs(partition_derivative_sum(f, x, (0,) * n, ext_cfg) - 1.0))
    checks.append(CheckResult("extension", "partition_of_unity", worst <= 1e-10,
                              worst, 1e-10))
    # analytic derivatives against the step-tuned FD oracle
    worst = 0.0
    count = 0
    for x in interior_probes(oracle, rng, max(10, cfg.probes // 4)):
        for i in range(n):
            alpha = tuple(1 if j == i else 0 for j in range(n))
            ok, err, _ = fd_oracle_check(f, x, alpha, ext_cfg, 1e-6)
            worst = max(worst, err)
            count += 1
    checks.append(CheckResult("extension", "derivative_fd_oracle", worst <= 1e-6,
                              worst, 1e-6, f"{count} first-order checks"))
    # jet reproduction along approach sequences
    slope_min = math.inf
    for _ in range(4):
        ai, seq, hs = basin_sequence(f, rng)
        diffs = []
        for x in seq:
            fx = eval_extension(f, x, ext_cfg)
            diffs.append(abs(fx - eval_jet(f.jets[ai], x)))
        diffs = np.array(diffs)
        keep = diffs > 1e-13
        if np.count_nonzero(keep) < 4:
            continue                    # exact reproduction; slope is +inf
        slope_min = min(slope_min, fit_loglog_slope(hs[keep], diffs[keep]))
    measured = slope_min if slope_min < math.inf else float(m)
    checks.append(CheckResult("extension", "jet_reproduction",
                              measured >= m - 0.2, measured, m - 0.2,
                              "log-log slope of |F - P_a|"))
    # high-order boundedness: delta^|a| |d^a F| stays bounded as x -> a
    alpha = (m + 1,) + (0,) * (n - 1)
    vals = []
    a = f.points[rng.integers(f.size)]
    for x in approach_sequence(a, np.ones(n), range(3, 11)):
        d = oracle.delta(x)[0]
        if d == 0:
            continue
        vals.append(abs(eval_extension_deriv(f, x, alpha, ext_cfg)) * d ** (m + 1))
    vals = np.array(vals)
    hs = 2.0 ** -np.arange(3, 3 + len(vals))
    slope = 0.0 if np.max(vals) < 1e-13 else fit_loglog_slope(hs, np.maximum(vals, 1e-300))
    checks.append(CheckResult("extension", "high_order_scaled_bounded",
                              slope >= -0.2, slope, -0.2,
                              "slope of delta^(m+1)|d^(m+1)F| vs distance"))
    return checks


def _suite_averaging(cfg: SuiteConfig, seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    checks = []
    n, m = cfg.n, cfg.m
    f = random_field(n, m, 10, seed + 8)
    oracle = oracle_for(f)
    ext_cfg = ExtensionConfig(m=m, t=min(default_t(n), 0.2))
    probes = interior_probes(oracle, rng, 6)
    # periodicity of the origin parameter
    worst = 0.0
    for x in probes:
        tau = period_at(f, x, ext_cfg)
        b = rng.random(n)
        v1 = eval_extension_deriv(f, x, (0,) * n, ext_cfg, origin=b)
        shift = b.copy(); shift[int(rng.integers(n))] += tau
        v2 = eval_extension_deriv(f, x, (0,) * n, ext_cfg, origin=shift)
        worst = max(worst, abs(v1 - v2) / max(abs(v1), 1e-12))
    checks.append(CheckResult("averaging", "periodicity", worst <= 1e-12,
                              worst, 1e-12))
    # doubling the period leaves the Monte Carlo mean within 3 joint stderr
    x = probes[0]
    tau = period_at(f, x, ext_cfg)
    p1 = AveragingPlan(cfg.n_samples, seed + 21, tau=tau)
    p2 = AveragingPlan(cfg.n_samples, seed + 22, tau=2.0 * tau)
    m1, s1 = averaged_extension(f, x, (0,) * n, p1, ext_cfg)
    m2, s2 = averaged_extension(f, x, (0,) * n, p2, ext_cfg)
    joint = math.hypot(s1, s2)
    diff = abs(m1 - m2)
    checks.append(CheckResult("averaging", "period_doubling_consistent",
                              diff <= max(3.0 * joint, 1e-12), diff,
                              max(3.0 * joint, 1e-12)))
    # moment bound for the lattice-proximity weight, t = 1/n literal
    ok = True
    worst = -math.inf
    for k in (1, 2, 3):
        for x in probes[:4]:
            t_lit = 1.0 / n
            mean, se = avg_psi_power(f, x, k, cfg.n_samples, seed + 30 + k,
                                     ext_cfg, t=t_lit)
            n_p = len(psi_bracket(f, x, ext_cfg))
            bound = n_p ** k * (1.0 + t_lit * 2.0 ** (k + 1)) ** n + 3.0 * se
            ok = ok and mean <= bound
            worst = max(worst, mean - bound)
    checks.append(CheckResult("averaging", "psi_moment_bound", ok, worst, 0.0,
                              "k in {1,2,3}"))
    # derivative/average interchange with common random numbers
    worst_sigma = 0.0
    for x in probes[:4]:
        stencil_tau = period_at(f, x, ext_cfg)
        h = 1e-3 * oracle.delta(x)[0]
        i = int(rng.integers(n))
        e = np.zeros(n); e[i] = h
        taus = [period_at(f, p, ext_cfg) for p in (x, x + e, x - e)]
        tau = max(stencil_tau, *taus)
        plan = AveragingPlan(cfg.n_samples, seed + 40, tau=tau, common_random=True)
        alpha = tuple(1 if j == i else 0 for j in range(n))
        vp = extension_origin_values(f, x + e, (0,) * n, plan, ext_cfg)
        vm = extension_origin_values(f, x - e, (0,) * n, plan, ext_cfg)
        vd = extension_origin_values(f, x, alpha, plan, ext_cfg)
        d = (vp - vm) / (2.0 * h) - vd
        se = float(np.std(d, ddof=1) / math.sqrt(len(d)))
        tol = max(1e-5 * max(abs(float(np.mean(vd))), 1.0), 3.0 * se)
        gap = abs(float(np.mean(d)))
        worst_sigma = max(worst_sigma, gap - tol)
    checks.append(CheckResult("averaging", "derivative_interchange",
                              worst_sigma <= 0.0, worst_sigma, 0.0,
                              "common random numbers"))
    # with t = 1/n the corner growth of the averaged |derivative| envelope
    # stays polynomial; the fixed-t classical corner values are reported
    # alongside for comparison
    n_top = max(2, min(cfg.n + 1, 4))
    sup_av, sup_cl = [], []
    for nn in range(1, n_top + 1):
        fa = adversarial_field(nn, m, seed + 70 + nn)
        oracle_a = oracle_for(fa)
        rng_a = np.random.default_rng(seed + 80 + nn)
        cfg_a = ExtensionConfig(m=m, t=default_t(nn))
        cfg_c = ExtensionConfig(m=m, t=0.125)
        probes_a = corner_probes(oracle_a, rng_a, 4, 0.125, depth=(0.45, 0.5))
        plan_a = AveragingPlan(48, seed + 90 + nn)
        best_av = best_cl = 0.0
        alpha = (m,) + (0,) * (nn - 1)
        for x in probes_a:
            mean_abs, _ = averaged_extension(fa, x, alpha, plan_a, cfg_a,
                                             absolute=True)
            best_av = max(best_av, mean_abs)
            best_cl = max(best_cl, abs(eval_extension_deriv(fa, x, alpha, cfg_c)))
        sup_av.append(best_av)
        sup_cl.append(best_cl)
    slope_av = fit_loglog_slope(np.arange(1, n_top + 1), sup_av)
    slope_cl = fit_loglog_slope(np.arange(1, n_top + 1), np.maximum(sup_cl, 1e-300))
    gate_growth = m + 1.5 * m + 0.5
    checks.append(CheckResult("averaging", "averaged_abs_growth",
                              slope_av <= gate_growth, slope_av, gate_growth,
                              f"corner envelope, n<={n_top}; classical corner "
                              f"slope {slope_cl:.2f} for comparison"))
    # averaged operator inherits jet reproduction
    ai, seq, hs = basin_sequence(f, rng, range(3, 10))
    plan = AveragingPlan(max(64, cfg.n_samples // 8), seed + 50)
    diffs = []
    for x in seq:
        mean, _ = averaged_extension(f, x, (0,) * n, plan, ext_cfg)
        diffs.append(abs(mean - eval_jet(f.jets[ai], x)))
    diffs = np.array(diffs)
    keep = diffs > 1e-13
    if np.count_nonzero(keep) < 4:
        slope = float(m)
    else:
        slope = fit_loglog_slope(hs[keep], diffs[keep])
    checks.append(CheckResult("averaging", "interpolation_slope",
                              slope >= m - 0.2, slope, m - 0.2))
    return checks


def _suite_harness(cfg: SuiteConfig, seed: int) -> list[CheckResult]:
    checks = []
    n_top = max(2, min(cfg.n, 4))
    report = norm_growth_study(range(1, n_top + 1), cfg.m,
                               probes_per_kind=6, n_samples=32, seed=seed)
    gate = 2.5 * cfg.m + 0.5
    ns, sup_av = report.curve("averaged")
    slope_av = fit_loglog_slope(ns, sup_av)
    checks.append(CheckResult("harness", "norm_growth_slopes",
                              slope_av <= gate, slope_av, gate,
                              f"averaged overall slope, n<= {n_top}"))
    rep2 = restriction_norm_study(None, cfg.m, range(1, n_top + 1), seed,
                                  sets_per_n=2, set_size=16)
    slope_r = rep2.rows[0].fitted_exponent or 0.0
    checks.append(CheckResult("harness", "restriction_norm_slope",
                              slope_r <= cfg.m + 0.3, slope_r, cfg.m + 0.3))
    # byte determinism of report emission
    rep3 = restriction_norm_study(None, cfg.m, range(1, n_top + 1), seed,
                                  sets_per_n=2, set_size=16)
    same = report_bytes_equal(rep2, rep3)
    checks.append(CheckResult("harness", "report_determinism", same,
                              0.0 if same else 1.0, 0.0))
    return checks


def report_bytes_equal(a: ExperimentReport, b: ExperimentReport) -> bool:
    return a.to_csv() == b.to_csv()


SUITES = {
    "jets": _suite_jets,
    "fields": _suite_fields,
    "cutoff": _suite_cutoff,
    "cubes": _suite_cubes,
    "extension": _suite_extension,
    "averaging": _suite_averaging,
    "harness": _suite_harness,
}


def verify_suite(name: str, config: SuiteConfig | None = None,
                 seed: int = 0) -> SuiteReport:
    """Run one named invariant suite (or ``all``) and collect results."""
    config = config or SuiteConfig()
    if name == "all":
        report = SuiteReport()
        for key in SUITES:
            report.checks.extend(SUITES[key](config, seed))
        return report
    if name not in SUITES:
        raise ValidationError("harness", "unknown_suite",
                              f"no suite named {name!r}; have {sorted(SUITES)} + all")
    return SuiteReport(list(SUITES[name](config, seed)))
