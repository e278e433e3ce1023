"""Whitney fields over finite point sets and the C^m(E) norm.

A Whitney field assigns one degree-m jet to every point of a finite set
E in R^n.  Its C^m(E) norm is the larger of

    sup_{x in E, |a| <= m} |d^a P_x(x)|

and

    sup_{x != y in E, |a| <= m} |d^a (P_x - P_y)(x)| / |x - y|^(m - |a|),

with Euclidean |x - y|.  For finite E the vanishing-limit compatibility
condition holds vacuously (no accumulation points), so it is recorded as a
convention here rather than computed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GuardError, ValidationError
from .jets import (Jet, MultiIndex, diff_jet, eval_jet_many, factorial_of,
                   multi_indices, num_coeffs, order)


@dataclass(frozen=True, eq=False)
class WhitneyField:
    """Finite set of base points with one jet per point.

    Equality is identity equality so fields can key caches (the distance
    oracle is memoized per field instance).
    """

    n: int
    m: int
    points: np.ndarray            # (N, n)
    jets: tuple[Jet, ...]

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.n:
            raise ValidationError("fields", "point_shape",
                                  f"points must be (N, {self.n}), got {pts.shape}")
        if pts.shape[0] == 0:
            raise ValidationError("fields", "empty_set", "E must be nonempty")
        if len(self.jets) != pts.shape[0]:
            raise ValidationError("fields", "jet_count",
                                  "one jet per point required")
        for p, jet in zip(pts, self.jets):
            if jet.m != self.m or jet.n != self.n:
                raise ValidationError("fields", "jet_degree",
                                      "all jets must share n and m")
            if not np.array_equal(np.asarray(jet.base), p):
                raise ValidationError("fields", "jet_base",
                                      "each jet must be based at its point")
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise ValidationError("fields", "distinct_points",
                                  "points of E must be pairwise distinct")
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def scaled(self, factor: float) -> "WhitneyField":
        jets = tuple(Jet(j.base, j.m, tuple(factor * c for c in j.coeffs))
                     for j in self.jets)
        return WhitneyField(self.n, self.m, self.points.copy(), jets)


def cm_norm(f: WhitneyField) -> float:
    """C^m(E) norm by exact enumeration over points and ordered pairs."""
    if f.size < 1:
        raise ValidationError("fields", "empty_set", "E must be nonempty")
    idx = multi_indices(f.n, f.m)
    # first supremum: derivative values of each jet at its own base
    best = 0.0
    for jet in f.jets:
        for alpha in idx:
            best = max(best, abs(jet.deriv_at_base(alpha)))
    if f.size == 1:
        return best
    pts = f.points
    dist = np.sqrt(np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1))
    # second supremum: for every alpha, evaluate d^a P_y at all x and compare
    # with d^a P_x(x); loop over y, vectorize over x
    deriv_self = np.empty((f.size, len(idx)))
    for i, jet in enumerate(f.jets):
        for a, alpha in enumerate(idx):
            deriv_self[i, a] = jet.deriv_at_base(alpha)
    for a, alpha in enumerate(idx):
        k = order(alpha)
        for yi, jet in enumerate(f.jets):
            dj = diff_jet(jet, alpha)
            vals = eval_jet_many(dj, pts)          # d^a P_y at every x
            num = np.abs(deriv_self[:, a] - vals)
            num[yi] = 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                quot = num / dist[:, yi] ** (f.m - k)
            quot[yi] = 0.0
            best = max(best, float(np.max(quot)))
    return best


# ---------------------------------------------------------------------------
# analytic test functions with exact derivatives


class SmoothTestFunction:
    """A built-in analytic function with closed-form mixed partials.

    Families: ``constant``, ``monomial`` (coordinate monomial x^gamma),
    ``sines`` (amplitude * prod sin(omega x_i), amplitude chosen so the
    C^m norm is 1 when omega >= 1), ``gaussian`` (radially symmetric bump).
    """

    def __init__(self, kind: str, n: int, *, value: float = 1.0,
                 gamma: Sequence[int] | None = None, omega: float = 1.0,
                 center: Sequence[float] | None = None, width: float = 1.0,
                 m_norm: int | None = None):
        self.kind = kind
        self.n = n
        self.value = float(value)
        self.omega = float(omega)
        self.width = float(width)
        self.gamma = tuple(int(g) for g in gamma) if gamma is not None else (1,) + (0,) * (n - 1)
        self.center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        if kind not in ("constant", "monomial", "sines", "gaussian"):
            raise ValidationError("fields", "unknown_function", f"kind={kind}")
        # pre-scale the sine product to unit C^m norm
        if kind == "sines" and m_norm is not None and self.omega > 1.0:
            self.value = self.omega ** (-m_norm)

    def deriv(self, alpha: MultiIndex, x) -> float:
        """Exact d^alpha F(x)."""
        x = np.asarray(x, dtype=float)
        alpha = tuple(int(a) for a in alpha)
        if self.kind == "constant":
            return self.value if order(alpha) == 0 else 0.0
        if self.kind == "monomial":
            out = self.value
            for xi, gi, ai in zip(x, self.gamma, alpha):
                if ai > gi:
                    return 0.0
                c = 1
                for q in range(gi - ai + 1, gi + 1):
                    c *= q
                out *= c * xi ** (gi - ai)
            return out
        if self.kind == "sines":
            out = self.value
            for xi, ai in zip(x, alpha):
                out *= self.omega ** ai * math.sin(self.omega * xi + ai * math.pi / 2.0)
            return out
        # gaussian: per-coordinate Hermite recurrence on z = (x-c)/(w*sqrt2)
        out = self.value
        rt2w = self.width * math.sqrt(2.0)
        for xi, ci, ai in zip(x, self.center, alpha):
            z = (xi - ci) / rt2w
            h0, h1 = 1.0, 2.0 * z
            if ai == 0:
                herm = h0
            elif ai == 1:
                herm = h1
            else:
                for k in range(1, ai):
                    h0, h1 = h1, 2.0 * z * h1 - 2.0 * k * h0
                herm = h1
            out *= (-1.0 / rt2w) ** ai * herm * math.exp(-z * z)
        return out

    def __call__(self, x) -> float:
        return self.deriv((0,) * self.n, x)


def restrict(func: SmoothTestFunction, points, m: int) -> WhitneyField:
    """Whitney field of exact Taylor jets of F at each point of E."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        raise ValidationError("fields", "empty_set", "E must be nonempty")
    n = pts.shape[1]
    if n != func.n:
        raise ValidationError("fields", "dim_mismatch",
                              f"function has n={func.n}, points have n={n}")
    idx = multi_indices(n, m)
    jets = []
    for y in pts:
        coeffs = tuple(func.deriv(alpha, y) / factorial_of(alpha) for alpha in idx)
        jets.append(Jet(tuple(y), m, coeffs))
    return WhitneyField(n, m, pts, tuple(jets))


# ---------------------------------------------------------------------------
# generators

MAX_SET_SIZE = 20000


def _normalize(f: WhitneyField) -> WhitneyField:
    nrm = cm_norm(f)
    if nrm == 0.0:
        raise ValidationError("fields", "zero_field", "cannot normalize the zero field")
    return f.scaled(1.0 / nrm)


def _jets_from_matrix(pts: np.ndarray, m: int, coeff_rows: np.ndarray) -> tuple[Jet, ...]:
    return tuple(Jet(tuple(y), m, tuple(row)) for y, row in zip(pts, coeff_rows))


def random_field(n: int, m: int, size: int, seed: int,
                 min_separation: float = 1e-2) -> WhitneyField:
    """Seeded random field on [0,1]^n with cm_norm rescaled to 1."""
    if size < 1 or size > MAX_SET_SIZE:
        raise GuardError("fields", "set_size_cap", f"size={size} outside [1, {MAX_SET_SIZE}]")
    rng = np.random.default_rng(seed)
    pts: list[np.ndarray] = []
    attempts = 0
    while len(pts) < size:
        cand = rng.random(n)
        if all(np.linalg.norm(cand - p) >= min_separation for p in pts):
            pts.append(cand)
        attempts += 1
        if attempts > 100 * size:
            raise GuardError("fields", "separation_cap",
                             f"cannot place {size} points at separation {min_separation}")
    arr = np.array(pts)
    coeffs = rng.standard_normal((size, num_coeffs(n, m)))
    return _normalize(WhitneyField(n, m, arr, _jets_from_matrix(arr, m, coeffs)))


def adversarial_field(n: int, m: int, seed: int) -> WhitneyField:
    """Coarse grid with the center point removed, step-aligned jets, unit norm.

    The missing center forces comparatively large Whitney cubes around the
    middle of [0,1]^n, so probe points placed near those cube corners see
    many overlapping cutoff supports at once.  Jet values step across the
    first coordinate, which keeps the jet differences between a corner
    stack's anchors sign-aligned with the cutoff-derivative weights instead
    of cancelling like random signs would; a small seeded jitter breaks the
    remaining symmetries.
    """
    if 3 ** n - 1 > MAX_SET_SIZE:
        raise GuardError("fields", "set_size_cap", f"3^{n}-1 grid points exceed cap")
    axes = [np.array([0.0, 0.5, 1.0])] * n
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    center = np.full(n, 0.5)
    keep = ~np.all(grid == center, axis=1)
    pts = grid[keep]
    rng = np.random.default_rng(seed)
    coeffs = np.zeros((pts.shape[0], num_coeffs(n, m)))
    coeffs[:, 0] = np.sign(pts[:, 0] - 0.5) * (1.0 + 0.05 * rng.random(pts.shape[0]))
    return _normalize(WhitneyField(n, m, pts, _jets_from_matrix(pts, m, coeffs)))


# ---------------------------------------------------------------------------
# serialization

def field_to_json(f: WhitneyField) -> str:
    payload = {
        "n": f.n,
        "m": f.m,
        "points": [{"y": [float(v) for v in jet.base],
                    "coeffs": [float(c) for c in jet.coeffs]}
                   for jet in f.jets],
    }
    return json.dumps(payload, indent=2)


def field_from_json(text: str) -> WhitneyField:
    payload = json.loads(text)
    try:
        n, m = int(payload["n"]), int(payload["m"])
        rows = payload["points"]
        pts = np.array([row["y"] for row in rows], dtype=float)
        jets = tuple(Jet(tuple(row["y"]), m, tuple(float(c) for c in row["coeffs"]))
                     for row in rows)
    except (KeyError, TypeError) as exc:
        raise ValidationError("fields", "json_schema", f"bad field JSON: {exc}") from None
    return WhitneyField(n, m, pts, jets)


def save_field(f: WhitneyField, path) -> None:
    with open(path, "w") as fh:
        fh.write(field_to_json(f))
        fh.write("\n")


def load_field(path) -> WhitneyField:
    with open(path) as fh:
        return field_from_json(fh.read())


def load_points_csv(path, n: int | None = None) -> np.ndarray:
    """Point list, one point per row, plain decimal columns, no header."""
    pts = np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float, ndmin=2))
    if n is not None and pts.shape[1] != n:
        raise ValidationError("fields", "point_dim",
                              f"expected {n} columns, found {pts.shape[1]}")
    return pts


def save_points_csv(points: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        for row in np.atleast_2d(points):
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
