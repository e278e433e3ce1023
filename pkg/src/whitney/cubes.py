"""Dyadic cube arithmetic and lazy Whitney decomposition queries.

A dyadic cube with origin shift b is  b + s*([a_1, a_1+1] x ... x [a_n, a_n+1])
with side s = 2^level and integer anchor a.  The decomposition of the
complement of E selects, for every query point x, the maximal dyadic cube
containing x whose diameter does not exceed its distance to E; the dyadic
parent of a selected cube always violates that inequality.  The partition is
infinite near E, so all queries are lazy: nothing is enumerated globally.

Cube identity is kept as (level, integer anchor) and materialized to floats
only at evaluation time, which keeps origin-shift periodicity exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GuardError, ValidationError

LEVEL_MIN = -40
LEVEL_MAX = 40

# Every support-covering cube must satisfy delta(x) / (s sqrt(n)) within
# these brackets; checked at runtime on each query.
DELTA_BRACKET = (0.5, 5.5)


@dataclass(frozen=True)
class DyadicCube:
    """Closed dyadic cube: level (side 2^level), integer anchor, origin shift."""

    level: int
    anchor: tuple[int, ...]
    origin: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.anchor)

    @property
    def side(self) -> float:
        return 2.0 ** self.level

    @property
    def diam(self) -> float:
        return self.side * math.sqrt(self.n)

    @property
    def lower(self) -> np.ndarray:
        s = self.side
        return np.asarray(self.origin) + s * np.asarray(self.anchor, dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return self.lower + self.side

    @property
    def center(self) -> np.ndarray:
        return self.lower + 0.5 * self.side

    def parent(self) -> "DyadicCube":
        return DyadicCube(self.level + 1,
                          tuple(a >> 1 for a in self.anchor), self.origin)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.lower <= x) and np.all(x <= self.upper))

    def star_bounds(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Expanded cube Q*: same center, side s(1 + 2t)."""
        pad = t * self.side
        return self.lower - pad, self.upper + pad

    def star_contains(self, x, t: float) -> bool:
        lo, hi = self.star_bounds(t)
        x = np.asarray(x, dtype=float)
        return bool(np.all(lo <= x) and np.all(x <= hi))


class DistanceOracle:
    """Exact nearest-distance queries against a finite point set.

    Linear scans over E, vectorized; indices break ties deterministically
    (smallest stored index wins).
    """

    def __init__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.size == 0:
            raise ValidationError("cubes", "empty_set", "E must be nonempty")
        self.points = pts
        self.n = pts.shape[1]

    def delta(self, x) -> tuple[float, int]:
        """(dist(x, E), index of the nearest point)."""
        x = np.asarray(x, dtype=float)
        d2 = np.sum((self.points - x) ** 2, axis=1)
        i = int(np.argmin(d2))
        return math.sqrt(float(d2[i])), i

    def nearest_point(self, x) -> tuple[float, np.ndarray]:
        d, i = self.delta(x)
        return d, self.points[i]

    def box_dist(self, lo, hi) -> tuple[float, int]:
        """Distance from the closed box [lo, hi] to E and the argmin index."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        clipped = np.clip(self.points, lo, hi)
        d2 = np.sum((self.points - clipped) ** 2, axis=1)
        i = int(np.argmin(d2))
        return math.sqrt(float(d2[i])), i

    def box_dist_batch(self, los: np.ndarray, his: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized box distances: los/his of shape (C, n)."""
        pts = self.points[None, :, :]
        clipped = np.clip(pts, los[:, None, :], his[:, None, :])
        d2 = np.sum((pts - clipped) ** 2, axis=2)
        idx = np.argmin(d2, axis=1)
        return np.sqrt(d2[np.arange(len(los)), idx]), idx


def _cube_dist(oracle: DistanceOracle, cube: DyadicCube) -> float:
    return oracle.box_dist(cube.lower, cube.upper)[0]


def _passes(oracle: DistanceOracle, cube: DyadicCube) -> bool:
    return cube.diam <= _cube_dist(oracle, cube)


def _cube_at_level(x: np.ndarray, origin: np.ndarray, level: int) -> DyadicCube:
    s = 2.0 ** level
    anchor = tuple(int(math.floor((xi - bi) / s)) for xi, bi in zip(x, origin))
    return DyadicCube(level, anchor, tuple(float(b) for b in origin))


def whitney_cube_at(oracle: DistanceOracle, x, origin=None) -> DyadicCube:
    """The selected Whitney cube containing x (half-open face convention).

    Maximal dyadic cube Q with x in Q and diam(Q) <= dist(Q, E); the level
    search descends from a size guaranteed by delta(x) and climbs while the
    parent still passes.
    """
    x = np.asarray(x, dtype=float)
    origin = np.zeros(oracle.n) if origin is None else np.asarray(origin, dtype=float)
    d, _ = oracle.delta(x)
    if d == 0.0:
        raise ValidationError("cubes", "point_in_E", "x lies in E; no Whitney cube")
    # at side s <= delta / (2 sqrt n) the cube passes: dist >= delta - diam >= diam
    start = math.floor(math.log2(d / (2.0 * math.sqrt(oracle.n))))
    if start < LEVEL_MIN:
        raise GuardError("cubes", "level_min",
                         f"delta(x)={d:g} needs level below {LEVEL_MIN}")
    level = min(start, LEVEL_MAX)
    cube = _cube_at_level(x, origin, level)
    if not _passes(oracle, cube):
        # the start estimate can fail only by a level or two; descend
        while not _passes(oracle, cube):
            level -= 1
            if level < LEVEL_MIN:
                raise GuardError("cubes", "level_min", "descent hit the level floor")
            cube = _cube_at_level(x, origin, level)
    while level < LEVEL_MAX:
        above = _cube_at_level(x, origin, level + 1)
        if not _passes(oracle, above):
            return cube
        cube, level = above, level + 1
    raise GuardError("cubes", "level_max", "climb hit the level ceiling")


@dataclass(frozen=True)
class SupportCube:
    """A Whitney cube whose expansion Q* contains the query point."""

    cube: DyadicCube
    dist_to_E: float
    anchor_index: int
    contains_x: bool


def _anchor_candidates(xi: float, bi: float, s: float, t: float) -> list[int]:
    """Integer anchors a with x_i inside [b + s(a - t), b + s(a + 1 + t)]."""
    u = (xi - bi) / s
    lo = math.ceil(u - 1.0 - t)
    hi = math.floor(u + t)
    return list(range(lo, hi + 1))


def support_cubes(oracle: DistanceOracle, x, origin, t: float) -> list[SupportCube]:
    """All Whitney cubes whose closed Q* contains x, sorted by (level, anchor).

    Any covering cube satisfies delta(x) <= (1-t) side sqrt(n) from below and
    (3/2 + 4) side sqrt(n) from above, which pins its level into a window of
    at most four dyadic steps around delta(x)/sqrt(n).  Within the window,
    each coordinate admits at most two anchors whose t-expanded slab contains
    x_i.  Every candidate (with its dyadic parent) goes through one batched
    distance query, and is kept iff it passes the Whitney selection rule.
    """
    x = np.asarray(x, dtype=float)
    n = oracle.n
    origin = np.zeros(n) if origin is None else np.asarray(origin, dtype=float)
    delta_x, _ = oracle.delta(x)
    if delta_x == 0.0:
        raise ValidationError("cubes", "point_in_E", "x lies in E; no covering cubes")
    sqrt_n = math.sqrt(n)
    s_min = 2.0 * delta_x / (11.0 * sqrt_n)
    s_max = 4.0 * delta_x / (3.0 * sqrt_n)
    j_lo = math.ceil(math.log2(s_min) - 1e-9)
    j_hi = math.floor(math.log2(s_max) + 1e-9)
    if j_lo < LEVEL_MIN or j_hi > LEVEL_MAX:
        raise GuardError("cubes", "level_guard",
                         f"levels [{j_lo}, {j_hi}] escape [{LEVEL_MIN}, {LEVEL_MAX}]")
    org = tuple(float(b) for b in origin)
    levels: list[tuple[int, list[tuple[int, ...]]]] = []
    lows: list[np.ndarray] = []
    sides: list[float] = []
    for level in range(j_lo, j_hi + 1):
        s = 2.0 ** level
        anchors: list[tuple[int, ...]] = [()]
        for xi, bi in zip(x, origin):
            cands = _anchor_candidates(float(xi), float(bi), s, t)
            anchors = [a + (c,) for a in anchors for c in cands]
        if not anchors:
            continue
        levels.append((level, anchors))
        arr = np.asarray(anchors, dtype=float) * s + origin
        lows.append(arr)
        sides.extend([s] * len(anchors))
        parents = sorted({tuple(a >> 1 for a in anc) for anc in anchors})
        levels.append((level + 1, parents))
        lows.append(np.asarray(parents, dtype=float) * (2.0 * s) + origin)
        sides.extend([2.0 * s] * len(parents))
    all_lo = np.concatenate(lows, axis=0)
    all_side = np.asarray(sides)
    dists, idxs = oracle.box_dist_batch(all_lo, all_lo + all_side[:, None])
    # slice the flat result back into (candidates, parents) per level
    hits: list[SupportCube] = []
    pos = 0
    for i in range(0, len(levels), 2):
        level, anchors = levels[i]
        _, parents = levels[i + 1]
        cdist = dists[pos:pos + len(anchors)]
        cidx = idxs[pos:pos + len(anchors)]
        pos += len(anchors)
        pdist = {p: dists[pos + j] for j, p in enumerate(parents)}
        pos += len(parents)
        s = 2.0 ** level
        diam = s * sqrt_n
        for anc, dist, aidx in zip(anchors, cdist, cidx):
            if diam <= dist and 2.0 * diam > pdist[tuple(a >> 1 for a in anc)]:
                ratio = delta_x / diam
                if not DELTA_BRACKET[0] <= ratio <= DELTA_BRACKET[1]:
                    raise GuardError(
                        "cubes", "delta_bracket",
                        f"delta/(s sqrt n)={ratio:g} outside {DELTA_BRACKET}")
                cube = DyadicCube(level, anc, org)
                hits.append(SupportCube(cube, float(dist), int(aidx),
                                        cube.contains(x)))
    hits.sort(key=lambda h: (h.cube.level, h.cube.anchor))
    return hits


def cubes_covering_support(oracle: DistanceOracle, x, origin, t: float
                           ) -> list[tuple[DyadicCube, bool]]:
    """(cube, passed-Whitney-rule) pairs for every cube with x in Q*."""
    return [(h.cube, True) for h in support_cubes(oracle, x, origin, t)]


def anchor_point(oracle: DistanceOracle, cube: DyadicCube) -> np.ndarray:
    """A point of E nearest to the cube; ties break by stored index."""
    _, idx = oracle.box_dist(cube.lower, cube.upper)
    return oracle.points[idx]


def enumerate_whitney_cubes(oracle: DistanceOracle, box_lo, box_hi, origin=None,
                            level_lo: int | None = None,
                            level_hi: int | None = None,
                            max_cubes: int = 200000) -> list[tuple[DyadicCube, float]]:
    """Whitney cubes intersecting a box, by exhaustive level sweep (n <= 3).

    The decomposition is infinite near E, so the sweep stops at ``level_lo``
    (default: 12 levels below the coarsest intersecting cube).
    """
    if oracle.n > 3:
        raise GuardError("cubes", "enumeration_dim", "enumeration supports n <= 3 only")
    box_lo = np.asarray(box_lo, dtype=float)
    box_hi = np.asarray(box_hi, dtype=float)
    origin = np.zeros(oracle.n) if origin is None else np.asarray(origin, dtype=float)
    corners = np.stack(np.meshgrid(*[[lo, hi] for lo, hi in zip(box_lo, box_hi)],
                                   indexing="ij"), axis=-1).reshape(-1, oracle.n)
    dmax = max(oracle.delta(c)[0] for c in corners) + float(np.max(box_hi - box_lo))
    if level_hi is None:
        level_hi = min(LEVEL_MAX, math.ceil(math.log2(max(dmax, 1e-300) / math.sqrt(oracle.n))) + 1)
    if level_lo is None:
        level_lo = max(LEVEL_MIN, level_hi - 6)
    out: list[tuple[DyadicCube, float]] = []
    org = tuple(float(b) for b in origin)
    for level in range(level_lo, level_hi + 1):
        s = 2.0 ** level
        ranges = [range(math.floor((lo - bi) / s), math.floor((hi - bi) / s) + 1)
                  for lo, hi, bi in zip(box_lo, box_hi, origin)]
        count = math.prod(len(r) for r in ranges)
        if count > max_cubes:
            raise GuardError("cubes", "enumeration_cap",
                             f"{count} candidates at level {level} exceed {max_cubes}")
        anchors = [()]
        for r in ranges:
            anchors = [a + (c,) for a in anchors for c in r]
        cubes = [DyadicCube(level, a, org) for a in anchors]
        if not cubes:
            continue
        los = np.array([c.lower for c in cubes])
        dists, _ = oracle.box_dist_batch(los, los + s)
        plos = np.array([c.parent().lower for c in cubes])
        pdists, _ = oracle.box_dist_batch(plos, plos + 2.0 * s)
        diam = s * math.sqrt(oracle.n)
        for cube, dist, pdist in zip(cubes, dists, pdists):
            if diam <= dist and 2.0 * diam > pdist:
                out.append((cube, float(dist)))
    out.sort(key=lambda cd: (cd[0].level, cd[0].anchor))
    return out
