"""Lattice convex hulls over apex sets and the recursive mixing test.

Hull membership is decided exactly: a lattice point belongs to the hull
iff some affinely independent subset of at most d+1 generators carries
it with nonnegative rational barycentric coordinates.  All arithmetic
uses fractions.Fraction; no floating point enters any decision.

The mixing test examines an apex set C together with one tracked vertex
v and accepts when v can "escape" the rest of the set:

* MA1 -- some coordinate of v strictly exceeds every other vertex and
  is positive;
* MA2 -- some coordinate is strictly below every other vertex and is
  negative;
* MA3 -- otherwise, every coordinate where v ties the extremum of the
  others with the matching sign opens a branch: keep the vertices
  sharing that coordinate value, delete the coordinate, and recurse.

Acceptance of any branch accepts the whole run; the trace records every
step that was examined.  Branches are explored from the highest
coordinate index down, which is also the order the worked examples in
the trace rendering follow.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from .errors import (
    EmptyInputError,
    InvalidCornerError,
    InvalidVertexError,
    UnsupportedDimensionError,
)

Vec = tuple[int, ...]

#: Hull enumeration is exponential in d; keep it desk-scale.
MAX_HULL_DIM = 4


@dataclass(frozen=True)
class ApexSet:
    """A finite set of distinct integer vectors, stored sorted."""

    vertices: tuple[Vec, ...]

    def __post_init__(self):
        verts = tuple(sorted({tuple(int(c) for c in v) for v in self.vertices}))
        object.__setattr__(self, "vertices", verts)
        if not verts:
            raise EmptyInputError("apex set must be nonempty")
        d = len(verts[0])
        if d < 1 or any(len(v) != d for v in verts):
            raise ValueError("all vertices must share one arity >= 1")

    @property
    def d(self) -> int:
        return len(self.vertices[0])

    def __iter__(self):
        return iter(self.vertices)

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v) -> bool:
        return tuple(v) in self.vertices

    def __str__(self) -> str:
        return "{" + ", ".join(str(v) for v in self.vertices) + "}"


@dataclass(frozen=True)
class LatticeHull:
    """An apex set together with all lattice points of its convex hull."""

    generator: ApexSet
    points: frozenset


def extremum(apexes: ApexSet, j: int, which: str = "max") -> int:
    """Max or min of the j-th coordinate over the set (j is 1-based)."""
    if not 1 <= j <= apexes.d:
        raise ValueError(f"coordinate index {j} out of range 1..{apexes.d}")
    vals = [v[j - 1] for v in apexes]
    if which == "max":
        return max(vals)
    if which == "min":
        return min(vals)
    raise ValueError("which must be 'max' or 'min'")


# ---------------------------------------------------------------------------
# Exact hull membership.
# ---------------------------------------------------------------------------

def _barycentric(points, target):
    """Solve sum(l_i * p_i) = target with sum(l_i) = 1 over the rationals.

    Returns the coefficient list when the points are affinely independent
    and the system is consistent, else None.  Affinely dependent subsets
    are rejected; some independent subset always witnesses membership.
    """
    n = len(points)
    d = len(target)
    rows = [
        [Fraction(p[i]) for p in points] + [Fraction(target[i])] for i in range(d)
    ]
    rows.append([Fraction(1)] * n + [Fraction(1)])
    rank = 0
    for col in range(n):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            return None
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pv = rows[rank][col]
        rows[rank] = [x / pv for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    for i in range(rank, len(rows)):
        if rows[i][-1] != 0:
            return None
    return [rows[i][-1] for i in range(n)]


def _hull_contains(vertices, point) -> bool:
    """Exact test: is ``point`` a convex combination of ``vertices``?"""
    verts = [tuple(v) for v in vertices]
    if not verts:
        return False
    p = tuple(point)
    if p in verts:
        return True
    d = len(p)
    for j in range(d):
        if not min(v[j] for v in verts) <= p[j] <= max(v[j] for v in verts):
            return False
    for size in range(2, min(len(verts), d + 1) + 1):
        for subset in combinations(verts, size):
            lam = _barycentric(subset, p)
            if lam is not None and all(x >= 0 for x in lam):
                return True
    return False


def _check_dim(apexes: ApexSet):
    if apexes.d > MAX_HULL_DIM:
        raise UnsupportedDimensionError(
            f"hull enumeration supports d <= {MAX_HULL_DIM}, got d={apexes.d}"
        )


def hull_points(apexes: ApexSet) -> LatticeHull:
    """All lattice points of the convex hull of the apex set."""
    _check_dim(apexes)
    ranges = [
        range(min(v[j] for v in apexes), max(v[j] for v in apexes) + 1)
        for j in range(apexes.d)
    ]
    pts = frozenset(
        p for p in product(*ranges) if _hull_contains(apexes.vertices, p)
    )
    return LatticeHull(apexes, pts)


def minimal_apex_set(apexes: ApexSet) -> ApexSet:
    """The extreme points: vertices not in the hull of the others."""
    _check_dim(apexes)
    keep = [
        v
        for v in apexes
        if not _hull_contains([u for u in apexes if u != v], v)
    ]
    return ApexSet(tuple(keep))


# ---------------------------------------------------------------------------
# Hypercuboids.
# ---------------------------------------------------------------------------

def hypercuboid_bounds(apexes: ApexSet):
    """Per-axis (k_j, K_j) when the set is exactly a hypercuboid corner set.

    Returns None otherwise.  Degenerate axes have k_j = K_j.
    """
    vals = [sorted({v[j] for v in apexes}) for j in range(apexes.d)]
    if any(len(s) > 2 for s in vals):
        return None
    if set(apexes.vertices) != set(product(*vals)):
        return None
    return [(s[0], s[-1]) for s in vals]


def corner_condition(corner, bounds) -> bool:
    """Sign condition for mixing at a hypercuboid corner.

    Each nondegenerate axis must have the corner strictly positive on
    the K side or strictly negative on the k side.  Degenerate axes
    (k_j = K_j) impose nothing when the shared value is nonzero and are
    excluded when it is zero; a corner with no nondegenerate axis and no
    nonzero coordinate fails (it cannot shift anywhere).
    """
    corner = tuple(corner)
    if len(corner) != len(bounds):
        raise InvalidCornerError("corner arity does not match the bounds")
    for c, (k, K) in zip(corner, bounds):
        if c not in (k, K):
            raise InvalidCornerError(f"coordinate {c} is neither {k} nor {K}")
    has_requirement = False
    has_nonzero_degenerate = False
    for c, (k, K) in zip(corner, bounds):
        if k == K:
            if c != 0:
                has_nonzero_degenerate = True
            continue
        has_requirement = True
        if c == K and not c > 0:
            return False
        if c == k and not c < 0:
            return False
    return has_requirement or has_nonzero_degenerate


# ---------------------------------------------------------------------------
# The mixing test.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MaStep:
    """One examined step: which rule fired on which coordinate.

    ``axis`` is 1-based within the current (projected) coordinates;
    ``projected`` carries the recursion child for MA3 steps.
    """

    depth: int
    rule: str  # "MA1" | "MA2" | "MA3" | "fail"
    axis: int | None
    apexes: ApexSet
    vertex: Vec
    projected: ApexSet | None = None


@dataclass(frozen=True)
class MaTrace:
    accepted: bool
    steps: tuple[MaStep, ...]

    @property
    def verdict(self) -> str:
        return "accepted" if self.accepted else "rejected"

    @property
    def depth(self) -> int:
        return max(s.depth for s in self.steps)

    def accepted_path(self) -> tuple[MaStep, ...]:
        """The chain of steps along the successful branch (empty if rejected)."""
        if not self.accepted:
            return ()
        path = [self.steps[-1]]
        want = self.steps[-1].depth - 1
        for step in reversed(self.steps[:-1]):
            if step.depth == want:
                path.append(step)
                want -= 1
        return tuple(reversed(path))

    def render(self) -> str:
        lines = []
        for s in self.steps:
            pad = "  " * s.depth
            if s.rule == "MA1":
                lines.append(
                    f"{pad}MA1 at j={s.axis}: vertex {s.vertex} strictly above "
                    f"the rest on axis {s.axis} and positive"
                )
            elif s.rule == "MA2":
                lines.append(
                    f"{pad}MA2 at j={s.axis}: vertex {s.vertex} strictly below "
                    f"the rest on axis {s.axis} and negative"
                )
            elif s.rule == "MA3":
                lines.append(
                    f"{pad}MA3 at j={s.axis}: tie on axis {s.axis}, "
                    f"recursing on {s.projected} at {_drop(s.vertex, s.axis - 1)}"
                )
            else:
                lines.append(f"{pad}fail: no step applies to {s.vertex} in {s.apexes}")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def _drop(vec: Vec, axis: int) -> Vec:
    return vec[:axis] + vec[axis + 1 :]


def mixing_algorithm(apexes: ApexSet, vertex) -> MaTrace:
    """Run the recursive mixing test tracking ``vertex``; full trace returned."""
    v = tuple(int(c) for c in vertex)
    if v not in apexes:
        raise InvalidVertexError(f"{v} is not in the apex set")
    steps: list[MaStep] = []
    accepted = _ma_level(apexes, v, 1, steps)
    return MaTrace(accepted, tuple(steps))


def _ma_level(apexes: ApexSet, v: Vec, depth: int, steps: list) -> bool:
    d = apexes.d
    others = [u for u in apexes if u != v]
    # MA1/MA2 sweep; with no other vertices, any nonzero coordinate of the
    # matching sign escapes (max over the empty set is -infinity).
    for j in range(d):
        if v[j] > 0 and (not others or v[j] > max(u[j] for u in others)):
            steps.append(MaStep(depth, "MA1", j + 1, apexes, v))
            return True
        if v[j] < 0 and (not others or v[j] < min(u[j] for u in others)):
            steps.append(MaStep(depth, "MA2", j + 1, apexes, v))
            return True
    branched = False
    if d > 1 and others:
        for j in reversed(range(d)):
            hi = max(u[j] for u in others)
            lo = min(u[j] for u in others)
            if (v[j] > 0 and v[j] == hi) or (v[j] < 0 and v[j] == lo):
                kept = [u for u in apexes if u[j] == v[j]]
                child = ApexSet(tuple(_drop(u, j) for u in kept))
                branched = True
                steps.append(MaStep(depth, "MA3", j + 1, apexes, v, projected=child))
                if _ma_level(child, _drop(v, j), depth + 1, steps):
                    return True
    if not branched:
        steps.append(MaStep(depth, "fail", None, apexes, v))
    return False


# ---------------------------------------------------------------------------
# Serialization: one "(c1,...,cd)" vertex per line.
# ---------------------------------------------------------------------------

def parse_apex_set(text: str) -> ApexSet:
    from .rule_lang import parse_vector

    verts = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            verts.append(parse_vector(line))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return ApexSet(tuple(verts))


def format_apex_set(apexes: ApexSet) -> str:
    from .rule_lang import format_vector

    return "\n".join(format_vector(v) for v in apexes) + "\n"
