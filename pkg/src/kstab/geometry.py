"""Exact rational polytope kernel.

Every quantity is a ``fractions.Fraction`` (arbitrary precision, always in
lowest terms, positive denominator); there is no floating point anywhere.
Polytopes are stored by half-spaces ``{u : <u, normal> >= -offset}`` with a
lazily computed, exactly deduplicated vertex set.

Algorithms are chosen for exactness at desk scale (dimension <= 4, a few
dozen facets), not asymptotic speed:

* vertices: solve every n-subset of tight facet equalities by rational
  Gaussian elimination and keep solutions satisfying all half-spaces;
* boundedness: the recession cone ``{u : <u, v_i> >= 0}`` is scanned for a
  nonzero ray through its (n-1)-subset kernels;
* volume / barycenter / linear integrals: cone the lexicographically least
  vertex over a recursive facet triangulation;
* lattice points: bounding-box scan filtered through the scaled half-spaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from math import ceil, floor

from .errors import (
    DegeneratePolytope,
    DimensionMismatch,
    EmptyPolytope,
    UnboundedPolytope,
)

Rational = Fraction
MPoint = tuple[Fraction, ...]
NVector = tuple[int, ...]


def rational(value) -> Fraction:
    """Coerce ints, strings like ``"p/q"``, and Fractions; never floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"not an exact rational: {value!r}")


def mpoint(coords) -> MPoint:
    return tuple(rational(c) for c in coords)


def dot(u, v) -> Fraction:
    if len(u) != len(v):
        raise DimensionMismatch(f"length {len(u)} vs {len(v)}")
    return sum((Fraction(a) * b for a, b in zip(u, v)), Fraction(0))


def scale_point(k, u) -> MPoint:
    k = rational(k)
    return tuple(k * c for c in u)


def add_points(u, v) -> MPoint:
    if len(u) != len(v):
        raise DimensionMismatch(f"length {len(u)} vs {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


class _PosInfinity:
    """Sentinel for +infinity results (e.g. lct of the zero divisor).

    Compares above every Fraction and is preserved by positive scaling. Kept
    deliberately tiny; it never participates in polytope arithmetic.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "+infinity"

    def __eq__(self, other):
        return isinstance(other, _PosInfinity)

    def __hash__(self):
        return hash("kstab-pos-infinity")

    def __gt__(self, other):
        return not isinstance(other, _PosInfinity)

    def __ge__(self, other):
        return True

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return isinstance(other, _PosInfinity)

    def __mul__(self, other):
        if isinstance(other, _PosInfinity) or other > 0:
            return self
        raise ValueError("infinity is only scaled by positive factors")

    __rmul__ = __mul__


POS_INFINITY = _PosInfinity()


def solve_linear(rows: list[list[Fraction]], rhs: list[Fraction]):
    """Solve a square rational system exactly; None if singular."""
    n = len(rows)
    aug = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(rows)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(aug[i][n] for i in range(n))


def matrix_rank(rows) -> int:
    """Rank of a rational matrix by Gaussian elimination."""
    work = [[Fraction(x) for x in row] for row in rows]
    rank = 0
    cols = len(work[0]) if work else 0
    for col in range(cols):
        pivot = next((r for r in range(rank, len(work)) if work[r][col] != 0), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        pv = work[rank][col]
        work[rank] = [x / pv for x in work[rank]]
        for r in range(len(work)):
            if r != rank and work[r][col] != 0:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[rank])]
        rank += 1
        if rank == len(work):
            break
    return rank


def kernel_vector(rows, n: int):
    """A nonzero rational vector orthogonal to all rows, or None.

    Only meaningful when the rows span a hyperplane or less; returns one
    kernel vector (the one from the first free column).
    """
    work = [[Fraction(x) for x in row] for row in rows]
    pivots: list[int] = []
    rank = 0
    for col in range(n):
        pivot = next((r for r in range(rank, len(work)) if work[r][col] != 0), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        pv = work[rank][col]
        work[rank] = [x / pv for x in work[rank]]
        for r in range(len(work)):
            if r != rank and work[r][col] != 0:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    col = free[0]
    vec = [Fraction(0)] * n
    vec[col] = Fraction(1)
    for r, pc in enumerate(pivots):
        vec[pc] = -work[r][col]
    return tuple(vec)


def determinant(rows) -> Fraction:
    work = [[Fraction(x) for x in row] for row in rows]
    n = len(work)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            work[col], work[pivot] = work[pivot], work[col]
            det = -det
        det *= work[col][col]
        pv = work[col][col]
        for r in range(col + 1, n):
            if work[r][col] != 0:
                f = work[r][col] / pv
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return det


def affine_rank(points) -> int:
    """Dimension of the affine hull of a point set (0 for a single point)."""
    pts = list(points)
    if len(pts) <= 1:
        return 0
    base = pts[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in pts[1:]]
    return matrix_rank(diffs)


@dataclass(frozen=True)
class HalfSpace:
    """The set ``{u : <u, normal> >= -offset}`` with integer normal."""

    normal: NVector
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(int(c) for c in self.normal))
        object.__setattr__(self, "offset", rational(self.offset))
        if all(c == 0 for c in self.normal):
            raise DimensionMismatch("half-space normal must be nonzero")

    def contains(self, u: MPoint) -> bool:
        return dot(u, self.normal) >= -self.offset

    def is_tight(self, u: MPoint) -> bool:
        return dot(u, self.normal) == -self.offset


@dataclass(frozen=True)
class AffineFunctional:
    """``u -> <u, gradient> + constant`` with rational data."""

    gradient: MPoint
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "gradient", mpoint(self.gradient))
        object.__setattr__(self, "constant", rational(self.constant))

    def __call__(self, u) -> Fraction:
        return dot(u, self.gradient) + self.constant


@dataclass(frozen=True)
class Polytope:
    """Bounded rational polyhedron in half-space representation."""

    dim: int
    halfspaces: tuple[HalfSpace, ...]

    def __post_init__(self):
        object.__setattr__(self, "halfspaces", tuple(self.halfspaces))
        for hs in self.halfspaces:
            if len(hs.normal) != self.dim:
                raise DimensionMismatch(
                    f"normal {hs.normal} in ambient dimension {self.dim}"
                )

    # -- vertex enumeration ------------------------------------------------

    @cached_property
    def vertices(self) -> tuple[MPoint, ...]:
        """Exact, duplicate-free, lexicographically sorted vertex set.

        Raises UnboundedPolytope when the recession cone contains a nonzero
        ray and the polyhedron is nonempty; returns () exactly when empty.
        """
        n = self.dim
        ray = self._recession_ray()
        if ray is not None:
            if self._is_empty_by_elimination():
                return ()
            raise UnboundedPolytope(
                f"recession direction {ray} is feasible; not a polytope"
            )
        found: set[MPoint] = set()
        for subset in combinations(range(len(self.halfspaces)), n):
            rows = [list(self.halfspaces[i].normal) for i in subset]
            rhs = [-self.halfspaces[i].offset for i in subset]
            u = solve_linear(rows, rhs)
            if u is None:
                continue
            if all(hs.contains(u) for hs in self.halfspaces):
                found.add(u)
        return tuple(sorted(found))

    def _recession_ray(self):
        """A nonzero direction with <u, v_i> >= 0 for all normals, if any."""
        n = self.dim
        normals = [hs.normal for hs in self.halfspaces]
        if matrix_rank(normals) < n:
            return kernel_vector(normals, n)
        for subset in combinations(range(len(normals)), n - 1):
            sub = [normals[i] for i in subset]
            if subset and matrix_rank(sub) != n - 1:
                continue
            vec = kernel_vector(sub, n)
            if vec is None:
                continue
            for cand in (vec, tuple(-c for c in vec)):
                if all(dot(cand, v) >= 0 for v in normals):
                    return cand
        return None

    def _is_empty_by_elimination(self) -> bool:
        """Exact Fourier-Motzkin feasibility test."""
        ineqs = [
            (tuple(Fraction(c) for c in hs.normal), -hs.offset)
            for hs in self.halfspaces
        ]
        for var in range(self.dim):
            pos = [iq for iq in ineqs if iq[0][var] > 0]
            neg = [iq for iq in ineqs if iq[0][var] < 0]
            rest = [iq for iq in ineqs if iq[0][var] == 0]
            new = list(rest)
            for (a, alpha) in pos:
                for (b, beta) in neg:
                    # a_var * (b-row) + (-b_var) * (a-row): var cancels
                    coeffs = tuple(
                        a[var] * bj - b[var] * aj for aj, bj in zip(a, b)
                    )
                    new.append((coeffs, a[var] * beta - b[var] * alpha))
            ineqs = list(dict.fromkeys(new))
        return any(rhs > 0 for _, rhs in ineqs)

    # -- triangulation -----------------------------------------------------

    @cached_property
    def _tight_sets(self) -> dict[MPoint, frozenset[int]]:
        return {
            v: frozenset(
                i for i, hs in enumerate(self.halfspaces) if hs.is_tight(v)
            )
            for v in self.vertices
        }

    @cached_property
    def simplices(self) -> tuple[tuple[MPoint, ...], ...]:
        """Deterministic triangulation: cone the lex-least vertex of each
        face over the recursively triangulated facets avoiding it."""
        verts = self.vertices
        if not verts:
            return ()
        tight = self._tight_sets

        def rec(face: tuple[MPoint, ...]) -> list[tuple[MPoint, ...]]:
            k = affine_rank(face)
            if len(face) == k + 1:
                return [face]
            apex = face[0]
            out: list[tuple[MPoint, ...]] = []
            seen: set[frozenset] = set()
            for i in range(len(self.halfspaces)):
                sub = tuple(v for v in face if i in tight[v])
                if not sub or apex in sub:
                    continue
                if affine_rank(sub) != k - 1:
                    continue
                key = frozenset(sub)
                if key in seen:
                    continue
                seen.add(key)
                out.extend((apex,) + s for s in rec(sub))
            return out

        return tuple(rec(verts))

    @cached_property
    def is_full_dimensional(self) -> bool:
        return affine_rank(self.vertices) == self.dim

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    # -- measures ----------------------------------------------------------

    @cached_property
    def volume(self) -> Fraction:
        """Exact Euclidean n-volume; 0 iff not full-dimensional."""
        if self.is_empty or not self.is_full_dimensional:
            return Fraction(0)
        total = Fraction(0)
        nfact = 1
        for k in range(2, self.dim + 1):
            nfact *= k
        for simplex in self.simplices:
            base = simplex[0]
            rows = [[a - b for a, b in zip(v, base)] for v in simplex[1:]]
            total += abs(determinant(rows))
        return total / nfact

    @cached_property
    def barycenter(self) -> MPoint:
        """Volume-weighted centroid; exact and triangulation-independent."""
        vol = self.volume
        if vol == 0:
            raise DegeneratePolytope("barycenter needs a full-dimensional polytope")
        acc = [Fraction(0)] * self.dim
        nfact = 1
        for k in range(2, self.dim + 1):
            nfact *= k
        np1 = self.dim + 1
        for simplex in self.simplices:
            base = simplex[0]
            rows = [[a - b for a, b in zip(v, base)] for v in simplex[1:]]
            w = abs(determinant(rows)) / nfact
            for j in range(self.dim):
                acc[j] += w * sum(v[j] for v in simplex) / np1
        return tuple(c / vol for c in acc)

    def integrate_linear(self, functional: AffineFunctional) -> Fraction:
        """Exact integral of an affine functional over the polytope.

        Simplex-wise: volume times the average of the functional at the
        n+1 vertices, which is exact for affine integrands.
        """
        if self.is_empty or not self.is_full_dimensional:
            raise DegeneratePolytope("integral needs a full-dimensional polytope")
        nfact = 1
        for k in range(2, self.dim + 1):
            nfact *= k
        np1 = self.dim + 1
        total = Fraction(0)
        for simplex in self.simplices:
            base = simplex[0]
            rows = [[a - b for a, b in zip(v, base)] for v in simplex[1:]]
            w = abs(determinant(rows)) / nfact
            total += w * sum(functional(v) for v in simplex) / np1
        return total

    def max_linear(self, direction: NVector) -> Fraction:
        """Maximum of ``<u, direction>`` over the polytope (attained at a vertex)."""
        if not self.vertices:
            raise EmptyPolytope("no vertices to optimize over")
        return max(dot(v, direction) for v in self.vertices)

    def lattice_points(self, m: int) -> tuple[NVector, ...]:
        """Integer points of the m-fold dilate, in lexicographic order."""
        if not isinstance(m, int) or m < 1:
            raise ValueError(f"dilation factor must be a positive integer: {m}")
        verts = self.vertices
        if not verts:
            return ()
        lo = [min(v[j] for v in verts) * m for j in range(self.dim)]
        hi = [max(v[j] for v in verts) * m for j in range(self.dim)]
        ranges = [range(ceil(l), floor(h) + 1) for l, h in zip(lo, hi)]
        scaled = [(hs.normal, m * hs.offset) for hs in self.halfspaces]
        points = []
        for cand in product(*ranges):
            if all(dot(cand, nrm) >= -off for nrm, off in scaled):
                points.append(cand)
        return tuple(points)

    def contains(self, u: MPoint) -> bool:
        return all(hs.contains(u) for hs in self.halfspaces)

    def affine_image(self, scale, shift: MPoint) -> "Polytope":
        """Half-space data of ``scale * P + shift`` for positive scale."""
        beta = rational(scale)
        if beta <= 0:
            raise ValueError(f"scale must be positive: {beta}")
        shift = mpoint(shift)
        if len(shift) != self.dim:
            raise DimensionMismatch("shift has wrong dimension")
        moved = tuple(
            HalfSpace(hs.normal, beta * hs.offset - dot(shift, hs.normal))
            for hs in self.halfspaces
        )
        return Polytope(self.dim, moved)

    def dilate(self, k) -> "Polytope":
        return self.affine_image(k, (Fraction(0),) * self.dim)
