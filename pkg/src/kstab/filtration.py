"""Weight filtrations of graded section spaces and their combinatorics.

Filtrations are diagonal in the monomial basis, so a filtration of the
degree-m piece is just a multiset of nonnegative weights, one per basis
vector (per lattice point of the m-fold dilated moment polytope in the
toric realization). The jumping numbers are the sorted weights; their
scaled average and scaled maximum are the level-m expected and maximal
vanishing of the filtration, and rounding every weight down gives the
induced integer filtration with the classical level-m identities.

The minimal extension of an integer filtration from level m' to the whole
section ring is computed Minkowski-style: the degree-m piece of weight >= p
is a union over factor counts k of (sums of k weighted level-m' points)
plus a point of the residual dilate. A max-plus dynamic program over k
produces the induced weights directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor, gcd

from .errors import (
    CombinatorialBlowup,
    ConsistencyError,
    DimensionTooLarge,
    EmptyLinearSystem,
    NotLogFano,
)
from .geometry import NVector, dot, rational
from .ideals import (
    BudgetMeter,
    MonomialIdeal,
    gord_stabilize,
    lct_graded_sequence,
)
from .invariants import alpha, delta_m_toric, ray_invariants
from .toric import ToricPairSpec, moment_polytope


@dataclass(frozen=True)
class GradedWeights:
    """Weights of a diagonal filtration of the degree-m section space.

    ``points``, when present, names the monomial basis vector carrying each
    weight; abstract multisets leave it None.
    """

    degree: int
    weights: tuple[Fraction, ...]
    points: tuple[NVector, ...] | None = None

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1: {self.degree}")
        object.__setattr__(self, "weights", tuple(rational(w) for w in self.weights))
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if self.points is not None:
            pts = tuple(tuple(int(c) for c in p) for p in self.points)
            if len(pts) != len(self.weights):
                raise ValueError("one weight per basis point required")
            object.__setattr__(self, "points", pts)

    @property
    def basis_size(self) -> int:
        return len(self.weights)

    @property
    def is_integral(self) -> bool:
        return all(w.denominator == 1 for w in self.weights)

    @property
    def is_trivial(self) -> bool:
        return all(w == 0 for w in self.weights)


def jumping_numbers(f: GradedWeights) -> tuple[Fraction, ...]:
    """Sorted weight multiset ``a_{m,1} <= ... <= a_{m,N_m}``."""
    return tuple(sorted(f.weights))


def s_m(f: GradedWeights) -> Fraction:
    """Scaled average of the jumping numbers."""
    if not f.weights:
        raise EmptyLinearSystem("empty basis")
    return sum(f.weights, Fraction(0)) / (f.degree * len(f.weights))


def t_m(f: GradedWeights) -> Fraction:
    """Scaled maximal jumping number."""
    if not f.weights:
        raise EmptyLinearSystem("empty basis")
    return max(f.weights) / f.degree


def round_to_integers(f: GradedWeights) -> GradedWeights:
    """Induced integer filtration: every weight drops to its floor.

    The exact identities ``t_m(rounded) = floor(m t_m(f)) / m`` and
    ``s_m(f) - 1/m <= s_m(rounded) <= s_m(f)`` are verified before
    returning.
    """
    rounded = GradedWeights(
        f.degree, tuple(Fraction(floor(w)) for w in f.weights), f.points
    )
    m = f.degree
    if t_m(rounded) != Fraction(floor(m * t_m(f)), m):
        raise ConsistencyError("integer rounding broke the scaled-maximum identity")
    if not (s_m(f) - Fraction(1, m) <= s_m(rounded) <= s_m(f)):
        raise ConsistencyError("integer rounding left the scaled-average band")
    return rounded


def ray_filtration(spec: ToricPairSpec, ray_index: int, m: int) -> GradedWeights:
    """Vanishing-order weights ``<x, v_i> + m c_i`` on the level-m basis."""
    ray = spec.rays[ray_index]
    c = spec.polarization[ray_index]
    points = moment_polytope(spec).lattice_points(m)
    if not points:
        raise EmptyLinearSystem(f"no lattice points in the {m}-fold dilate")
    weights = tuple(dot(x, ray) + m * c for x in points)
    return GradedWeights(m, weights, points)


def extend_filtration(
    f: GradedWeights, spec: ToricPairSpec, m: int, meter: BudgetMeter | None = None
) -> GradedWeights:
    """Weights at level m of the minimal whole-ring extension of ``f``.

    ``f`` must be an integer filtration on the lattice points of its level.
    Degrees below ``f.degree`` carry the trivial filtration; the original
    level is reproduced verbatim.
    """
    if f.points is None:
        raise ValueError("extension needs the point-to-weight assignment")
    if not f.is_integral:
        raise ValueError("extension is defined for integer filtrations")
    if m < 1:
        raise ValueError("target degree must be >= 1")
    if meter is None:
        meter = BudgetMeter(CombinatorialBlowup, context="extend_filtration")
    poly = moment_polytope(spec)
    target_points = poly.lattice_points(m)
    if m < f.degree:
        return GradedWeights(m, (Fraction(0),) * len(target_points), target_points)
    weighted = {
        p: int(w) for p, w in zip(f.points, f.weights) if w >= 1
    }
    best = {p: 0 for p in target_points}
    scaled_facets = [
        (hs.normal, hs.offset) for hs in poly.halfspaces
    ]

    def residual_contains(z, k: int) -> bool:
        cap = m - k * f.degree
        return all(dot(z, nrm) >= -cap * off for nrm, off in scaled_facets)

    layer: dict[tuple[int, ...], int] = {(0,) * spec.dim: 0}
    k = 0
    while (k + 1) * f.degree <= m and weighted:
        k += 1
        nxt: dict[tuple[int, ...], int] = {}
        for y, s in layer.items():
            for p, w in weighted.items():
                meter.charge()
                key = tuple(a + b for a, b in zip(y, p))
                val = s + w
                if nxt.get(key, -1) < val:
                    nxt[key] = val
        layer = nxt
        for x in target_points:
            for y, s in layer.items():
                if s <= best[x]:
                    continue
                meter.charge()
                z = tuple(a - b for a, b in zip(x, y))
                if residual_contains(z, k):
                    best[x] = s
    return GradedWeights(
        m, tuple(Fraction(best[x]) for x in target_points), target_points
    )


# -- chart realization of base ideals ---------------------------------------


def complete_to_basis(ray: NVector) -> tuple[NVector, ...]:
    """A lattice basis whose first vector is the given primitive ray (n <= 2)."""
    n = len(ray)
    if n == 1:
        return (ray,)
    if n == 2:
        a, b = ray
        g = gcd(abs(a), abs(b))
        if g != 1:
            raise ValueError(f"ray {ray} is not primitive")
        # extended gcd: s*a + t*b = 1, second basis vector (-t, s)
        s, t = _bezout(a, b)
        return (ray, (-t, s))
    raise DimensionTooLarge("chart bases are implemented for n <= 2")


def _bezout(a: int, b: int) -> tuple[int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_s, old_t = -old_s, -old_t
    return old_s, old_t


def chart_exponents(
    spec: ToricPairSpec, ray_index: int, m: int
) -> dict[NVector, tuple[int, ...]]:
    """Exponent vectors of the level-m basis on the chart adapted to a ray.

    First coordinate is the exact vanishing order along the ray divisor
    (requires ``m * c_i`` integral); the remaining coordinates are the
    pairings against the completed basis, translated to be nonnegative.
    """
    ray = spec.rays[ray_index]
    c = spec.polarization[ray_index]
    if (m * c).denominator != 1:
        raise ValueError(
            f"chart exponents need integral m*c; got m={m}, c={c}"
        )
    basis = complete_to_basis(ray)
    points = moment_polytope(spec).lattice_points(m)
    if not points:
        raise EmptyLinearSystem(f"no lattice points in the {m}-fold dilate")
    shifts = [int(m * c)]
    for vec in basis[1:]:
        shifts.append(-min(dot(x, vec) for x in points))
    table = {}
    for x in points:
        table[x] = tuple(
            int(dot(x, vec) + shift) for vec, shift in zip(basis, shifts)
        )
    return table


@dataclass(frozen=True)
class SandwichCandidate:
    ray_index: int
    s_level: Fraction
    lct_value: Fraction
    ratio: Fraction
    stabilization_level: int


@dataclass(frozen=True)
class DeltaHatReport:
    degree: int
    delta_m: Fraction
    alpha: Fraction
    delta_hat_candidates: Fraction
    candidates: tuple[SandwichCandidate, ...]
    lower_bound: Fraction   # 1/delta_m - 1/(m alpha)
    upper_bound: Fraction   # 1/delta_m
    lower_ok: bool
    upper_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def delta_hat_sandwich_check(
    spec: ToricPairSpec, m: int, gord_power: int = 3
) -> DeltaHatReport:
    """Filtration route to the level-m threshold, checked against the
    two-sided bound ``1/delta_m - 1/(m alpha) <= 1/delta_hat <= 1/delta_m``.

    Candidates are the integer filtrations induced by the ray valuations
    rescaled to maximal vanishing at most 1 (weights floor(w / T_i)); each
    one is extended minimally to the section ring, its base-ideal sequence
    is realized on the ray-adapted chart, and the lct comes from the
    stabilization shortcut. Trivial candidates are excluded.
    """
    if spec.dim > 2:
        raise DimensionTooLarge("the sandwich check is budgeted for n <= 2")
    if not spec.log_fano_mode:
        raise NotLogFano("the sandwich check is defined for log Fano pairs")
    inv = ray_invariants(spec)
    d_m = delta_m_toric(spec, m)
    a = alpha(spec)
    meter = BudgetMeter(CombinatorialBlowup, context="delta_hat_sandwich_check")
    candidates = []
    for i in range(spec.ray_count):
        t_i = inv.max_vanishing[i]
        raw = ray_filtration(spec, i, m)
        scaled = GradedWeights(
            m,
            tuple(Fraction(floor(w / t_i)) for w in raw.weights),
            raw.points,
        )
        if scaled.is_trivial:
            continue
        level = int(max(scaled.weights))
        exps = chart_exponents(spec, i, m)
        step_ideals = []
        for j in range(1, level + 1):
            gens = [
                exps[p]
                for p, w in zip(scaled.points, scaled.weights)
                if w >= j
            ]
            meter.charge(len(gens))
            step_ideals.append(MonomialIdeal(frozenset(gens)))
        n_level, seq = gord_stabilize(step_ideals, gord_power)
        chart_boundary = (spec.boundary[i],) + (Fraction(0),) * (spec.dim - 1)
        lct = lct_graded_sequence(seq, chart_boundary)
        s_val = s_m(scaled)
        candidates.append(
            SandwichCandidate(i, s_val, lct, lct / s_val, n_level)
        )
    if not candidates:
        raise EmptyLinearSystem(
            f"every rescaled ray filtration is trivial at level {m}"
        )
    d_hat = min(c.ratio for c in candidates)
    lower = 1 / d_m - 1 / (m * a)
    upper = 1 / d_m
    inv_hat = 1 / d_hat
    return DeltaHatReport(
        degree=m,
        delta_m=d_m,
        alpha=a,
        delta_hat_candidates=d_hat,
        candidates=tuple(candidates),
        lower_bound=lower,
        upper_bound=upper,
        lower_ok=lower <= inv_hat,
        upper_ok=inv_hat <= upper,
    )
