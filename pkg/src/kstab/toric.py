"""Polarized toric pairs and torus-invariant divisors.

A pair is specified by its fan rays ``v_i`` (primitive integer vectors),
boundary coefficients ``b_i`` in [0, 1) and polarization coefficients
``c_i``. Its moment polytope is the intersection of the half-spaces
``<u, v_i> >= -c_i``; all invariants downstream are functions of that
polytope and the coefficient vectors.

In log Fano mode the polarization is pinned to ``c_i = 1 - b_i`` (the anti
log canonical one) and the origin must be an interior point of the moment
polytope.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from math import gcd

from .errors import (
    ConsistencyError,
    DegeneratePolytope,
    NegativeCoefficient,
    NotKlt,
    NotLogFano,
    NotPrimitive,
    PointOutsidePolytope,
)
from .geometry import (
    HalfSpace,
    MPoint,
    NVector,
    Polytope,
    dot,
    matrix_rank,
    mpoint,
    rational,
    scale_point,
    solve_linear,
)


@dataclass(frozen=True)
class ToricPairSpec:
    dim: int
    rays: tuple[NVector, ...]
    boundary: tuple[Fraction, ...]
    polarization: tuple[Fraction, ...]
    log_fano_mode: bool = True

    def __post_init__(self):
        object.__setattr__(self, "rays", tuple(tuple(int(c) for c in r) for r in self.rays))
        object.__setattr__(self, "boundary", tuple(rational(b) for b in self.boundary))
        object.__setattr__(self, "polarization", tuple(rational(c) for c in self.polarization))

    @property
    def ray_count(self) -> int:
        return len(self.rays)


@dataclass(frozen=True)
class ToricDivisor:
    """Coefficient vector of a torus-invariant divisor, tied to a pair spec."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(rational(a) for a in self.coeffs))

    @property
    def is_effective(self) -> bool:
        return all(a >= 0 for a in self.coeffs)

    @property
    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coeffs)


def toric_pair(rays, boundary=None, polarization=None) -> ToricPairSpec:
    """Build and validate a pair spec, defaulting to the log Fano polarization."""
    rays = tuple(tuple(int(c) for c in r) for r in rays)
    if not rays:
        raise NotPrimitive("at least one ray is required")
    dim = len(rays[0])
    if boundary is None:
        boundary = (Fraction(0),) * len(rays)
    boundary = tuple(rational(b) for b in boundary)
    if polarization is None:
        polarization = tuple(Fraction(1) - b for b in boundary)
        log_fano = True
    else:
        polarization = tuple(rational(c) for c in polarization)
        log_fano = polarization == tuple(Fraction(1) - b for b in boundary)
    return validate(
        ToricPairSpec(dim, rays, boundary, polarization, log_fano_mode=log_fano)
    )


def validate(spec: ToricPairSpec) -> ToricPairSpec:
    """Check every structural invariant; returns the spec unchanged."""
    d = spec.ray_count
    if d < spec.dim + 1:
        raise NotPrimitive(
            f"{d} rays cannot present a complete fan in dimension {spec.dim}"
        )
    if len(spec.boundary) != d or len(spec.polarization) != d:
        raise NotKlt("boundary/polarization length must match the ray count")
    for ray in spec.rays:
        if len(ray) != spec.dim:
            raise NotPrimitive(f"ray {ray} has wrong dimension")
        if all(c == 0 for c in ray):
            raise NotPrimitive("zero ray")
        if gcd(*(abs(c) for c in ray)) != 1:
            raise NotPrimitive(f"ray {ray} is not primitive")
    if len(set(spec.rays)) != d:
        raise NotPrimitive("duplicate rays")
    for b in spec.boundary:
        if not (0 <= b < 1):
            raise NotKlt(f"boundary coefficient {b} outside [0, 1)")
    if spec.log_fano_mode:
        for b, c in zip(spec.boundary, spec.polarization):
            if c != 1 - b:
                raise NotLogFano(
                    "log Fano mode requires the anti log canonical polarization"
                )
        if any(c <= 0 for c in spec.polarization):
            raise NotLogFano("origin is not interior to the moment polytope")
    poly = moment_polytope(spec)
    poly.vertices  # raises PolytopeUnbounded when the recession cone is nonzero
    if not poly.is_full_dimensional:
        raise DegeneratePolytope("moment polytope is not full-dimensional")
    return spec


@lru_cache(maxsize=None)
def moment_polytope(spec: ToricPairSpec) -> Polytope:
    """``P = {u : <u, v_i> >= -c_i for all rays}``."""
    return Polytope(
        spec.dim,
        tuple(HalfSpace(ray, c) for ray, c in zip(spec.rays, spec.polarization)),
    )


def divisor_from_point(spec: ToricPairSpec, u: MPoint) -> ToricDivisor:
    """The effective divisor with coefficients ``<u, v_i> + c_i``.

    Defined exactly for rational points of the moment polytope; the
    coefficients are the facet slacks, so effectivity characterizes
    membership.
    """
    u = mpoint(u)
    coeffs = tuple(dot(u, ray) + c for ray, c in zip(spec.rays, spec.polarization))
    if any(a < 0 for a in coeffs):
        raise PointOutsidePolytope(f"{u} violates a facet inequality")
    return ToricDivisor(coeffs)


def point_from_divisor(spec: ToricPairSpec, div: ToricDivisor):
    """Invert divisor_from_point when possible: the u with <u, v_i> = a_i - c_i.

    Returns None when the divisor is not rationally equivalent to the
    polarization (the overdetermined system has no solution).
    """
    targets = [a - c for a, c in zip(div.coeffs, spec.polarization)]
    rows, rhs = [], []
    for ray, t in zip(spec.rays, targets):
        if matrix_rank(rows + [list(ray)]) > len(rows):
            rows.append(list(ray))
            rhs.append(t)
        if len(rows) == spec.dim:
            break
    if len(rows) < spec.dim:
        return None
    u = solve_linear(rows, rhs)
    if u is None:
        return None
    for ray, t in zip(spec.rays, targets):
        if dot(u, ray) != t:
            return None
    return u


def attach_boundary(spec: ToricPairSpec, div: ToricDivisor, weight) -> ToricPairSpec:
    """New pair with boundary ``b_i + t * a_i`` and the matching polarization.

    In log Fano mode this realizes interpolation towards the divisor: when
    the divisor comes from a point u of the moment polytope and t = 1 - beta,
    the new moment polytope is exactly ``beta * P + (1 - beta) * u`` (checked
    internally).
    """
    t = rational(weight)
    if not spec.log_fano_mode:
        raise NotLogFano("attach_boundary requires log Fano mode")
    if t < 0:
        raise NotKlt(f"negative weight {t}")
    if len(div.coeffs) != spec.ray_count:
        raise NotKlt("divisor does not match the ray count")
    if not div.is_effective:
        raise NegativeCoefficient(f"divisor {div.coeffs} is not effective")
    new_boundary = tuple(b + t * a for b, a in zip(spec.boundary, div.coeffs))
    for b in new_boundary:
        if b >= 1:
            raise NotKlt(f"interpolated coefficient {b} >= 1")
        if b < 0:
            raise NotKlt(f"interpolated coefficient {b} < 0")
    new_polarization = tuple(Fraction(1) - b for b in new_boundary)
    new_spec = validate(
        replace(spec, boundary=new_boundary, polarization=new_polarization)
    )
    if t <= 1:
        u = point_from_divisor(spec, div)
        if u is not None and moment_polytope(spec).contains(u):
            beta = 1 - t
            expected = moment_polytope(spec).affine_image(
                beta, scale_point(t, u)
            ) if beta > 0 else None
            if expected is not None:
                got = moment_polytope(new_spec)
                same = all(
                    g.normal == e.normal and g.offset == e.offset
                    for g, e in zip(got.halfspaces, expected.halfspaces)
                )
                if not same:
                    raise ConsistencyError(
                        "interpolated moment polytope disagrees with the affine image"
                    )
    return new_spec
