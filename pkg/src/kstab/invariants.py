"""Stability invariants of polarized toric pairs.

For each ray the pair carries three exact rationals: the log discrepancy
``A_i = 1 - b_i``, the expected vanishing ``S_i = <ubar, v_i> + c_i`` (ubar
the moment-polytope barycenter) and the maximal vanishing
``T_i = max_P <., v_i> + c_i``. The stability threshold is
``delta = min_i A_i / S_i`` and the global log canonical threshold is
``alpha = min_i A_i / T_i``; the alpha-family values are reported as
toric-reduced (restricted to torus-invariant data), which bounds the
unrestricted invariants from above.

delta carries a second, independent derivation in log Fano mode: with
``c`` the largest rational such that ``-c * ubar`` still lies in the
polytope, ``delta = c / (1 + c)`` (and 1 when the barycenter is the
origin). Both routes are always computed and compared exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    AlreadySemistable,
    ConsistencyError,
    EmptyLinearSystem,
    NegativeCoefficient,
    NotLogFano,
)
from .geometry import POS_INFINITY, AffineFunctional, dot, mpoint, rational, scale_point
from .toric import (
    ToricDivisor,
    ToricPairSpec,
    attach_boundary,
    divisor_from_point,
    moment_polytope,
)


@dataclass(frozen=True)
class RayInvariants:
    """Per-ray exact invariants; all tuples are indexed like the rays."""

    log_discrepancy: tuple[Fraction, ...]   # A_i = 1 - b_i
    expected_vanishing: tuple[Fraction, ...]  # S_i
    max_vanishing: tuple[Fraction, ...]       # T_i


class Classification(enum.Enum):
    UNIFORMLY_K_STABLE = "UniformlyKStable"
    K_SEMISTABLE_BOUNDARY = "KSemistableBoundary"
    NOT_K_SEMISTABLE = "NotKSemistable"


@dataclass(frozen=True)
class Verdict:
    delta: Fraction
    classification: Classification
    witness_ray: int


@dataclass(frozen=True)
class SandwichReport:
    """alpha <= delta <= (n+1) alpha, and ((n+1)/n) alpha <= delta for ample L."""

    alpha: Fraction
    delta: Fraction
    dim: int
    lower_ok: bool
    upper_ok: bool
    ample_lower_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.lower_ok and self.upper_ok and self.ample_lower_ok


def ray_invariants(spec: ToricPairSpec) -> RayInvariants:
    poly = moment_polytope(spec)
    ubar = poly.barycenter
    a = tuple(Fraction(1) - b for b in spec.boundary)
    s = tuple(dot(ubar, ray) + c for ray, c in zip(spec.rays, spec.polarization))
    t = tuple(poly.max_linear(ray) + c for ray, c in zip(spec.rays, spec.polarization))
    for si, ti, ai in zip(s, t, a):
        if not (0 < si <= ti) or not (0 < ai <= 1):
            raise ConsistencyError(f"invariant ranges violated: A={ai} S={si} T={ti}")
    return RayInvariants(a, s, t)


def _argmin_ratio(numerators, denominators) -> tuple[Fraction, int]:
    best, best_i = None, -1
    for i, (num, den) in enumerate(zip(numerators, denominators)):
        val = num / den
        if best is None or val < best:
            best, best_i = val, i
    return best, best_i


def delta(spec: ToricPairSpec) -> Fraction:
    """Stability threshold ``min_i A_i / S_i``, exact."""
    inv = ray_invariants(spec)
    val, _ = _argmin_ratio(inv.log_discrepancy, inv.expected_vanishing)
    if spec.log_fano_mode:
        other = delta_barycentric(spec)
        if other != val:
            raise ConsistencyError(
                f"min-formula delta {val} != barycentric delta {other}"
            )
    return val


def delta_barycentric(spec: ToricPairSpec) -> Fraction:
    """delta via the barycenter route; only defined in log Fano mode."""
    if not spec.log_fano_mode:
        raise NotLogFano("barycentric formula needs the log Fano polarization")
    ubar = moment_polytope(spec).barycenter
    if all(x == 0 for x in ubar):
        return Fraction(1)
    c = None
    for ray, b in zip(spec.rays, spec.boundary):
        pairing = dot(ubar, ray)
        if pairing > 0:
            bound = (Fraction(1) - b) / pairing
            if c is None or bound < c:
                c = bound
    if c is None:
        raise ConsistencyError("bounded polytope must bound -c*ubar eventually")
    return c / (1 + c)


def alpha(spec: ToricPairSpec) -> Fraction:
    """Global log canonical threshold ``min_i A_i / T_i`` (toric-reduced)."""
    inv = ray_invariants(spec)
    val, _ = _argmin_ratio(inv.log_discrepancy, inv.max_vanishing)
    return val


def lct_invariant_divisor(spec: ToricPairSpec, div: ToricDivisor, scale=1):
    """lct of a torus-invariant effective divisor, ``min_i A_i / (scale a_i)``.

    Returns the +infinity sentinel for the zero divisor.
    """
    scale = rational(scale)
    if scale <= 0:
        raise ValueError(f"scale must be positive: {scale}")
    if any(a < 0 for a in div.coeffs):
        raise NegativeCoefficient(f"divisor {div.coeffs} has a negative coefficient")
    if div.is_zero:
        return POS_INFINITY
    best = None
    for b, a in zip(spec.boundary, div.coeffs):
        if a > 0:
            val = (Fraction(1) - b) / (scale * a)
            if best is None or val < best:
                best = val
    return best


def alpha_m(spec: ToricPairSpec, m: int) -> Fraction:
    """Level-m alpha over torus-invariant members of the m-th linear system.

    Minimizes ``m * lct`` of ``(1/m) D_w`` over the lattice points w of the
    m-fold dilated moment polytope.
    """
    points = moment_polytope(spec).lattice_points(m)
    if not points:
        raise EmptyLinearSystem(f"no lattice points in the {m}-fold dilate")
    best = None
    for w in points:
        for ray, b, c in zip(spec.rays, spec.boundary, spec.polarization):
            denom = dot(w, ray) + m * c
            if denom > 0:
                val = m * (Fraction(1) - b) / denom
                if best is None or val < best:
                    best = val
    if best is None:
        raise ConsistencyError("a full-dimensional dilate has positive facet slacks")
    return best


def expected_vanishing_m(spec: ToricPairSpec, m: int) -> tuple[Fraction, ...]:
    """Per-ray level-m expected vanishing: lattice-point average of the slacks."""
    points = moment_polytope(spec).lattice_points(m)
    if not points:
        raise EmptyLinearSystem(f"no lattice points in the {m}-fold dilate")
    n_m = len(points)
    sums = []
    for ray, c in zip(spec.rays, spec.polarization):
        total = sum((dot(w, ray) + m * c for w in points), Fraction(0))
        sums.append(total / (m * n_m))
    return tuple(sums)


def delta_m_toric(spec: ToricPairSpec, m: int) -> Fraction:
    """Level-m stability threshold over monomial bases, ``min_i A_i / S_{m,i}``."""
    s_m = expected_vanishing_m(spec, m)
    best = None
    for b, s in zip(spec.boundary, s_m):
        if s > 0:
            val = (Fraction(1) - b) / s
            if best is None or val < best:
                best = val
    if best is None:
        raise EmptyLinearSystem(f"level-{m} filtration is trivial on every ray")
    return best


def verdict(spec: ToricPairSpec) -> Verdict:
    """Exact trichotomy by the sign of delta - 1."""
    if not spec.log_fano_mode:
        raise NotLogFano("verdicts are defined for log Fano pairs")
    inv = ray_invariants(spec)
    val, witness = _argmin_ratio(inv.log_discrepancy, inv.expected_vanishing)
    other = delta_barycentric(spec)
    if other != val:
        raise ConsistencyError(f"delta routes disagree: {val} vs {other}")
    if val > 1:
        cls = Classification.UNIFORMLY_K_STABLE
    elif val == 1:
        cls = Classification.K_SEMISTABLE_BOUNDARY
    else:
        cls = Classification.NOT_K_SEMISTABLE
    return Verdict(val, cls, witness)


def dstar(spec: ToricPairSpec) -> ToricDivisor:
    """The destabilizing-direction divisor ``D_{-c ubar}``.

    Attaching it with weight ``1 - delta`` recenters the barycenter at the
    origin and raises delta to exactly 1; both facts are verified before
    returning.
    """
    if not spec.log_fano_mode:
        raise NotLogFano("dstar is defined for log Fano pairs")
    poly = moment_polytope(spec)
    ubar = poly.barycenter
    if all(x == 0 for x in ubar):
        raise AlreadySemistable("barycenter is the origin; delta is already 1")
    c = None
    for ray, b in zip(spec.rays, spec.boundary):
        pairing = dot(ubar, ray)
        if pairing > 0:
            bound = (Fraction(1) - b) / pairing
            if c is None or bound < c:
                c = bound
    div = divisor_from_point(spec, scale_point(-c, ubar))
    d = c / (1 + c)
    balanced = attach_boundary(spec, div, 1 - d)
    new_bary = moment_polytope(balanced).barycenter
    if any(x != 0 for x in new_bary) or delta(balanced) != 1:
        raise ConsistencyError("balanced pair must have delta 1 and centered barycenter")
    return div


def interpolation_delta(spec: ToricPairSpec, u, beta) -> Fraction:
    """delta of the pair interpolated towards ``D_u`` with parameter beta.

    Requires beta in (0, 1]; the result never exceeds ``delta(spec) / beta``
    (verified exactly).
    """
    beta = rational(beta)
    if not (0 < beta <= 1):
        raise ValueError(f"beta must lie in (0, 1]: {beta}")
    u = mpoint(u)
    div = divisor_from_point(spec, u)
    interpolated = attach_boundary(spec, div, 1 - beta)
    val = delta(interpolated)
    if val > delta(spec) / beta:
        raise ConsistencyError(
            f"interpolated delta {val} exceeds the bound {delta(spec) / beta}"
        )
    return val


def sw_beta_bound(spec: ToricPairSpec, m: int) -> Fraction:
    """Conical-interpolation stability margin ``(m-1) d / (m - d)``, d = min(1, delta)."""
    if not spec.log_fano_mode:
        raise NotLogFano("the interpolation bound is defined for log Fano pairs")
    if not isinstance(m, int) or m < 2:
        raise ValueError(f"m must be an integer >= 2: {m}")
    d = min(Fraction(1), delta(spec))
    return (m - 1) * d / (m - d)


def sandwich_report(spec: ToricPairSpec) -> SandwichReport:
    a = alpha(spec)
    d = delta(spec)
    n = spec.dim
    return SandwichReport(
        alpha=a,
        delta=d,
        dim=n,
        lower_ok=a <= d,
        upper_ok=d <= (n + 1) * a,
        ample_lower_ok=Fraction(n + 1, n) * a <= d,
    )
