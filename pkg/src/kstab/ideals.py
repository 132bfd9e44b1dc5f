"""Monomial ideal combinatorics on a smooth affine chart.

Ideals are stored by their unique minimal generating set, an antichain of
exponent vectors under componentwise order. Products are Minkowski sums of
generator sets followed by minimalization; sums are unions. The log
canonical threshold of a monomial ideal against a boundary with
coefficients ``b`` in [0,1)^n is read off the Newton polyhedron: the
largest ``t`` with ``(1-b_1, ..., 1-b_n)`` inside ``t`` times the
polyhedron, computed by exact enumeration of supporting hyperplanes.

Graded sequences ``b_p = sum over (sum i * e_i = p) of a_1^{e_1} ... a_r^{e_r}``
stabilize: some level N has ``b_{Np} = b_N^p`` for every p. The search for
the smallest such N (verified up to a requested power) produces the
certificate that licenses the shortcut ``lct(b_.) = N * lct(b_N)``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import (
    ConsistencyError,
    NoCertificate,
    SearchBudgetExceeded,
    ZeroIdeal,
)
from .geometry import (
    POS_INFINITY,
    dot,
    kernel_vector,
    matrix_rank,
    rational,
)

DEFAULT_BUDGET = 10_000_000


def combinatorial_budget() -> int:
    """Elementary-operation cap, overridable via KSTAB_BUDGET."""
    raw = os.environ.get("KSTAB_BUDGET", "")
    return int(raw) if raw.strip() else DEFAULT_BUDGET


class BudgetMeter:
    """Counts elementary monomial operations against a hard cap."""

    def __init__(self, error_cls, cap: int | None = None, context: str = ""):
        self.spent = 0
        self.cap = combinatorial_budget() if cap is None else cap
        self.error_cls = error_cls
        self.context = context

    def charge(self, amount: int = 1):
        self.spent += amount
        if self.spent > self.cap:
            raise self.error_cls(
                f"{self.context}: exceeded budget of {self.cap} elementary operations"
            )


def _minimalize(vectors) -> frozenset[tuple[int, ...]]:
    """Antichain of componentwise-minimal vectors."""
    uniq = sorted(set(vectors))
    keep: list[tuple[int, ...]] = []
    for v in uniq:
        if any(all(g <= x for g, x in zip(k, v)) for k in keep):
            continue
        keep = [k for k in keep if not all(x <= g for x, g in zip(v, k))]
        keep.append(v)
    return frozenset(keep)


@dataclass(frozen=True)
class MonomialIdeal:
    gens: frozenset[tuple[int, ...]]

    def __post_init__(self):
        gens = []
        for g in self.gens:
            vec = tuple(int(e) for e in g)
            if any(e < 0 for e in vec):
                raise ZeroIdeal(f"exponent vector {vec} has a negative entry")
            gens.append(vec)
        dims = {len(g) for g in gens}
        if len(dims) > 1:
            raise ZeroIdeal("mixed exponent-vector lengths")
        object.__setattr__(self, "gens", _minimalize(gens))

    @classmethod
    def of(cls, *gens) -> "MonomialIdeal":
        return cls(frozenset(tuple(g) for g in gens))

    @property
    def nvars(self) -> int:
        return len(next(iter(self.gens))) if self.gens else 0

    @property
    def is_zero(self) -> bool:
        return not self.gens

    @property
    def is_unit(self) -> bool:
        return any(all(e == 0 for e in g) for g in self.gens)

    def sorted_gens(self) -> list[tuple[int, ...]]:
        return sorted(self.gens)

    def contains_exponent(self, e) -> bool:
        e = tuple(int(x) for x in e)
        return any(all(g <= x for g, x in zip(gen, e)) for gen in self.gens)

    def __le__(self, other: "MonomialIdeal") -> bool:
        """Ideal containment: self is a subideal of other."""
        return all(other.contains_exponent(g) for g in self.gens)

    def __add__(self, other: "MonomialIdeal") -> "MonomialIdeal":
        return MonomialIdeal(self.gens | other.gens)

    def __mul__(self, other: "MonomialIdeal") -> "MonomialIdeal":
        if self.is_zero or other.is_zero:
            return MonomialIdeal(frozenset())
        prods = {
            tuple(a + b for a, b in zip(g, h))
            for g in self.gens
            for h in other.gens
        }
        return MonomialIdeal(frozenset(prods))

    def __pow__(self, k: int) -> "MonomialIdeal":
        if k < 0:
            raise ValueError("negative ideal power")
        result = MonomialIdeal.of(tuple([0] * self.nvars))
        for _ in range(k):
            result = result * self
        return result


@dataclass(frozen=True)
class StabilizationCertificate:
    """Witness that ``b_{Np} = b_N^p`` held for all p up to power_checked."""

    level: int
    power_checked: int


@dataclass(frozen=True)
class GradedIdealSequence:
    """The ideals ``b_p`` for p = 1..p_max, plus an optional certificate."""

    ideals: tuple[MonomialIdeal, ...]  # index p-1 holds b_p
    certificate: StabilizationCertificate | None = None

    def level(self, p: int) -> MonomialIdeal:
        if not (1 <= p <= len(self.ideals)):
            raise KeyError(f"level {p} not stored (have 1..{len(self.ideals)})")
        return self.ideals[p - 1]

    @property
    def p_max(self) -> int:
        return len(self.ideals)


def base_ideal_sequence(
    sources, p_max: int, meter: BudgetMeter | None = None
) -> GradedIdealSequence:
    """``b_p = sum over compositions sum(i * e_i) = p of prod a_i^{e_i}``.

    Computed by the recursion ``b_p = sum_i a_i * b_{p-i}`` (with ``b_0`` the
    unit ideal), which reaches every composition. The graded-sequence axiom
    ``b_p * b_q <= b_{p+q}`` is verified on the stored range.
    """
    sources = tuple(sources)
    if not sources:
        raise ZeroIdeal("no source ideals")
    for a in sources:
        if a.is_zero:
            raise ZeroIdeal("source ideals must be nonzero")
    if meter is None:
        meter = BudgetMeter(SearchBudgetExceeded, context="base_ideal_sequence")
    nvars = sources[0].nvars
    unit = MonomialIdeal.of(tuple([0] * nvars))
    levels: list[MonomialIdeal] = [unit]
    for p in range(1, p_max + 1):
        acc = MonomialIdeal(frozenset())
        for i, a in enumerate(sources, start=1):
            if i > p:
                break
            meter.charge(len(a.gens) * max(1, len(levels[p - i].gens)))
            acc = acc + a * levels[p - i]
        levels.append(acc)
    seq = GradedIdealSequence(tuple(levels[1:]))
    for p in range(1, p_max + 1):
        for q in range(p, p_max + 1 - p):
            meter.charge(len(seq.level(p).gens) * len(seq.level(q).gens))
            if not (seq.level(p) * seq.level(q)) <= seq.level(p + q):
                raise ConsistencyError(f"graded axiom fails at ({p}, {q})")
    return seq


def gord_stabilize(
    sources, p_max: int, level_bound: int = 24
) -> tuple[int, GradedIdealSequence]:
    """Smallest N <= level_bound with ``b_{Np} = b_N^p`` for all p <= p_max.

    Equality is exact comparison of minimal generating sets. Raises
    SearchBudgetExceeded with the largest level tried when no N within the
    bound passes; the result is never silently truncated.
    """
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    meter = BudgetMeter(SearchBudgetExceeded, context="gord_stabilize")
    for n in range(1, level_bound + 1):
        seq = base_ideal_sequence(sources, n * p_max, meter=meter)
        b_n = seq.level(n)
        ok = True
        power = MonomialIdeal.of(tuple([0] * b_n.nvars))
        for p in range(1, p_max + 1):
            meter.charge(len(power.gens) * len(b_n.gens))
            power = power * b_n
            if power.gens != seq.level(n * p).gens:
                ok = False
                break
        if ok:
            return n, GradedIdealSequence(
                seq.ideals, StabilizationCertificate(n, p_max)
            )
    raise SearchBudgetExceeded(
        f"no stabilization level found up to N = {level_bound}"
    )


# -- Newton-polyhedron log canonical threshold ------------------------------


def _newton_facets(ideal: MonomialIdeal):
    """Supporting hyperplanes ``<w, x> >= h`` of the Newton polyhedron.

    The polyhedron is conv(generators) + the nonnegative orthant, so every
    facet normal is nonnegative and every facet contains a generator. We
    enumerate hyperplanes spanned by a subset of generators plus a subset of
    coordinate directions (|gens subset| + |axes subset| = n), keep those
    valid for all generators, and return the (w, h) pairs with h > 0.
    """
    gens = ideal.sorted_gens()
    n = ideal.nvars
    out = []
    seen = set()
    if n == 0:
        return out
    axes = list(range(n))
    for k in range(1, min(n, len(gens)) + 1):
        for gsub in combinations(gens, k):
            for asub in combinations(axes, n - k):
                rows = [[g - b for g, b in zip(pt, gsub[0])] for pt in gsub[1:]]
                rows += [[1 if j == ax else 0 for j in range(n)] for ax in asub]
                if rows and matrix_rank(rows) != n - 1:
                    continue
                w = kernel_vector(rows, n) if rows else None
                if rows and w is None:
                    continue
                if not rows:
                    # n == 1, single generator: the only normal is e_1
                    w = (Fraction(1),)
                if any(x < 0 for x in w):
                    if all(x <= 0 for x in w):
                        w = tuple(-x for x in w)
                    else:
                        continue
                if all(x == 0 for x in w):
                    continue
                h = dot(w, gsub[0])
                if any(dot(w, g) < h for g in gens):
                    continue
                if h <= 0:
                    continue
                key = tuple(x / h for x in w)
                if key in seen:
                    continue
                seen.add(key)
                out.append((w, h))
    return out


def lct_monomial(ideal: MonomialIdeal, boundary=None):
    """Largest t with ``(1 - b)`` in ``t`` times the Newton polyhedron.

    The +infinity sentinel is returned for the unit ideal. Boundary
    coefficients default to zero.
    """
    if ideal.is_zero:
        raise ZeroIdeal("lct of the zero ideal is undefined")
    n = ideal.nvars
    if boundary is None:
        boundary = (Fraction(0),) * n
    boundary = tuple(rational(b) for b in boundary)
    if len(boundary) != n:
        raise ZeroIdeal(f"boundary length {len(boundary)} != {n} variables")
    for b in boundary:
        if not (0 <= b < 1):
            raise ZeroIdeal(f"boundary coefficient {b} outside [0, 1)")
    if ideal.is_unit:
        return POS_INFINITY
    e = tuple(Fraction(1) - b for b in boundary)
    best = None
    for w, h in _newton_facets(ideal):
        val = dot(w, e) / h
        if best is None or val < best:
            best = val
    if best is None:
        raise ConsistencyError("a proper nonzero monomial ideal has a facet with h > 0")
    return best


def lct_graded_sequence(seq: GradedIdealSequence, boundary=None):
    """lct of a stabilized graded sequence: ``N * lct(b_N)``.

    Requires a stabilization certificate; the result is checked against
    ``p * lct(b_p)`` for every stored level (it must dominate all of them).
    """
    if seq.certificate is None:
        raise NoCertificate("graded sequence carries no stabilization certificate")
    n = seq.certificate.level
    value = n * lct_monomial(seq.level(n), boundary)
    for p in range(1, seq.p_max + 1):
        lower = p * lct_monomial(seq.level(p), boundary)
        if value < lower:
            raise ConsistencyError(
                f"certified value {value} is below the level-{p} bound {lower}"
            )
    return value
