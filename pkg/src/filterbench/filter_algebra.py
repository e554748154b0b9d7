"""A-class and B-class filters on a finite topology.

An A-class filter is a 0/1 table over the opens satisfying

    (a) mu(X) = 1
    (b) A subset of B  implies  mu(A) <= mu(B)
    (c) mu(A|B) + mu(A&B) >= mu(A) + mu(B)

B-class filters carry the same axioms with values in [0,1].  Proper mode
(mu(empty) = 0, on by default) excludes the all-ones filter.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    FilterAxiomViolation,
    NotContinuous,
    SizeLimitExceeded,
    TopologyMismatch,
    WeightSumInvalid,
)
from .finite_topology import (
    FiniteTopology,
    PointMap,
    is_continuous,
    is_t0,
    point_filter,
    set_of,
)

ENUMERATION_MAX_OPENS = 20
GRADED_TOL = 1e-12


@dataclass(frozen=True)
class IndicatorFilter:
    topology: FiniteTopology
    values: tuple[int, ...]

    def __call__(self, mask: int) -> int:
        return self.values[self.topology.index_of(mask)]

    def support(self) -> tuple[int, ...]:
        return tuple(d for d, v in zip(self.topology.opens, self.values) if v)

    def minimal_support_mask(self) -> int:
        """Intersection of the support; lies in the support (axiom (c))."""
        m = self.topology.full_mask
        for d in self.support():
            m &= d
        return m


@dataclass(frozen=True)
class GradedFilter:
    topology: FiniteTopology
    values: tuple  # Fractions or floats in [0, 1]


@dataclass(frozen=True)
class Refinement:
    topology: FiniteTopology
    assignment: tuple[tuple[IndicatorFilter, ...], ...]  # one tuple per point


def check_filter_axioms(
    topology: FiniteTopology, values: Sequence[int], proper: bool = True
) -> IndicatorFilter:
    """Validate a 0/1 assignment; raises FilterAxiomViolation with a witness."""
    values = tuple(int(v) for v in values)
    if len(values) != len(topology.opens):
        raise TopologyMismatch("assignment length does not match number of opens")
    if any(v not in (0, 1) for v in values):
        raise FilterAxiomViolation("A", None, "values must be 0 or 1")
    full = topology.full_mask
    table = dict(zip(topology.opens, values))
    if table[full] != 1:
        raise FilterAxiomViolation("A", full, "mu(X) must be 1")
    if proper and table[0] != 0:
        raise FilterAxiomViolation("proper", 0, "mu(empty) must be 0 in proper mode")
    opens = topology.opens
    for i, a in enumerate(opens):
        for b in opens[i + 1:]:
            if a & b == a and table[a] > table[b]:  # a subset of b
                raise FilterAxiomViolation(
                    "B", (a, b), f"mu({sorted(set_of(a))}) > mu({sorted(set_of(b))})"
                )
            if table[a | b] + table[a & b] < table[a] + table[b]:
                raise FilterAxiomViolation(
                    "C", (a, b),
                    f"supermodularity fails on {sorted(set_of(a))}, {sorted(set_of(b))}",
                )
    return IndicatorFilter(topology, values)


def support(mu: IndicatorFilter) -> tuple[int, ...]:
    return mu.support()


def pushforward(f: PointMap, mu: IndicatorFilter) -> IndicatorFilter:
    """f* mu (A) = mu(f^{-1}(A)); requires a continuous f."""
    ok, witness = is_continuous(f)
    if not ok:
        raise NotContinuous(witness)
    if mu.topology != f.source:
        raise TopologyMismatch("filter does not live on the source topology")
    table = dict(zip(f.source.opens, mu.values))
    return IndicatorFilter(
        f.target, tuple(table[f.preimage_mask(d)] for d in f.target.opens)
    )


def enumerate_filters(t: FiniteTopology, proper: bool = True) -> list[IndicatorFilter]:
    """All A-class filters on t, canonical order (ascending value tuples).

    On a finite topology the support of a filter is intersection-closed and
    upward closed, hence principal at its minimal member; candidates are the
    principal filters of each open set.  Each candidate is still pushed
    through check_filter_axioms.  The independent brute-force oracle is
    enumerate_filters_bruteforce.
    """
    if len(t.opens) > ENUMERATION_MAX_OPENS:
        raise SizeLimitExceeded(f"too many opens ({len(t.opens)} > {ENUMERATION_MAX_OPENS})")
    out = []
    for base in t.opens:
        if proper and base == 0:
            continue
        values = tuple(1 if d & base == base else 0 for d in t.opens)
        out.append(check_filter_axioms(t, values, proper=proper))
    out.sort(key=lambda mu: mu.values)
    # distinct opens can generate equal filters only if they have equal up-sets,
    # impossible for distinct masks; still dedupe defensively
    deduped = [mu for i, mu in enumerate(out) if i == 0 or mu.values != out[i - 1].values]
    return deduped


def enumerate_filters_bruteforce(t: FiniteTopology, proper: bool = True) -> list[IndicatorFilter]:
    """Scan all 2^|opens| assignments; ground-truth oracle for enumerate_filters."""
    k = len(t.opens)
    if k > 16:
        raise SizeLimitExceeded("brute-force filter enumeration supports at most 16 opens")
    out = []
    for bits in range(1 << k):
        values = tuple(bits >> i & 1 for i in range(k))
        try:
            out.append(check_filter_axioms(t, values, proper=proper))
        except FilterAxiomViolation:
            continue
    out.sort(key=lambda mu: mu.values)
    return out


def filter_leq(mu: IndicatorFilter, nu: IndicatorFilter) -> bool:
    """mu <= nu iff mu(D) <= nu(D) for every open D (nu is finer)."""
    if mu.topology != nu.topology:
        raise TopologyMismatch("filters live on different topologies")
    return all(a <= b for a, b in zip(mu.values, nu.values))


def is_open_in_tau_e(
    V: Sequence[IndicatorFilter], universe: Sequence[IndicatorFilter]
) -> tuple[bool, IndicatorFilter | None]:
    """Openness in the filter-space topology; witness is a mu without a separating D."""
    members = {mu.values for mu in V}
    for mu in V:
        found = False
        for i, d in enumerate(mu.topology.opens):
            if not mu.values[i]:
                continue
            if all(nu.values in members for nu in universe if nu.values[i]):
                found = True
                break
        if not found:
            return False, mu
    return True, None


def tau_e_opens(universe: Sequence[IndicatorFilter]) -> list[frozenset[int]]:
    """Every tau^e-open subset of the universe, as index sets, canonical order."""
    k = len(universe)
    if k > 12:
        raise SizeLimitExceeded("tau^e enumeration supports at most 12 filters")
    out = []
    for bits in range(1 << k):
        idx = frozenset(i for i in range(k) if bits >> i & 1)
        if is_open_in_tau_e([universe[i] for i in idx], universe)[0]:
            out.append(idx)
    return out


def check_pushforward_continuity(f: PointMap) -> tuple[bool, frozenset[int] | None]:
    """Exhaustively verify that f* pulls tau^e-opens back to tau^e-opens.

    The witness (on failure, which would indicate an engine bug) is the index
    set of the offending target-side open.
    """
    ok, witness = is_continuous(f)
    if not ok:
        raise NotContinuous(witness)
    source_universe = enumerate_filters(f.source, proper=True)
    target_universe = enumerate_filters(f.target, proper=True)
    target_index = {mu.values: i for i, mu in enumerate(target_universe)}
    push = [target_index[pushforward(f, mu).values] for mu in source_universe]
    source_opens = set(tau_e_opens(source_universe))
    for v_prime in tau_e_opens(target_universe):
        preimage = frozenset(i for i, j in enumerate(push) if j in v_prime)
        if preimage not in source_opens:
            return False, v_prime
    return True, None


# --- B-class filters ---------------------------------------------------------

def check_graded_axioms(
    t: FiniteTopology, values: Sequence, proper: bool = True, tol: float = GRADED_TOL
) -> GradedFilter:
    values = tuple(values)
    if len(values) != len(t.opens):
        raise TopologyMismatch("assignment length does not match number of opens")
    exact = all(isinstance(v, (Fraction, int)) for v in values)
    eps = 0 if exact else tol
    table = dict(zip(t.opens, values))
    if any(v < -eps or v > 1 + eps for v in values):
        raise FilterAxiomViolation("A", None, "values must lie in [0, 1]")
    if abs(table[t.full_mask] - 1) > eps:
        raise FilterAxiomViolation("A", t.full_mask, "mu(X) must be 1")
    if proper and abs(table[0]) > eps:
        raise FilterAxiomViolation("proper", 0, "mu(empty) must be 0 in proper mode")
    opens = t.opens
    for i, a in enumerate(opens):
        for b in opens[i + 1:]:
            if a & b == a and table[a] > table[b] + eps:
                raise FilterAxiomViolation("B", (a, b), "monotonicity fails")
            if table[a | b] + table[a & b] < table[a] + table[b] - eps:
                raise FilterAxiomViolation("C", (a, b), "supermodularity fails")
    return GradedFilter(t, values)


def convex_combine(filters: Sequence, weights: Sequence) -> GradedFilter:
    """Pointwise convex combination of B-class (or A-class) filters."""
    if not filters:
        raise WeightSumInvalid("need at least one filter")
    t = filters[0].topology
    if any(g.topology != t for g in filters):
        raise TopologyMismatch("filters live on different topologies")
    exact = all(
        isinstance(w, (Fraction, int)) for w in weights
    ) and all(all(isinstance(v, (Fraction, int)) for v in g.values) for g in filters)
    weights = [Fraction(w) if exact else float(w) for w in weights]
    total = sum(weights)
    if any(w < 0 for w in weights) or abs(total - 1) > 1e-12:
        raise WeightSumInvalid(f"weights must be nonnegative and sum to 1, got {total}")
    if len(weights) != len(filters):
        raise WeightSumInvalid("one weight per filter required")
    values = tuple(
        sum(w * g.values[i] for w, g in zip(weights, filters))
        for i in range(len(t.opens))
    )
    return check_graded_axioms(t, values)


def b_polytope_vertices(t: FiniteTopology, proper: bool = True) -> list[tuple[Fraction, ...]]:
    """Exact vertex enumeration of the B-class polytope (small topologies only).

    Coordinates follow the canonical opens order.  The vertex set must equal
    the A-class filters ("extremal points").
    """
    opens = t.opens
    k = len(opens)
    if k > 8:
        raise SizeLimitExceeded("vertex enumeration supports at most 8 opens")
    # equality rows fix mu(X)=1 and, in proper mode, mu(empty)=0
    equalities: list[tuple[list[Fraction], Fraction]] = []
    e = [Fraction(0)] * k
    e[opens.index(t.full_mask)] = Fraction(1)
    equalities.append((e, Fraction(1)))
    if proper:
        e = [Fraction(0)] * k
        e[opens.index(0)] = Fraction(1)
        equalities.append((e, Fraction(0)))
    # inequality rows a.v <= b
    ineqs: list[tuple[list[Fraction], Fraction]] = []
    for i in range(k):
        row = [Fraction(0)] * k
        row[i] = Fraction(-1)
        ineqs.append((row, Fraction(0)))          # v_i >= 0
        row = [Fraction(0)] * k
        row[i] = Fraction(1)
        ineqs.append((row, Fraction(1)))          # v_i <= 1
    index = {m: i for i, m in enumerate(opens)}
    for i, a in enumerate(opens):
        for b in opens[i + 1:]:
            if a & b == a:                        # a subset b: v_a - v_b <= 0
                row = [Fraction(0)] * k
                row[index[a]] += 1
                row[index[b]] -= 1
                ineqs.append((row, Fraction(0)))
            row = [Fraction(0)] * k               # v_a + v_b - v_{a|b} - v_{a&b} <= 0
            row[index[a]] += 1
            row[index[b]] += 1
            row[index[a | b]] -= 1
            row[index[a & b]] -= 1
            if any(row):
                ineqs.append((row, Fraction(0)))
    dim = k - len(equalities)
    vertices: set[tuple[Fraction, ...]] = set()
    for combo in itertools.combinations(range(len(ineqs)), dim):
        rows = [eq[0] for eq in equalities] + [ineqs[j][0] for j in combo]
        rhs = [eq[1] for eq in equalities] + [ineqs[j][1] for j in combo]
        sol = _solve_exact(rows, rhs)
        if sol is None:
            continue
        if all(_dot(row, sol) <= b for row, b in ineqs):
            vertices.add(tuple(sol))
    return sorted(vertices)


def _dot(row, v):
    return sum(a * x for a, x in zip(row, v))


def _solve_exact(rows, rhs):
    """Gaussian elimination over the rationals; None if singular."""
    n = len(rows)
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    if n != len(a[0]) - 1:
        return None
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


# --- refinements and derivability --------------------------------------------

def check_refinement(r: Refinement) -> tuple[bool, object]:
    """Verify the two refinement axioms; witness names the failing (x, mu, D)."""
    t = r.topology
    ok, pair = is_t0(t)
    if not ok:
        return False, ("not T0", pair)
    if len(r.assignment) != t.n:
        return False, ("assignment size mismatch", None)
    for x in range(t.n):
        members = r.assignment[x]
        if not members:
            return False, ("empty assignment", x)
        px = point_filter(t, x)
        for mu in members:
            if mu.topology != t:
                return False, ("topology mismatch", x)
            for i, d in enumerate(t.opens):
                if mu.values[i] < px.values[i]:
                    return False, (x, mu, set_of(d))
            if mu.values == px.values:
                return False, (x, mu, "no open distinguishes mu from the point filter")
    return True, None


def check_derivable(
    f: PointMap, r: Refinement, r2: Refinement
) -> tuple[bool, object]:
    """True iff f* maps every member of r(x) into r2(f(x))."""
    ok, witness = is_continuous(f)
    if not ok:
        raise NotContinuous(witness)
    for x in range(f.source.n):
        targets = {mu.values for mu in r2.assignment[f.image[x]]}
        for mu in r.assignment[x]:
            if pushforward(f, mu).values not in targets:
                return False, (x, mu)
    return True, None


def refinement_candidates(t: FiniteTopology) -> list[list[IndicatorFilter]]:
    """Per point, the proper filters strictly finer than the point filter."""
    universe = enumerate_filters(t, proper=True)
    out = []
    for x in range(t.n):
        px = point_filter(t, x)
        out.append(
            [mu for mu in universe if filter_leq(px, mu) and mu.values != px.values]
        )
    return out


def search_refinement(t: FiniteTopology) -> dict:
    """Search report: which points admit strictly finer filters, and whether
    the space admits any refinement at all (every finite T0 space has a point
    with an empty candidate set, and the report documents it)."""
    candidates = refinement_candidates(t)
    empty_points = [x for x, c in enumerate(candidates) if not c]
    return {
        "candidates_per_point": [len(c) for c in candidates],
        "points_without_candidates": empty_points,
        "admits_refinement": not empty_points,
    }
