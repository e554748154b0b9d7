"""Product spaces, pair filters, composition and uniformities (finite, exact).

A pair on an n-point space is encoded as the index i*n + j; relations are
bitmasks over those n*n indices.  Pair filters reuse IndicatorFilter over the
product topology, so a single axiom checker covers everything.

Metric-space pair filters (generator-based) live in metric_filters; the
functions here are the exact finite half of the calculus.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptySlice, NotContinuous, SizeLimitExceeded, TopologyMismatch
from .filter_algebra import (
    IndicatorFilter,
    Refinement,
    check_refinement,
    filter_leq,
)
from .finite_topology import FiniteTopology, PointMap, is_continuous, set_of

PRODUCT_MAX_POINTS = 4


# --- relation encoding -------------------------------------------------------

def pair_index(n: int, i: int, j: int) -> int:
    return i * n + j


def relation_mask(n: int, pairs: Iterable[tuple[int, int]]) -> int:
    m = 0
    for i, j in pairs:
        m |= 1 << pair_index(n, i, j)
    return m


def relation_pairs(n: int, mask: int) -> frozenset[tuple[int, int]]:
    return frozenset(
        (k // n, k % n) for k in range(n * n) if mask >> k & 1
    )


def transpose_mask(n: int, mask: int) -> int:
    out = 0
    for k in range(n * n):
        if mask >> k & 1:
            i, j = divmod(k, n)
            out |= 1 << pair_index(n, j, i)
    return out


def diagonal_mask(n: int) -> int:
    m = 0
    for i in range(n):
        m |= 1 << pair_index(n, i, i)
    return m


def compose_sets(
    a: Iterable[tuple[int, int]], b: Iterable[tuple[int, int]]
) -> frozenset[tuple[int, int]]:
    """Relational composition {(x,z) : exists y, (x,y) in a, (y,z) in b}."""
    b_by_first: dict[int, set[int]] = {}
    for y, z in b:
        b_by_first.setdefault(y, set()).add(z)
    out = set()
    for x, y in a:
        for z in b_by_first.get(y, ()):
            out.add((x, z))
    return frozenset(out)


def compose_masks(n: int, ra: int, rb: int) -> int:
    """Bitmask relational composition; row i of the result is the union of
    rb-rows reachable from row i of ra."""
    row = (1 << n) - 1
    rb_rows = [(rb >> (k * n)) & row for k in range(n)]
    out = 0
    for i in range(n):
        ra_row = (ra >> (i * n)) & row
        acc = 0
        for k in range(n):
            if ra_row >> k & 1:
                acc |= rb_rows[k]
        out |= acc << (i * n)
    return out


# --- product topology --------------------------------------------------------

@dataclass(frozen=True)
class ProductSpace:
    base: FiniteTopology
    topology: FiniteTopology  # on base.n ** 2 points


def product_topology(t: FiniteTopology) -> ProductSpace:
    """Opens of the square: all unions of rectangles A x B with A, B open."""
    n = t.n
    if n > PRODUCT_MAX_POINTS:
        raise SizeLimitExceeded(f"product_topology supports n <= {PRODUCT_MAX_POINTS}")
    rects = set()
    for a in t.opens:
        for b in t.opens:
            rect = 0
            for i in range(n):
                if a >> i & 1:
                    rect |= b << (i * n)
            rects.add(rect)
    # incremental union closure: after processing every rectangle, opens holds
    # exactly the unions of rectangle subsets (intersection-closure follows
    # from the rectangle identity (UAxB) & (UCxD) = U (A&C)x(B&D))
    opens = {0}
    for r in sorted(rects):
        opens |= {s | r for s in opens}
    return ProductSpace(t, FiniteTopology(n * n, tuple(sorted(opens))))


# --- pair filters ------------------------------------------------------------

def principal_pair_filter(ps: ProductSpace, rel_mask: int) -> IndicatorFilter:
    """Filter whose support is every open containing the relation."""
    top = ps.topology
    values = tuple(1 if d & rel_mask == rel_mask else 0 for d in top.opens)
    return IndicatorFilter(top, values)


def diagonal_filter(ps: ProductSpace) -> IndicatorFilter:
    """Neighbourhood filter of the diagonal."""
    return principal_pair_filter(ps, diagonal_mask(ps.base.n))


def compose_filters(
    mu: IndicatorFilter, nu: IndicatorFilter, ps: ProductSpace
) -> IndicatorFilter:
    """mu o nu (D) = 1 iff some open pair E, F in the supports has E o F in D.

    Composition is monotone in both arguments and supports are
    intersection-closed, so the minimal support elements decide; the
    double-loop definition is kept in compose_filters_bruteforce as the
    oracle.
    """
    if mu.topology != ps.topology or nu.topology != ps.topology:
        raise TopologyMismatch("pair filters must live on the product topology")
    n = ps.base.n
    composed = compose_masks(n, mu.minimal_support_mask(), nu.minimal_support_mask())
    return IndicatorFilter(
        ps.topology,
        tuple(1 if d & composed == composed else 0 for d in ps.topology.opens),
    )


def compose_filters_bruteforce(
    mu: IndicatorFilter, nu: IndicatorFilter, ps: ProductSpace
) -> IndicatorFilter:
    """Literal double loop over support pairs; independent oracle."""
    n = ps.base.n
    comps = {compose_masks(n, e, f) for e in mu.support() for f in nu.support()}
    values = tuple(
        1 if any(d & c == c for c in comps) else 0 for d in ps.topology.opens
    )
    return IndicatorFilter(ps.topology, values)


def swap_pushforward(mu: IndicatorFilter, ps: ProductSpace) -> IndicatorFilter:
    """Pushforward along sigma(x, y) = (y, x); an involution."""
    n = ps.base.n
    table = dict(zip(ps.topology.opens, mu.values))
    # sigma is a homeomorphism: transpose of an open is open
    return IndicatorFilter(
        ps.topology,
        tuple(table[transpose_mask(n, d)] for d in ps.topology.opens),
    )


# --- uniformities ------------------------------------------------------------

@dataclass(frozen=True)
class UniformityReport:
    axiom_a: bool
    axiom_a_witness: object
    axiom_b: bool
    axiom_b_witness: object
    axiom_c: bool
    axiom_c_witness: object
    composition_remark: bool  # Omega o Omega >= Omega

    @property
    def is_uniformity(self) -> bool:
        return self.axiom_a and self.axiom_b and self.axiom_c


def check_uniformity(omega: IndicatorFilter, ps: ProductSpace) -> UniformityReport:
    n = ps.base.n
    diag = diagonal_filter(ps)
    a_ok, a_wit = True, None
    for i, d in enumerate(ps.topology.opens):
        if diag.values[i] > omega.values[i]:
            a_ok, a_wit = False, set_of(d)
            break
    b_ok, b_wit = True, None
    m = omega.minimal_support_mask()
    mm = compose_masks(n, m, m)
    for d in omega.support():
        # exists E in support with E o E in D  <=>  m o m in D (monotonicity)
        if d & mm != mm:
            b_ok, b_wit = False, set_of(d)
            break
    sigma_omega = swap_pushforward(omega, ps)
    c_ok = sigma_omega.values == omega.values
    c_wit = None
    if not c_ok:
        for i, d in enumerate(ps.topology.opens):
            if sigma_omega.values[i] != omega.values[i]:
                c_wit = set_of(d)
                break
    composed = compose_filters(omega, omega, ps)
    remark = all(c >= o for c, o in zip(composed.values, omega.values))
    return UniformityReport(a_ok, a_wit, b_ok, b_wit, c_ok, c_wit, remark)


@dataclass(frozen=True)
class UniformRefinementReport:
    pre_refinement: bool
    pre_witness: object        # member not finer than Omega
    half_composition: bool
    half_witness: object       # (member index, D)
    swap_closed: bool
    swap_witness: object       # member index whose sigma-image is missing

    @property
    def is_refinement(self) -> bool:
        return self.pre_refinement and self.half_composition and self.swap_closed


def check_uniform_refinement(
    members: Sequence[IndicatorFilter], omega: IndicatorFilter, ps: ProductSpace
) -> UniformRefinementReport:
    n = ps.base.n
    pre_ok, pre_wit = True, None
    for k, mu in enumerate(members):
        if not filter_leq(omega, mu):
            pre_ok, pre_wit = False, k
            break
    half_ok, half_wit = True, None
    for k, mu in enumerate(members):
        m = mu.minimal_support_mask()
        mm = compose_masks(n, m, m)
        for d in mu.support():
            if d & mm != mm:
                half_ok, half_wit = False, (k, set_of(d))
                break
        if not half_ok:
            break
    value_set = {mu.values for mu in members}
    swap_ok, swap_wit = True, None
    for k, mu in enumerate(members):
        if swap_pushforward(mu, ps).values not in value_set:
            swap_ok, swap_wit = False, k
            break
    return UniformRefinementReport(pre_ok, pre_wit, half_ok, half_wit, swap_ok, swap_wit)


def induced_refinement(
    members: Sequence[IndicatorFilter], ps: ProductSpace
) -> tuple[Refinement, tuple[bool, object]]:
    """Slice each member at every base point; returns the induced assignment
    together with the check_refinement verdict."""
    t = ps.base
    n = t.n
    assignment = []
    for x in range(n):
        fils = []
        for k, mu in enumerate(members):
            m = mu.minimal_support_mask()
            slice_mask = 0
            for y in range(n):
                if y != x and m >> pair_index(n, x, y) & 1:
                    slice_mask |= 1 << y
            if slice_mask == 0:
                raise EmptySlice(f"member {k} has an empty proper slice at point {x}")
            values = tuple(
                1 if d & slice_mask == slice_mask else 0 for d in t.opens
            )
            fils.append(IndicatorFilter(t, values))
        assignment.append(tuple(fils))
    r = Refinement(t, tuple(assignment))
    return r, check_refinement(r)


def square_map(f: PointMap, ps_source: ProductSpace, ps_target: ProductSpace) -> PointMap:
    """f^2 (i, j) = (f(i), f(j)) as a map of product topologies."""
    ns, nt = ps_source.base.n, ps_target.base.n
    image = []
    for i in range(ns):
        for j in range(ns):
            image.append(pair_index(nt, f.image[i], f.image[j]))
    return PointMap(ps_source.topology, ps_target.topology, tuple(image))


def check_uniform_derivable(
    f: PointMap,
    members: Sequence[IndicatorFilter],
    members2: Sequence[IndicatorFilter],
    ps_source: ProductSpace,
    ps_target: ProductSpace,
) -> tuple[bool, object]:
    """Set equality of {f^2 * mu} with the target member set."""
    ok, witness = is_continuous(f)
    if not ok:
        raise NotContinuous(witness)
    f2 = square_map(f, ps_source, ps_target)
    from .filter_algebra import pushforward

    pushed = {pushforward(f2, mu).values: k for k, mu in enumerate(members)}
    target = {mu.values for mu in members2}
    for values, k in pushed.items():
        if values not in target:
            return False, ("pushed member missing from target set", k)
    for k, mu in enumerate(members2):
        if mu.values not in pushed:
            return False, ("target member not hit", k)
    return True, None


def check_commutation(
    mu: IndicatorFilter, nu: IndicatorFilter, ps: ProductSpace
) -> tuple[str, object]:
    """Exact finite verdict: 'commute' or ('counterexample', open set)."""
    ab = compose_filters(mu, nu, ps)
    ba = compose_filters(nu, mu, ps)
    if ab.values == ba.values:
        return "commute", None
    for i, d in enumerate(ps.topology.opens):
        if ab.values[i] != ba.values[i]:
            return "counterexample", set_of(d)
    return "commute", None
