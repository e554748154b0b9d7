import itertools
import random

import pytest

from filterbench.errors import EmptySlice
from filterbench.filter_algebra import check_filter_axioms, enumerate_filters
from filterbench.finite_topology import PointMap, validate_topology
from filterbench.pair_calculus import (
    check_commutation,
    check_uniform_derivable,
    check_uniform_refinement,
    check_uniformity,
    compose_filters,
    compose_filters_bruteforce,
    compose_masks,
    compose_sets,
    diagonal_filter,
    diagonal_mask,
    induced_refinement,
    principal_pair_filter,
    product_topology,
    relation_mask,
    relation_pairs,
    swap_pushforward,
    transpose_mask,
)

from test_finite_topology import discrete, indiscrete, sierpinski


class TestProductTopology:
    def test_one_point(self):
        ps = product_topology(indiscrete(1))
        assert ps.topology.opens == (0, 1)

    def test_discrete_square_is_discrete(self):
        ps = product_topology(discrete(2))
        assert len(ps.topology.opens) == 16

    def test_sierpinski_square_closure_oracle(self):
        ps = product_topology(sierpinski())
        # independent closure: rectangles closed under union and intersection
        t = sierpinski()
        rects = set()
        for a in t.opens:
            for b in t.opens:
                r = 0
                for i in range(2):
                    if a >> i & 1:
                        r |= b << (i * 2)
                rects.add(r)
        family = set(rects)
        changed = True
        while changed:
            changed = False
            for x in list(family):
                for y in list(family):
                    for z in (x | y, x & y):
                        if z not in family:
                            family.add(z)
                            changed = True
        assert set(ps.topology.opens) == family

    def test_product_is_valid_topology(self):
        for t in (sierpinski(), discrete(2), indiscrete(2)):
            ps = product_topology(t)
            validate_topology(ps.topology.n, ps.topology.opens)


class TestComposeSets:
    def test_single_chain(self):
        assert compose_sets({(0, 1)}, {(1, 2)}) == {(0, 2)}

    def test_empty(self):
        assert compose_sets({(0, 1)}, set()) == frozenset()

    def test_diagonal_identity(self):
        delta = {(i, i) for i in range(3)}
        rel = {(0, 1), (2, 0)}
        assert compose_sets(delta, rel) == rel
        assert compose_sets(rel, delta) == rel

    def test_associativity_exhaustive_small(self):
        rels = [frozenset(s) for s in itertools.chain.from_iterable(
            itertools.combinations(list(itertools.product(range(2), repeat=2)), r)
            for r in range(5)
        )]
        for a in rels:
            for b in rels:
                for c in rels:
                    assert compose_sets(compose_sets(a, b), c) == \
                        compose_sets(a, compose_sets(b, c))

    def test_mask_compose_matches_set_compose(self):
        n = 3
        rng = random.Random(0)
        for _ in range(200):
            ra = rng.randrange(1 << 9)
            rb = rng.randrange(1 << 9)
            via_mask = relation_pairs(n, compose_masks(n, ra, rb))
            via_sets = compose_sets(relation_pairs(n, ra), relation_pairs(n, rb))
            assert via_mask == via_sets


class TestComposeFilters:
    def test_principal_relation_chain(self):
        t = discrete(3)
        ps = product_topology(t)
        mu = principal_pair_filter(ps, relation_mask(3, [(0, 1)]))
        nu = principal_pair_filter(ps, relation_mask(3, [(1, 2)]))
        out = compose_filters(mu, nu, ps)
        expected = principal_pair_filter(ps, relation_mask(3, [(0, 2)]))
        assert out.values == expected.values

    def test_diagonal_is_identity(self):
        t = discrete(2)
        ps = product_topology(t)
        delta = principal_pair_filter(ps, diagonal_mask(2))
        for bits in range(16):
            mu = principal_pair_filter(ps, bits)
            assert compose_filters(mu, delta, ps).values == mu.values
            assert compose_filters(delta, mu, ps).values == mu.values

    def test_matches_bruteforce_oracle_discrete2(self):
        t = discrete(2)
        ps = product_topology(t)
        for ra in range(16):
            for rb in range(16):
                mu = principal_pair_filter(ps, ra)
                nu = principal_pair_filter(ps, rb)
                fast = compose_filters(mu, nu, ps)
                slow = compose_filters_bruteforce(mu, nu, ps)
                assert fast.values == slow.values

    def test_matches_bruteforce_oracle_sierpinski_square(self):
        ps = product_topology(sierpinski())
        for ra in range(16):
            for rb in range(16):
                mu = principal_pair_filter(ps, ra)
                nu = principal_pair_filter(ps, rb)
                assert compose_filters(mu, nu, ps).values == \
                    compose_filters_bruteforce(mu, nu, ps).values

    def test_diagonal_filter_composition(self):
        t = discrete(2)
        ps = product_topology(t)
        delta = diagonal_filter(ps)
        composed = compose_filters(delta, delta, ps)
        # Omega o Omega >= Omega
        assert all(c >= o for c, o in zip(composed.values, delta.values))

    def test_results_pass_axioms(self):
        t = discrete(2)
        ps = product_topology(t)
        for ra in range(1, 16):
            for rb in range(1, 16):
                mu = principal_pair_filter(ps, ra)
                nu = principal_pair_filter(ps, rb)
                out = compose_filters(mu, nu, ps)
                check_filter_axioms(ps.topology, out.values, proper=False)


class TestSwap:
    def test_involution(self):
        ps = product_topology(sierpinski())
        for bits in range(16):
            mu = principal_pair_filter(ps, bits)
            assert swap_pushforward(swap_pushforward(mu, ps), ps).values == mu.values

    def test_transpose_of_principal(self):
        t = discrete(3)
        ps = product_topology(t)
        r = relation_mask(3, [(0, 1), (2, 2)])
        mu = principal_pair_filter(ps, r)
        expected = principal_pair_filter(ps, transpose_mask(3, r))
        assert swap_pushforward(mu, ps).values == expected.values

    def test_swap_composition_interplay(self):
        # sigma*(mu o nu) = sigma*nu o sigma*mu, exhaustive on discrete 2
        t = discrete(2)
        ps = product_topology(t)
        for ra in range(16):
            for rb in range(16):
                mu = principal_pair_filter(ps, ra)
                nu = principal_pair_filter(ps, rb)
                lhs = swap_pushforward(compose_filters(mu, nu, ps), ps)
                rhs = compose_filters(
                    swap_pushforward(nu, ps), swap_pushforward(mu, ps), ps)
                assert lhs.values == rhs.values


class TestDiagonalFilter:
    def test_one_point_space(self):
        ps = product_topology(indiscrete(1))
        assert diagonal_filter(ps).values == (0, 1)

    def test_discrete_support(self):
        ps = product_topology(discrete(2))
        delta = diagonal_mask(2)
        for d, v in zip(ps.topology.opens, diagonal_filter(ps).values):
            assert v == (1 if d & delta == delta else 0)

    def test_sierpinski_bruteforce(self):
        ps = product_topology(sierpinski())
        delta = diagonal_mask(2)
        for d, v in zip(ps.topology.opens, diagonal_filter(ps).values):
            assert v == (1 if d & delta == delta else 0)


class TestUniformity:
    def test_principal_diagonal_discrete3(self):
        t = discrete(3)
        ps = product_topology(t)
        report = check_uniformity(diagonal_filter(ps), ps)
        assert report.is_uniformity
        assert report.composition_remark

    def test_asymmetric_relation_fails_a_and_c(self):
        t = discrete(2)
        ps = product_topology(t)
        r = relation_mask(2, [(0, 1), (0, 0), (1, 1)])
        report = check_uniformity(principal_pair_filter(ps, r), ps)
        # the diagonal itself is open in the discrete square and contains
        # Delta but not (0,1), so (a) fails alongside the symmetry axiom
        assert not report.axiom_a
        assert report.axiom_a_witness == frozenset({0, 3})
        assert not report.axiom_c

    def test_axiom_b_implies_remark(self):
        t = discrete(2)
        ps = product_topology(t)
        for bits in range(1, 16):
            report = check_uniformity(principal_pair_filter(ps, bits), ps)
            if report.axiom_b:
                assert report.composition_remark


class TestUniformRefinement:
    def test_uniformity_refines_itself(self):
        ps = product_topology(discrete(3))
        omega = diagonal_filter(ps)
        report = check_uniform_refinement([omega], omega, ps)
        assert report.pre_refinement
        assert report.is_refinement

    def test_coarser_member_fails_pre_refinement(self):
        ps = product_topology(discrete(2))
        omega = diagonal_filter(ps)
        member = principal_pair_filter(
            ps, relation_mask(2, [(0, 1), (0, 0), (1, 1)]))
        report = check_uniform_refinement([member], omega, ps)
        assert not report.pre_refinement

    def test_swap_closure_detection(self):
        ps = product_topology(discrete(2))
        omega = diagonal_filter(ps)
        asym = principal_pair_filter(ps, relation_mask(2, [(0, 1)]))
        report = check_uniform_refinement([asym], omega, ps)
        assert not report.swap_closed


class TestInducedRefinement:
    def test_diagonal_gives_empty_slice(self):
        ps = product_topology(discrete(2))
        with pytest.raises(EmptySlice):
            induced_refinement([principal_pair_filter(ps, diagonal_mask(2))], ps)

    def test_chain_topology_slices(self):
        # opens: chain {} < {0} < {0,1} < {0,1,2}
        t = validate_topology(3, [[], [0], [0, 1], [0, 1, 2]])
        ps = product_topology(t)
        r = relation_mask(3, [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)])
        member = principal_pair_filter(ps, r)
        refinement, (ok, witness) = induced_refinement([member], ps)
        # slice at 0 is {1, 2}; induced filter is principal there
        mu0 = refinement.assignment[0][0]
        universe = {mu.values for mu in enumerate_filters(t)}
        assert mu0.values in universe
        expected = tuple(1 if d & 0b110 == 0b110 else 0 for d in t.opens)
        assert mu0.values == expected


class TestUniformDerivable:
    def test_identity(self):
        t = discrete(2)
        ps = product_topology(t)
        members = [principal_pair_filter(ps, relation_mask(2, [(0, 1)])),
                   principal_pair_filter(ps, relation_mask(2, [(1, 0)]))]
        f = PointMap(t, t, (0, 1))
        assert check_uniform_derivable(f, members, members, ps, ps)[0]

    def test_swap_on_symmetric_and_asymmetric_sets(self):
        t = discrete(2)
        ps = product_topology(t)
        swap = PointMap(t, t, (1, 0))
        sym = [principal_pair_filter(ps, relation_mask(2, [(0, 1)])),
               principal_pair_filter(ps, relation_mask(2, [(1, 0)]))]
        assert check_uniform_derivable(swap, sym, sym, ps, ps)[0]
        asym = [principal_pair_filter(ps, relation_mask(2, [(0, 1)]))]
        ok, witness = check_uniform_derivable(swap, asym, asym, ps, ps)
        assert not ok


class TestCommutation:
    def test_self_composition_commutes(self):
        ps = product_topology(discrete(3))
        mu = principal_pair_filter(ps, relation_mask(3, [(0, 1), (1, 2)]))
        assert check_commutation(mu, mu, ps)[0] == "commute"

    def test_known_counterexample(self):
        ps = product_topology(discrete(3))
        mu = principal_pair_filter(ps, relation_mask(3, [(0, 1)]))
        nu = principal_pair_filter(ps, relation_mask(3, [(1, 0)]))
        # R o S = {(0,0)}, S o R = {(1,1)}
        verdict, witness = check_commutation(mu, nu, ps)
        assert verdict == "counterexample"
        assert witness is not None
