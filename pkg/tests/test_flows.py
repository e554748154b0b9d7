import numpy as np
import pytest

from filterbench.errors import (
    DomainViolation,
    InverseResidualTooLarge,
    RecipeUnsatisfiable,
)
from filterbench.flows import (
    BUILTIN_FLOWS,
    Flow,
    FlowConditionsReport,
    check_flow_conditions,
    check_flow_transport,
    flow_pair_contains,
    lemacon_construct,
    linear_flow,
    pushforward_flow,
    rotation_flow,
    scaling_flow,
    step1_diagonal_check,
    step3_composition_check,
    translation_flow,
)
from filterbench.maps import BUILTIN_MAPS, MapSpec, linear_map
from filterbench.metric_filters import pair_directional_filter


@pytest.fixture(scope="module")
def reports():
    return {name: check_flow_conditions(f, samples=800, seed=3)
            for name, f in BUILTIN_FLOWS.items()}


class TestConditions:
    @pytest.mark.parametrize("name", list(BUILTIN_FLOWS))
    def test_all_conditions_pass(self, reports, name):
        rep = reports[name]
        assert rep.all_pass, rep.passes

    def test_isometries_have_unit_m(self, reports):
        for name in ("translation", "rotation"):
            for _, (_, _, m) in reports[name].m_table.items():
                assert m == pytest.approx(1.0, abs=1e-9)

    def test_scaling_m_matches_exponential(self, reports):
        # two-sided ratio of e^t x is exactly e^t, so M(t) = e^{|t|}
        for t, (_, _, m) in reports["scaling"].m_table.items():
            assert m == pytest.approx(np.exp(abs(t)), abs=1e-6)

    def test_exact_group_flows_have_zero_residuals(self, reports):
        assert reports["translation"].identity_residual == 0.0
        # (s + t) u vs s u + t u differs by one rounding step
        assert reports["translation"].group_residual < 1e-15
        assert reports["rotation"].group_residual < 1e-12

    def test_chain_constant_at_least_one(self, reports):
        for rep in reports.values():
            assert rep.c_constant >= 1.0

    def test_domain_violation(self):
        with pytest.raises(DomainViolation):
            BUILTIN_FLOWS["translation"](2.0, np.zeros((1, 2)))


class TestPairMembership:
    def test_on_orbit_point(self):
        f = BUILTIN_FLOWS["rotation"]
        x = np.array([[1.0, 0.0]])
        y = f(0.05, x)
        ok, conv = flow_pair_contains(f, 0.1, 0.3, x, y)
        assert conv and ok.all()

    def test_backward_point_excluded(self):
        f = translation_flow([1.0, 0.0])
        x = np.array([[0.0, 0.0]])
        y = np.array([[-0.05, 0.0]])
        ok, conv = flow_pair_contains(f, 0.1, 0.4, x, y)
        assert conv and not ok.any()

    def test_translation_orbit_equals_directional_pair_filter(self):
        # straight orbits make the flow filter coincide with mu_u
        rng = np.random.default_rng(7)
        u = np.array([0.6, 0.8])
        f = translation_flow(u)
        mu_u = pair_directional_filter(u)
        x = rng.uniform(-1, 1, (10_000, 2))
        y = x + rng.normal(scale=0.05, size=x.shape)
        via_flow, conv = flow_pair_contains(f, 0.1, 0.3, x, y)
        via_pair = mu_u.contains(0.1, 0.3, x, y)
        assert conv
        assert np.array_equal(via_flow, via_pair)

    def test_reversal_swaps_forward_and_backward(self):
        # the reversed flow's forward filter is the backward filter
        rng = np.random.default_rng(1)
        f = BUILTIN_FLOWS["scaling"]
        x = rng.uniform(-1, 1, (2000, 2))
        y = x + rng.normal(scale=0.02, size=x.shape)
        fwd_of_rev, c1 = flow_pair_contains(f.reversed(), 0.1, 0.3, x, y)
        bwd, c2 = flow_pair_contains(f, 0.1, 0.3, x, y, sign="-")
        assert c1 and c2
        assert np.array_equal(fwd_of_rev, bwd)


class TestLemaconRecipe:
    @pytest.mark.parametrize("name", ["translation", "rotation", "scaling"])
    def test_zero_violations(self, reports, name):
        out = lemacon_construct(BUILTIN_FLOWS[name], 0.1, 0.5, reports[name],
                                samples=20_000, seed=5)
        assert out["violations"] == 0
        assert out["converged"]
        assert out["checked"] > 10_000

    def test_constructed_constants(self, reports):
        out = lemacon_construct(BUILTIN_FLOWS["translation"], 0.1, 0.5,
                                reports["translation"], samples=1000)
        assert 4 * out["mu_prime"] < min(0.5, 0.5)
        assert out["eps_prime"] <= 0.1
        assert 2 * out["sigma"] <= out["eps1"]

    def test_degenerate_aperture_rejected(self, reports):
        with pytest.raises(DomainViolation):
            lemacon_construct(BUILTIN_FLOWS["translation"], 0.1, 1.0,
                              reports["translation"])

    def test_unsatisfiable_without_bounded_m(self, reports):
        rep = reports["translation"]
        bad = FlowConditionsReport(
            rep.identity_residual, rep.equicontinuity,
            {t: (lo, hi, 5.0) for t, (lo, hi, _) in rep.m_table.items()},
            rep.group_residual, rep.c_grid, rep.c_constant, rep.passes)
        with pytest.raises(RecipeUnsatisfiable):
            lemacon_construct(BUILTIN_FLOWS["translation"], 0.1, 0.5, bad)


class TestStepRecipes:
    @pytest.mark.parametrize("name", ["translation", "rotation", "scaling"])
    def test_diagonal_recipe(self, reports, name):
        out = step1_diagonal_check(BUILTIN_FLOWS[name], 0.01, reports[name],
                                   samples=20_000, seed=5)
        assert out["violations"] == 0
        assert out["converged"]

    def test_diagonal_bad_target(self, reports):
        with pytest.raises(DomainViolation):
            step1_diagonal_check(BUILTIN_FLOWS["translation"], -1.0,
                                 reports["translation"])

    @pytest.mark.parametrize("name", ["translation", "rotation", "scaling"])
    def test_composition_recipe(self, reports, name):
        out = step3_composition_check(BUILTIN_FLOWS[name], 0.2, 0.5,
                                      reports[name], samples=20_000, seed=5)
        assert out["violations"] == 0
        assert out["converged"]
        assert 2 * out["eps_prime"] < 0.2
        assert 4 * out["mu_prime"] * out["c_constant"] < 0.5

    def test_composition_infeasible_aperture(self, reports):
        with pytest.raises(RecipeUnsatisfiable):
            step3_composition_check(BUILTIN_FLOWS["translation"], 0.2, 1e-5,
                                    reports["translation"])


class TestPushforward:
    def test_identity_map_preserves_flow(self):
        f = BUILTIN_MAPS["identity2d"]
        flow = BUILTIN_FLOWS["rotation"]
        pushed = pushforward_flow(f, flow)
        x = np.random.default_rng(0).uniform(-1, 1, (100, 2))
        assert np.allclose(pushed(0.3, x), flow(0.3, x), atol=1e-12)

    def test_linear_conjugation_of_translation(self):
        # A * (x + t u) pattern: conjugated flow translates by A u
        a = np.array([[2.0, 1.0], [0.0, 1.0]])
        f = linear_map(a)
        u = np.array([1.0, 1.0])
        pushed = pushforward_flow(f, translation_flow(u))
        x = np.random.default_rng(1).uniform(-1, 1, (50, 2))
        assert np.allclose(pushed(0.25, x), x + 0.25 * (a @ u), atol=1e-9)

    def test_conjugated_flow_passes_conditions(self):
        pushed = pushforward_flow(BUILTIN_MAPS["shear_half"],
                                  BUILTIN_FLOWS["rotation"])
        rep = check_flow_conditions(pushed, samples=500, seed=2)
        for cond in ("a", "b", "d"):
            assert rep.passes[cond], (cond, rep.passes)

    def test_map_without_inverse_rejected(self):
        no_inv = BUILTIN_MAPS["coupled_sine"]
        with pytest.raises(InverseResidualTooLarge):
            pushforward_flow(no_inv, BUILTIN_FLOWS["translation"])

    def test_functorial_on_samples(self):
        f = BUILTIN_MAPS["parabolic_shear"]
        g = BUILTIN_MAPS["shear_half"]
        flow = BUILTIN_FLOWS["translation"]
        gf = MapSpec("gf", 2, lambda p: g(f(p)), f.jacobian,
                     lambda p: f.inverse(g.inverse(p)))
        lhs = pushforward_flow(gf, flow)
        rhs = pushforward_flow(g, pushforward_flow(f, flow))
        rng = np.random.default_rng(4)
        x = rng.uniform(-1, 1, (1000, 2))
        worst = 0.0
        for t in rng.uniform(-0.5, 0.5, 10):
            worst = max(worst, float(np.max(
                np.linalg.norm(lhs(t, x) - rhs(t, x), axis=-1))))
        assert worst <= 1e-9

    def test_expm_matches_closed_forms(self):
        # linear generator flows against their closed-form counterparts
        rot = linear_flow([[0.0, -1.0], [1.0, 0.0]])
        x = np.random.default_rng(2).uniform(-1, 1, (50, 2))
        assert np.allclose(rot(0.7, x), rotation_flow(1.0)(0.7, x), atol=1e-12)
        scale = linear_flow([[1.0, 0.0], [0.0, 1.0]])
        assert np.allclose(scale(0.4, x), scaling_flow(1.0)(0.4, x), atol=1e-12)


class TestTransport:
    @pytest.mark.parametrize("mname", [
        "identity2d", "rotation_quarter", "shear_half",
        "parabolic_shear", "sine_shear",
    ])
    def test_bilipschitz_maps_commute(self, mname):
        verdict, witness = check_flow_transport(
            BUILTIN_MAPS[mname], BUILTIN_FLOWS["translation"],
            samples=500, seed=9)
        assert verdict == "commute", witness

    def test_rotation_flow_through_linear_map(self):
        verdict, witness = check_flow_transport(
            BUILTIN_MAPS["shear_half"], BUILTIN_FLOWS["rotation"],
            samples=500, seed=9)
        assert verdict == "commute", witness

    def test_collapse_map_rejected(self):
        collapse = MapSpec("collapse", 2,
                           lambda p: np.stack([p[..., 0], 0.0 * p[..., 1]],
                                              axis=-1),
                           lambda p: np.array([[1.0, 0.0], [0.0, 0.0]]))
        with pytest.raises(InverseResidualTooLarge):
            check_flow_transport(collapse, BUILTIN_FLOWS["translation"])
