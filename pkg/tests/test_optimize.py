"""Per-GDF spend optimization and portfolio budget allocation."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from enbcds import (
    LITERAL,
    AttackType,
    BudgetInfeasibleError,
    EvalContext,
    Exponential,
    Gdf,
    GordonLoebI,
    NotMandatoryError,
    Portfolio,
    allocate,
    bundled_scenario,
    enb,
    enbcds_curve,
    mandatory_min_loss,
    optimal_spend,
    restrict_portfolio,
)

from oracles import (
    PARAMETRIC,
    gli_optimal_spend,
    grid_allocate,
    grid_argmax,
    make_rng,
    oracle_enb,
    oracle_f,
    oracle_total,
    random_gdf,
    random_portfolio,
    scale_portfolio,
)


class TestOptimalSpend:
    def test_no_attacks_returns_zero_spend_exactly(self):
        x = Gdf(id="x", ben=100.0, dir_costs=30.0)
        best = optimal_spend(x)
        assert best.s_star == 0.0
        assert best.value == 70.0

    def test_power_law_closed_form(self):
        # pull = p*L*alpha*beta = 10000 * 0.01 = 100, so s* = (sqrt(100)-1)/0.01 = 900
        x = Gdf(id="x", ben=1e6, attacks=(
            AttackType(id="a", baseline_prob=0.5, loss=20_000.0,
                       breach=GordonLoebI(alpha=0.01, beta=1.0)),
        ))
        want = gli_optimal_spend(0.01, 1.0, 0.5, 20_000.0)
        assert want == pytest.approx(900.0, rel=1e-12)
        best = optimal_spend(x)
        assert best.s_star == pytest.approx(want, rel=1e-4)
        assert best.value == pytest.approx(oracle_enb(x, want), rel=1e-9)

    @given(st.integers(min_value=0, max_value=10_000))
    def test_power_law_closed_form_random(self, seed):
        rng = make_rng(seed)
        x = random_gdf(rng, 0, n_attacks=1, families=("gl1",), c_range=(1.5, 15.0))
        attack = x.attacks[0]
        want = gli_optimal_spend(attack.breach.alpha, attack.breach.beta,
                                 attack.baseline_prob, attack.loss)
        best = optimal_spend(x)
        assert best.s_star == pytest.approx(want, rel=1e-4)

    @given(st.integers(min_value=0, max_value=10_000))
    def test_argmax_dominates_endpoints(self, seed):
        rng = make_rng(seed)
        x = random_gdf(rng, 0, padded=False)
        f0 = oracle_f(x, 0.0)
        best = optimal_spend(x)
        assert best.value >= enb(x, 0.0) - 1e-12 * max(1.0, abs(best.value))
        assert best.value >= enb(x, f0) - 1e-12 * max(1.0, abs(best.value))
        assert 0.0 <= best.s_star <= f0

    @given(st.integers(min_value=0, max_value=10_000))
    def test_matches_dense_grid(self, seed):
        rng = make_rng(seed)
        x = random_gdf(rng, 0, families=PARAMETRIC)
        f0 = oracle_f(x, 0.0)
        best = optimal_spend(x)
        grid_s, grid_v = grid_argmax(lambda s: oracle_enb(x, s), 0.0, f0, 2001)
        step = f0 / 2000.0
        assert abs(best.s_star - grid_s) <= step * (1.0 + 1e-9)
        assert best.value >= grid_v - 1e-9 * max(1.0, abs(grid_v))

    def test_table_family_beats_dense_grid(self):
        rng = make_rng(5)
        for i in range(5):
            x = random_gdf(rng, i, families=("table",))
            f0 = oracle_f(x, 0.0)
            best = optimal_spend(x)
            _, grid_v = grid_argmax(lambda s: oracle_enb(x, s), 0.0, f0, 2001)
            assert best.value >= grid_v - 1e-6 * max(1.0, abs(grid_v))

    def test_explicit_upper_bound_respected(self):
        x = Gdf(id="x", ben=1e6, attacks=(
            AttackType(id="a", baseline_prob=0.5, loss=20_000.0,
                       breach=GordonLoebI(alpha=0.01, beta=1.0)),
        ))
        best = optimal_spend(x, upper=100.0)
        assert best.s_star <= 100.0
        assert best.value == pytest.approx(oracle_enb(x, 100.0), rel=1e-6)

    def test_literal_mode_beats_grid(self):
        rng = make_rng(23)
        ctx = EvalContext(mode=LITERAL)
        for i in range(5):
            x = random_gdf(rng, i, families=PARAMETRIC)
            f0 = oracle_f(x, 0.0)
            best = optimal_spend(x, context=ctx)
            _, grid_v = grid_argmax(lambda s: oracle_enb(x, s, "literal"), 0.0, f0, 1501)
            assert best.value >= grid_v - 1e-6 * max(1.0, abs(grid_v))
            assert best.value == pytest.approx(oracle_enb(x, best.s_star, "literal"), rel=1e-9)


class TestMandatoryMinLoss:
    def test_rejects_non_mandatory_gdf(self):
        x = Gdf(id="x", ben=10.0, mandatory=False)
        with pytest.raises(NotMandatoryError):
            mandatory_min_loss(x)

    def test_no_attacks_means_zero_spend(self):
        x = Gdf(id="x", ben=0.0, dir_costs=50.0, mandatory=True)
        assert mandatory_min_loss(x) == 0.0

    def test_wifi_thermostats_spend_positive_value_negative(self):
        sc = bundled_scenario("wifi-thermostats")
        x = sc.portfolio.gdfs[0]
        s = mandatory_min_loss(x)
        assert s > 0.0
        assert enb(x, s) < 0.0

    @given(st.integers(min_value=0, max_value=10_000))
    def test_agrees_with_optimal_spend(self, seed):
        rng = make_rng(seed)
        x = random_gdf(rng, 0, padded=False, mandatory=True)
        assert mandatory_min_loss(x) == optimal_spend(x).s_star


def negative_gdf(rng, tag):
    """A GDF that is a clear expected loss at every spend level."""
    x = random_gdf(rng, tag, padded=False)
    import dataclasses

    return dataclasses.replace(x, ben=0.0)


class TestAllocate:
    def test_zero_budget_zero_spends_and_drops(self):
        rng = make_rng(31)
        good = random_gdf(rng, "good")
        bad = negative_gdf(rng, "bad")
        p = Portfolio(gdfs=(good, bad))
        r = allocate(p, budget=0.0)
        assert r.spends == {good.id: 0.0, bad.id: 0.0}
        assert r.dropped == frozenset({bad.id})
        assert r.objective == pytest.approx(oracle_enb(good, 0.0), rel=1e-12)
        assert r.budget_used == 0.0

    def test_single_gdf_with_slack_budget_hits_standalone_peak(self):
        rng = make_rng(37)
        x = random_gdf(rng, 0)
        best = optimal_spend(x)
        p = Portfolio(gdfs=(x,))
        r = allocate(p, budget=2.0 * oracle_f(x, 0.0))
        assert r.spends[x.id] == pytest.approx(best.s_star, rel=1e-6, abs=1e-6)
        assert r.objective == pytest.approx(best.value, rel=1e-9)

    def test_negative_budget_rejected(self):
        p = Portfolio(gdfs=(Gdf(id="x", ben=1.0),))
        with pytest.raises(BudgetInfeasibleError):
            allocate(p, budget=-1.0)
        with pytest.raises(BudgetInfeasibleError):
            allocate(p, budget=math.nan)

    def test_budget_from_portfolio_field_is_used(self):
        rng = make_rng(41)
        x = random_gdf(rng, 0)
        budget = 0.4 * optimal_spend(x).s_star  # strictly binding
        p = Portfolio(gdfs=(x,), budget=budget)
        r = allocate(p)
        assert r.spends[x.id] == pytest.approx(budget, rel=1e-9)

    def test_argument_budget_overrides_portfolio_budget(self):
        rng = make_rng(43)
        x = random_gdf(rng, 0)
        p = Portfolio(gdfs=(x,), budget=1.0)
        override = 0.5 * optimal_spend(x).s_star  # strictly binding
        r = allocate(p, budget=override)
        assert r.spends[x.id] == pytest.approx(override, rel=1e-9)

    def test_unconstrained_allocation_hits_each_standalone_peak(self):
        rng = make_rng(47)
        p = random_portfolio(rng, 3)
        r = allocate(p)
        for x in p.gdfs:
            best = optimal_spend(x)
            # both solvers locate the peak to within ~1e-6 of the window width
            tol = 2e-6 * oracle_f(x, 0.0) + 1e-9
            assert abs(r.spends[x.id] - best.s_star) <= tol
            assert enb(x, r.spends[x.id]) == pytest.approx(best.value, rel=1e-6)
        assert r.lam == 0.0

    @given(st.integers(min_value=0, max_value=5_000))
    def test_budget_respected_and_objective_consistent(self, seed):
        rng = make_rng(seed)
        n = int(rng.integers(1, 4))
        p = random_portfolio(rng, n, with_edges=bool(rng.integers(0, 2)))
        budget = float(rng.uniform(0.05, 0.7)) * sum(oracle_f(x, 0.0) for x in p.gdfs)
        r = allocate(p, budget=budget)
        assert sum(r.spends.values()) <= budget * (1.0 + 1e-9) + 1e-9
        assert all(s >= 0.0 for s in r.spends.values())
        kept = [gid for gid in p.ids() if gid not in r.dropped]
        sub = restrict_portfolio(p, kept)
        spends_kept = {gid: r.spends[gid] for gid in kept}
        assert r.objective == pytest.approx(oracle_total(sub, spends_kept), rel=1e-9, abs=1e-6)
        for gid in r.dropped:
            assert r.spends[gid] == 0.0

    def test_dropped_gdfs_are_expected_losses(self):
        rng = make_rng(53)
        good = random_gdf(rng, "good")
        bad = negative_gdf(rng, "bad")
        p = Portfolio(gdfs=(good, bad))
        r = allocate(p, budget=0.5 * oracle_f(good, 0.0))
        assert bad.id in r.dropped
        assert good.id not in r.dropped

    def test_mandatory_gdf_never_dropped(self):
        rng = make_rng(59)
        import dataclasses

        bad = dataclasses.replace(negative_gdf(rng, "bad"), mandatory=True)
        p = Portfolio(gdfs=(bad,))
        r = allocate(p, budget=0.5 * oracle_f(bad, 0.0))
        assert r.dropped == frozenset()
        assert enb(bad, r.spends[bad.id]) < 0.0

    def test_wifi_thermostats_allocation_keeps_the_loss_maker(self):
        sc = bundled_scenario("wifi-thermostats")
        r = allocate(sc.portfolio)
        x = sc.portfolio.gdfs[0]
        assert r.dropped == frozenset()
        assert r.spends[x.id] > 0.0
        assert r.objective < 0.0

    @given(st.integers(min_value=0, max_value=5_000))
    def test_objective_monotone_in_budget(self, seed):
        rng = make_rng(seed)
        p = random_portfolio(rng, int(rng.integers(1, 4)))
        total = sum(oracle_f(x, 0.0) for x in p.gdfs)
        b1 = float(rng.uniform(0.05, 0.5)) * total
        b2 = b1 * float(rng.uniform(1.1, 2.0))
        r1 = allocate(p, budget=b1)
        r2 = allocate(p, budget=b2)
        scale = max(1.0, abs(r1.objective))
        assert r2.objective >= r1.objective - 1e-7 * scale

    @given(st.integers(min_value=0, max_value=5_000))
    def test_drop_stability_under_resolve(self, seed):
        rng = make_rng(seed)
        p = random_portfolio(rng, int(rng.integers(2, 4)), padded=False)
        budget = float(rng.uniform(0.1, 0.6)) * sum(oracle_f(x, 0.0) for x in p.gdfs)
        r = allocate(p, budget=budget)
        kept = [gid for gid in p.ids() if gid not in r.dropped]
        r2 = allocate(restrict_portfolio(p, kept), budget=budget)
        assert r2.dropped == frozenset()
        for gid in kept:
            assert r2.spends[gid] == pytest.approx(r.spends[gid], rel=1e-9, abs=1e-9)
        assert r2.objective == pytest.approx(r.objective, rel=1e-9, abs=1e-9)

    @given(st.integers(min_value=0, max_value=5_000), st.integers(min_value=-6, max_value=6))
    def test_scale_equivariance(self, seed, exponent):
        rng = make_rng(seed)
        p = random_portfolio(rng, int(rng.integers(1, 4)))
        budget = float(rng.uniform(0.1, 0.6)) * sum(oracle_f(x, 0.0) for x in p.gdfs)
        factor = 2.0 ** exponent
        r = allocate(p, budget=budget)
        rs = allocate(scale_portfolio(p, factor), budget=budget * factor)
        assert rs.dropped == r.dropped
        for gid, s in r.spends.items():
            assert rs.spends[gid] == pytest.approx(s * factor, rel=1e-9, abs=1e-9 * factor)
        assert rs.objective == pytest.approx(r.objective * factor, rel=1e-9)

    def test_sweep_objectives_non_decreasing(self):
        rng = make_rng(61)
        for i in range(5):
            p = random_portfolio(rng, 3, with_edges=True)
            budget = 0.4 * sum(oracle_f(x, 0.0) for x in p.gdfs)
            r = allocate(p, budget=budget)
            scale = max(1.0, abs(r.objective))
            for a, b in zip(r.sweep_objectives, r.sweep_objectives[1:]):
                assert b >= a - 1e-9 * scale

    def test_matches_grid_oracle_without_edges(self):
        rng = make_rng(67)
        for i in range(5):
            p = random_portfolio(rng, 3)
            f0s = sum(oracle_f(x, 0.0) for x in p.gdfs)
            budget = float(rng.uniform(0.15, 0.6)) * f0s
            r = allocate(p, budget=budget)
            _, grid_v = grid_allocate(p, budget, points=40)
            scale = max(1.0, f0s)
            assert r.objective >= grid_v - 1e-3 * scale

    def test_matches_grid_oracle_with_edges(self):
        rng = make_rng(71)
        for i in range(3):
            budget_frac = float(rng.uniform(0.15, 0.5))
            p = random_portfolio(rng, 3, with_edges=True, n_attacks=2)
            f0s = sum(oracle_f(x, 0.0) for x in p.gdfs)
            budget = budget_frac * f0s
            r = allocate(p, budget=budget)
            _, grid_v = grid_allocate(p, budget, points=25)
            scale = max(1.0, f0s)
            assert r.objective >= grid_v - 5e-3 * scale

    def test_interior_marginals_are_equal(self):
        rng = make_rng(73)
        for i in range(5):
            p = random_portfolio(rng, 3)
            budget = 0.3 * sum(oracle_f(x, 0.0) for x in p.gdfs)
            r = allocate(p, budget=budget)
            interior = [gid for gid, flag in r.interior.items() if flag]
            if len(interior) >= 2:
                ms = [r.marginal_at_solution[gid] for gid in interior]
                spread = (max(ms) - min(ms)) / max(abs(m) for m in ms)
                assert spread <= 1e-4

    def test_literal_mode_uses_grid_fallback(self):
        rng = make_rng(79)
        p = random_portfolio(rng, 3)
        budget = 0.4 * sum(oracle_f(x, 0.0) for x in p.gdfs)
        r = allocate(p, budget=budget, mode=LITERAL)
        assert r.lam is None
        assert sum(r.spends.values()) <= budget * (1.0 + 1e-9) + 1e-9
        kept = [gid for gid in p.ids() if gid not in r.dropped]
        sub = restrict_portfolio(p, kept)
        spends_kept = {gid: r.spends[gid] for gid in kept}
        assert r.objective == pytest.approx(
            oracle_total(sub, spends_kept, "literal"), rel=1e-9, abs=1e-6
        )

    def test_literal_mode_beats_coarse_grid(self):
        rng = make_rng(83)
        p = random_portfolio(rng, 2)
        f0s = sum(oracle_f(x, 0.0) for x in p.gdfs)
        budget = 0.35 * f0s
        r = allocate(p, budget=budget, mode=LITERAL)
        _, grid_v = grid_allocate(p, budget, points=30, mode="literal")
        assert r.objective >= grid_v - 5e-3 * max(1.0, f0s)

    def test_empty_portfolio_allocates_nothing(self):
        r = allocate(Portfolio(), budget=100.0)
        assert r.spends == {}
        assert r.objective == 0.0
        assert r.dropped == frozenset()

    def test_curve_peak_agrees_with_optimizer(self):
        rng = make_rng(89)
        x = random_gdf(rng, 0, families=PARAMETRIC)
        curve = enbcds_curve(x)
        best = optimal_spend(x)
        assert curve.s_star == pytest.approx(best.s_star, rel=1e-9, abs=1e-9)
        assert curve.peak_value == pytest.approx(best.value, rel=1e-12)
