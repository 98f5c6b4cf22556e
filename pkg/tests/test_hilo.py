"""Heuristic seed family: path construction, feasibility, direct search."""

import numpy as np
import pytest

from tweezerlab import HiloParams, OptimizerParams, direct_search, hilo_campaign, hilo_path, validate
from tweezerlab.errors import InfeasiblePathError
from tweezerlab.hilo import AMP_DEEP, AMP_START, check_feasible, dash_time, seed_grid

T = 0.15
#: Overshoot past the static trap, long slow drag, quick final return:
#: legs at (+20, -12.2, -14.3) with the speed limit at 20.
P_SHOVEL = HiloParams(x1=0.65, x2=-0.35, t2=0.93 * T)


class TestHiloPath:
    def test_degenerate_params_give_stationary_path(self, cfg):
        p = HiloParams(x1=cfg.target_trap.x0, x2=cfg.target_trap.x0, t2=0.5 * T)
        path = hilo_path(p, T, cfg)
        np.testing.assert_allclose(path.x0, cfg.target_trap.x0, atol=1e-12)

    def test_first_leg_runs_at_exactly_max_speed(self, cfg):
        path = hilo_path(P_SHOVEL, T, cfg)
        t1 = dash_time(P_SHOVEL, cfg)
        speeds = np.diff(path.x0) / cfg.dt
        inside = path.times[1:] <= t1 + 1e-12
        assert inside.sum() >= 20
        np.testing.assert_allclose(speeds[inside], cfg.tweezer_bounds.max_speed,
                                   rtol=1e-9)

    def test_samples_match_piecewise_construction(self, cfg):
        # independent sample-by-sample reconstruction of the three legs
        # and the amplitude decay
        path = hilo_path(P_SHOVEL, T, cfg)
        t1 = dash_time(P_SHOVEL, cfg)
        tau = P_SHOVEL.t2 - t1
        x_t = cfg.target_trap.x0
        for k, t in enumerate(path.times):
            if t <= t1:
                x_expect = x_t + cfg.tweezer_bounds.max_speed * t
                a_expect = AMP_START
            else:
                if t <= P_SHOVEL.t2:
                    frac = (t - t1) / (P_SHOVEL.t2 - t1)
                    x_expect = P_SHOVEL.x1 + frac * (P_SHOVEL.x2 - P_SHOVEL.x1)
                else:
                    frac = (t - P_SHOVEL.t2) / (T - P_SHOVEL.t2)
                    x_expect = P_SHOVEL.x2 + frac * (x_t - P_SHOVEL.x2)
                a_expect = AMP_DEEP + (AMP_START - AMP_DEEP) * np.exp(-(t - t1) / tau)
            assert path.x0[k] == pytest.approx(x_expect, abs=1e-10), k
            assert path.amp[k] == pytest.approx(a_expect, abs=1e-10), k

    def test_shape_is_fast_right_slow_left_fast_left(self, cfg):
        # the three legs of the player strategy, in order
        path = hilo_path(P_SHOVEL, T, cfg)
        t1 = dash_time(P_SHOVEL, cfg)
        v1 = (P_SHOVEL.x1 - cfg.target_trap.x0) / t1
        v2 = (P_SHOVEL.x2 - P_SHOVEL.x1) / (P_SHOVEL.t2 - t1)
        v3 = (cfg.target_trap.x0 - P_SHOVEL.x2) / (T - P_SHOVEL.t2)
        assert v1 == pytest.approx(cfg.tweezer_bounds.max_speed)
        assert v2 < 0 and v3 < 0
        assert abs(v2) < abs(v3) < abs(v1)

    def test_endpoints_match_reference_motion(self, cfg):
        path = hilo_path(P_SHOVEL, T, cfg)
        assert path.x0[0] == cfg.target_trap.x0
        assert path.x0[-1] == cfg.target_trap.x0
        assert path.amp[0] == AMP_START

    def test_amplitude_decays_toward_deep_value(self, cfg):
        path = hilo_path(P_SHOVEL, T, cfg)
        t1 = dash_time(P_SHOVEL, cfg)
        assert np.all(path.amp[path.times <= t1] == AMP_START)
        after = path.amp[path.times > t1]
        assert np.all(np.diff(after) < 0)                 # monotone decay
        assert np.all(path.amp >= AMP_DEEP - 1e-12)
        # with a short decay constant the end value reaches the deep plateau
        quick = HiloParams(x1=0.65, x2=0.3, t2=0.5 * T)
        tail = hilo_path(quick, T, cfg).amp[-1]
        assert tail == pytest.approx(AMP_DEEP, abs=5.0)

    def test_path_validates(self, cfg):
        assert validate(hilo_path(P_SHOVEL, T, cfg), cfg) == []

    def test_infeasible_parameters_raise(self, cfg):
        # t2 earlier than the dash can finish
        bad = HiloParams(x1=0.8, x2=0.0, t2=0.01)
        assert check_feasible(bad, T, cfg) is not None
        with pytest.raises(InfeasiblePathError):
            hilo_path(bad, T, cfg)
        # second leg would need to outrun the speed limit
        bad2 = HiloParams(x1=0.8, x2=-0.5, t2=0.07)
        with pytest.raises(InfeasiblePathError):
            hilo_path(bad2, T, cfg)


class TestDirectSearch:
    def test_budget_one_returns_single_result(self, cfg):
        out = direct_search(cfg, OptimizerParams(max_iters=1), T=T, budget=1,
                            grid_shape=(3, 3, 3))
        assert len(out) == 1

    def test_ranking_sorted_by_fidelity(self, cfg):
        out = direct_search(cfg, OptimizerParams(max_iters=2), T=T, grid_shape=(2, 2, 2))
        fids = [r.solution.fidelity for r in out]
        assert fids == sorted(fids, reverse=True)
        assert all(r.solution.lineage["kind"] == "hilo" for r in out)

    def test_search_deterministic(self, cfg):
        kwargs = dict(T=T, grid_shape=(2, 2, 2))
        a = direct_search(cfg, OptimizerParams(max_iters=2), **kwargs)
        b = direct_search(cfg, OptimizerParams(max_iters=2), **kwargs)
        assert [r.params for r in a] == [r.params for r in b]
        assert [r.solution.fidelity for r in a] == [r.solution.fidelity for r in b]

    def test_grid_covers_documented_region(self, cfg):
        seeds = seed_grid(cfg, T, grid_shape=(5, 5, 5))
        assert seeds
        for p in seeds:
            assert cfg.static_trap.x0 <= p.x1 <= cfg.static_trap.x0 + 0.3
            assert cfg.target_trap.x0 <= p.x2 <= cfg.static_trap.x0
            assert 0.3 * T <= p.t2 <= 0.9 * T
            assert check_feasible(p, T, cfg) is None

    def test_no_feasible_grid_raises(self, cfg):
        with pytest.raises(InfeasiblePathError):
            # t2 window entirely before the dash can finish
            direct_search(cfg, OptimizerParams(max_iters=1), T=T,
                          grid_shape=(2, 2, 2), t2_window=(0.01, 0.02))


class TestHiloCampaign:
    def test_topk_one_gives_two_families(self, cfg):
        result = hilo_campaign(cfg, OptimizerParams(max_iters=2), T=0.15, top_k=1,
                               t_min=0.146, t_max=0.154, grid_shape=(2, 2, 2))
        assert len(result.families) == 2
        directions = {f.direction for f in result.families}
        assert directions == {"down", "up"}

    def test_envelope_dominates_families(self, cfg):
        result = hilo_campaign(cfg, OptimizerParams(max_iters=2), T=0.15, top_k=1,
                               t_min=0.146, t_max=0.154, grid_shape=(2, 2, 2))
        env = result.envelope
        for fam in result.families:
            for sol in fam.members:
                i = np.argmin(np.abs(env.durations - sol.duration))
                assert env.best_fidelity[i] >= sol.fidelity - 1e-15
