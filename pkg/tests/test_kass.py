"""Sweeps, envelopes, apparent speed limit, and the random-seed campaign."""

import numpy as np
import pytest

from tweezerlab import (
    Envelope,
    OptimizerParams,
    SeedSpectrum,
    apparent_qsl,
    base_motion,
    build_envelope,
    kass_campaign,
    optimize,
    sweep_down,
    sweep_up,
)

CHEAP = OptimizerParams(max_iters=3)


@pytest.fixture(scope="module")
def root(cfg):
    seed = base_motion(cfg, 0.12)
    return optimize(seed, cfg, OptimizerParams(max_iters=10), lineage={"kind": "base"})


class TestSweeps:
    def test_one_step_family_has_two_members(self, cfg, root):
        fam = sweep_down(root, root.duration - cfg.dt, cfg, CHEAP)
        assert len(fam) == 2
        np.testing.assert_allclose(np.diff(fam.durations), -cfg.dt, atol=1e-12)

    def test_full_range_family_member_count(self, cfg):
        # 0.40 -> 0.07 in dt steps: 166 members, fidelity recorded everywhere
        seed = base_motion(cfg, 0.40)
        quick_root = optimize(seed, cfg, OptimizerParams(max_iters=1))
        fam = sweep_down(quick_root, 0.07, cfg, OptimizerParams(max_iters=1))
        assert len(fam) == 166
        assert fam.durations[0] == pytest.approx(0.40)
        assert fam.durations[-1] == pytest.approx(0.07)
        assert np.all(fam.fidelities >= 0)

    def test_sweep_up_to_root_duration_is_singleton(self, cfg, root):
        fam = sweep_up(root, root.duration, cfg, CHEAP)
        assert len(fam) == 1 and fam.members[0] is root

    def test_sweep_up_durations_ascend(self, cfg, root):
        fam = sweep_up(root, root.duration + 3 * cfg.dt, cfg, CHEAP)
        assert len(fam) == 4
        np.testing.assert_allclose(np.diff(fam.durations), cfg.dt, atol=1e-12)

    def test_members_chain_by_contraction(self, cfg, root):
        fam = sweep_down(root, root.duration - 2 * cfg.dt, cfg, CHEAP)
        for parent, child in zip(fam.members, fam.members[1:]):
            assert child.lineage["kind"] == "sweep"
            assert child.lineage["parent_T"] == pytest.approx(parent.duration)

    def test_invalid_ranges_rejected(self, cfg, root):
        with pytest.raises(ValueError):
            sweep_down(root, root.duration, cfg, CHEAP)
        with pytest.raises(ValueError):
            sweep_up(root, root.duration - cfg.dt, cfg, CHEAP)


class TestEnvelope:
    def test_envelope_dominates_every_family(self, cfg, root):
        fams = [sweep_down(root, 0.10, cfg, CHEAP),
                sweep_down(root, 0.11, cfg, CHEAP)]
        env = build_envelope(fams, cfg.dt)
        for fam in fams:
            for sol in fam.members:
                i = np.argmin(np.abs(env.durations - sol.duration))
                assert env.best_fidelity[i] >= sol.fidelity - 1e-15

    def test_envelope_monotone_under_added_families(self, cfg, root):
        fam_a = sweep_down(root, 0.10, cfg, CHEAP)
        fam_b = sweep_down(root, 0.10, cfg, OptimizerParams(max_iters=6))
        env_a = build_envelope([fam_a], cfg.dt)
        env_ab = build_envelope([fam_a, fam_b], cfg.dt)
        assert np.all(env_ab.best_fidelity >= env_a.best_fidelity - 1e-15)

    def test_csv_round_trip(self, cfg, root):
        env = build_envelope([sweep_down(root, 0.10, cfg, CHEAP)], cfg.dt)
        back = Envelope.from_csv(env.to_csv())
        np.testing.assert_allclose(back.durations, env.durations, atol=1e-12)
        np.testing.assert_array_equal(back.best_fidelity, env.best_fidelity)
        np.testing.assert_array_equal(back.family_ids, env.family_ids)


class TestApparentQsl:
    def test_persistent_crossing_found(self):
        t = np.arange(0.07, 0.201, 0.002)
        f = np.where(t >= 0.15, 1.0, 0.9)
        # scanning down: first T with three consecutive sub-goal points
        env = Envelope(durations=t, best_fidelity=f, family_ids=np.zeros(len(t), int))
        assert apparent_qsl(env, goal=0.999) == pytest.approx(0.148)

    def test_single_point_dip_ignored(self):
        t = np.arange(0.10, 0.201, 0.002)
        f = np.ones(len(t))
        f[10] = 0.5
        env = Envelope(durations=t, best_fidelity=f, family_ids=np.zeros(len(t), int))
        assert apparent_qsl(env, goal=0.999) is None

    def test_never_below_returns_none(self):
        t = np.arange(0.10, 0.201, 0.002)
        env = Envelope(durations=t, best_fidelity=np.ones(len(t)),
                       family_ids=np.zeros(len(t), int))
        assert apparent_qsl(env) is None


class TestCampaign:
    def test_single_seed_campaign(self, cfg):
        result = kass_campaign(1, cfg, OptimizerParams(max_iters=4),
                               spectrum=SeedSpectrum(rng_seed=0),
                               t_start=0.12, t_min=0.10)
        assert len(result.families) == 1
        env = result.envelope
        assert env.durations[0] == pytest.approx(0.10)
        assert env.durations[-1] == pytest.approx(0.12)
        assert len(env.durations) == 11

    def test_campaign_deterministic(self, cfg):
        kwargs = dict(cfg=cfg, params=OptimizerParams(max_iters=3),
                      spectrum=SeedSpectrum(rng_seed=5), t_start=0.12, t_min=0.11)
        a = kass_campaign(2, **kwargs)
        b = kass_campaign(2, **kwargs)
        np.testing.assert_array_equal(a.envelope.best_fidelity, b.envelope.best_fidelity)

    def test_rejects_zero_seeds(self, cfg):
        with pytest.raises(ValueError):
            kass_campaign(0, cfg, CHEAP)
