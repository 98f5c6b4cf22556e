"""Heuristically initialized local optimization.

The seed family abstracts the strategy human players converge on: dash the
tweezer past the atom at the speed limit, drag it back slowly to shovel the
atom along, then return quickly to the target.  Three numbers fix a seed:
the turning points x1 and x2 and the time t2 of the second one (the first
leg always runs at the speed limit, so its duration is implied).  After the
first leg the amplitude relaxes exponentially from the reference -100 to
the deeper -150, which direct optimization identifies as the best depth.
The seeds deliberately contain no oscillatory stabilization: the local
optimizer adds that.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .control import ControlPath, steps_for_duration
from .errors import InfeasiblePathError
from .kass import CampaignResult, SweepFamily, apparent_qsl, build_envelope, sweep_down, sweep_up
from .optimizer import OptimizerParams, Solution, optimize
from .physics import ProblemConfig

#: Reference amplitude before the dash ends.
AMP_START = -100.0
#: Asymptotic amplitude after the dash.
AMP_DEEP = -150.0


@dataclass(frozen=True)
class HiloParams:
    """Seed coordinates: turning points x1, x2 and the time t2 of x2."""

    x1: float
    x2: float
    t2: float


def dash_time(p: HiloParams, cfg: ProblemConfig) -> float:
    """Duration of the first leg: straight to x1 at the speed limit."""
    return abs(p.x1 - cfg.target_trap.x0) / cfg.tweezer_bounds.max_speed


def check_feasible(p: HiloParams, T: float, cfg: ProblemConfig) -> Optional[str]:
    """Return None if the three legs fit in T within the speed limit,
    otherwise a human-readable reason."""
    t1 = dash_time(p, cfg)
    smax = cfg.tweezer_bounds.max_speed
    b = cfg.tweezer_bounds
    if not (b.x_min <= p.x1 <= b.x_max and b.x_min <= p.x2 <= b.x_max):
        return f"turning point outside control bounds [{b.x_min}, {b.x_max}]"
    if not t1 < p.t2 < T:
        return f"need t1={t1:.4g} < t2={p.t2:.4g} < T={T:.4g}"
    if abs(p.x2 - p.x1) / (p.t2 - t1) > smax + 1e-9:
        return "second leg exceeds the speed limit"
    if abs(cfg.target_trap.x0 - p.x2) / (T - p.t2) > smax + 1e-9:
        return "final leg exceeds the speed limit"
    return None


def hilo_path(p: HiloParams, T: float, cfg: ProblemConfig) -> ControlPath:
    """Materialize a seed triple as a sampled control path.

    Position: piecewise linear through (0, x_target) -> (t1, x1) -> (t2, x2)
    -> (T, x_target), with the first leg at exactly the speed limit.
    Amplitude: -100 until t1, then -150 + 50 exp(-(t - t1)/tau) with
    tau = t2 - t1, so the decay completes over the slow leg.

    Raises :class:`InfeasiblePathError` for parameters whose legs cannot
    respect the speed limit.
    """
    reason = check_feasible(p, T, cfg)
    if reason is not None:
        raise InfeasiblePathError(f"HILO params {p} infeasible for T={T}: {reason}")
    n = steps_for_duration(T, cfg.dt)
    t = np.arange(n + 1) * cfg.dt
    x_t = cfg.target_trap.x0
    t1 = dash_time(p, cfg)
    if t1 > 0:
        x0 = np.interp(t, [0.0, t1, p.t2, T], [x_t, p.x1, p.x2, x_t])
    else:
        x0 = np.interp(t, [0.0, p.t2, T], [x_t, p.x2, x_t])
    tau = p.t2 - t1
    amp = np.where(t <= t1, AMP_START,
                   AMP_DEEP + (AMP_START - AMP_DEEP) * np.exp(-np.maximum(t - t1, 0.0) / tau))
    return ControlPath(cfg.dt, x0, amp)


@dataclass
class SearchResult:
    """One evaluated grid point: the seed triple and its optimized solution."""

    params: HiloParams
    solution: Solution


def seed_grid(cfg: ProblemConfig, T: float, grid_shape=(5, 5, 5),
              x1_span: float = 0.3, t2_window=(0.3, 0.9)) -> list[HiloParams]:
    """Feasible seed triples on a coarse grid, in deterministic order.

    x1 scans the overshoot band past the static trap, x2 the full stretch
    between target and static trap, t2 a central fraction of T.
    """
    x_s = cfg.static_trap.x0
    x_t = cfg.target_trap.x0
    x1_axis = np.linspace(x_s, x_s + x1_span, grid_shape[0])
    x2_axis = np.linspace(x_t, x_s, grid_shape[1])
    t2_axis = np.linspace(t2_window[0] * T, t2_window[1] * T, grid_shape[2])
    out = []
    for x1, x2, t2 in itertools.product(x1_axis, x2_axis, t2_axis):
        p = HiloParams(float(x1), float(x2), float(t2))
        if check_feasible(p, T, cfg) is None:
            out.append(p)
    return out


def direct_search(cfg: ProblemConfig, params: OptimizerParams, T: float = 0.15,
                  budget: Optional[int] = None, grid_shape=(5, 5, 5),
                  x1_span: float = 0.3, t2_window=(0.3, 0.9),
                  store_trajectory: int = 0) -> list[SearchResult]:
    """Optimize every feasible grid seed and rank by fidelity.

    ``budget`` caps the number of optimizations (grid order, deterministic).
    Returns all evaluated points sorted by fidelity, best first; ties keep
    grid order.  Raises InfeasiblePathError if no grid point is feasible.
    """
    seeds = seed_grid(cfg, T, grid_shape, x1_span, t2_window)
    if not seeds:
        raise InfeasiblePathError(f"no feasible HILO grid point for T={T} with shape {grid_shape}")
    if budget is not None:
        if budget < 1:
            raise ValueError("budget must be >= 1")
        seeds = seeds[:budget]
    results = []
    for p in seeds:
        seed_path = hilo_path(p, T, cfg)
        lineage = {"kind": "hilo", "x1": p.x1, "x2": p.x2, "t2": p.t2}
        sol = optimize(seed_path, cfg, params, lineage=lineage, store_trajectory=store_trajectory)
        results.append(SearchResult(params=p, solution=sol))
    results.sort(key=lambda r: -r.solution.fidelity)
    return results


def hilo_campaign(cfg: ProblemConfig, params: OptimizerParams, T: float = 0.15,
                  top_k: int = 2, t_min: float = 0.07, t_max: float = 0.40,
                  budget: Optional[int] = None, grid_shape=(5, 5, 5),
                  goal: Optional[float] = None,
                  sweep_params: Optional[OptimizerParams] = None) -> CampaignResult:
    """Direct search at ``T`` then sweep the best seeds both ways.

    Each of the ``top_k`` best search results is swept down to ``t_min``
    and up to ``t_max`` (with ``sweep_params`` if given); the envelope and
    apparent speed limit are reduced over all resulting families.
    """
    ranked = direct_search(cfg, params, T, budget=budget, grid_shape=grid_shape)
    sweep_p = sweep_params or params
    families: list[SweepFamily] = []
    for r in ranked[:top_k]:
        families.append(sweep_down(r.solution, t_min, cfg, sweep_p))
        families.append(sweep_up(r.solution, t_max, cfg, sweep_p))
    envelope = build_envelope(families, cfg.dt)
    return CampaignResult(families=families, envelope=envelope,
                          qsl=apparent_qsl(envelope, goal or params.fidelity_goal))
