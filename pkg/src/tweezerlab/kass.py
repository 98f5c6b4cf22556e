"""Seed-and-sweep campaigns over process duration.

A sweep repeatedly contracts (or dilates) the current solution by one time
step and re-optimizes, tracing a family of solutions across durations.  A
campaign launches many randomly seeded optimizations at a long duration,
sweeps each family down to a minimal duration, and reduces the results to
the best-fidelity envelope F*(T), from which an apparent quantum speed
limit is read off.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .control import SeedSpectrum, contract, dilate, random_sin_seed, steps_for_duration
from .errors import NumericalFailureError
from .optimizer import OptimizerParams, Solution, optimize
from .physics import ProblemConfig

log = logging.getLogger(__name__)


@dataclass
class SweepFamily:
    """Solutions traced by one sweep, root first, durations stepping by dt."""

    members: list[Solution]
    direction: str                    # "down" | "up"
    root_lineage: dict = field(default_factory=dict)

    @property
    def durations(self) -> np.ndarray:
        return np.array([s.duration for s in self.members])

    @property
    def fidelities(self) -> np.ndarray:
        return np.array([s.fidelity for s in self.members])

    def __len__(self) -> int:
        return len(self.members)


def sweep_down(root: Solution, t_min: float, cfg: ProblemConfig,
               params: OptimizerParams) -> SweepFamily:
    """Contract-by-dt-then-reoptimize from the root down to ``t_min``.

    The family records every member even where fidelity degrades.  If the
    optimizer fails numerically at some duration, the family is returned
    with the members collected so far.
    """
    if not root.duration > t_min >= cfg.dt:
        raise ValueError(f"need root.duration > t_min >= dt, got {root.duration}, {t_min}, {cfg.dt}")
    return _sweep(root, t_min, cfg, params, direction="down")


def sweep_up(root: Solution, t_max: float, cfg: ProblemConfig,
             params: OptimizerParams) -> SweepFamily:
    """Dilate-by-dt-then-reoptimize from the root up to ``t_max``."""
    if t_max < root.duration:
        raise ValueError(f"need t_max >= root.duration, got {t_max} < {root.duration}")
    return _sweep(root, t_max, cfg, params, direction="up")


def _sweep(root: Solution, t_limit: float, cfg: ProblemConfig,
           params: OptimizerParams, direction: str) -> SweepFamily:
    members = [root]
    cur = root
    while True:
        n = cur.path.n_steps
        if direction == "down":
            if n - 1 < round(t_limit / cfg.dt):
                break
            seed = contract(cur.path, (n - 1) / n)
        else:
            if n + 1 > round(t_limit / cfg.dt):
                break
            seed = dilate(cur.path, (n + 1) / n)
        lineage = {"kind": "sweep", "direction": direction, "parent_T": cur.duration,
                   "root": root.lineage}
        try:
            cur = optimize(seed, cfg, params, lineage=lineage)
        except NumericalFailureError as err:
            log.warning("sweep aborted at T=%.4g: %s", seed.duration, err)
            break
        members.append(cur)
    return SweepFamily(members=members, direction=direction, root_lineage=dict(root.lineage))


@dataclass
class Envelope:
    """Best fidelity per duration over a set of families."""

    durations: np.ndarray          # ascending, on the dt grid
    best_fidelity: np.ndarray
    family_ids: np.ndarray         # index of the winning family, -1 where empty

    def to_csv(self) -> str:
        lines = ["T,bestF,family_id"]
        for t, f, i in zip(self.durations, self.best_fidelity, self.family_ids):
            lines.append(f"{t:.12g},{f:.17g},{int(i)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Envelope":
        rows = [ln.split(",") for ln in text.strip().splitlines()[1:]]
        return cls(durations=np.array([float(r[0]) for r in rows]),
                   best_fidelity=np.array([float(r[1]) for r in rows]),
                   family_ids=np.array([int(r[2]) for r in rows]))


def build_envelope(families: list[SweepFamily], dt: float) -> Envelope:
    """Pointwise max of family fidelities on the common duration grid."""
    if not families:
        raise ValueError("no families to reduce")
    all_t = np.concatenate([f.durations for f in families])
    steps = np.unique(np.round(all_t / dt).astype(int))
    best = np.full(len(steps), -1.0)
    who = np.full(len(steps), -1, dtype=int)
    index = {s: i for i, s in enumerate(steps)}
    for fi, fam in enumerate(families):
        for sol in fam.members:
            i = index[round(sol.duration / dt)]
            if sol.fidelity > best[i]:
                best[i] = sol.fidelity
                who[i] = fi
    return Envelope(durations=steps * dt, best_fidelity=best, family_ids=who)


def apparent_qsl(envelope: Envelope, goal: float = 0.999, run_length: int = 3) -> Optional[float]:
    """Largest duration below which the envelope stays under ``goal``.

    Scans the envelope downward from the longest duration and reports the
    first grid point where fidelity is below ``goal`` for ``run_length``
    consecutive grid points (persistently, not as a one-point dip).
    Returns None when the envelope never drops below the goal that way.
    """
    t = envelope.durations
    f = envelope.best_fidelity
    order = np.argsort(t)[::-1]
    ts, fs = t[order], f[order]
    below = fs < goal
    for i in range(len(ts) - run_length + 1):
        if all(below[i:i + run_length]):
            return float(ts[i])
    return None


@dataclass
class CampaignResult:
    """Families plus the reduced envelope and its apparent speed limit."""

    families: list[SweepFamily]
    envelope: Envelope
    qsl: Optional[float]


def _run_one_seed(args) -> SweepFamily:
    i, cfg, params, root_params, spectrum, t_start, t_min = args
    seed_spectrum = SeedSpectrum(n_modes=spectrum.n_modes, scale=spectrum.scale,
                                 decay=spectrum.decay, rng_seed=spectrum.rng_seed + i)
    seed = random_sin_seed(cfg, t_start, seed_spectrum)
    lineage = {"kind": "random", "rng_seed": seed_spectrum.rng_seed}
    try:
        root = optimize(seed, cfg, root_params, lineage=lineage)
        return sweep_down(root, t_min, cfg, params)
    except NumericalFailureError as err:
        log.warning("seed %d failed: %s", i, err)
        return SweepFamily(members=[], direction="down", root_lineage=lineage)


def kass_campaign(n_seeds: int, cfg: ProblemConfig, params: OptimizerParams,
                  spectrum: SeedSpectrum = SeedSpectrum(),
                  t_start: float = 0.40, t_min: float = 0.07,
                  goal: Optional[float] = None,
                  root_params: Optional[OptimizerParams] = None,
                  n_workers: int = 1) -> CampaignResult:
    """Randomly seeded sweep campaign.

    Each seed perturbs the reference motion with an independent random
    sine series (rng_seed = spectrum.rng_seed + i), is optimized at
    ``t_start`` (with ``root_params`` if given, so roots can get a bigger
    budget than sweep steps), and swept down to ``t_min``.  Per-seed
    failures are logged and skipped; the result is deterministic for a
    fixed spectrum.
    """
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    steps_for_duration(t_start, cfg.dt)
    jobs = [(i, cfg, params, root_params or params, spectrum, t_start, t_min)
            for i in range(n_seeds)]
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            families = list(pool.map(_run_one_seed, jobs))
    else:
        families = [_run_one_seed(j) for j in jobs]
    families = [f for f in families if f.members]
    envelope = build_envelope(families, cfg.dt)
    return CampaignResult(families=families, envelope=envelope,
                          qsl=apparent_qsl(envelope, goal or params.fidelity_goal))
