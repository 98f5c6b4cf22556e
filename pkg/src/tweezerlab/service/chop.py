"""Player-seeded optimization (CHOP): select the better player records,
optimize each, and sweep the result across durations.

The selection rule defaults to the top 70% of records by server fidelity
among those shorter than 0.40; every output family's lineage points back at
the player record that seeded it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

from ..kass import SweepFamily, sweep_down, sweep_up
from ..optimizer import OptimizerParams, Solution, optimize
from ..archive import write_solutions
from .store import Store, TrajectoryRecord

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChopSelection:
    """Which records seed the optimization."""

    top_fraction: float = 0.7
    max_duration: float = 0.40

    def pick(self, records: list[TrajectoryRecord]) -> list[TrajectoryRecord]:
        eligible = [r for r in records if r.path.duration < self.max_duration]
        eligible.sort(key=lambda r: (-r.server_fidelity, r.created_at, r.record_id))
        keep = math.ceil(self.top_fraction * len(eligible))
        return eligible[:keep]


def resolve_player_record(lineage: dict):
    """Walk a (possibly nested sweep) lineage back to the seeding record id."""
    seen = 0
    while lineage and seen < 32:
        if lineage.get("kind") == "player":
            return lineage.get("record")
        lineage = lineage.get("root") or {}
        seen += 1
    return None


@dataclass(frozen=True)
class ChopParams:
    """Optimizer budget and sweep range for one CHOP job."""

    selection: ChopSelection = ChopSelection()
    optimizer: OptimizerParams = OptimizerParams(max_iters=60)
    t_min: float = 0.07
    t_max: float = 0.40


def run_chop_job(store: Store, job_id: str, params: ChopParams) -> None:
    """Execute one queued job to completion (at most once per job id)."""
    if not store.claim_chop_job(job_id):
        return
    job = store.get_chop_job(job_id)
    try:
        records = store.level_records(job["level_id"])
        selected = params.selection.pick(records)
        if not selected:
            store.finish_chop_job(job_id, {"families": [], "archive": None},
                                  warning="selection matched no records")
            return
        store.update_chop_progress(job_id, 0, len(selected))
        level = store.get_level(job["level_id"])
        cfg = level.problem
        families: list[SweepFamily] = []
        for i, rec in enumerate(selected):
            lineage = {"kind": "player", "record": rec.record_id}
            root = optimize(rec.path, cfg, params.optimizer, lineage=lineage)
            if root.duration - cfg.dt > params.t_min:
                families.append(sweep_down(root, params.t_min, cfg, params.optimizer))
            if root.duration + cfg.dt < params.t_max:
                families.append(sweep_up(root, params.t_max, cfg, params.optimizer))
            store.update_chop_progress(job_id, i + 1, len(selected))
        archive_dir = store.root / "chop" / job_id
        solutions: list[Solution] = []
        family_meta = []
        for fi, fam in enumerate(families):
            family_meta.append({
                "direction": fam.direction,
                "root": fam.root_lineage,
                "n_members": len(fam),
                "best_fidelity": float(fam.fidelities.max()) if len(fam) else None,
            })
            for sol in fam.members:
                solutions.append(Solution(path=sol.path, fidelity=sol.fidelity,
                                          lineage={**sol.lineage, "family": fi},
                                          iterations_used=sol.iterations_used))
        write_solutions(archive_dir, solutions, cfg)
        store.finish_chop_job(job_id, {
            "families": family_meta,
            "archive": str(Path("chop") / job_id),
            "n_solutions": len(solutions),
        })
    except Exception as err:  # job isolation: a bad job must not kill the worker
        log.exception("CHOP job %s failed", job_id)
        store.fail_chop_job(job_id, str(err))
