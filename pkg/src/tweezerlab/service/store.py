"""Persistence for the game service.

A single SQLite file holds levels, trajectory records and CHOP jobs;
control paths live next to it as flat CSV files in the canonical format.
Records are append-only: submissions are deduplicated by a content hash of
(player, level, path), and nothing mutates a record after insertion.
"""

from __future__ import annotations

import hashlib
import json
import sqlite3
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from ..control import ControlPath
from ..physics import ProblemConfig

SCHEMA_VERSION = 1

#: Laboratory seconds per model time unit; with the default playback factor
#: of 3e4 one control sample (dt = 0.002) spans about 23 ms of wall clock.
TIME_UNIT_SECONDS = 0.39e-3

_SCHEMA = """
CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS levels (
    id TEXT PRIMARY KEY,
    config_json TEXT NOT NULL,
    t_min REAL NOT NULL,
    t_max REAL NOT NULL,
    playback_factor REAL NOT NULL,
    score_beta REAL NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS records (
    id TEXT PRIMARY KEY,
    player_id TEXT NOT NULL,
    level_id TEXT NOT NULL REFERENCES levels(id),
    content_hash TEXT NOT NULL,
    path_file TEXT NOT NULL,
    duration REAL NOT NULL,
    client_fidelity REAL,
    server_fidelity REAL NOT NULL,
    score INTEGER NOT NULL,
    flagged INTEGER NOT NULL,
    created_at TEXT NOT NULL,
    UNIQUE (player_id, level_id, content_hash)
);
CREATE TABLE IF NOT EXISTS chop_jobs (
    id TEXT PRIMARY KEY,
    level_id TEXT NOT NULL REFERENCES levels(id),
    selection_json TEXT NOT NULL,
    status TEXT NOT NULL,
    progress_done INTEGER NOT NULL DEFAULT 0,
    progress_total INTEGER NOT NULL DEFAULT 0,
    output_json TEXT,
    warning TEXT,
    created_at TEXT NOT NULL
);
"""


@dataclass(frozen=True)
class LevelConfig:
    """A playable level: physics plus duration window and scoring knobs."""

    level_id: str
    problem: ProblemConfig
    t_min: float = 0.01
    t_max: float = 0.60
    playback_factor: float = 3.0e4
    score_beta: float = 0.5

    def __post_init__(self):
        if not self.playback_factor > 0:
            raise ValueError("playback_factor must be positive")

    def tick_interval_seconds(self) -> float:
        """Wall-clock seconds per control sample at the level's playback."""
        return self.problem.dt * TIME_UNIT_SECONDS * self.playback_factor


@dataclass(frozen=True)
class TrajectoryRecord:
    """A persisted play-through with the server-recomputed fidelity."""

    record_id: str
    player_id: str
    level_id: str
    path: ControlPath
    client_fidelity: Optional[float]
    server_fidelity: float
    score: int
    flagged: bool
    created_at: str


def score(fidelity: float, duration: float, level: LevelConfig) -> int:
    """Game score: fidelity times a linear time bonus.

    round(1000 * F * (1 + beta * (t_max - T) / t_max)); monotone increasing
    in F and decreasing in T, so faster solutions of equal quality rank
    higher.
    """
    bonus = 1.0 + level.score_beta * (level.t_max - duration) / level.t_max
    return int(round(1000.0 * fidelity * bonus))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class Store:
    """SQLite-backed persistence rooted at a directory.

    Thread safety: a single connection guarded by a lock; SQLite serializes
    writes anyway and the request volume is desk-scale.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "paths").mkdir(exist_ok=True)
        self._lock = threading.Lock()
        self._db = sqlite3.connect(self.root / "game.sqlite3", check_same_thread=False)
        self._db.executescript(_SCHEMA)
        self._db.execute(
            "INSERT OR IGNORE INTO meta (key, value) VALUES ('schema_version', ?)",
            (str(SCHEMA_VERSION),),
        )
        self._db.commit()

    def close(self):
        self._db.close()

    # -- levels -----------------------------------------------------------

    def add_level(self, level: LevelConfig):
        with self._lock:
            self._db.execute(
                "INSERT OR REPLACE INTO levels VALUES (?, ?, ?, ?, ?, ?, ?)",
                (level.level_id, level.problem.to_json(), level.t_min, level.t_max,
                 level.playback_factor, level.score_beta, _now()),
            )
            self._db.commit()

    def get_level(self, level_id: str) -> Optional[LevelConfig]:
        row = self._db.execute(
            "SELECT id, config_json, t_min, t_max, playback_factor, score_beta "
            "FROM levels WHERE id = ?", (level_id,)).fetchone()
        if row is None:
            return None
        return LevelConfig(level_id=row[0], problem=ProblemConfig.from_json(row[1]),
                           t_min=row[2], t_max=row[3], playback_factor=row[4],
                           score_beta=row[5])

    def list_levels(self) -> list[LevelConfig]:
        ids = [r[0] for r in self._db.execute("SELECT id FROM levels ORDER BY id")]
        return [self.get_level(i) for i in ids]

    def ensure_default_level(self) -> LevelConfig:
        level = self.get_level("transport-1")
        if level is None:
            level = LevelConfig(level_id="transport-1", problem=ProblemConfig())
            self.add_level(level)
        return level

    # -- trajectory records -------------------------------------------------

    def submit_trajectory(self, level: LevelConfig, player_id: str, path: ControlPath,
                          client_fidelity: Optional[float], server_fidelity: float,
                          score_value: int) -> tuple[TrajectoryRecord, bool]:
        """Insert a record, or return the existing one for an identical
        submission.  Returns (record, created)."""
        csv_text = path.to_csv()
        digest = hashlib.sha256(
            f"{player_id}|{level.level_id}|".encode() + csv_text.encode()
        ).hexdigest()
        flagged = client_fidelity is not None and abs(client_fidelity - server_fidelity) > 1e-3
        with self._lock:
            row = self._db.execute(
                "SELECT id FROM records WHERE player_id=? AND level_id=? AND content_hash=?",
                (player_id, level.level_id, digest)).fetchone()
            if row is not None:
                return self.get_record(row[0]), False
            record_id = f"r-{uuid.uuid4().hex[:12]}"
            rel = f"paths/{record_id}.csv"
            (self.root / rel).write_text(csv_text)
            self._db.execute(
                "INSERT INTO records VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (record_id, player_id, level.level_id, digest, rel, path.duration,
                 client_fidelity, server_fidelity, score_value, int(flagged), _now()),
            )
            self._db.commit()
        return self.get_record(record_id), True

    def get_record(self, record_id: str) -> Optional[TrajectoryRecord]:
        row = self._db.execute(
            "SELECT id, player_id, level_id, path_file, client_fidelity, server_fidelity,"
            " score, flagged, created_at FROM records WHERE id=?", (record_id,)).fetchone()
        if row is None:
            return None
        path = ControlPath.from_csv((self.root / row[3]).read_text())
        return TrajectoryRecord(record_id=row[0], player_id=row[1], level_id=row[2],
                                path=path, client_fidelity=row[4], server_fidelity=row[5],
                                score=row[6], flagged=bool(row[7]), created_at=row[8])

    def level_records(self, level_id: str) -> list[TrajectoryRecord]:
        ids = [r[0] for r in self._db.execute(
            "SELECT id FROM records WHERE level_id=? ORDER BY created_at, id", (level_id,))]
        return [self.get_record(i) for i in ids]

    def leaderboard(self, level_id: str, limit: int = 20) -> list[TrajectoryRecord]:
        """Best score first; ties go to the earlier submission."""
        ids = [r[0] for r in self._db.execute(
            "SELECT id FROM records WHERE level_id=? ORDER BY score DESC, created_at ASC, id ASC"
            " LIMIT ?", (level_id, limit))]
        return [self.get_record(i) for i in ids]

    # -- CHOP jobs ----------------------------------------------------------

    def create_chop_job(self, level_id: str, selection: dict) -> str:
        job_id = f"j-{uuid.uuid4().hex[:12]}"
        with self._lock:
            self._db.execute(
                "INSERT INTO chop_jobs (id, level_id, selection_json, status, created_at)"
                " VALUES (?, ?, ?, 'queued', ?)",
                (job_id, level_id, json.dumps(selection), _now()))
            self._db.commit()
        return job_id

    def claim_chop_job(self, job_id: str) -> bool:
        """Transition queued -> running; False if someone else already did."""
        with self._lock:
            cur = self._db.execute(
                "UPDATE chop_jobs SET status='running' WHERE id=? AND status='queued'",
                (job_id,))
            self._db.commit()
            return cur.rowcount == 1

    def update_chop_progress(self, job_id: str, done: int, total: int):
        with self._lock:
            self._db.execute(
                "UPDATE chop_jobs SET progress_done=?, progress_total=? WHERE id=?",
                (done, total, job_id))
            self._db.commit()

    def finish_chop_job(self, job_id: str, output: dict, warning: Optional[str] = None):
        with self._lock:
            self._db.execute(
                "UPDATE chop_jobs SET status='done', output_json=?, warning=? WHERE id=?",
                (json.dumps(output), warning, job_id))
            self._db.commit()

    def fail_chop_job(self, job_id: str, message: str):
        with self._lock:
            self._db.execute(
                "UPDATE chop_jobs SET status='failed', warning=? WHERE id=?",
                (message, job_id))
            self._db.commit()

    def get_chop_job(self, job_id: str) -> Optional[dict]:
        row = self._db.execute(
            "SELECT id, level_id, selection_json, status, progress_done, progress_total,"
            " output_json, warning, created_at FROM chop_jobs WHERE id=?", (job_id,)).fetchone()
        if row is None:
            return None
        return {
            "id": row[0],
            "level_id": row[1],
            "selection": json.loads(row[2]),
            "status": row[3],
            "progress": {"done": row[4], "total": row[5]},
            "output": json.loads(row[6]) if row[6] else None,
            "warning": row[7],
            "created_at": row[8],
        }
