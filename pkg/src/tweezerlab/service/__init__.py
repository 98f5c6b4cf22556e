"""HTTP service: levels, trajectory ingestion, scoring, CHOP jobs, leaderboards."""

from .store import LevelConfig, Store, TrajectoryRecord, score
from .app import create_app

__all__ = ["LevelConfig", "Store", "TrajectoryRecord", "score", "create_app"]
