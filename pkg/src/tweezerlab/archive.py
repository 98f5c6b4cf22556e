"""On-disk formats for campaigns and analysis products.

A campaign archive is one directory:

    config.json          problem configuration (versioned)
    solutions.jsonl      one record per solution: id, T, fidelity, lineage, path_file
    paths/<id>.csv       control paths in the canonical CSV format
    envelope.csv         optional best-F-per-duration reduction

Analysis products use flat files: distances.bin (little-endian uint64 count
followed by row-major float64), reachability.csv, clans.json, embedding.csv
and qsl.json.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analysis import Clan, DistanceMatrix, Embedding2D, QslFit
from .control import ControlPath
from .kass import CampaignResult, Envelope
from .optimizer import Solution
from .physics import ProblemConfig


def write_solutions(directory, solutions: Sequence[Solution], cfg: ProblemConfig,
                    envelope: Optional[Envelope] = None) -> Path:
    """Write a solution archive; returns the directory path."""
    root = Path(directory)
    (root / "paths").mkdir(parents=True, exist_ok=True)
    (root / "config.json").write_text(cfg.to_json())
    with open(root / "solutions.jsonl", "w") as fh:
        for i, sol in enumerate(solutions):
            sid = f"s{i:05d}"
            rel = f"paths/{sid}.csv"
            (root / rel).write_text(sol.path.to_csv())
            fh.write(json.dumps({
                "id": sid,
                "T": sol.duration,
                "fidelity": sol.fidelity,
                "lineage": sol.lineage,
                "path_file": rel,
            }) + "\n")
    if envelope is not None:
        (root / "envelope.csv").write_text(envelope.to_csv())
    return root


def write_campaign(directory, result: CampaignResult, cfg: ProblemConfig) -> Path:
    """Flatten a campaign's families into one archive, tagging each record
    with its family index."""
    solutions = []
    for fi, fam in enumerate(result.families):
        for sol in fam.members:
            tagged = Solution(path=sol.path, fidelity=sol.fidelity,
                              lineage={**sol.lineage, "family": fi},
                              iterations_used=sol.iterations_used,
                              fidelity_history=sol.fidelity_history)
            solutions.append(tagged)
    return write_solutions(directory, solutions, cfg, envelope=result.envelope)


def load_solutions(directory):
    """Read an archive back: (config, [Solution, ...]).

    Fidelities are taken from the records, not re-simulated; use
    :func:`tweezerlab.optimizer.path_fidelity` to re-verify.
    """
    root = Path(directory)
    cfg = ProblemConfig.from_json((root / "config.json").read_text())
    solutions = []
    with open(root / "solutions.jsonl") as fh:
        for line in fh:
            rec = json.loads(line)
            path = ControlPath.from_csv((root / rec["path_file"]).read_text())
            solutions.append(Solution(path=path, fidelity=rec["fidelity"],
                                      lineage=rec["lineage"]))
    return cfg, solutions


def load_envelope(directory) -> Envelope:
    return Envelope.from_csv((Path(directory) / "envelope.csv").read_text())


# ---------------------------------------------------------------------------
# Analysis products
# ---------------------------------------------------------------------------

def write_distances(path, dm: DistanceMatrix):
    """distances.bin: uint64 n (little endian), then n*n row-major float64."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", dm.n))
        fh.write(dm.values.astype("<f8").tobytes(order="C"))


def read_distances(path, metric: str = "state") -> DistanceMatrix:
    raw = Path(path).read_bytes()
    (n,) = struct.unpack_from("<Q", raw, 0)
    values = np.frombuffer(raw, dtype="<f8", offset=8).reshape(n, n).copy()
    return DistanceMatrix(values=values, metric=metric)


def write_reachability(path, order: np.ndarray, distances: np.ndarray):
    """reachability.csv: rank, solution index, distance from the previous
    solution in the ordering (empty for the first row)."""
    lines = ["rank,solution,dist_from_prev"]
    for r, s in enumerate(order):
        d = "" if r == 0 else f"{distances[r - 1]:.17g}"
        lines.append(f"{r},{int(s)},{d}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_reachability(path):
    rows = Path(path).read_text().strip().splitlines()[1:]
    order = []
    dists = []
    for row in rows:
        _, s, d = row.split(",")
        order.append(int(s))
        if d:
            dists.append(float(d))
    return np.array(order), np.array(dists)


def write_clans(path, clans: Sequence[Clan], threshold: float, min_size: int):
    doc = {
        "threshold": threshold,
        "min_size": min_size,
        "clans": [
            {
                "label": c.label,
                "members": [int(i) for i in c.member_ids],
                "mean_x0": None if c.mean_x0 is None else c.mean_x0.tolist(),
                "std_x0": None if c.std_x0 is None else c.std_x0.tolist(),
                "mean_amp": None if c.mean_amp is None else c.mean_amp.tolist(),
                "std_amp": None if c.std_amp is None else c.std_amp.tolist(),
            }
            for c in clans
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2))


def write_embedding(path, emb: Embedding2D):
    """embedding.csv: id, x, y, F (F empty when unknown)."""
    lines = ["id,x,y,F"]
    for i, (x, y) in enumerate(emb.coords):
        f = "" if emb.fidelities is None else f"{emb.fidelities[i]:.17g}"
        lines.append(f"{i},{x:.17g},{y:.17g},{f}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_qsl_fit(path, fit: QslFit):
    Path(path).write_text(json.dumps({
        "a": fit.a, "b": fit.b, "t_qsl": fit.t_qsl,
        "residual": fit.residual, "n_used": fit.n_used,
    }, indent=2))
