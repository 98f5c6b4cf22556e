"""End-to-end CLI runs on tiny budgets."""

import json

import numpy as np
import pytest

from tweezerlab.archive import load_envelope, load_solutions, read_distances
from tweezerlab.cli import main


def test_kass_run_writes_archive(tmp_path):
    out = tmp_path / "kass"
    rc = main(["kass", "run", "--seeds", "2", "--t-start", "0.12", "--t-min", "0.11",
               "--max-iters", "3", "--out", str(out)])
    assert rc == 0
    cfg, sols = load_solutions(out)
    assert len(sols) == 2 * 6
    env = load_envelope(out)
    assert len(env.durations) == 6


def test_hilo_search_then_sweep(tmp_path):
    search_dir = tmp_path / "hilo"
    rc = main(["hilo", "search", "--t", "0.15", "--grid", "2,2,2",
               "--max-iters", "2", "--out", str(search_dir)])
    assert rc == 0
    cfg, sols = load_solutions(search_dir)
    assert sols and all(s.lineage["kind"] == "hilo" for s in sols)

    sweep_dir = tmp_path / "sweeps"
    rc = main(["hilo", "sweep", "--in", str(search_dir), "--top", "1",
               "--t-min", "0.146", "--t-max", "0.154", "--max-iters", "2",
               "--out", str(sweep_dir)])
    assert rc == 0
    _, swept = load_solutions(sweep_dir)
    assert {s.lineage["family"] for s in swept} == {0, 1}


def test_analyze_products(tmp_path):
    out = tmp_path / "camp"
    main(["kass", "run", "--seeds", "3", "--t-start", "0.12", "--t-min", "0.10",
          "--max-iters", "2", "--out", str(out)])

    rc = main(["analyze", "distances", "--in", str(out), "--metric", "control",
               "--duration", "0.11"])
    assert rc == 0
    dm = read_distances(out / "distances.bin", metric="control")
    assert dm.n == 3

    rc = main(["analyze", "clans", "--in", str(out), "--metric", "control",
               "--duration", "0.11", "--min-size", "2", "--threshold", "10.0"])
    assert rc == 0
    assert (out / "reachability.csv").exists()
    doc = json.loads((out / "clans.json").read_text())
    assert doc["min_size"] == 2

    rc = main(["analyze", "embed", "--in", str(out), "--metric", "control",
               "--duration", "0.11"])
    assert rc == 0
    lines = (out / "embedding.csv").read_text().strip().splitlines()
    assert len(lines) == 4

    rc = main(["analyze", "qvel", "--in", str(out), "--duration", "0.11"])
    assert rc == 0
    assert (out / "hilbert_velocity.csv").exists()


def test_analyze_qslfit(tmp_path):
    # build an archive whose fidelities follow a clean sin^2 curve
    out = tmp_path / "fit"
    import tweezerlab
    from tweezerlab.archive import write_solutions
    from tweezerlab.optimizer import Solution
    from tweezerlab.control import ControlPath
    cfg = tweezerlab.ProblemConfig()
    sols = []
    for n in range(40, 90, 5):
        T = n * cfg.dt
        f = float(np.sin(7.9 * T + 0.31) ** 2)
        path = ControlPath(cfg.dt, np.full(n + 1, -0.5), np.full(n + 1, -100.0))
        sols.append(Solution(path=path, fidelity=f))
    write_solutions(out, sols, cfg)
    rc = main(["analyze", "qslfit", "--in", str(out)])
    assert rc == 0
    doc = json.loads((out / "qsl.json").read_text())
    assert doc["a"] == pytest.approx(7.9, abs=1e-6)


def test_empty_selection_fails_cleanly(tmp_path):
    out = tmp_path / "camp"
    main(["kass", "run", "--seeds", "1", "--t-start", "0.12", "--t-min", "0.11",
          "--max-iters", "2", "--out", str(out)])
    rc = main(["analyze", "distances", "--in", str(out), "--duration", "0.5"])
    assert rc == 2
