"""Driving the game service end to end, in process.

Spins up the HTTP app against a temporary store, plays a session over the
WebSocket protocol exactly as the browser client would (one control sample
per tick), submits trajectories, runs a player-seeded optimization job, and
reads the leaderboard.

Run:  python demos/07_game_service.py
"""

import json
import tempfile
import time

from fastapi.testclient import TestClient

from tweezerlab import ProblemConfig, base_motion
from tweezerlab.optimizer import project_path
from tweezerlab.control import SeedSpectrum, random_sin_seed
from tweezerlab.service import Store, create_app

with tempfile.TemporaryDirectory() as tmp:
    store = Store(tmp)
    client = TestClient(create_app(store))

    level = client.get("/levels").json()[0]
    print(f"level {level['id']}: duration window {level['duration_window']}, "
          f"one tick every {level['tick_interval_seconds'] * 1000:.1f} ms of wall clock")

    # --- play one session over the WebSocket stream -------------------------
    cfg = ProblemConfig.from_json(level["config_json"])
    path = base_motion(cfg, 0.30)
    with client.websocket_connect(f"/levels/{level['id']}/session") as ws:
        hello = ws.receive_json()
        frame = None
        for k in range(path.n_steps + 1):
            ws.send_json({"type": "tick", "t": k * cfg.dt,
                          "x0": float(path.x0[k]), "amp": float(path.amp[k])})
            frame = ws.receive_json()
        ws.send_json({"type": "finish", "player_id": "demo-player",
                      "client_fidelity": frame["fidelity"]})
        result = ws.receive_json()
    print(f"session finished: server fidelity {result['server_fidelity']:.4f}, "
          f"score {result['score']}")

    # --- a few more 'players' submit over plain HTTP ------------------------
    for s in range(3):
        seed = random_sin_seed(cfg, 0.2, SeedSpectrum(rng_seed=s, scale=0.04))
        p = project_path(seed.x0, seed.amp, cfg)     # what input clamping yields
        r = client.post(f"/levels/{level['id']}/trajectories",
                        json={"path": json.loads(p.to_json())},
                        headers={"Authorization": f"Bearer player-{s}"})
        print(f"player-{s}: fidelity {r.json()['server_fidelity']:.4f} "
              f"score {r.json()['score']}")

    # --- player-seeded optimization job -------------------------------------
    job = client.post("/chop/jobs", json={
        "level_id": level["id"], "top_fraction": 0.7, "max_duration": 0.40,
        "t_min": 0.19, "t_max": 0.21, "max_iters": 15}).json()
    while job["status"] not in ("done", "failed"):
        time.sleep(0.3)
        job = client.get(f"/chop/jobs/{job['id']}").json()
    print(f"optimization job: {job['status']}, {job['output']['n_solutions']} solutions "
          f"from {job['progress']['total']} seeds")
    for fam in job["output"]["families"][:4]:
        print(f"  family from {fam['root']['record']}: best F {fam['best_fidelity']:.4f}")

    board = client.get(f"/levels/{level['id']}/leaderboard").json()
    print("leaderboard:")
    for row in board:
        print(f"  {row['score']:5d}  {row['player_id']:12s} F={row['server_fidelity']:.4f}")
