"""FastAPI application for the transport game.

Endpoints
---------
GET  /levels                         level list with physics and scoring info
POST /levels/{id}/trajectories       submit a played path (bearer token = player)
GET  /levels/{id}/leaderboard        ranked records, ties broken by submit time
POST /chop/jobs                      start player-seeded optimization
GET  /chop/jobs/{id}                 job status, progress and outputs
GET  /levels/{id}/export             zipped solution archive of all records
WS   /levels/{id}/session            real-time play: tick in controls, get frames

The client may simulate locally for responsiveness, but every stored number
is recomputed here; client-reported fidelities are advisory and submissions
disagreeing by more than 1e-3 are flagged.
"""

from __future__ import annotations

import io
import zipfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.fft as sfft
from fastapi import Depends, FastAPI, Header, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..archive import write_solutions
from ..control import ControlPath, validate
from ..optimizer import OptimizerParams, Solution
from ..physics import evolve, fidelity, kinetic_phase, step_phase_matrix
from .chop import ChopParams, ChopSelection, run_chop_job
from .store import LevelConfig, Store, score

DENSITY_DECIMATION = 4


class PathModel(BaseModel):
    duration: float
    dt: float
    x0: list[float]
    amp: list[float]

    def to_control_path(self) -> ControlPath:
        try:
            return ControlPath.from_json(self.model_dump())
        except ValueError as err:
            raise HTTPException(status_code=422, detail={"violations": [str(err)]})


class SubmitModel(BaseModel):
    path: PathModel
    client_fidelity: Optional[float] = Field(default=None, ge=0.0, le=1.0)


class ChopJobModel(BaseModel):
    level_id: str
    top_fraction: float = 0.7
    max_duration: float = 0.40
    t_min: float = 0.07
    t_max: float = 0.40
    max_iters: int = 60


def _record_view(rec) -> dict:
    return {
        "id": rec.record_id,
        "player_id": rec.player_id,
        "level_id": rec.level_id,
        "duration": rec.path.duration,
        "client_fidelity": rec.client_fidelity,
        "server_fidelity": rec.server_fidelity,
        "score": rec.score,
        "flagged": rec.flagged,
        "created_at": rec.created_at,
    }


def _level_view(level: LevelConfig) -> dict:
    cfg = level.problem
    return {
        "id": level.level_id,
        "dt": cfg.dt,
        "duration_window": [level.t_min, level.t_max],
        "playback_factor": level.playback_factor,
        "tick_interval_seconds": level.tick_interval_seconds(),
        "score_beta": level.score_beta,
        "bounds": {
            "x_min": cfg.tweezer_bounds.x_min,
            "x_max": cfg.tweezer_bounds.x_max,
            "amp_min": cfg.tweezer_bounds.amp_min,
            "amp_max": cfg.tweezer_bounds.amp_max,
            "max_speed": cfg.tweezer_bounds.max_speed,
        },
        "grid": {"x_min": cfg.grid.x_min, "x_max": cfg.grid.x_max,
                 "n_points": cfg.grid.n_points},
        "static_trap": {"x0": cfg.static_trap.x0, "amplitude": cfg.static_trap.amplitude,
                        "waist": cfg.static_trap.waist},
        "target_trap": {"x0": cfg.target_trap.x0, "amplitude": cfg.target_trap.amplitude,
                        "waist": cfg.target_trap.waist},
        "config_json": cfg.to_json(),
    }


def create_app(store: Store, chop_workers: int = 1,
               frontend_dir: Optional[str] = None) -> FastAPI:
    """Build the application around an opened :class:`Store`."""
    app = FastAPI(title="tweezer transport game")
    app.state.store = store
    app.state.executor = ThreadPoolExecutor(max_workers=chop_workers)
    store.ensure_default_level()

    def player_id(authorization: Optional[str] = Header(default=None)) -> str:
        if authorization and authorization.lower().startswith("bearer "):
            token = authorization[7:].strip()
            if token:
                return token
        return "anonymous"

    def get_level(level_id: str) -> LevelConfig:
        level = store.get_level(level_id)
        if level is None:
            raise HTTPException(status_code=404, detail=f"unknown level {level_id!r}")
        return level

    @app.get("/levels")
    def list_levels():
        return [_level_view(lv) for lv in store.list_levels()]

    @app.post("/levels/{level_id}/trajectories")
    def submit_trajectory(level_id: str, body: SubmitModel,
                          player: str = Depends(player_id)):
        level = get_level(level_id)
        cfg = level.problem
        path = body.path.to_control_path()
        problems = [f"{v.kind}@{v.index}: {v.message}" for v in validate(path, cfg)]
        if not level.t_min <= path.duration <= level.t_max:
            problems.append(
                f"duration {path.duration} outside level window [{level.t_min}, {level.t_max}]")
        if problems:
            raise HTTPException(status_code=422, detail={"violations": problems})
        traj = evolve(cfg.initial_state(), path, cfg, store="final")
        server_f = fidelity(traj.final_state, cfg.target_state())
        rec, created = store.submit_trajectory(
            level, player, path, body.client_fidelity, server_f,
            score(server_f, path.duration, level))
        view = _record_view(rec)
        view["created"] = created
        return view

    @app.get("/levels/{level_id}/leaderboard")
    def leaderboard(level_id: str, limit: int = 20):
        get_level(level_id)
        return [_record_view(r) for r in store.leaderboard(level_id, limit)]

    @app.get("/levels/{level_id}/export")
    def export_level(level_id: str):
        level = get_level(level_id)
        records = store.level_records(level_id)
        solutions = [
            Solution(path=r.path, fidelity=r.server_fidelity,
                     lineage={"kind": "player", "record": r.record_id,
                              "player": r.player_id, "score": r.score})
            for r in records
        ]
        export_dir = store.root / "exports" / level_id
        write_solutions(export_dir, solutions, level.problem)
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
            for file in sorted(export_dir.rglob("*")):
                if file.is_file():
                    zf.write(file, file.relative_to(export_dir))
        return Response(content=buf.getvalue(), media_type="application/zip",
                        headers={"Content-Disposition":
                                 f'attachment; filename="{level_id}-archive.zip"'})

    @app.post("/chop/jobs")
    def create_chop_job(body: ChopJobModel):
        get_level(body.level_id)
        selection = ChopSelection(top_fraction=body.top_fraction,
                                  max_duration=body.max_duration)
        job_id = store.create_chop_job(body.level_id, {
            "top_fraction": body.top_fraction, "max_duration": body.max_duration,
            "t_min": body.t_min, "t_max": body.t_max, "max_iters": body.max_iters})
        params = ChopParams(selection=selection,
                            optimizer=OptimizerParams(max_iters=body.max_iters),
                            t_min=body.t_min, t_max=body.t_max)
        app.state.executor.submit(run_chop_job, store, job_id, params)
        return store.get_chop_job(job_id)

    @app.get("/chop/jobs/{job_id}")
    def get_chop_job(job_id: str):
        job = store.get_chop_job(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        return job

    @app.websocket("/levels/{level_id}/session")
    async def session(ws: WebSocket, level_id: str):
        """Real-time play: one control sample per tick, frames streamed back.

        Message protocol (JSON):
          client -> {"type": "tick", "t": k*dt, "x0": float, "amp": float}
          server -> {"type": "frame", "t", "density", "fidelity"}
          client -> {"type": "finish", "client_fidelity"?, "player_id"?}
          server -> {"type": "result", ...record or violations...}
        """
        level = store.get_level(level_id)
        if level is None:
            await ws.close(code=4404)
            return
        cfg = level.problem
        await ws.accept()
        psi = cfg.initial_state().amplitudes
        chi = cfg.target_state().amplitudes
        kin = kinetic_phase(cfg.grid, cfg.dt)
        dx = cfg.grid.dx
        x0s: list[float] = []
        amps: list[float] = []

        def frame(t: float) -> dict:
            dens = (np.abs(psi[::DENSITY_DECIMATION]) ** 2).tolist()
            f_inst = float(abs(np.vdot(chi, psi) * dx) ** 2)
            return {"type": "frame", "t": t, "density": dens, "fidelity": f_inst}

        await ws.send_json({
            "type": "hello",
            "level": _level_view(level),
            "density_decimation": DENSITY_DECIMATION,
            **{k: v for k, v in frame(0.0).items() if k != "type"},
        })
        try:
            while True:
                msg = await ws.receive_json()
                kind = msg.get("type")
                if kind == "tick":
                    k = len(x0s)
                    expected_t = k * cfg.dt
                    t_in = float(msg.get("t", expected_t))
                    if abs(t_in - expected_t) > 1e-9:
                        await ws.send_json({"type": "error",
                                            "message": f"expected t={expected_t:.6g}, got {t_in:.6g}"})
                        continue
                    b = cfg.tweezer_bounds
                    x0 = float(np.clip(msg["x0"], b.x_min, b.x_max))
                    amp = float(np.clip(msg["amp"], b.amp_min, b.amp_max))
                    if x0s:
                        max_step = b.max_speed * cfg.dt
                        x0 = float(np.clip(x0, x0s[-1] - max_step, x0s[-1] + max_step))
                        phases = step_phase_matrix(cfg, np.array([x0s[-1], x0]),
                                                   np.array([amps[-1], amp]))
                        psi = phases[0] * sfft.ifft(kin * sfft.fft(phases[0] * psi))
                    x0s.append(x0)
                    amps.append(amp)
                    await ws.send_json(frame(k * cfg.dt))
                elif kind == "finish":
                    if len(x0s) < 2:
                        await ws.send_json({"type": "result", "accepted": False,
                                            "violations": ["no steps played"]})
                        continue
                    path = ControlPath(cfg.dt, np.array(x0s), np.array(amps))
                    violations = validate(path, cfg)
                    if violations or not level.t_min <= path.duration <= level.t_max:
                        detail = [f"{v.kind}@{v.index}: {v.message}" for v in violations]
                        if not level.t_min <= path.duration <= level.t_max:
                            detail.append(f"duration {path.duration} outside level window")
                        await ws.send_json({"type": "result", "accepted": False,
                                            "violations": detail})
                        continue
                    traj = evolve(cfg.initial_state(), path, cfg, store="final")
                    server_f = fidelity(traj.final_state, cfg.target_state())
                    player = str(msg.get("player_id") or "anonymous")
                    rec, created = store.submit_trajectory(
                        level, player, path, msg.get("client_fidelity"), server_f,
                        score(server_f, path.duration, level))
                    view = _record_view(rec)
                    view.update({"type": "result", "accepted": True, "created": created})
                    await ws.send_json(view)
                else:
                    await ws.send_json({"type": "error", "message": f"unknown message {kind!r}"})
        except WebSocketDisconnect:
            return

    if frontend_dir and Path(frontend_dir).is_dir():
        app.mount("/app", StaticFiles(directory=frontend_dir, html=True), name="frontend")

    return app
