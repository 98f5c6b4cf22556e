// Entry point: canvas, cursor input, worker wiring, submission.
//
// The cursor steers the tweezer (horizontal = position, vertical = depth);
// the worker advances the Schrodinger dynamics at the level's playback
// pacing and streams frame snapshots back for drawing.  Offline practice
// runs entirely in the worker; with a reachable service the finished
// recording is submitted and the authoritative score displayed.

import { ServiceClient, SubmissionRejected } from "./client.js";
import { OFFLINE_LEVEL, cursorToControls } from "./game.js";
import type { FrameMessage, FromWorker, LevelView } from "./protocol.js";
import {
  DEFAULT_VIEW,
  ViewBox,
  densityIntegral,
  densityPolyline,
  potentialPolyline,
  targetRect,
  vToPx,
  xToPx,
} from "./render.js";

const canvas = document.getElementById("game") as HTMLCanvasElement;
const hud = document.getElementById("hud") as HTMLDivElement;
const finishButton = document.getElementById("finish") as HTMLButtonElement;
const resetButton = document.getElementById("reset") as HTMLButtonElement;
const statusLine = document.getElementById("status") as HTMLDivElement;
const g = canvas.getContext("2d")!;

const params = new URLSearchParams(window.location.search);
const serviceBase = params.get("service") ?? "";
const playerToken = params.get("player") ?? `player-${Math.random().toString(36).slice(2, 8)}`;
const intensityLocked = params.get("lock_amp") === "1";

let level: LevelView = OFFLINE_LEVEL;
let client: ServiceClient | null = null;
let worker: Worker;
let gridX: number[] = [];
let lastFrame: FrameMessage | null = null;
let lastWall = performance.now();
let finished = false;

async function boot(): Promise<void> {
  if (serviceBase) {
    try {
      client = new ServiceClient(serviceBase, playerToken);
      const levels = await client.listLevels();
      if (levels.length) level = levels[0];
      statusLine.textContent = `online: level ${level.id}`;
    } catch (err) {
      statusLine.textContent = `service unreachable, offline practice (${err})`;
      client = null;
    }
  } else {
    statusLine.textContent = "offline practice mode";
  }

  worker = new Worker("./worker.js", { type: "module" });
  worker.onmessage = (event: MessageEvent<FromWorker>) => {
    const msg = event.data;
    if (msg.type === "ready") {
      gridX = msg.x.filter((_, i) => i % 4 === 0);
    } else if (msg.type === "frame") {
      lastFrame = msg;
    } else if (msg.type === "recording") {
      void submitRecording(msg.path, msg.fidelity);
    }
  };
  worker.postMessage({ type: "init", level });
  requestAnimationFrame(loop);
}

canvas.addEventListener("pointermove", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const { x0, amp } = cursorToControls(
    ev.clientX - rect.left, ev.clientY - rect.top, rect.width, rect.height, level);
  worker.postMessage({
    type: "input",
    x0,
    amp: intensityLocked ? level.target_trap.amplitude : amp,
  });
});

finishButton.addEventListener("click", () => {
  finished = true;
  worker.postMessage({ type: "finish" });
});

resetButton.addEventListener("click", () => {
  finished = false;
  statusLine.textContent = client ? `online: level ${level.id}` : "offline practice mode";
  worker.postMessage({ type: "reset" });
});

function loop(now: number): void {
  const wallSeconds = Math.min((now - lastWall) / 1000, 0.25);
  lastWall = now;
  if (!finished) worker.postMessage({ type: "advance", wallSeconds });
  if (lastFrame) draw(lastFrame);
  requestAnimationFrame(loop);
}

async function submitRecording(path: { duration: number }, clientF: number): Promise<void> {
  if (!client) {
    statusLine.textContent =
      `practice run: T=${path.duration.toFixed(3)}, fidelity ${clientF.toFixed(4)} (not submitted)`;
    return;
  }
  try {
    const record = await client.submit(level.id, path as never, clientF);
    const board = await client.leaderboard(level.id, 5);
    const place = board.findIndex((r) => r.id === record.id);
    statusLine.textContent =
      `score ${record.score} (server fidelity ${record.server_fidelity.toFixed(4)})` +
      (place >= 0 ? `, leaderboard #${place + 1}` : "");
  } catch (err) {
    statusLine.textContent = err instanceof SubmissionRejected
      ? `rejected: ${err.violations.join("; ")}`
      : `submission failed: ${err}`;
  }
}

function draw(frame: FrameMessage): void {
  const view: ViewBox = { ...DEFAULT_VIEW, width: canvas.width, height: canvas.height };
  g.clearRect(0, 0, canvas.width, canvas.height);

  const goal = targetRect(level, view);
  g.fillStyle = "rgba(0, 200, 220, 0.18)";
  g.fillRect(goal.x, 0, goal.width, canvas.height);

  if (gridX.length) {
    const pot = potentialPolyline(frame, gridX, level, view);
    g.strokeStyle = "#3366cc";
    g.lineWidth = 1.5;
    strokePolyline(pot.xs, pot.ys);

    const dens = densityPolyline(frame, gridX, level, view);
    g.beginPath();
    g.moveTo(pot.xs[0], pot.ys[0]);
    for (let i = 0; i < dens.xs.length; i++) g.lineTo(dens.xs[i], dens.ys[i]);
    for (let i = pot.xs.length - 1; i >= 0; i--) g.lineTo(pot.xs[i], pot.ys[i]);
    g.closePath();
    g.fillStyle = "rgba(60, 190, 90, 0.75)";
    g.fill();
  }

  // tweezer marker
  g.strokeStyle = "#cc3333";
  g.beginPath();
  const tx = xToPx(frame.x0, level, view);
  g.moveTo(tx, vToPx(frame.amp, view));
  g.lineTo(tx, canvas.height);
  g.stroke();

  hud.textContent =
    `t = ${frame.t.toFixed(3)} / ${level.duration_window[1]}   ` +
    `F = ${frame.fidelity.toFixed(4)}   ` +
    `norm = ${densityIntegral(frame, (level.grid.x_max - level.grid.x_min) / level.grid.n_points, 4).toFixed(3)}`;
}

function strokePolyline(xs: number[], ys: number[]): void {
  g.beginPath();
  g.moveTo(xs[0], ys[0]);
  for (let i = 1; i < xs.length; i++) g.lineTo(xs[i], ys[i]);
  g.stroke();
}

void boot();
