// Session logic: pacing, input clamping, recording, frame snapshots.
// Pure of any DOM so it runs identically in the worker and in tests.

import {
  Grid,
  SplitStepper,
  Wavefunction,
  fidelity,
  gaussianWell,
  groundState,
} from "./physics.js";
import type { FrameMessage, LevelView, PathPayload } from "./protocol.js";

export const DENSITY_DECIMATION = 4;

/** A level definition matching the server's defaults, for offline play. */
export const OFFLINE_LEVEL: LevelView = {
  id: "offline",
  dt: 0.002,
  duration_window: [0.01, 0.6],
  playback_factor: 3.0e4,
  tick_interval_seconds: 0.002 * 0.39e-3 * 3.0e4,
  score_beta: 0.5,
  bounds: { x_min: -1.2, x_max: 1.2, amp_min: -200.0, amp_max: 0.0, max_speed: 20.0 },
  grid: { x_min: -1.5, x_max: 1.5, n_points: 256 },
  static_trap: { x0: 0.5, amplitude: -130.0, waist: 0.25 },
  target_trap: { x0: -0.5, amplitude: -100.0, waist: 0.25 },
  config_json: "",
};

/** Half-width of the target region drawn around the tweezer park position. */
export const TARGET_HALF_WIDTH = 0.15;

export class GameSession {
  readonly level: LevelView;
  readonly grid: Grid;
  private readonly stepper: SplitStepper;
  private readonly staticV: Float64Array;
  private readonly psi: Wavefunction;
  private readonly chi: Wavefunction;
  private readonly x0Samples: number[] = [];
  private readonly ampSamples: number[] = [];
  private cursorX0: number;
  private cursorAmp: number;
  private budget = 0;
  private stepsDone = 0;
  finished = false;

  constructor(level: LevelView) {
    this.level = level;
    this.grid = new Grid(level.grid);
    this.staticV = gaussianWell(this.grid.x, level.static_trap);
    this.stepper = new SplitStepper(this.grid, level.dt, this.staticV, level.target_trap.waist);
    this.psi = groundState(this.grid, this.staticV);
    this.chi = groundState(this.grid, gaussianWell(this.grid.x, level.target_trap));
    this.cursorX0 = level.target_trap.x0;
    this.cursorAmp = level.target_trap.amplitude;
    this.x0Samples.push(this.cursorX0);
    this.ampSamples.push(this.cursorAmp);
  }

  get modelTime(): number {
    return this.stepsDone * this.level.dt;
  }

  get maxedOut(): boolean {
    return this.modelTime >= this.level.duration_window[1] - 1e-12;
  }

  /** Raw cursor target; clamping happens when a step consumes it. */
  setInput(x0: number, amp: number): void {
    this.cursorX0 = x0;
    this.cursorAmp = amp;
  }

  /** Advance the physics by the model time corresponding to elapsed wall
   * clock (one control sample per tick_interval_seconds).  Returns the
   * number of steps executed. */
  advance(wallSeconds: number): number {
    if (this.finished) return 0;
    this.budget += wallSeconds / this.level.tick_interval_seconds;
    let steps = 0;
    while (this.budget >= 1 && !this.maxedOut) {
      this.budget -= 1;
      this.stepOnce();
      steps += 1;
    }
    if (this.budget > 1) this.budget = 0; // never bank more than one tick
    return steps;
  }

  private stepOnce(): void {
    const b = this.level.bounds;
    const prevX = this.x0Samples[this.x0Samples.length - 1];
    const prevA = this.ampSamples[this.ampSamples.length - 1];
    const maxStep = b.max_speed * this.level.dt;
    let x = Math.min(Math.max(this.cursorX0, b.x_min), b.x_max);
    x = Math.min(Math.max(x, prevX - maxStep), prevX + maxStep);
    const a = Math.min(Math.max(this.cursorAmp, b.amp_min), b.amp_max);
    this.stepper.step(this.psi, prevX, prevA, x, a);
    this.x0Samples.push(x);
    this.ampSamples.push(a);
    this.stepsDone += 1;
  }

  /** Immutable snapshot for rendering; building it never mutates physics. */
  frame(): FrameMessage {
    const density: number[] = [];
    const potential: number[] = [];
    const x0 = this.x0Samples[this.x0Samples.length - 1];
    const amp = this.ampSamples[this.ampSamples.length - 1];
    const w2 = this.level.target_trap.waist ** 2;
    for (let i = 0; i < this.grid.n; i += DENSITY_DECIMATION) {
      density.push(this.psi.re[i] ** 2 + this.psi.im[i] ** 2);
      const d = this.grid.x[i] - x0;
      potential.push(this.staticV[i] + amp * Math.exp((-2 * d * d) / w2));
    }
    return Object.freeze({
      type: "frame" as const,
      t: this.modelTime,
      density,
      potential,
      fidelity: fidelity(this.psi, this.chi),
      x0,
      amp,
      steps: this.stepsDone,
    });
  }

  /** The exact control samples applied so far, on the dt grid. */
  recording(): PathPayload {
    return {
      duration: this.stepsDone * this.level.dt,
      dt: this.level.dt,
      x0: this.x0Samples.slice(),
      amp: this.ampSamples.slice(),
    };
  }

  finish(): { path: PathPayload; fidelity: number } {
    this.finished = true;
    return { path: this.recording(), fidelity: fidelity(this.psi, this.chi) };
  }
}

/** Map a cursor position in canvas pixels to control targets. */
export function cursorToControls(
  px: number,
  py: number,
  width: number,
  height: number,
  level: LevelView,
): { x0: number; amp: number } {
  const b = level.bounds;
  const fx = Math.min(Math.max(px / width, 0), 1);
  const fy = Math.min(Math.max(py / height, 0), 1);
  return {
    x0: b.x_min + fx * (b.x_max - b.x_min),
    amp: b.amp_max + fy * (b.amp_min - b.amp_max), // top of canvas = off
  };
}
