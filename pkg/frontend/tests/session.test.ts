// Session behavior: recording discipline, input clamping, pacing, purity.

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { GameSession, cursorToControls } from "../src/game.js";
import type { LevelView } from "../src/protocol.js";

const fixture = JSON.parse(
  readFileSync(fileURLToPath(new URL("./fixtures/replay.json", import.meta.url)), "utf-8"),
);
const level: LevelView = fixture.level;

function playTicks(session: GameSession, n: number): void {
  // one tick's worth of wall clock per call, like a steady frame loop
  for (let i = 0; i < n; i++) session.advance(level.tick_interval_seconds);
}

describe("recording discipline", () => {
  it("samples sit on exact multiples of dt and start at the park position", () => {
    const s = new GameSession(level);
    s.setInput(0.2, -120);
    playTicks(s, 25);
    const rec = s.recording();
    expect(rec.dt).toBe(level.dt);
    expect(rec.x0.length).toBe(26);
    expect(rec.duration).toBeCloseTo(25 * level.dt, 12);
    expect(rec.x0[0]).toBe(level.target_trap.x0);
    expect(rec.amp[0]).toBe(level.target_trap.amplitude);
  });

  it("finish returns exactly the recording buffer", () => {
    const s = new GameSession(level);
    s.setInput(-0.1, -90);
    playTicks(s, 10);
    const rec = s.recording();
    const fin = s.finish();
    expect(fin.path.x0).toEqual(rec.x0);
    expect(fin.path.amp).toEqual(rec.amp);
    expect(fin.path.duration).toBe(rec.duration);
  });

  it("a finished session stops advancing", () => {
    const s = new GameSession(level);
    playTicks(s, 5);
    s.finish();
    expect(s.advance(1.0)).toBe(0);
  });
});

describe("input clamping", () => {
  it("cursor jumps are limited to the speed bound per step", () => {
    const s = new GameSession(level);
    s.setInput(level.bounds.x_max + 5, -100); // absurd target
    playTicks(s, 40);
    const rec = s.recording();
    const maxStep = level.bounds.max_speed * level.dt;
    for (let k = 1; k < rec.x0.length; k++) {
      expect(Math.abs(rec.x0[k] - rec.x0[k - 1])).toBeLessThanOrEqual(maxStep + 1e-12);
      expect(rec.x0[k]).toBeLessThanOrEqual(level.bounds.x_max);
      expect(rec.x0[k]).toBeGreaterThanOrEqual(level.bounds.x_min);
    }
  });

  it("amplitude is clamped into its box", () => {
    const s = new GameSession(level);
    s.setInput(0, -1000);
    playTicks(s, 3);
    s.setInput(0, +50);
    playTicks(s, 3);
    const rec = s.recording();
    for (const a of rec.amp) {
      expect(a).toBeGreaterThanOrEqual(level.bounds.amp_min);
      expect(a).toBeLessThanOrEqual(level.bounds.amp_max);
    }
  });

  it("every recorded path satisfies the submission rules", () => {
    // mimic erratic play and check the validation invariants locally
    const s = new GameSession(level);
    let state = 99;
    const rand = () => {
      state = (state * 1103515245 + 12345) & 0x7fffffff;
      return state / 0x7fffffff;
    };
    for (let i = 0; i < 120; i++) {
      s.setInput(-1.5 + 3.5 * rand(), -250 + 300 * rand());
      s.advance(level.tick_interval_seconds);
    }
    const rec = s.recording();
    const maxStep = level.bounds.max_speed * level.dt;
    for (let k = 0; k < rec.x0.length; k++) {
      expect(Number.isFinite(rec.x0[k]) && Number.isFinite(rec.amp[k])).toBe(true);
      expect(rec.x0[k]).toBeGreaterThanOrEqual(level.bounds.x_min);
      expect(rec.x0[k]).toBeLessThanOrEqual(level.bounds.x_max);
      expect(rec.amp[k]).toBeGreaterThanOrEqual(level.bounds.amp_min);
      expect(rec.amp[k]).toBeLessThanOrEqual(level.bounds.amp_max);
      if (k > 0) expect(Math.abs(rec.x0[k] - rec.x0[k - 1])).toBeLessThanOrEqual(maxStep + 1e-12);
    }
  });
});

describe("pacing", () => {
  it("advances model time per wall second within 5% at the configured playback", () => {
    const s = new GameSession(level);
    s.setInput(level.target_trap.x0, level.target_trap.amplitude);
    // 2 simulated wall-seconds delivered in uneven frame chunks
    const chunks = [0.016, 0.017, 0.015, 0.033, 0.008];
    let wall = 0;
    let i = 0;
    while (wall < 2.0) {
      const c = chunks[i++ % chunks.length];
      s.advance(c);
      wall += c;
    }
    const expected = wall / level.tick_interval_seconds * level.dt;
    expect(Math.abs(s.modelTime - expected) / expected).toBeLessThan(0.05);
  });

  it("a stalled frame does not bank more than one tick", () => {
    const s = new GameSession(level);
    s.advance(5.0); // one long stall
    const after = s.recording().x0.length;
    s.advance(level.tick_interval_seconds);
    // only ~one extra step after the stall, not hundreds of banked ones
    expect(s.recording().x0.length - after).toBeLessThanOrEqual(2);
  });

  it("stops at the level duration window", () => {
    const s = new GameSession(level);
    s.advance(1e6);
    expect(s.modelTime).toBeLessThanOrEqual(level.duration_window[1] + 1e-9);
  });
});

describe("frames", () => {
  it("rendering snapshots never mutate the physics", () => {
    const s = new GameSession(level);
    playTicks(s, 10);
    const f1 = s.frame();
    expect(Object.isFrozen(f1)).toBe(true);
    const f2 = s.frame();
    expect(f2.t).toBe(f1.t);
    expect(f2.fidelity).toBe(f1.fidelity);
    expect(f2.density).toEqual(f1.density);
  });

  it("density integral is conserved across frames", () => {
    const s = new GameSession(level);
    const dx = (level.grid.x_max - level.grid.x_min) / level.grid.n_points;
    const integral = (d: number[]) => d.reduce((a, b) => a + b, 0) * dx * 4;
    const before = integral(s.frame().density as number[]);
    s.setInput(0.4, -150);
    playTicks(s, 60);
    const after = integral(s.frame().density as number[]);
    expect(before).toBeCloseTo(1.0, 2);
    expect(after).toBeCloseTo(before, 3);
  });
});

describe("cursor mapping", () => {
  it("maps the canvas corners to the control box corners", () => {
    const tl = cursorToControls(0, 0, 800, 400, level);
    expect(tl.x0).toBe(level.bounds.x_min);
    expect(tl.amp).toBe(level.bounds.amp_max);
    const br = cursorToControls(800, 400, 800, 400, level);
    expect(br.x0).toBe(level.bounds.x_max);
    expect(br.amp).toBe(level.bounds.amp_min);
  });

  it("clamps positions outside the canvas", () => {
    const out = cursorToControls(-50, 1000, 800, 400, level);
    expect(out.x0).toBe(level.bounds.x_min);
    expect(out.amp).toBe(level.bounds.amp_min);
  });
});
