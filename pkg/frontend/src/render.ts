// Pure geometry for the canvas renderer: world-to-pixel mapping and the
// polylines for the potential curve and the probability-density "liquid"
// drawn on top of it.  Nothing here touches the session or the canvas.

import type { FrameMessage, LevelView } from "./protocol.js";
import { TARGET_HALF_WIDTH } from "./game.js";

export interface ViewBox {
  width: number;
  height: number;
  vMin: number;   // bottom of the energy axis
  vMax: number;   // top of the energy axis
  densityScale: number;  // energy units per unit probability density
}

export const DEFAULT_VIEW: Omit<ViewBox, "width" | "height"> = {
  vMin: -260,
  vMax: 60,
  densityScale: 40,
};

export function xToPx(x: number, level: LevelView, view: ViewBox): number {
  const { x_min, x_max } = level.grid;
  return ((x - x_min) / (x_max - x_min)) * view.width;
}

export function vToPx(v: number, view: ViewBox): number {
  return view.height * (1 - (v - view.vMin) / (view.vMax - view.vMin));
}

export interface Polyline {
  xs: number[];
  ys: number[];
}

/** The potential curve in pixel coordinates. */
export function potentialPolyline(
  frame: FrameMessage,
  xs: number[],
  level: LevelView,
  view: ViewBox,
): Polyline {
  const out: Polyline = { xs: [], ys: [] };
  for (let i = 0; i < frame.potential.length; i++) {
    out.xs.push(xToPx(xs[i], level, view));
    out.ys.push(vToPx(frame.potential[i], view));
  }
  return out;
}

/** The density drawn as liquid filling the potential: the curve
 * V(x) + scale * |psi|^2 closed against the potential floor. */
export function densityPolyline(
  frame: FrameMessage,
  xs: number[],
  level: LevelView,
  view: ViewBox,
): Polyline {
  const out: Polyline = { xs: [], ys: [] };
  for (let i = 0; i < frame.density.length; i++) {
    out.xs.push(xToPx(xs[i], level, view));
    out.ys.push(vToPx(frame.potential[i] + view.densityScale * frame.density[i], view));
  }
  return out;
}

export interface TargetRect {
  x: number;
  width: number;
}

/** The cyan goal region around the tweezer park position, in pixels. */
export function targetRect(level: LevelView, view: ViewBox): TargetRect {
  const lo = xToPx(level.target_trap.x0 - TARGET_HALF_WIDTH, level, view);
  const hi = xToPx(level.target_trap.x0 + TARGET_HALF_WIDTH, level, view);
  return { x: lo, width: hi - lo };
}

/** Total probability currently drawn (display invariant: stays ~1). */
export function densityIntegral(frame: FrameMessage, dx: number, decimation: number): number {
  let s = 0;
  for (const d of frame.density) s += d;
  return s * dx * decimation;
}
