/**
 * Pointer-to-stylus input mapping.
 *
 * A 2D pointer has no board-normal axis, so depth is a separate
 * control (slider, or pen pressure when the pointer provides it) and
 * the two pointer axes map linearly onto the board plane.  The service
 * anchors its pose mapping at the first sample it receives, so these
 * coordinates are relative to wherever the operator started; sending
 * (0,0,0) first keeps the on-screen origin aligned with the robot's
 * starting point on the board.
 *
 * Frame convention, matching the default service configuration: the
 * stylus x axis advances toward the board, board-right (u) is -y and
 * board-up (v) is +z.
 */

import type { Quat, StylusInput, Vec3 } from "./protocol.js";

export const IDENTITY_QUAT: Quat = [1, 0, 0, 0];

export interface Calibration {
  /** Screen pixels per meter of board travel. */
  pxPerMeter: number;
  /** Screen position that maps to the board-plane origin. */
  originPx: [number, number];
  /** Stylus travel toward the board at full depth, meters. */
  maxDepth: number;
}

export const DEFAULT_CALIBRATION: Calibration = {
  pxPerMeter: 2000,
  originPx: [0, 0],
  maxDepth: 0.08,
};

/** Screen pixels to board-plane coordinates (u right, v up). */
export function pointerToBoard(
  cal: Calibration, px: number, py: number,
): [number, number] {
  return [
    (px - cal.originPx[0]) / cal.pxPerMeter,
    (cal.originPx[1] - py) / cal.pxPerMeter,
  ];
}

/** Board coordinates and a 0..1 depth fraction to a stylus position. */
export function boardToStylus(
  cal: Calibration, u: number, v: number, depth01: number,
): Vec3 {
  const d = Math.min(1, Math.max(0, depth01));
  return [cal.maxDepth * d, -u, v];
}

/**
 * Builds stylus_input messages with strictly increasing timestamps.
 *
 * Browser event timestamps can repeat within a millisecond; the
 * service holds the last sample between messages, so a stalled clock
 * would reorder nothing but still violates the monotone-input
 * contract.  A minimal epsilon bump keeps t strictly increasing.
 */
export class StylusSource {
  private lastT = -Infinity;

  constructor(private readonly epsilon = 1e-6) {}

  next(p: Vec3, tSeconds: number, q: Quat = IDENTITY_QUAT): StylusInput {
    let t = tSeconds;
    if (t <= this.lastT) t = this.lastT + this.epsilon;
    this.lastT = t;
    return { type: "stylus_input", t, p: [...p] as Vec3, q: [...q] as Quat };
  }
}
