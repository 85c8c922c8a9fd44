/**
 * Pure view-model math for the instrument panel.
 *
 * Safety-relevant readings pass through unfiltered: gauge values are
 * the snapshot numbers themselves, never smoothed or interpolated
 * across frames, so what the operator sees is exactly what the server
 * reported last.
 */

import type { ContactState, Vec3 } from "./protocol.js";

export interface GaugeView {
  /** Magnitude of the board-normal force component, newtons. */
  value: number;
  /** Threshold marker position, newtons. */
  limit: number;
  /** Bar fill as a fraction of the limit, clamped for drawing. */
  fraction: number;
  /** True when the reading exceeds the threshold marker. */
  over: boolean;
}

/** Display headroom above the threshold marker. */
export const GAUGE_SPAN_FACTOR = 1.5;

export function forceGauge(force: Vec3, limit: number): GaugeView {
  const value = Math.abs(force[0]);
  const span = limit > 0 ? limit * GAUGE_SPAN_FACTOR : 1;
  return {
    value,
    limit,
    fraction: Math.min(1, value / span),
    over: limit > 0 && value > limit,
  };
}

export interface BadgeView {
  label: string;
  tone: "idle" | "touch" | "write" | "limit";
}

const BADGES: Record<ContactState, BadgeView> = {
  no_contact: { label: "no contact", tone: "idle" },
  collision: { label: "collision", tone: "touch" },
  penetration: { label: "writing", tone: "write" },
  saturation: { label: "saturated", tone: "limit" },
};

export function contactBadge(state: ContactState): BadgeView {
  return BADGES[state];
}

/**
 * Board-plane components (u, v) of the rendered force, for the arrow
 * drawn at the stylus cursor.  Same frame convention as the input
 * mapping: u is -y, v is +z.
 */
export function forceArrow(f: Vec3): [number, number] {
  return [-f[1], f[2]];
}
