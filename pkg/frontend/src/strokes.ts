/**
 * Client-side mirror of the board's stroke record.
 *
 * The service streams stroke deltas inside snapshots: each entry
 * appends one point to one segment.  A fresh connection receives the
 * whole history in its first snapshot, so rebuilding this cache from
 * scratch after a reload reproduces the board exactly; the cockpit
 * never invents stroke geometry of its own.
 */

import type { StrokeDelta } from "./protocol.js";

export type Point = [number, number];

export class StrokeCache {
  private segments = new Map<number, Point[]>();

  apply(delta: StrokeDelta): void {
    for (const [seg, uv] of delta) {
      let points = this.segments.get(seg);
      if (points === undefined) {
        points = [];
        this.segments.set(seg, points);
      }
      points.push([uv[0], uv[1]]);
    }
  }

  reset(): void {
    this.segments.clear();
  }

  get segmentCount(): number {
    return this.segments.size;
  }

  get pointCount(): number {
    let n = 0;
    for (const points of this.segments.values()) n += points.length;
    return n;
  }

  /** Segments ordered by index, each a list of board-plane points. */
  polylines(): Point[][] {
    const keys = [...this.segments.keys()].sort((a, b) => a - b);
    return keys.map((k) => this.segments.get(k)!);
  }
}
