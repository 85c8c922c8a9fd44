import { describe, expect, it } from "vitest";

import type { StrokeDelta } from "../src/protocol.js";
import { StrokeCache } from "../src/strokes.js";

describe("StrokeCache", () => {
  it("accumulates points per segment in arrival order", () => {
    const cache = new StrokeCache();
    cache.apply([[0, [0, 0]], [0, [0.01, 0]]]);
    cache.apply([[1, [0.05, 0.05]]]);
    cache.apply([[0, [0.02, 0]]]);
    expect(cache.segmentCount).toBe(2);
    expect(cache.pointCount).toBe(4);
    expect(cache.polylines()).toEqual([
      [[0, 0], [0.01, 0], [0.02, 0]],
      [[0.05, 0.05]],
    ]);
  });

  it("orders polylines by segment index regardless of arrival", () => {
    const cache = new StrokeCache();
    cache.apply([[3, [3, 3]], [1, [1, 1]], [2, [2, 2]]]);
    expect(cache.polylines().map((line) => line[0]![0])).toEqual([1, 2, 3]);
  });

  it("reset drops everything", () => {
    const cache = new StrokeCache();
    cache.apply([[0, [1, 2]]]);
    cache.reset();
    expect(cache.segmentCount).toBe(0);
    expect(cache.polylines()).toEqual([]);
  });

  it("replaying the full history reproduces incremental state", () => {
    // the service sends a fresh client one snapshot carrying all prior
    // deltas; a reloaded page must end up with the identical board
    const increments: StrokeDelta[] = [
      [[0, [0, 0]], [0, [0.001, 0.0002]]],
      [[0, [0.002, 0.0004]]],
      [[1, [0.05, -0.01]], [1, [0.051, -0.012]]],
      [[2, [0.1, 0]]],
    ];
    const live = new StrokeCache();
    for (const delta of increments) live.apply(delta);

    const reloaded = new StrokeCache();
    reloaded.apply(increments.flat());

    expect(reloaded.polylines()).toEqual(live.polylines());
    expect(reloaded.pointCount).toBe(live.pointCount);
  });
});
