import { describe, expect, it } from "vitest";

import {
  contactBadge,
  forceArrow,
  forceGauge,
  GAUGE_SPAN_FACTOR,
} from "../src/gauges.js";

describe("forceGauge", () => {
  it("reads the snapshot value exactly, no smoothing or rounding", () => {
    const value = -11.987654321987;
    const view = forceGauge([value, 0.2, -0.1], 12);
    expect(view.value).toBe(Math.abs(value));
    expect(view.limit).toBe(12);
  });

  it("flags readings over the threshold", () => {
    expect(forceGauge([-12.01, 0, 0], 12).over).toBe(true);
    expect(forceGauge([-12.0, 0, 0], 12).over).toBe(false);
    expect(forceGauge([7, 0, 0], 12).over).toBe(false);
  });

  it("fraction fills the bar against the display span", () => {
    const atLimit = forceGauge([12, 0, 0], 12);
    expect(atLimit.fraction).toBeCloseTo(1 / GAUGE_SPAN_FACTOR, 12);
    expect(forceGauge([1000, 0, 0], 12).fraction).toBe(1);
    expect(forceGauge([0, 0, 0], 12).fraction).toBe(0);
  });

  it("tolerates a zero threshold without dividing by zero", () => {
    const view = forceGauge([5, 0, 0], 0);
    expect(Number.isFinite(view.fraction)).toBe(true);
    expect(view.over).toBe(false);
  });
});

describe("contactBadge", () => {
  it("maps every contact state to a badge", () => {
    expect(contactBadge("no_contact").tone).toBe("idle");
    expect(contactBadge("collision").tone).toBe("touch");
    expect(contactBadge("penetration").tone).toBe("write");
    expect(contactBadge("saturation").tone).toBe("limit");
  });
});

describe("forceArrow", () => {
  it("projects the rendered force into board coordinates", () => {
    // device -y is board-right (u), device +z is board-up (v)
    expect(forceArrow([-3, 1.5, -0.5])).toEqual([-1.5, -0.5]);
    expect(forceArrow([0, 0, 0])).toEqual([-0, 0]);
  });
});
