import { describe, expect, it } from "vitest";

import type { ServerMessage, StateSnapshot } from "../src/protocol.js";
import { CockpitStore, STALE_AFTER_MS } from "../src/store.js";

function snapshot(partial: Partial<Omit<StateSnapshot, "type">> = {}):
    StateSnapshot {
  return {
    type: "state_snapshot",
    t: 0,
    p: [0.34, 0, 0.3],
    q: [1, 0, 0, 0],
    f_e: [0, 0, 0],
    f_h: [0, 0, 0],
    contact_state: "no_contact",
    saturation: [false, false, false],
    chalk_intact: true,
    stroke_delta: [],
    ...partial,
  };
}

const SCENARIO: ServerMessage = {
  type: "scenario_state",
  label: "C",
  render_mode: "virtualized",
  saturation_enabled: true,
  force_threshold: 12,
  running: false,
};

function openStore(): CockpitStore {
  const store = new CockpitStore();
  store.setConnection("open");
  store.handle({ type: "role_assign", role: "observer" }, 0);
  store.handle(SCENARIO, 0);
  return store;
}

describe("handshake and roles", () => {
  it("records role and scenario from the handshake", () => {
    const store = openStore();
    expect(store.role).toBe("observer");
    expect(store.scenario?.label).toBe("C");
    expect(store.running).toBe(false);
  });

  it("promotion to controller enables input only while running", () => {
    const store = openStore();
    store.handle({ type: "role_assign", role: "controller" }, 1);
    expect(store.canSendInput()).toBe(false);
    store.handle({ type: "session_event", event: "started", reason: null }, 2);
    expect(store.canSendInput()).toBe(true);
  });

  it("observers never gain input no matter the session state", () => {
    const store = openStore();
    store.handle({ type: "session_event", event: "started", reason: null }, 1);
    expect(store.canSendInput()).toBe(false);
  });

  it("losing the connection suspends input and running state", () => {
    const store = openStore();
    store.handle({ type: "role_assign", role: "controller" }, 1);
    store.handle({ type: "session_event", event: "started", reason: null }, 2);
    store.setConnection("closed");
    expect(store.canSendInput()).toBe(false);
    expect(store.running).toBe(false);
  });
});

describe("snapshots", () => {
  it("exposes the latest snapshot verbatim and grows the stroke cache",
     () => {
       const store = openStore();
       const snap = snapshot({
         f_e: [-11.5, 0.25, 0],
         contact_state: "penetration",
         stroke_delta: [[0, [0.01, 0.02]]],
       });
       store.handle(snap, 5);
       expect(store.snapshot).toBe(snap);
       expect(store.snapshot?.f_e[0]).toBe(-11.5);
       expect(store.strokes.pointCount).toBe(1);
     });

  it("raises the chalk alarm from the snapshot flag", () => {
    const store = openStore();
    store.handle(snapshot(), 1);
    expect(store.chalkBroken).toBe(false);
    store.handle(snapshot({ chalk_intact: false }), 2);
    expect(store.chalkBroken).toBe(true);
  });

  it("a replayed history snapshot rebuilds the identical board", () => {
    const incremental = openStore();
    incremental.handle(snapshot({ stroke_delta: [[0, [0, 0]]] }), 1);
    incremental.handle(snapshot({ stroke_delta: [[0, [0.01, 0]]] }), 2);
    incremental.handle(snapshot({ stroke_delta: [[1, [0.05, 0.01]]] }), 3);
    const reloaded = openStore();
    reloaded.handle(snapshot({
      stroke_delta: [[0, [0, 0]], [0, [0.01, 0]], [1, [0.05, 0.01]]],
    }), 10);
    expect(reloaded.strokes.polylines())
      .toEqual(incremental.strokes.polylines());
  });
});

describe("freshness", () => {
  it("flags a live stream that stops delivering snapshots", () => {
    const store = openStore();
    store.handle({ type: "session_event", event: "started", reason: null }, 0);
    store.handle(snapshot(), 1000);
    expect(store.isStale(1000 + STALE_AFTER_MS)).toBe(false);
    expect(store.isStale(1001 + STALE_AFTER_MS)).toBe(true);
  });

  it("an idle session is quiet, not stale", () => {
    const store = openStore();
    store.handle(snapshot(), 1000);
    store.handle({ type: "session_event", event: "completed", reason: null },
                 1001);
    expect(store.isStale(10_000)).toBe(false);
  });
});

describe("session lifecycle", () => {
  it("scenario switching is blocked while running", () => {
    const store = openStore();
    expect(store.canSwitchScenario()).toBe(true);
    store.handle({ type: "session_event", event: "started", reason: null }, 1);
    expect(store.canSwitchScenario()).toBe(false);
    store.handle({ type: "session_event", event: "completed", reason: null },
                 2);
    expect(store.canSwitchScenario()).toBe(true);
  });

  it("a scenario change acknowledges with a fresh board", () => {
    const store = openStore();
    store.handle(snapshot({ stroke_delta: [[0, [0, 0]]] }), 1);
    store.handle({ ...SCENARIO, label: "B", saturation_enabled: false }, 2);
    expect(store.scenario?.label).toBe("B");
    expect(store.strokes.pointCount).toBe(0);
  });

  it("failure stops the session and keeps the reason", () => {
    const store = openStore();
    store.handle({ type: "session_event", event: "started", reason: null }, 1);
    store.handle(
      { type: "session_event", event: "failed", reason: "chalk_broken" }, 2);
    expect(store.running).toBe(false);
    expect(store.lastEvent?.reason).toBe("chalk_broken");
  });

  it("pause on controller loss stops input until restarted", () => {
    const store = openStore();
    store.handle({ type: "role_assign", role: "controller" }, 1);
    store.handle({ type: "session_event", event: "started", reason: null }, 2);
    store.handle(
      { type: "session_event", event: "paused", reason: "controller left" },
      3);
    expect(store.canSendInput()).toBe(false);
    store.handle(
      { type: "session_event", event: "started", reason: "resumed" }, 4);
    expect(store.canSendInput()).toBe(true);
  });

  it("reset clears board, snapshot, metrics and alarms", () => {
    const store = openStore();
    store.handle(snapshot({
      chalk_intact: false, stroke_delta: [[0, [0, 0]]],
    }), 1);
    store.handle({
      type: "metrics_update", robot_mean: -5, robot_extremum: -10,
      mean_difference: 2, peak_difference: 2, human_mean: -7.25,
      human_extremum: -12.16,
    }, 2);
    store.handle({ type: "session_event", event: "reset", reason: null }, 3);
    expect(store.strokes.pointCount).toBe(0);
    expect(store.snapshot).toBeNull();
    expect(store.metrics).toBeNull();
    expect(store.chalkBroken).toBe(false);
  });

  it("server errors surface with their diagnostic text", () => {
    const store = openStore();
    store.handle({
      type: "error", code: "bad_scenario",
      message: "rate_hz must be positive",
    }, 1);
    expect(store.lastError?.code).toBe("bad_scenario");
    expect(store.lastError?.message).toContain("rate_hz");
  });
});
