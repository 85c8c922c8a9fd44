import { describe, expect, it } from "vitest";

import {
  decodeMessage,
  encodeMessage,
  WIRE_VERSION,
  WireFormatError,
  type WireMessage,
} from "../src/protocol.js";

const SAMPLES: WireMessage[] = [
  {
    type: "stylus_input",
    t: 1.25,
    p: [0.1, -0.2, 0.3],
    q: [1, 0, 0, 0],
  },
  { type: "scenario_set", label: "C" },
  { type: "scenario_set", config: { label: "B", control: { rate_hz: 250 } } },
  { type: "session_ctl", action: "start" },
  {
    type: "state_snapshot",
    t: 2.002,
    p: [0.405, 0.01, 0.3],
    q: [1, 0, 0, 0],
    f_e: [-11.99, 0.2, 0],
    f_h: [-3.5, 0.1, 0],
    contact_state: "saturation",
    saturation: [true, false, false],
    chalk_intact: true,
    stroke_delta: [[0, [0.001, -0.03]], [0, [0.0015, -0.03]]],
  },
  { type: "session_event", event: "failed", reason: "chalk_broken" },
  { type: "session_event", event: "completed", reason: null },
  {
    type: "metrics_update",
    robot_mean: -6.1,
    robot_extremum: -12.0,
    mean_difference: 1.15,
    peak_difference: 0.16,
    human_mean: -7.25,
    human_extremum: -12.16,
  },
  {
    type: "metrics_update",
    robot_mean: null,
    robot_extremum: null,
    mean_difference: null,
    peak_difference: null,
    human_mean: -7.25,
    human_extremum: -12.16,
  },
  { type: "role_assign", role: "controller" },
  {
    type: "scenario_state",
    label: "C",
    render_mode: "virtualized",
    saturation_enabled: true,
    force_threshold: 12,
    running: false,
  },
  { type: "error", code: "not_controller", message: "read-only client" },
];

describe("round trips", () => {
  for (const msg of SAMPLES) {
    it(`${msg.type} survives encode/decode`, () => {
      expect(decodeMessage(encodeMessage(msg))).toEqual(msg);
    });
  }

  it("preserves floats bit-exactly", () => {
    const t = 0.1 + 0.2; // not representable as a short decimal
    const out = decodeMessage(encodeMessage({
      type: "stylus_input", t, p: [Math.PI, -0, 1e-17], q: [1, 0, 0, 0],
    }));
    if (out.type !== "stylus_input") throw new Error("wrong type");
    expect(out.t).toBe(t);
    expect(out.p[0]).toBe(Math.PI);
    expect(out.p[2]).toBe(1e-17);
  });

  it("stamps the schema version on every frame", () => {
    for (const msg of SAMPLES) {
      expect(JSON.parse(encodeMessage(msg)).v).toBe(WIRE_VERSION);
    }
  });
});

describe("frames produced by the service decode as-is", () => {
  it("handshake pair", () => {
    const role = decodeMessage('{"v":1,"type":"role_assign","role":"observer"}');
    expect(role).toEqual({ type: "role_assign", role: "observer" });
    const sc = decodeMessage(
      '{"v":1,"type":"scenario_state","label":"C","render_mode":'
      + '"virtualized","saturation_enabled":true,"force_threshold":12.0,'
      + '"running":false}');
    if (sc.type !== "scenario_state") throw new Error("wrong type");
    expect(sc.force_threshold).toBe(12);
  });

  it("snapshot with stroke history", () => {
    const snap = decodeMessage(
      '{"v":1,"type":"state_snapshot","t":0.05,"p":[0.34,0.0,0.3],'
      + '"q":[1.0,0.0,0.0,0.0],"f_e":[0.0,0.0,0.0],"f_h":[0.0,0.0,0.0],'
      + '"contact_state":"no_contact","saturation":[false,false,false],'
      + '"chalk_intact":true,"stroke_delta":[[0,[0.01,0.02]]]}');
    if (snap.type !== "state_snapshot") throw new Error("wrong type");
    expect(snap.stroke_delta).toEqual([[0, [0.01, 0.02]]]);
  });
});

describe("validation", () => {
  const reject = (text: string) =>
    expect(() => decodeMessage(text)).toThrow(WireFormatError);

  it("rejects wrong version", () => {
    reject('{"v":2,"type":"session_ctl","action":"start"}');
    reject('{"type":"session_ctl","action":"start"}');
  });

  it("rejects unknown type", () => {
    reject('{"v":1,"type":"telemetry"}');
  });

  it("rejects non-JSON and non-objects", () => {
    reject("not json");
    reject("[1,2,3]");
    reject("null");
  });

  it("rejects wrong vector arity", () => {
    reject('{"v":1,"type":"stylus_input","t":0,"p":[1,2],"q":[1,0,0,0]}');
    reject('{"v":1,"type":"stylus_input","t":0,"p":[1,2,3],"q":[1,0,0]}');
  });

  it("rejects non-finite and non-numeric fields", () => {
    reject('{"v":1,"type":"stylus_input","t":"x","p":[1,2,3],"q":[1,0,0,0]}');
    reject('{"v":1,"type":"stylus_input","t":0,"p":[1,null,3],"q":[1,0,0,0]}');
  });

  it("rejects unknown enum values", () => {
    reject('{"v":1,"type":"session_ctl","action":"pause"}');
    reject('{"v":1,"type":"session_event","event":"detonated"}');
    reject('{"v":1,"type":"role_assign","role":"admin"}');
    reject('{"v":1,"type":"error","code":"teapot","message":""}');
  });

  it("requires exactly one of label and config", () => {
    reject('{"v":1,"type":"scenario_set"}');
    reject('{"v":1,"type":"scenario_set","label":"C","config":{}}');
    expect(() => encodeMessage({ type: "scenario_set" }))
      .toThrow(WireFormatError);
  });

  it("rejects malformed stroke deltas", () => {
    const head = '{"v":1,"type":"state_snapshot","t":0,"p":[0,0,0],'
      + '"q":[1,0,0,0],"f_e":[0,0,0],"f_h":[0,0,0],'
      + '"contact_state":"no_contact","saturation":[false,false,false],'
      + '"chalk_intact":true,"stroke_delta":';
    reject(`${head}[[0]]}`);
    reject(`${head}[[0,[1]]]}`);
    reject(`${head}[[-1,[1,2]]]}`);
    reject(`${head}[[0.5,[1,2]]]}`);
  });
});
