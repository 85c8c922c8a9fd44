/**
 * JSON wire schema shared with the session service.
 *
 * Every frame is a flat JSON object with a schema version `v` and a
 * `type` discriminator.  `decodeMessage` validates shape and enums and
 * throws `WireFormatError` on anything it does not fully understand,
 * so the cockpit never acts on half-parsed input.
 */

export const WIRE_VERSION = 1;

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number];
export type Bool3 = [boolean, boolean, boolean];
/** Each entry is [segment index, [u, v]] in board-plane meters. */
export type StrokeDelta = Array<[number, [number, number]]>;

export const SESSION_ACTIONS = ["start", "stop", "reset"] as const;
export const SESSION_EVENTS = [
  "started", "completed", "failed", "paused", "reset",
] as const;
export const ROLES = ["controller", "observer"] as const;
export const ERROR_CODES = [
  "bad_message", "not_controller", "controller_exists", "session_active",
  "bad_scenario",
] as const;
export const CONTACT_STATES = [
  "no_contact", "collision", "penetration", "saturation",
] as const;

export type SessionAction = (typeof SESSION_ACTIONS)[number];
export type SessionEventKind = (typeof SESSION_EVENTS)[number];
export type Role = (typeof ROLES)[number];
export type ErrorCode = (typeof ERROR_CODES)[number];
export type ContactState = (typeof CONTACT_STATES)[number];

export interface StylusInput {
  type: "stylus_input";
  t: number;
  p: Vec3;
  q: Quat;
}

export interface ScenarioSet {
  type: "scenario_set";
  label?: string;
  config?: Record<string, unknown>;
}

export interface SessionCtl {
  type: "session_ctl";
  action: SessionAction;
}

export interface StateSnapshot {
  type: "state_snapshot";
  t: number;
  p: Vec3;
  q: Quat;
  f_e: Vec3;
  f_h: Vec3;
  contact_state: ContactState;
  saturation: Bool3;
  chalk_intact: boolean;
  stroke_delta: StrokeDelta;
}

export interface SessionEvent {
  type: "session_event";
  event: SessionEventKind;
  reason: string | null;
}

export interface MetricsUpdate {
  type: "metrics_update";
  robot_mean: number | null;
  robot_extremum: number | null;
  mean_difference: number | null;
  peak_difference: number | null;
  human_mean: number;
  human_extremum: number;
}

export interface RoleAssign {
  type: "role_assign";
  role: Role;
}

export interface ScenarioState {
  type: "scenario_state";
  label: string;
  render_mode: string;
  saturation_enabled: boolean;
  force_threshold: number;
  running: boolean;
}

export interface ErrorMessage {
  type: "error";
  code: ErrorCode;
  message: string;
}

export type ClientMessage = StylusInput | ScenarioSet | SessionCtl;
export type ServerMessage =
  | StateSnapshot
  | SessionEvent
  | MetricsUpdate
  | RoleAssign
  | ScenarioState
  | ErrorMessage;
export type WireMessage = ClientMessage | ServerMessage;

export class WireFormatError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "WireFormatError";
  }
}

function fail(msg: string): never {
  throw new WireFormatError(msg);
}

function asObject(value: unknown, name: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    fail(`${name} must be a JSON object`);
  }
  return value as Record<string, unknown>;
}

function asNumber(value: unknown, name: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    fail(`${name} must be a finite number`);
  }
  return value;
}

function asBoolean(value: unknown, name: string): boolean {
  if (typeof value !== "boolean") fail(`${name} must be a boolean`);
  return value;
}

function asString(value: unknown, name: string): string {
  if (typeof value !== "string") fail(`${name} must be a string`);
  return value;
}

function asEnum<T extends string>(
  value: unknown, allowed: readonly T[], name: string,
): T {
  const s = asString(value, name);
  if (!(allowed as readonly string[]).includes(s)) {
    fail(`${name} has unknown value ${JSON.stringify(s)}`);
  }
  return s as T;
}

function asVec(value: unknown, n: number, name: string): number[] {
  if (!Array.isArray(value) || value.length !== n) {
    fail(`${name} must have ${n} components`);
  }
  return value.map((x, i) => asNumber(x, `${name}[${i}]`));
}

function asOptionalNumber(value: unknown, name: string): number | null {
  if (value === null || value === undefined) return null;
  return asNumber(value, name);
}

function asStrokeDelta(value: unknown): StrokeDelta {
  if (value === undefined) return [];
  if (!Array.isArray(value)) fail("stroke_delta must be a list");
  return value.map((entry, i) => {
    if (!Array.isArray(entry) || entry.length !== 2) {
      fail(`stroke_delta[${i}] must be [segment, [u, v]]`);
    }
    const seg = asNumber(entry[0], `stroke_delta[${i}] segment`);
    if (!Number.isInteger(seg) || seg < 0) {
      fail(`stroke_delta[${i}] segment must be a nonnegative integer`);
    }
    const uv = asVec(entry[1], 2, `stroke_delta[${i}] point`);
    return [seg, [uv[0]!, uv[1]!]] as [number, [number, number]];
  });
}

/** Serialize a message, stamping the schema version. */
export function encodeMessage(msg: WireMessage): string {
  const body: Record<string, unknown> = { v: WIRE_VERSION, type: msg.type };
  switch (msg.type) {
    case "stylus_input":
      body.t = msg.t;
      body.p = msg.p;
      body.q = msg.q;
      break;
    case "scenario_set":
      if ((msg.label === undefined) === (msg.config === undefined)) {
        fail("scenario_set needs exactly one of label, config");
      }
      if (msg.label !== undefined) body.label = msg.label;
      else body.config = msg.config;
      break;
    case "session_ctl":
      body.action = msg.action;
      break;
    case "state_snapshot":
      body.t = msg.t;
      body.p = msg.p;
      body.q = msg.q;
      body.f_e = msg.f_e;
      body.f_h = msg.f_h;
      body.contact_state = msg.contact_state;
      body.saturation = msg.saturation;
      body.chalk_intact = msg.chalk_intact;
      body.stroke_delta = msg.stroke_delta;
      break;
    case "session_event":
      body.event = msg.event;
      body.reason = msg.reason;
      break;
    case "metrics_update":
      body.robot_mean = msg.robot_mean;
      body.robot_extremum = msg.robot_extremum;
      body.mean_difference = msg.mean_difference;
      body.peak_difference = msg.peak_difference;
      body.human_mean = msg.human_mean;
      body.human_extremum = msg.human_extremum;
      break;
    case "role_assign":
      body.role = msg.role;
      break;
    case "scenario_state":
      body.label = msg.label;
      body.render_mode = msg.render_mode;
      body.saturation_enabled = msg.saturation_enabled;
      body.force_threshold = msg.force_threshold;
      body.running = msg.running;
      break;
    case "error":
      body.code = msg.code;
      body.message = msg.message;
      break;
  }
  return JSON.stringify(body);
}

/** Parse and validate one wire frame; throws WireFormatError. */
export function decodeMessage(text: string): WireMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (exc) {
    fail(`invalid JSON: ${(exc as Error).message}`);
  }
  const data = asObject(raw, "message");
  if (data.v !== WIRE_VERSION) {
    fail(`unsupported wire version ${JSON.stringify(data.v)}`);
  }
  const kind = asString(data.type, "type");
  switch (kind) {
    case "stylus_input":
      return {
        type: kind,
        t: asNumber(data.t, "t"),
        p: asVec(data.p, 3, "p") as Vec3,
        q: asVec(data.q, 4, "q") as Quat,
      };
    case "scenario_set": {
      const hasLabel = data.label !== undefined && data.label !== null;
      const hasConfig = data.config !== undefined && data.config !== null;
      if (hasLabel === hasConfig) {
        fail("scenario_set needs exactly one of label, config");
      }
      return hasLabel
        ? { type: kind, label: asString(data.label, "label") }
        : { type: kind, config: asObject(data.config, "config") };
    }
    case "session_ctl":
      return { type: kind, action: asEnum(data.action, SESSION_ACTIONS, "action") };
    case "state_snapshot":
      return {
        type: kind,
        t: asNumber(data.t, "t"),
        p: asVec(data.p, 3, "p") as Vec3,
        q: asVec(data.q, 4, "q") as Quat,
        f_e: asVec(data.f_e, 3, "f_e") as Vec3,
        f_h: asVec(data.f_h, 3, "f_h") as Vec3,
        contact_state: asEnum(data.contact_state, CONTACT_STATES,
                              "contact_state"),
        saturation: (() => {
          const flags = data.saturation;
          if (!Array.isArray(flags) || flags.length !== 3) {
            fail("saturation must have 3 flags");
          }
          return flags.map(
            (b, i) => asBoolean(b, `saturation[${i}]`)) as Bool3;
        })(),
        chalk_intact: asBoolean(data.chalk_intact, "chalk_intact"),
        stroke_delta: asStrokeDelta(data.stroke_delta),
      };
    case "session_event":
      return {
        type: kind,
        event: asEnum(data.event, SESSION_EVENTS, "event"),
        reason: data.reason === undefined || data.reason === null
          ? null : asString(data.reason, "reason"),
      };
    case "metrics_update":
      return {
        type: kind,
        robot_mean: asOptionalNumber(data.robot_mean, "robot_mean"),
        robot_extremum: asOptionalNumber(data.robot_extremum,
                                         "robot_extremum"),
        mean_difference: asOptionalNumber(data.mean_difference,
                                          "mean_difference"),
        peak_difference: asOptionalNumber(data.peak_difference,
                                          "peak_difference"),
        human_mean: asNumber(data.human_mean ?? 0, "human_mean"),
        human_extremum: asNumber(data.human_extremum ?? 0, "human_extremum"),
      };
    case "role_assign":
      return { type: kind, role: asEnum(data.role, ROLES, "role") };
    case "scenario_state":
      return {
        type: kind,
        label: asString(data.label, "label"),
        render_mode: asString(data.render_mode, "render_mode"),
        saturation_enabled: asBoolean(data.saturation_enabled,
                                      "saturation_enabled"),
        force_threshold: asNumber(data.force_threshold, "force_threshold"),
        running: data.running === undefined
          ? false : asBoolean(data.running, "running"),
      };
    case "error":
      return {
        type: kind,
        code: asEnum(data.code, ERROR_CODES, "code"),
        message: data.message === undefined
          ? "" : asString(data.message, "message"),
      };
    default:
      fail(`unknown message type ${JSON.stringify(kind)}`);
  }
}
