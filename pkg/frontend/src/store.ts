/**
 * Cockpit state: everything the UI renders, reduced from server
 * messages.  The store holds no physics and predicts nothing; it is a
 * projection of what the service has confirmed, which is why a reload
 * (fresh store + server stroke replay) reproduces the identical board.
 */

import type {
  ErrorMessage,
  MetricsUpdate,
  Role,
  ScenarioState,
  ServerMessage,
  SessionEvent,
  StateSnapshot,
} from "./protocol.js";
import { StrokeCache } from "./strokes.js";

export type Connection = "connecting" | "open" | "closed";

/** Snapshot gap beyond which the stream is flagged stale, ms. */
export const STALE_AFTER_MS = 500;

export class CockpitStore {
  connection: Connection = "connecting";
  role: Role | null = null;
  scenario: ScenarioState | null = null;
  running = false;
  snapshot: StateSnapshot | null = null;
  metrics: MetricsUpdate | null = null;
  lastEvent: SessionEvent | null = null;
  lastError: ErrorMessage | null = null;
  chalkBroken = false;
  readonly strokes = new StrokeCache();
  private lastSnapshotMs: number | null = null;

  setConnection(state: Connection): void {
    this.connection = state;
    if (state !== "open") this.running = false;
  }

  handle(msg: ServerMessage, nowMs: number): void {
    switch (msg.type) {
      case "role_assign":
        this.role = msg.role;
        break;
      case "scenario_state":
        // sent on handshake and on scenario change; both start a fresh
        // board (a late joiner's replay snapshot follows this message)
        this.scenario = msg;
        this.running = msg.running;
        this.strokes.reset();
        this.chalkBroken = false;
        break;
      case "state_snapshot":
        this.snapshot = msg;
        this.strokes.apply(msg.stroke_delta);
        this.chalkBroken = !msg.chalk_intact;
        this.lastSnapshotMs = nowMs;
        break;
      case "session_event":
        this.lastEvent = msg;
        switch (msg.event) {
          case "started":
            this.running = true;
            break;
          case "completed":
          case "failed":
          case "paused":
            this.running = false;
            break;
          case "reset":
            this.running = false;
            this.snapshot = null;
            this.metrics = null;
            this.chalkBroken = false;
            this.strokes.reset();
            this.lastSnapshotMs = null;
            break;
        }
        break;
      case "metrics_update":
        this.metrics = msg;
        break;
      case "error":
        this.lastError = msg;
        break;
    }
  }

  /** True when a live stream has gone quiet past the freshness window. */
  isStale(nowMs: number): boolean {
    return this.running && this.lastSnapshotMs !== null
      && nowMs - this.lastSnapshotMs > STALE_AFTER_MS;
  }

  /** Scenario switching is allowed only between sessions. */
  canSwitchScenario(): boolean {
    return this.connection === "open" && !this.running;
  }

  /** Stylus input is accepted only from the live controller. */
  canSendInput(): boolean {
    return this.connection === "open" && this.role === "controller"
      && this.running;
  }
}
