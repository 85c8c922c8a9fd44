/**
 * Browser entry point: one WebSocket, one store, an animation-frame
 * render loop.  Message handling mutates the store; rendering reads it
 * back at display rate, so a burst of snapshots never forces layout
 * more than once per frame.
 */

import { contactBadge, forceArrow, forceGauge, GAUGE_SPAN_FACTOR } from "./gauges.js";
import {
  boardToStylus,
  Calibration,
  pointerToBoard,
  StylusSource,
} from "./mapping.js";
import { decodeMessage, encodeMessage, WireFormatError } from "./protocol.js";
import type { SessionAction, Vec3 } from "./protocol.js";
import { CockpitStore } from "./store.js";

const RECONNECT_DELAY_MS = 2000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

const board = el<HTMLCanvasElement>("board");
const ctx = board.getContext("2d")!;
const depthSlider = el<HTMLInputElement>("depth");
const scenarioSelect = el<HTMLSelectElement>("scenario-select");
const applyButton = el<HTMLButtonElement>("scenario-apply");
const buttons: Record<SessionAction, HTMLButtonElement> = {
  start: el("btn-start"),
  stop: el("btn-stop"),
  reset: el("btn-reset"),
};

const store = new CockpitStore();
const stylusSource = new StylusSource();
let socket: WebSocket | null = null;

const calibration: Calibration = {
  pxPerMeter: 2000,
  originPx: [board.width / 2, board.height / 2],
  maxDepth: 0.08,
};

let pointerBoard: [number, number] = [0, 0];
let pointerDepth = 0;
let penDown = false;

function connect(): void {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  const ws = new WebSocket(`${scheme}://${location.host}/session`);
  socket = ws;
  store.setConnection("connecting");
  ws.onopen = () => store.setConnection("open");
  ws.onmessage = (event) => {
    try {
      const msg = decodeMessage(String(event.data));
      if (msg.type === "stylus_input" || msg.type === "scenario_set"
          || msg.type === "session_ctl") return;
      store.handle(msg, performance.now());
    } catch (exc) {
      if (exc instanceof WireFormatError) console.warn(exc.message);
      else throw exc;
    }
  };
  ws.onclose = () => {
    store.setConnection("closed");
    socket = null;
    setTimeout(connect, RECONNECT_DELAY_MS);
  };
}

function send(text: string): void {
  if (socket !== null && socket.readyState === WebSocket.OPEN) {
    socket.send(text);
  }
}

function sendStylus(): void {
  if (!store.canSendInput()) return;
  const depth = penDown ? pointerDepth : 0;
  const p: Vec3 = boardToStylus(
    calibration, pointerBoard[0], pointerBoard[1], depth);
  send(encodeMessage(stylusSource.next(p, performance.now() / 1000)));
}

// -- input wiring ---------------------------------------------------------

board.addEventListener("pointerdown", (e) => {
  board.setPointerCapture(e.pointerId);
  penDown = true;
  updatePointer(e);
});
board.addEventListener("pointermove", (e) => {
  if (penDown) updatePointer(e);
});
const liftPen = () => {
  penDown = false;
  sendStylus();
};
board.addEventListener("pointerup", liftPen);
board.addEventListener("pointercancel", liftPen);

function updatePointer(e: PointerEvent): void {
  const rect = board.getBoundingClientRect();
  const px = (e.clientX - rect.left) * (board.width / rect.width);
  const py = (e.clientY - rect.top) * (board.height / rect.height);
  pointerBoard = pointerToBoard(calibration, px, py);
  // pens report a real pressure axis; for mice it is a constant, so
  // the slider stays the depth control there
  if (e.pointerType === "pen" && e.pressure > 0) {
    pointerDepth = e.pressure;
    depthSlider.value = String(Math.round(e.pressure * 100));
  } else {
    pointerDepth = Number(depthSlider.value) / 100;
  }
  sendStylus();
}

depthSlider.addEventListener("input", () => {
  pointerDepth = Number(depthSlider.value) / 100;
  sendStylus();
});

for (const action of ["start", "stop", "reset"] as const) {
  buttons[action].addEventListener("click", () => {
    send(encodeMessage({ type: "session_ctl", action }));
  });
}

applyButton.addEventListener("click", () => {
  if (!store.canSwitchScenario()) return;
  send(encodeMessage(
    { type: "scenario_set", label: scenarioSelect.value }));
});

// -- rendering ------------------------------------------------------------

function boardToCanvas(u: number, v: number): [number, number] {
  return [
    calibration.originPx[0] + u * calibration.pxPerMeter,
    calibration.originPx[1] - v * calibration.pxPerMeter,
  ];
}

function drawBoard(): void {
  ctx.fillStyle = "#1b3a2a";
  ctx.fillRect(0, 0, board.width, board.height);

  ctx.strokeStyle = "#f5f2e8";
  ctx.lineWidth = 6;
  ctx.lineCap = "round";
  ctx.lineJoin = "round";
  for (const line of store.strokes.polylines()) {
    if (line.length === 0) continue;
    ctx.beginPath();
    const first = line[0]!;
    ctx.moveTo(...boardToCanvas(first[0], first[1]));
    for (const [u, v] of line) ctx.lineTo(...boardToCanvas(u, v));
    ctx.stroke();
  }

  // stylus cursor with the rendered-force arrow (the visual stand-in
  // for the force the physical device would exert on the hand)
  const [cx, cy] = boardToCanvas(pointerBoard[0], pointerBoard[1]);
  ctx.strokeStyle = penDown ? "#ffd166" : "#8fb7a3";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(cx, cy, 10, 0, 2 * Math.PI);
  ctx.stroke();

  if (store.snapshot !== null) {
    const [au, av] = forceArrow(store.snapshot.f_h);
    const scale = 12; // px per newton
    const [tx, ty] = [cx + au * scale, cy - av * scale];
    ctx.strokeStyle = "#ff6b6b";
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(tx, ty);
    ctx.stroke();
  }
}

function setGauge(prefix: string, force: Vec3, limit: number,
                  saturated: boolean): void {
  const view = forceGauge(force, limit);
  const bar = el<HTMLDivElement>(`${prefix}-bar`);
  bar.style.width = `${(view.fraction * 100).toFixed(1)}%`;
  bar.classList.toggle("over", view.over);
  el(`${prefix}-value`).textContent = `${view.value.toFixed(2)} N`;
  const marker = el(`${prefix}-marker`);
  marker.style.left = `${(100 / GAUGE_SPAN_FACTOR).toFixed(1)}%`;
  marker.classList.toggle("hot", saturated);
}

function text(id: string, value: string): void {
  el(id).textContent = value;
}

function render(now: number): void {
  drawBoard();

  text("conn-badge", store.connection);
  el("conn-badge").dataset.state = store.connection;
  text("role-badge", store.role ?? "-");
  el("banner-offline").hidden = store.connection === "open";
  el("banner-stale").hidden = !store.isStale(now);
  el("banner-chalk").hidden = !store.chalkBroken;

  const sc = store.scenario;
  if (sc !== null) {
    text("scenario-label", sc.label);
    text("render-mode", sc.render_mode);
    text("saturation-enabled", sc.saturation_enabled ? "on" : "off");
    text("force-threshold", `${sc.force_threshold.toFixed(1)} N`);
  }
  text("session-state", store.running ? "running" : "stopped");

  const snap = store.snapshot;
  const limit = sc?.force_threshold ?? 0;
  const saturated = snap !== null && snap.saturation.some((b) => b);
  setGauge("fe", snap?.f_e ?? [0, 0, 0], limit, saturated);
  setGauge("fh", snap?.f_h ?? [0, 0, 0], limit, saturated);
  const badge = snap !== null
    ? contactBadge(snap.contact_state)
    : { label: "-", tone: "idle" as const };
  text("contact-badge", badge.label);
  el("contact-badge").dataset.tone = badge.tone;

  const m = store.metrics;
  text("metric-md", m?.mean_difference?.toFixed(2) ?? "-");
  text("metric-peak", m?.peak_difference?.toFixed(2) ?? "-");
  text("last-error",
       store.lastError !== null
         ? `${store.lastError.code}: ${store.lastError.message}` : "");

  const switchable = store.canSwitchScenario();
  scenarioSelect.disabled = !switchable;
  applyButton.disabled = !switchable;
  buttons.start.disabled = store.connection !== "open" || store.running;
  buttons.stop.disabled = !store.running;
  depthSlider.disabled = !store.canSendInput();

  requestAnimationFrame(render);
}

connect();
requestAnimationFrame(render);
