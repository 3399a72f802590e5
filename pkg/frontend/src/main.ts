// Application wiring: capture loop, panel, gaze drag, stats readout.

import { grabFrame, mayCapture, openWebcam, DEFAULT_RATE_LIMIT } from "./capture.js";
import { StreamClient } from "./client.js";
import { CONTROLS, PanelModel, configValue } from "./panel.js";
import type { ServerMessage } from "./protocol.js";
import { drawOriginal, drawPercept, type FovSpec } from "./render.js";
import { ViewerState } from "./state.js";

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

function fovSpec(config: Record<string, unknown> | null): FovSpec {
  const grid = configValue(config, "grid.fov_deg") as [number, number] | undefined;
  const src = configValue(config, "encoder.source_fov_deg") as
    | [number, number]
    | undefined;
  return { fovDeg: grid ?? [18, 11], sourceFovDeg: src ?? [64, 48] };
}

function main(): void {
  const state = new ViewerState();
  const panel = new PanelModel();
  const original = $<HTMLCanvasElement>("original");
  const percept = $<HTMLCanvasElement>("percept");
  const banner = $<HTMLDivElement>("banner");
  const stats = $<HTMLDivElement>("stats");
  const video = $<HTMLVideoElement>("camera");
  const upload = $<HTMLInputElement>("upload");
  const work = document.createElement("canvas");
  const scratch = document.createElement("canvas");
  let uploaded: HTMLImageElement | null = null;
  const sendTimes: number[] = [];

  const url = `ws://${location.hostname}:${
    new URLSearchParams(location.search).get("port") ?? "8000"
  }/ws`;

  const client = new StreamClient(url, {
    onMessage: (msg: ServerMessage) => {
      if (msg.type === "hello") {
        state.onHello(msg.session_id, msg.config, msg.generation);
        panel.onAck(msg.config);
        buildPanel();
        banner.textContent = "";
      } else if (msg.type === "ack" && msg.op === "set_config" && msg.config) {
        state.onConfigAck(msg.config, msg.generation ?? state.generation);
        panel.onAck(msg.config);
        refreshPanel();
      } else if (msg.type === "error") {
        banner.textContent = `${msg.code}: ${msg.detail}`;
        if (msg.code === "bad_config") {
          for (const [path, value] of panel.onNack()) setInput(path, value);
        }
      } else if (msg.type === "stats") {
        stats.textContent =
          `server ${msg.fps.toFixed(1)} fps, dropped ${msg.dropped}, ` +
          `generation ${msg.generation}`;
      }
    },
    onPercept: (frame) => state.onPercept(frame, performance.now()),
    onClose: () => {
      state.onDisconnect();
      banner.textContent = "disconnected";
      controlsDiv.querySelectorAll("input, select").forEach((el) => {
        (el as HTMLInputElement).disabled = true;
      });
    },
  });

  const controlsDiv = $<HTMLDivElement>("controls");

  function setInput(path: string, value: unknown): void {
    const el = controlsDiv.querySelector<HTMLInputElement>(
      `[data-path="${path}"]`,
    );
    if (el && value !== undefined) el.value = String(value);
  }

  function refreshPanel(): void {
    for (const spec of CONTROLS) setInput(spec.path, panel.displayValue(spec.path));
  }

  function buildPanel(): void {
    controlsDiv.textContent = "";
    for (const spec of CONTROLS) {
      const label = document.createElement("label");
      label.textContent = spec.label + " ";
      let input: HTMLInputElement | HTMLSelectElement;
      if (spec.kind === "select") {
        input = document.createElement("select");
        for (const opt of spec.options ?? []) {
          const o = document.createElement("option");
          o.value = o.textContent = opt;
          input.appendChild(o);
        }
      } else {
        input = document.createElement("input");
        input.type = "number";
        if (spec.min !== undefined) input.min = String(spec.min);
        if (spec.max !== undefined) input.max = String(spec.max);
        if (spec.step !== undefined) input.step = String(spec.step);
      }
      input.dataset.path = spec.path;
      input.addEventListener("change", () => {
        const value =
          spec.kind === "number" ? Number(input.value) : input.value;
        client.sendControl(panel.change(spec.path, value));
      });
      label.appendChild(input);
      controlsDiv.appendChild(label);
    }
    refreshPanel();
  }

  // gaze: drag on the original panel, arrow keys as fallback
  let dragging = false;
  original.addEventListener("pointerdown", () => (dragging = true));
  window.addEventListener("pointerup", () => (dragging = false));
  original.addEventListener("pointermove", (ev) => {
    if (!dragging || !state.config) return;
    const spec = fovSpec(state.config);
    const rect = original.getBoundingClientRect();
    const dx =
      ((ev.clientX - rect.left) / rect.width - 0.5) * spec.sourceFovDeg[0];
    const dy =
      (0.5 - (ev.clientY - rect.top) / rect.height) * spec.sourceFovDeg[1];
    state.setGaze({ dxDeg: dx, dyDeg: dy, rotDeg: state.gaze.rotDeg });
  });
  window.addEventListener("keydown", (ev) => {
    const step = 1;
    const g = { ...state.gaze };
    if (ev.key === "ArrowLeft") g.dxDeg -= step;
    else if (ev.key === "ArrowRight") g.dxDeg += step;
    else if (ev.key === "ArrowUp") g.dyDeg += step;
    else if (ev.key === "ArrowDown") g.dyDeg -= step;
    else return;
    state.setGaze(g);
  });

  $<HTMLButtonElement>("use-webcam").addEventListener("click", async () => {
    if (await openWebcam(video)) {
      state.source = "webcam";
      banner.textContent = "";
    } else {
      banner.textContent = "camera unavailable — upload an image instead";
      state.source = "upload";
    }
  });
  upload.addEventListener("change", () => {
    const file = upload.files?.[0];
    if (!file) return;
    const img = new Image();
    img.onload = () => {
      uploaded = img;
      state.source = "upload";
    };
    img.src = URL.createObjectURL(file);
  });
  $<HTMLSelectElement>("scene").addEventListener("change", (ev) => {
    const scene = (ev.target as HTMLSelectElement).value;
    state.source = scene === "off" ? "upload" : "scene";
    client.sendControl({ type: "select_scene", scene, fps: 15 });
  });

  setInterval(() => {
    if (client.open) client.sendControl({ type: "get_stats" });
  }, 1000);

  function tick(): void {
    requestAnimationFrame(tick);
    const now = performance.now();
    const source: CanvasImageSource | null =
      state.source === "webcam" && video.readyState >= 2
        ? video
        : state.source === "upload"
          ? uploaded
          : null;

    if (source && client.open && mayCapture(sendTimes, now, DEFAULT_RATE_LIMIT)) {
      // at most one set_gaze per outgoing frame interval
      const gazeMsg = state.takeGazeMessage();
      if (gazeMsg) client.sendControl(gazeMsg);
      const pixels = grabFrame(source, work);
      client.sendFrame(state.takeFrameId(), work.width, work.height, pixels);
      sendTimes.push(now);
      if (sendTimes.length > 120) sendTimes.splice(0, 60);
    }

    if (source) drawOriginal(original, source, fovSpec(state.config), state.gaze);
    const latest = state.latestPercept();
    if (latest) drawPercept(percept, latest, state.perceptStale(now), scratch);
  }
  tick();
}

main();
