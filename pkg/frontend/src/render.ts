// Side-by-side drawing: original frame with gaze reticle and FOV outline,
// percept panel scaled without smoothing so phosphenes stay blocky.

import type { FrameMessage } from "./protocol.js";
import type { Gaze } from "./state.js";

export interface FovSpec {
  /** implant field of view, degrees */
  fovDeg: [number, number];
  /** camera frame field of view, degrees */
  sourceFovDeg: [number, number];
}

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

/**
 * Where the implant's FOV sits inside the source panel, in panel pixels.
 * Gaze shifts the outline; rotation is drawn by the caller.
 */
export function fovOutlineRect(
  panelW: number,
  panelH: number,
  spec: FovSpec,
  gaze: Gaze,
): Rect {
  const pxPerDegX = panelW / spec.sourceFovDeg[0];
  const pxPerDegY = panelH / spec.sourceFovDeg[1];
  const w = spec.fovDeg[0] * pxPerDegX;
  const h = spec.fovDeg[1] * pxPerDegY;
  const cx = panelW / 2 + gaze.dxDeg * pxPerDegX;
  const cy = panelH / 2 - gaze.dyDeg * pxPerDegY; // +dy looks up
  return { x: cx - w / 2, y: cy - h / 2, w, h };
}

export function luminanceToImageData(frame: FrameMessage): ImageData {
  const rgba = new Uint8ClampedArray(frame.width * frame.height * 4);
  for (let i = 0; i < frame.pixels.length; i++) {
    const v = frame.pixels[i];
    rgba[4 * i] = v;
    rgba[4 * i + 1] = v;
    rgba[4 * i + 2] = v;
    rgba[4 * i + 3] = 255;
  }
  return new ImageData(rgba, frame.width, frame.height);
}

export function drawOriginal(
  canvas: HTMLCanvasElement,
  source: CanvasImageSource,
  spec: FovSpec,
  gaze: Gaze,
): void {
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(source, 0, 0, canvas.width, canvas.height);

  const rect = fovOutlineRect(canvas.width, canvas.height, spec, gaze);
  ctx.save();
  ctx.translate(rect.x + rect.w / 2, rect.y + rect.h / 2);
  ctx.rotate((-gaze.rotDeg * Math.PI) / 180);
  ctx.strokeStyle = "#4cf";
  ctx.lineWidth = 2;
  ctx.strokeRect(-rect.w / 2, -rect.h / 2, rect.w, rect.h);
  // reticle
  ctx.beginPath();
  ctx.moveTo(-8, 0);
  ctx.lineTo(8, 0);
  ctx.moveTo(0, -8);
  ctx.lineTo(0, 8);
  ctx.stroke();
  ctx.restore();
}

export function drawPercept(
  canvas: HTMLCanvasElement,
  percept: FrameMessage,
  stale: boolean,
  scratch: HTMLCanvasElement,
): void {
  scratch.width = percept.width;
  scratch.height = percept.height;
  scratch.getContext("2d")!.putImageData(luminanceToImageData(percept), 0, 0);

  const ctx = canvas.getContext("2d")!;
  ctx.imageSmoothingEnabled = false; // nearest-neighbor: keep phosphenes blocky
  ctx.fillStyle = "#000";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(scratch, 0, 0, canvas.width, canvas.height);
  if (stale) {
    ctx.fillStyle = "rgba(0, 0, 0, 0.6)";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
  }
}
