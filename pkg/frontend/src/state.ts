// Viewer state: the single source of truth for what the UI shows.
//
// Invariants:
// - the displayed config always equals the last server-acknowledged one;
// - gaze is clamped to +/-30 degrees per axis;
// - gaze changes are coalesced to at most one set_gaze per frame interval;
// - incoming percepts land in a one-slot latest-wins buffer.

import type { FrameMessage, GazeMessage } from "./protocol.js";

export const GAZE_LIMIT_DEG = 30;

export interface Gaze {
  dxDeg: number;
  dyDeg: number;
  rotDeg: number;
}

export type Source = "webcam" | "upload" | "scene";

export function clampGaze(g: Gaze): Gaze {
  const clip = (v: number) =>
    Math.min(GAZE_LIMIT_DEG, Math.max(-GAZE_LIMIT_DEG, v));
  return { dxDeg: clip(g.dxDeg), dyDeg: clip(g.dyDeg), rotDeg: g.rotDeg };
}

export class ViewerState {
  connected = false;
  sessionId: number | null = null;
  /** Mirrors only what the server acknowledged (hello or set_config ack). */
  config: Record<string, unknown> | null = null;
  generation = 0;
  gaze: Gaze = { dxDeg: 0, dyDeg: 0, rotDeg: 0 };
  source: Source = "upload";
  lastError: string | null = null;

  private gazeDirty = false;
  private percept: FrameMessage | null = null;
  private perceptAt = 0; // ms timestamp of last percept arrival
  private nextFrameId = 1;

  onHello(sessionId: number, config: Record<string, unknown>, generation: number): void {
    this.connected = true;
    this.sessionId = sessionId;
    this.config = config;
    this.generation = generation;
  }

  onConfigAck(config: Record<string, unknown>, generation: number): void {
    this.config = config;
    this.generation = generation;
  }

  onDisconnect(): void {
    this.connected = false;
    this.sessionId = null;
  }

  setGaze(g: Gaze): void {
    const clamped = clampGaze(g);
    if (
      clamped.dxDeg !== this.gaze.dxDeg ||
      clamped.dyDeg !== this.gaze.dyDeg ||
      clamped.rotDeg !== this.gaze.rotDeg
    ) {
      this.gaze = clamped;
      this.gazeDirty = true;
    }
  }

  /**
   * Returns the pending set_gaze message at most once per call site's
   * frame tick; null while the gaze is unchanged.
   */
  takeGazeMessage(): GazeMessage | null {
    if (!this.gazeDirty) return null;
    this.gazeDirty = false;
    return {
      type: "set_gaze",
      dx_deg: this.gaze.dxDeg,
      dy_deg: this.gaze.dyDeg,
      rot_deg: this.gaze.rotDeg,
    };
  }

  takeFrameId(): number {
    return this.nextFrameId++;
  }

  onPercept(frame: FrameMessage, nowMs: number): void {
    this.percept = frame; // latest wins; an undrawn older percept is dropped
    this.perceptAt = nowMs;
  }

  latestPercept(): FrameMessage | null {
    return this.percept;
  }

  /** True when the shown percept is older than 500 ms (dim the panel). */
  perceptStale(nowMs: number): boolean {
    return this.percept !== null && nowMs - this.perceptAt > 500;
  }
}
