import { describe, expect, it } from "vitest";

import { MSG_PERCEPT, type FrameMessage } from "../src/protocol.js";
import { clampGaze, GAZE_LIMIT_DEG, ViewerState } from "../src/state.js";

function percept(frameId: number): FrameMessage {
  return { msgType: MSG_PERCEPT, frameId, width: 2, height: 1, pixels: new Uint8Array(2) };
}

describe("gaze", () => {
  it("clamps to +/-30 degrees per axis", () => {
    const g = clampGaze({ dxDeg: 99, dyDeg: -45, rotDeg: 120 });
    expect(g.dxDeg).toBe(GAZE_LIMIT_DEG);
    expect(g.dyDeg).toBe(-GAZE_LIMIT_DEG);
    expect(g.rotDeg).toBe(120); // rotation is not an axis offset
  });

  it("coalesces to at most one set_gaze per frame interval", () => {
    const state = new ViewerState();
    state.setGaze({ dxDeg: 1, dyDeg: 0, rotDeg: 0 });
    state.setGaze({ dxDeg: 2, dyDeg: 0, rotDeg: 0 });
    state.setGaze({ dxDeg: 3, dyDeg: -1, rotDeg: 0 });
    const msg = state.takeGazeMessage();
    expect(msg).toEqual({ type: "set_gaze", dx_deg: 3, dy_deg: -1, rot_deg: 0 });
    expect(state.takeGazeMessage()).toBeNull(); // nothing new since
  });

  it("does not resend an unchanged gaze", () => {
    const state = new ViewerState();
    state.setGaze({ dxDeg: 1, dyDeg: 2, rotDeg: 3 });
    state.takeGazeMessage();
    state.setGaze({ dxDeg: 1, dyDeg: 2, rotDeg: 3 });
    expect(state.takeGazeMessage()).toBeNull();
  });
});

describe("config mirror", () => {
  it("only reflects server-acknowledged configs", () => {
    const state = new ViewerState();
    expect(state.config).toBeNull();
    state.onHello(7, { schema_version: 1 }, 0);
    expect(state.sessionId).toBe(7);
    expect(state.config).toEqual({ schema_version: 1 });
    state.onConfigAck({ schema_version: 1, model: { rho_um: 150 } }, 1);
    expect(state.generation).toBe(1);
    expect(state.config).toEqual({ schema_version: 1, model: { rho_um: 150 } });
  });
});

describe("percept buffer", () => {
  it("keeps only the latest percept", () => {
    const state = new ViewerState();
    state.onPercept(percept(1), 0);
    state.onPercept(percept(2), 5);
    expect(state.latestPercept()?.frameId).toBe(2);
  });

  it("marks percepts stale after 500 ms", () => {
    const state = new ViewerState();
    state.onPercept(percept(1), 1000);
    expect(state.perceptStale(1400)).toBe(false);
    expect(state.perceptStale(1600)).toBe(true);
  });
});

describe("frame ids", () => {
  it("strictly increase", () => {
    const state = new ViewerState();
    const ids = [state.takeFrameId(), state.takeFrameId(), state.takeFrameId()];
    expect(ids[0]).toBeLessThan(ids[1]);
    expect(ids[1]).toBeLessThan(ids[2]);
  });
});
