import { describe, expect, it } from "vitest";

import { fovOutlineRect, type FovSpec } from "../src/render.js";

const spec: FovSpec = { fovDeg: [18, 11], sourceFovDeg: [64, 48] };

describe("fovOutlineRect", () => {
  it("matches the config fov ratio", () => {
    const r = fovOutlineRect(640, 480, spec, { dxDeg: 0, dyDeg: 0, rotDeg: 0 });
    expect(r.w / 640).toBeCloseTo(18 / 64, 10);
    expect(r.h / 480).toBeCloseTo(11 / 48, 10);
  });

  it("is centered at zero gaze", () => {
    const r = fovOutlineRect(640, 480, spec, { dxDeg: 0, dyDeg: 0, rotDeg: 0 });
    expect(r.x + r.w / 2).toBeCloseTo(320, 10);
    expect(r.y + r.h / 2).toBeCloseTo(240, 10);
  });

  it("follows gaze, with +dy moving up", () => {
    const r = fovOutlineRect(640, 480, spec, { dxDeg: 8, dyDeg: 6, rotDeg: 0 });
    expect(r.x + r.w / 2).toBeCloseTo(320 + 8 * (640 / 64), 10);
    expect(r.y + r.h / 2).toBeCloseTo(240 - 6 * (480 / 48), 10);
  });
});
