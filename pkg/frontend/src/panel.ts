// Parameter panel logic: sliders/selectors produce set_config patches;
// on nack the panel reverts to the last acknowledged config.

import type { ConfigPatchMessage } from "./protocol.js";

export interface ControlSpec {
  /** dotted path into the config document, e.g. "model.rho_um" */
  path: string;
  label: string;
  kind: "number" | "select";
  min?: number;
  max?: number;
  step?: number;
  options?: string[];
}

export const CONTROLS: ControlSpec[] = [
  { path: "array.rows", label: "rows", kind: "number", min: 1, max: 20, step: 1 },
  { path: "array.cols", label: "cols", kind: "number", min: 1, max: 20, step: 1 },
  { path: "array.pitch_um", label: "pitch (um)", kind: "number", min: 100, max: 2000, step: 25 },
  { path: "model.rho_um", label: "rho (um)", kind: "number", min: 50, max: 1000, step: 10 },
  { path: "model.lambda_um", label: "lambda (um)", kind: "number", min: 10, max: 5000, step: 10 },
  { path: "model.eps", label: "eps", kind: "number", min: 0, max: 0.1, step: 0.001 },
  { path: "model.kind", label: "model", kind: "select", options: ["scoreboard", "axonmap"] },
  {
    path: "preprocess.mode",
    label: "preprocessing",
    kind: "select",
    options: ["none", "edges", "contrast"],
  },
];

/** Builds the nested single-field patch for one control change. */
export function patchFor(path: string, value: unknown): ConfigPatchMessage {
  const keys = path.split(".");
  const config: Record<string, unknown> = {};
  let node = config;
  for (const k of keys.slice(0, -1)) {
    const next: Record<string, unknown> = {};
    node[k] = next;
    node = next;
  }
  node[keys[keys.length - 1]] = value;
  return { type: "set_config", config };
}

/** Reads a dotted path out of a config document; undefined if absent. */
export function configValue(
  config: Record<string, unknown> | null,
  path: string,
): unknown {
  let node: unknown = config;
  for (const k of path.split(".")) {
    if (typeof node !== "object" || node === null) return undefined;
    node = (node as Record<string, unknown>)[k];
  }
  return node;
}

/**
 * Tracks one in-flight change per control so a nack can revert the input
 * to the last acknowledged value.
 */
export class PanelModel {
  private pending = new Map<string, unknown>();

  constructor(public acknowledged: Record<string, unknown> | null = null) {}

  change(path: string, value: unknown): ConfigPatchMessage {
    this.pending.set(path, value);
    return patchFor(path, value);
  }

  /** Server acknowledged a config: it becomes the displayed truth. */
  onAck(config: Record<string, unknown>): void {
    this.acknowledged = config;
    this.pending.clear();
  }

  /** Server rejected the change: report the values to restore. */
  onNack(): Map<string, unknown> {
    const reverts = new Map<string, unknown>();
    for (const path of this.pending.keys()) {
      reverts.set(path, configValue(this.acknowledged, path));
    }
    this.pending.clear();
    return reverts;
  }

  displayValue(path: string): unknown {
    return configValue(this.acknowledged, path);
  }
}
