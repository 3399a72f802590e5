// Wire format shared with the stream service.
//
// Binary frames, little-endian: magic "SPVF", msg_type u8
// (1 = input frame, 2 = percept, 3 = mask), frame_id u32, width u16,
// height u16, then width*height bytes of 8-bit luminance.
// Text messages are JSON control traffic.

export const FRAME_MAGIC = "SPVF";
export const HEADER_BYTES = 13;

export const MSG_INPUT = 1;
export const MSG_PERCEPT = 2;
export const MSG_MASK = 3;

export interface FrameMessage {
  msgType: number;
  frameId: number;
  width: number;
  height: number;
  pixels: Uint8Array; // row-major, width*height luminance bytes
}

export interface GazeMessage {
  type: "set_gaze";
  dx_deg: number;
  dy_deg: number;
  rot_deg: number;
}

export interface ConfigPatchMessage {
  type: "set_config";
  config: Record<string, unknown>;
}

export type ControlMessage =
  | GazeMessage
  | ConfigPatchMessage
  | { type: "get_stats" }
  | { type: "select_scene"; scene: string; fps: number };

export interface ServerHello {
  type: "hello";
  session_id: number;
  config: Record<string, unknown>;
  generation: number;
}

export interface ServerAck {
  type: "ack";
  op: string;
  config?: Record<string, unknown>;
  generation?: number;
}

export interface ServerError {
  type: "error";
  code: string;
  detail: string;
}

export interface ServerStats {
  type: "stats";
  frames_in: number;
  frames_out: number;
  dropped: number;
  generation: number;
  fps: number;
  timings_us: Record<string, number>;
}

export type ServerMessage = ServerHello | ServerAck | ServerError | ServerStats;

export function packFrame(msg: FrameMessage): ArrayBuffer {
  const { msgType, frameId, width, height, pixels } = msg;
  if (pixels.length !== width * height) {
    throw new Error(`pixel count ${pixels.length} != ${width}x${height}`);
  }
  const buf = new ArrayBuffer(HEADER_BYTES + pixels.length);
  const view = new DataView(buf);
  for (let i = 0; i < 4; i++) view.setUint8(i, FRAME_MAGIC.charCodeAt(i));
  view.setUint8(4, msgType);
  view.setUint32(5, frameId, true);
  view.setUint16(9, width, true);
  view.setUint16(11, height, true);
  new Uint8Array(buf, HEADER_BYTES).set(pixels);
  return buf;
}

export function unpackFrame(buf: ArrayBuffer): FrameMessage {
  if (buf.byteLength < HEADER_BYTES) {
    throw new Error(`frame message too short (${buf.byteLength} bytes)`);
  }
  const view = new DataView(buf);
  let magic = "";
  for (let i = 0; i < 4; i++) magic += String.fromCharCode(view.getUint8(i));
  if (magic !== FRAME_MAGIC) throw new Error(`bad frame magic "${magic}"`);
  const msgType = view.getUint8(4);
  const frameId = view.getUint32(5, true);
  const width = view.getUint16(9, true);
  const height = view.getUint16(11, true);
  const pixels = new Uint8Array(buf, HEADER_BYTES);
  if (pixels.length !== width * height) {
    throw new Error(`payload length ${pixels.length} != ${width}x${height}`);
  }
  return { msgType, frameId, width, height, pixels };
}

export function parseServerMessage(text: string): ServerMessage {
  const msg = JSON.parse(text);
  if (typeof msg !== "object" || msg === null || typeof msg.type !== "string") {
    throw new Error("malformed server message");
  }
  return msg as ServerMessage;
}
