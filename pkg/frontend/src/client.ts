// WebSocket client for the stream service: binary frames out/in,
// JSON control messages, callbacks per server message kind.

import {
  MSG_INPUT,
  MSG_PERCEPT,
  packFrame,
  parseServerMessage,
  unpackFrame,
  type ControlMessage,
  type FrameMessage,
  type ServerMessage,
} from "./protocol.js";

export interface ClientHandlers {
  onMessage: (msg: ServerMessage) => void;
  onPercept: (frame: FrameMessage) => void;
  onClose: () => void;
}

export class StreamClient {
  private ws: WebSocket;

  constructor(url: string, handlers: ClientHandlers, factory?: (url: string) => WebSocket) {
    this.ws = factory ? factory(url) : new WebSocket(url);
    this.ws.binaryType = "arraybuffer";
    this.ws.onmessage = (ev: MessageEvent) => {
      if (ev.data instanceof ArrayBuffer) {
        const frame = unpackFrame(ev.data);
        if (frame.msgType === MSG_PERCEPT) handlers.onPercept(frame);
      } else {
        handlers.onMessage(parseServerMessage(String(ev.data)));
      }
    };
    this.ws.onclose = () => handlers.onClose();
    this.ws.onerror = () => handlers.onClose();
  }

  get open(): boolean {
    return this.ws.readyState === 1; // WebSocket.OPEN
  }

  sendControl(msg: ControlMessage): void {
    this.ws.send(JSON.stringify(msg));
  }

  sendFrame(frameId: number, width: number, height: number, pixels: Uint8Array): void {
    this.ws.send(packFrame({ msgType: MSG_INPUT, frameId, width, height, pixels }));
  }

  close(): void {
    this.ws.close();
  }
}
