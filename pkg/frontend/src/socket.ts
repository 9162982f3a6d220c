// WebSocket client for the console gateway with a retry banner on failure.

import { parseServerMessage, type ClientMessage, type ServerMessage } from "./protocol.js";

export interface SocketCallbacks {
  onMessage: (msg: ServerMessage) => void;
  onDisconnect: (reason: string) => void;
  onOpen: () => void;
}

export class GatewaySocket {
  private ws: WebSocket | null = null;
  private url = "";
  private closedByUser = false;

  constructor(private readonly callbacks: SocketCallbacks) {}

  connect(host: string, port: number): void {
    this.closedByUser = false;
    this.url = `ws://${host}:${port}/ws`;
    this.open();
  }

  private open(): void {
    try {
      this.ws = new WebSocket(this.url);
    } catch (err) {
      this.callbacks.onDisconnect(`cannot open ${this.url}`);
      return;
    }
    this.ws.onopen = () => this.callbacks.onOpen();
    this.ws.onmessage = (ev: MessageEvent) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg !== null) this.callbacks.onMessage(msg);
    };
    this.ws.onclose = () => {
      if (!this.closedByUser) {
        this.callbacks.onDisconnect("connection lost - check host/port and retry");
      }
    };
    this.ws.onerror = () => {
      // onclose follows; nothing else to do here
    };
  }

  send(msg: ClientMessage): boolean {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN) return false;
    this.ws.send(JSON.stringify(msg));
    return true;
  }

  close(): void {
    this.closedByUser = true;
    this.ws?.close();
  }
}
