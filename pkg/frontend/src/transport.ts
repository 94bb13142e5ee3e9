// WebSocket transport with exponential-backoff reconnect.
// The last committed snapshot lives in the ViewModel, so a dropped socket
// never blanks the views; messages sent while disconnected are dropped and
// the ViewModel re-syncs with get_snapshot on reconnect.

import type { ClientMessage, ServerMessage } from "./protocol";

export interface Transport {
  send(msg: ClientMessage): void;
  readonly connected: boolean;
}

export class SocketTransport implements Transport {
  private ws!: WebSocket;
  private attempts = 0;
  private closed = false;

  onMessage: (msg: ServerMessage) => void = () => {};
  onReconnect: () => void = () => {};
  onStatus: (connected: boolean) => void = () => {};

  constructor(private url: string) {
    this.connect();
  }

  get connected(): boolean {
    return this.ws.readyState === WebSocket.OPEN;
  }

  private connect() {
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => {
      const reconnected = this.attempts > 0;
      this.attempts = 0;
      this.onStatus(true);
      if (reconnected) this.onReconnect();
    };
    this.ws.onmessage = (ev) => {
      let msg: ServerMessage;
      try {
        msg = JSON.parse(ev.data);
      } catch {
        return;
      }
      this.onMessage(msg);
    };
    this.ws.onclose = () => {
      this.onStatus(false);
      if (this.closed) return;
      const delay = Math.min(500 * 2 ** this.attempts, 15000);
      this.attempts += 1;
      setTimeout(() => this.connect(), delay);
    };
  }

  send(msg: ClientMessage) {
    if (this.connected) {
      this.ws.send(JSON.stringify(msg));
    }
  }

  close() {
    this.closed = true;
    this.ws.close();
  }
}
