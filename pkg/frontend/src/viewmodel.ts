// Client-side session state machine.
//
// Responsibilities: debounce slider scrubs (one settled change = one wire
// message), keep at most one mutating request in flight (later changes
// coalesce per message type), hold back parameter changes in on-demand mode
// until an explicit recompute, and measure client-perceived latency from
// send to render completion.

import type { ClientMessage, ServerMessage, Snapshot } from "./protocol";
import type { Transport } from "./transport";

export interface RenderSink {
  render(snapshot: Snapshot): void;
  showError(message: string): void;
}

export interface ViewModelOptions {
  debounceMs?: number;
  now?: () => number;
}

type ParamMessage = Extract<
  ClientMessage,
  { type: "set_frame" | "set_cutoff" | "set_criterion" | "set_measure" }
>;

export class ViewModel {
  snapshot: Snapshot | null = null;
  lastLatencyMs: number | null = null;
  onStateChange: () => void = () => {};

  private autoMode = true;
  private localStale = false;
  private readonly debounceMs: number;
  private readonly now: () => number;
  private debouncing = new Map<string, ParamMessage>();
  private debounceHandle: ReturnType<typeof setTimeout> | null = null;
  private deferred = new Map<string, ParamMessage>(); // on-demand, not yet sent
  private queue: ClientMessage[] = [];
  private inFlight: ClientMessage | null = null;
  private sentAt = 0;

  constructor(
    private transport: Transport,
    private sink: RenderSink,
    opts: ViewModelOptions = {},
  ) {
    this.debounceMs = opts.debounceMs ?? 100;
    this.now = opts.now ?? (() => performance.now());
  }

  get auto(): boolean {
    return this.autoMode;
  }

  /** True when the rendered view lags the requested parameters. */
  get stale(): boolean {
    return this.localStale || (this.snapshot?.stale ?? false);
  }

  /** Slider-style control change; debounced so a scrub settles into one message. */
  changeParam(msg: ParamMessage, opts: { debounce?: boolean } = {}) {
    if (!this.autoMode) {
      this.deferred.set(msg.type, msg);
      this.localStale = true;
      this.onStateChange();
      return;
    }
    if (opts.debounce === false) {
      this.dispatch(msg);
      return;
    }
    this.debouncing.set(msg.type, msg);
    if (this.debounceHandle !== null) clearTimeout(this.debounceHandle);
    this.debounceHandle = setTimeout(() => this.flushDebounce(), this.debounceMs);
  }

  toggleAuto(value: boolean) {
    this.autoMode = value; // optimistic; the next snapshot confirms
    if (value) {
      // entering auto mode: ship anything accumulated while on demand
      for (const msg of this.deferred.values()) this.dispatch(msg);
      this.deferred.clear();
      this.localStale = false;
    }
    this.dispatch({ type: "toggle_auto", value });
    this.onStateChange();
  }

  toggleDelta(value: boolean | null = null) {
    this.dispatch({ type: "toggle_delta", value });
  }

  recompute() {
    for (const msg of this.deferred.values()) this.dispatch(msg);
    this.deferred.clear();
    this.localStale = false;
    this.dispatch({ type: "recompute" });
    this.onStateChange();
  }

  refresh() {
    this.dispatch({ type: "get_snapshot" });
  }

  onMessage(msg: ServerMessage) {
    if (msg.type === "error") {
      this.sink.showError(`${msg.code}: ${msg.message}`);
      this.completeInFlight();
      return;
    }
    this.snapshot = msg;
    this.autoMode = msg.state.auto_recompute;
    this.sink.render(msg);
    if (this.inFlight !== null) {
      this.lastLatencyMs = this.now() - this.sentAt;
    }
    this.completeInFlight();
    this.onStateChange();
  }

  onReconnect() {
    this.refresh();
  }

  private flushDebounce() {
    this.debounceHandle = null;
    const settled = [...this.debouncing.values()];
    this.debouncing.clear();
    for (const msg of settled) this.dispatch(msg);
  }

  private dispatch(msg: ClientMessage) {
    if (this.inFlight !== null) {
      // coalesce: a newer request of the same type replaces the queued one
      this.queue = this.queue.filter((m) => m.type !== msg.type);
      this.queue.push(msg);
      return;
    }
    this.sendNow(msg);
  }

  private sendNow(msg: ClientMessage) {
    this.inFlight = msg;
    this.sentAt = this.now();
    this.transport.send(msg);
  }

  private completeInFlight() {
    this.inFlight = null;
    const next = this.queue.shift();
    if (next !== undefined) this.sendNow(next);
  }
}
