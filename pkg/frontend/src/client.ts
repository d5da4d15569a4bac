/** Gateway WebSocket client with reconnection and edit reconciliation.
 *
 * The socket is injected as a factory so tests can use `ws` in Node or a
 * scripted fake; the browser entry passes the native WebSocket.
 */

import {
  ClientMessage,
  FactorName,
  HelloFrame,
  PoseArray,
  ServerFrame,
  StateFrame,
  parseServerFrame,
} from "./protocol.js";
import { SpiderChartModel } from "./spider.js";

/** The slice of the WebSocket API the client actually uses. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  // parameters are loose so both the DOM WebSocket and the `ws` package
  // satisfy the shape structurally
  onopen: ((...args: any[]) => void) | null;
  onclose: ((...args: any[]) => void) | null;
  onmessage: ((event: any) => void) | null;
}

export type SocketFactory = () => SocketLike;

export interface ClientEvents {
  onHello?: (hello: HelloFrame) => void;
  onState?: (state: StateFrame) => void;
  onConnectionChange?: (connected: boolean) => void;
  onProtocolError?: (reason: string) => void;
}

const RECONNECT_DELAY_MS = 1000;

export class CockpitClient {
  readonly chart = new SpiderChartModel({
    speed: 50,
    depth_assist: 50,
    turnability: 50,
    safety: 50,
    responsiveness: 50,
  });

  private socket: SocketLike | null = null;
  private connected = false;
  private closed = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  trialPhase = "between_trials";

  constructor(
    private factory: SocketFactory,
    private events: ClientEvents = {},
  ) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    const socket = this.factory();
    this.socket = socket;
    socket.onopen = () => {
      this.connected = true;
      this.events.onConnectionChange?.(true);
      this.sendRaw({ type: "hello" });
    };
    socket.onmessage = (event) => {
      if (typeof event.data === "string") this.handleFrame(event.data);
      else this.handleFrame(String(event.data));
    };
    socket.onclose = () => {
      const wasConnected = this.connected;
      this.connected = false;
      this.socket = null;
      if (wasConnected) this.events.onConnectionChange?.(false);
      if (!this.closed) {
        this.reconnectTimer = setTimeout(() => this.open(), RECONNECT_DELAY_MS);
      }
    };
  }

  close(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.socket?.close();
  }

  get isConnected(): boolean {
    return this.connected;
  }

  private sendRaw(msg: ClientMessage): void {
    this.socket?.send(JSON.stringify(msg));
  }

  private handleFrame(raw: string): void {
    const frame = parseServerFrame(raw);
    if (frame === null) {
      this.events.onProtocolError?.("unparseable frame");
      return;
    }
    this.dispatch(frame);
  }

  private dispatch(frame: ServerFrame): void {
    switch (frame.type) {
      case "hello":
        this.trialPhase = frame.trial_phase;
        this.chart.reconcileState(frame.factors, frame.trial_phase);
        this.events.onHello?.(frame);
        break;
      case "state":
        this.trialPhase = frame.trial_phase;
        this.chart.reconcileState(frame.factors, frame.trial_phase);
        this.events.onState?.(frame);
        break;
      case "ack":
        if (frame.what === "edit_factor") this.chart.reconcileAck(frame.factors);
        break;
      case "rejected":
        this.chart.reconcileReject(frame.reason);
        break;
      case "error":
        this.events.onProtocolError?.(frame.reason);
        break;
    }
  }

  /** One +/- step on the spider chart; no-op unless editing is enabled. */
  editFactor(factor: FactorName, direction: "+" | "-"): boolean {
    const msg = this.chart.edit(factor, direction);
    if (msg === null) return false;
    this.sendRaw(msg);
    return true;
  }

  sendInput(pose: PoseArray): void {
    if (!this.connected) return; // input suppressed while disconnected
    this.sendRaw({ type: "input", pose });
  }

  startTrial(): void {
    this.sendRaw({ type: "start_trial" });
  }

  confirmReview(): void {
    this.sendRaw({ type: "end_review" });
  }
}
