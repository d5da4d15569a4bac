/** Wire types for the gateway WebSocket protocol (version 1). */

export const PROTOCOL_VERSION = 1;

export const FACTOR_NAMES = [
  "speed",
  "depth_assist",
  "turnability",
  "safety",
  "responsiveness",
] as const;

export type FactorName = (typeof FACTOR_NAMES)[number];

/** Factor values on the UI scale: multiples of 5 in [10, 100]. */
export type FactorMap = Record<FactorName, number>;

export type TrialPhase = "between_trials" | "ready" | "running";

/** Pose as [x, y, z, qw, qx, qy, qz]. */
export type PoseArray = [number, number, number, number, number, number, number];

export interface StateFrame {
  type: "state";
  seq: number;
  t: number;
  protocol_version: number;
  robot_pose: PoseArray;
  handle_pose: PoseArray;
  progress: number;
  buzz: boolean;
  fatal: boolean;
  trial_phase: TrialPhase;
  factors: FactorMap;
  alpha: number[];
}

export interface HelloFrame {
  type: "hello";
  protocol_version: number;
  mode: string;
  course: {
    name: string;
    points: number[][];
    wire_radius: number;
    start_s: number;
    end_s: number;
  };
  ring_radius: number;
  tube_radius: number;
  factors: FactorMap;
  trial_phase: TrialPhase;
}

export interface AckFrame {
  type: "ack";
  what: string;
  factors?: FactorMap;
}

export interface RejectedFrame {
  type: "rejected";
  reason: string;
}

export interface ErrorFrame {
  type: "error";
  reason: string;
}

export type ServerFrame =
  | StateFrame
  | HelloFrame
  | AckFrame
  | RejectedFrame
  | ErrorFrame;

export type ClientMessage =
  | { type: "hello" }
  | { type: "input"; pose: PoseArray }
  | { type: "edit_factor"; factor: FactorName; direction: "+" | "-" }
  | { type: "start_trial" }
  | { type: "end_review" };

export function parseServerFrame(raw: string): ServerFrame | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null) return null;
  const type = (msg as { type?: unknown }).type;
  if (
    type === "state" ||
    type === "hello" ||
    type === "ack" ||
    type === "rejected" ||
    type === "error"
  ) {
    return msg as ServerFrame;
  }
  return null;
}

export function isFactorMap(value: unknown): value is FactorMap {
  if (typeof value !== "object" || value === null) return false;
  return FACTOR_NAMES.every((name) => {
    const v = (value as Record<string, unknown>)[name];
    return typeof v === "number" && v >= 10 && v <= 100 && v % 5 === 0;
  });
}
