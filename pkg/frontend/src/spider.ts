/** Editable five-axis radar chart model.
 *
 * Values live on the UI scale: multiples of 5 in [10, 100]. The chart is
 * only editable between trials; edits are applied optimistically and
 * reconciled against the next server snapshot (ack or state frame).
 */

import { FACTOR_NAMES, FactorMap, FactorName } from "./protocol.js";

export const FACTOR_LABELS: Record<FactorName, string> = {
  speed: "Speed",
  depth_assist: "Depth assistance",
  turnability: "Turnability",
  safety: "Safety",
  responsiveness: "Responsiveness",
};

export const STEP = 5;
export const MIN_VALUE = 10;
export const MAX_VALUE = 100;

export interface AxisView {
  name: FactorName;
  label: string;
  value: number;
  /** radius fraction in (0, 1]: value / 100 */
  radius: number;
  canIncrement: boolean;
  canDecrement: boolean;
}

export interface PendingEdit {
  factor: FactorName;
  direction: "+" | "-";
  previous: number;
}

function clampToGrid(value: number): number {
  const snapped = Math.round(value / STEP) * STEP;
  return Math.min(MAX_VALUE, Math.max(MIN_VALUE, snapped));
}

export class SpiderChartModel {
  private values: FactorMap;
  private serverValues: FactorMap;
  private pending: PendingEdit[] = [];
  editingEnabled = false;
  /** reason string from the last rejection, cleared on the next accept */
  lastRejection: string | null = null;

  constructor(initial: FactorMap) {
    this.values = { ...initial };
    this.serverValues = { ...initial };
  }

  get displayed(): FactorMap {
    return { ...this.values };
  }

  /** Number of edits sent but not yet acked or rejected. */
  get pendingCount(): number {
    return this.pending.length;
  }

  axes(): AxisView[] {
    return FACTOR_NAMES.map((name) => ({
      name,
      label: FACTOR_LABELS[name],
      value: this.values[name],
      radius: this.values[name] / 100,
      canIncrement: this.editingEnabled && this.values[name] < MAX_VALUE,
      canDecrement: this.editingEnabled && this.values[name] > MIN_VALUE,
    }));
  }

  setPhase(phase: string): void {
    this.editingEnabled = phase === "between_trials";
  }

  /** Try one +/- step. Returns the message to send, or null if the edit is
   *  not allowed (disabled chart or value already at its limit). */
  edit(factor: FactorName, direction: "+" | "-"):
    | { type: "edit_factor"; factor: FactorName; direction: "+" | "-" }
    | null {
    if (!this.editingEnabled) return null;
    const current = this.values[factor];
    const next = clampToGrid(current + (direction === "+" ? STEP : -STEP));
    if (next === current) return null;
    this.pending.push({ factor, direction, previous: current });
    this.values[factor] = next; // optimistic
    return { type: "edit_factor", factor, direction };
  }

  /** Server acknowledged an edit: adopt its factor snapshot. */
  reconcileAck(factors: FactorMap | undefined): void {
    this.pending.shift();
    this.lastRejection = null;
    if (factors) {
      this.serverValues = { ...factors };
      if (this.pending.length === 0) {
        this.values = { ...factors };
      }
    }
  }

  /** Server rejected the oldest in-flight edit: revert the display. */
  reconcileReject(reason: string): void {
    const edit = this.pending.shift();
    this.lastRejection = reason;
    if (edit) {
      this.values[edit.factor] = edit.previous;
    } else {
      this.values = { ...this.serverValues };
    }
  }

  /** Periodic state frame: authoritative unless edits are still in flight. */
  reconcileState(factors: FactorMap, phase: string): void {
    this.setPhase(phase);
    this.serverValues = { ...factors };
    if (this.pending.length === 0) {
      this.values = { ...factors };
    }
  }
}

/** Vertex positions of the value polygon for an SVG of the given size.
 *  Axis 0 points up; the rest follow clockwise. */
export function radarPolygon(
  axes: AxisView[],
  size: number,
): Array<{ x: number; y: number }> {
  const c = size / 2;
  const rMax = 0.4 * size;
  return axes.map((axis, i) => {
    const angle = -Math.PI / 2 + (2 * Math.PI * i) / axes.length;
    return {
      x: c + rMax * axis.radius * Math.cos(angle),
      y: c + rMax * axis.radius * Math.sin(angle),
    };
  });
}
