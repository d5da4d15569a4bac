/** Mouse + keyboard to 6-DoF pose mapping.
 *
 * Mouse moves the handle in the camera plane (world x up the wire, z
 * vertical), the wheel pushes along depth (world y), and dragging with a
 * modifier rotates instead: horizontal = yaw, vertical = pitch, Q/E roll.
 * The mapper is device-agnostic: feed it events, sample poses on frames.
 */

import { PoseArray } from "./protocol.js";
import {
  Quat,
  QUAT_IDENTITY,
  quatFromAxisAngle,
  quatMultiply,
  quatNormalize,
} from "./quat.js";

export interface InputGains {
  /** metres per CSS pixel of mouse travel */
  translate: number;
  /** metres per wheel line */
  depth: number;
  /** radians per CSS pixel while rotating */
  rotate: number;
  /** radians per roll key press */
  roll: number;
}

export const DEFAULT_GAINS: InputGains = {
  translate: 0.0005,
  depth: 0.002,
  rotate: 0.005,
  roll: 0.05,
};

export class PoseMapper {
  private position: [number, number, number] = [0, 0, 0];
  private orientation: Quat = [...QUAT_IDENTITY];
  private rotating = false;

  constructor(private gains: InputGains = DEFAULT_GAINS) {}

  /** Seed from the gateway's start pose so motion is relative. */
  resetTo(pose: PoseArray): void {
    this.position = [pose[0], pose[1], pose[2]];
    this.orientation = quatNormalize([pose[3], pose[4], pose[5], pose[6]]);
  }

  setRotating(on: boolean): void {
    this.rotating = on;
  }

  /** Relative mouse motion in CSS pixels (+dx right, +dy down). */
  mouseMove(dx: number, dy: number): void {
    if (this.rotating) {
      const yaw = quatFromAxisAngle([0, 0, 1], -dx * this.gains.rotate);
      const pitch = quatFromAxisAngle([0, 1, 0], -dy * this.gains.rotate);
      this.orientation = quatNormalize(
        quatMultiply(quatMultiply(yaw, pitch), this.orientation),
      );
    } else {
      this.position[0] += dx * this.gains.translate;
      this.position[2] -= dy * this.gains.translate; // screen y is down
    }
  }

  /** Wheel steps: positive pushes away from the viewer (+y depth). */
  wheel(lines: number): void {
    this.position[1] += lines * this.gains.depth;
  }

  roll(direction: 1 | -1): void {
    const dq = quatFromAxisAngle([1, 0, 0], direction * this.gains.roll);
    this.orientation = quatNormalize(quatMultiply(dq, this.orientation));
  }

  pose(): PoseArray {
    const q = this.orientation;
    return [
      this.position[0],
      this.position[1],
      this.position[2],
      q[0],
      q[1],
      q[2],
      q[3],
    ];
  }
}

/** Emits the current pose at a fixed cadence while enabled.
 *
 * `schedule` abstracts setInterval/requestAnimationFrame so tests can drive
 * it manually; the default emits at 60 Hz, comfortably above the 30 Hz the
 * gateway needs to keep the latest-wins input slot warm.
 */
export class PoseStreamer {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private mapper: PoseMapper,
    private send: (pose: PoseArray) => void,
    private intervalMs = 1000 / 60,
  ) {}

  get running(): boolean {
    return this.timer !== null;
  }

  start(): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => this.send(this.mapper.pose()), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
