/** Render view-model: turns gateway state into drawable primitives.
 *
 * The scene is an orthographic side view (world x right, world z up) with
 * depth (world y) encoded as line weight, which is plenty for a wire that
 * mostly lives in a plane. Rendering itself is a thin canvas pass in
 * main.ts; everything observable lives here so it can be tested headless.
 */

import { HelloFrame, StateFrame } from "./protocol.js";
import { quatRotate } from "./quat.js";

export interface Viewport {
  width: number;
  height: number;
}

export interface ScreenPoint {
  x: number;
  y: number;
  /** 0 (near) .. 1 (far), from world depth */
  depth: number;
}

export interface SceneFrame {
  wire: ScreenPoint[];
  ring: ScreenPoint[];
  ghostRing: ScreenPoint[]; // operator's commanded pose
  progress: number;
  /** red overlay opacity in [0, 1]; > 0 exactly when the buzz flag is on */
  overlayAlpha: number;
  fatal: boolean;
  trialPhase: string;
  connectionBanner: string | null;
}

interface Projection {
  scale: number;
  offsetX: number;
  offsetY: number;
  depthMin: number;
  depthSpan: number;
}

const RING_SEGMENTS = 32;
const OVERLAY_ALPHA = 0.45;

export class SceneModel {
  private projection: Projection | null = null;
  private course: number[][] = [];
  private ringRadius = 0.05;
  private latest: StateFrame | null = null;
  private banner: string | null = "connecting…";

  configure(hello: HelloFrame, view: Viewport): void {
    this.course = hello.course.points;
    this.ringRadius = hello.ring_radius;
    const xs = this.course.map((p) => p[0]);
    const ys = this.course.map((p) => p[1]);
    const zs = this.course.map((p) => p[2]);
    const pad = 4 * this.ringRadius;
    const minX = Math.min(...xs) - pad;
    const maxX = Math.max(...xs) + pad;
    const minZ = Math.min(...zs) - pad;
    const maxZ = Math.max(...zs) + pad;
    const scale = Math.min(
      view.width / (maxX - minX),
      view.height / (maxZ - minZ),
    );
    this.projection = {
      scale,
      offsetX: (view.width - scale * (maxX + minX)) / 2,
      offsetY: (view.height + scale * (maxZ + minZ)) / 2,
      depthMin: Math.min(...ys) - pad,
      depthSpan: Math.max(...ys) + pad - (Math.min(...ys) - pad) || 1,
    };
    this.banner = null;
  }

  onState(frame: StateFrame): void {
    this.latest = frame;
  }

  onDisconnect(): void {
    this.banner = "connection lost — reconnecting";
  }

  onReconnect(): void {
    this.banner = null;
  }

  get connected(): boolean {
    return this.banner === null;
  }

  project(p: number[]): ScreenPoint {
    const pr = this.projection;
    if (!pr) throw new Error("scene not configured");
    return {
      x: pr.offsetX + pr.scale * p[0],
      y: pr.offsetY - pr.scale * p[2],
      depth: Math.min(1, Math.max(0, (p[1] - pr.depthMin) / pr.depthSpan)),
    };
  }

  private ringPoints(pose: number[]): ScreenPoint[] {
    const q: [number, number, number, number] = [
      pose[3],
      pose[4],
      pose[5],
      pose[6],
    ];
    const pts: ScreenPoint[] = [];
    for (let i = 0; i < RING_SEGMENTS; i++) {
      const a = (2 * Math.PI * i) / RING_SEGMENTS;
      const local: [number, number, number] = [
        this.ringRadius * Math.cos(a),
        this.ringRadius * Math.sin(a),
        0,
      ];
      const w = quatRotate(q, local);
      pts.push(this.project([pose[0] + w[0], pose[1] + w[1], pose[2] + w[2]]));
    }
    return pts;
  }

  /** Build the next frame to draw. Pure given the accumulated state. */
  frame(): SceneFrame {
    const s = this.latest;
    return {
      wire: this.projection ? this.course.map((p) => this.project(p)) : [],
      ring: s && this.projection ? this.ringPoints(s.robot_pose) : [],
      ghostRing: s && this.projection ? this.ringPoints(s.handle_pose) : [],
      progress: s ? s.progress : 0,
      overlayAlpha: s && s.buzz ? OVERLAY_ALPHA : 0,
      fatal: s ? s.fatal : false,
      trialPhase: s ? s.trial_phase : "between_trials",
      connectionBanner: this.banner,
    };
  }
}
