/** End-to-end conformance against a live gateway process.
 *
 * Spawns the Python service with realtime=false so the simulation advances
 * only through the /advance endpoint, keeping every exchange deterministic.
 * Covers the three cockpit-facing guarantees: rejected edits revert the
 * display, accepted edits apply to the next trial, and the buzz flag shows
 * the red overlay on the very next rendered frame.
 */

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { CockpitClient } from "../src/client.js";
import { HelloFrame, PoseArray, StateFrame } from "../src/protocol.js";
import { SceneModel } from "../src/scene.js";

const PORT = 8700 + Math.floor(Math.random() * 200);
const BASE = `http://127.0.0.1:${PORT}`;

const SERVER_SCRIPT = `
import uvicorn
from wireloop.gateway import build_app
app = build_app(realtime=False)
uvicorn.run(app, host="127.0.0.1", port=${PORT}, log_level="error")
`;

let server: ChildProcess;

async function waitUntil(
  cond: () => boolean,
  what: string,
  timeoutMs = 30_000,
): Promise<void> {
  const t0 = Date.now();
  while (!cond()) {
    if (Date.now() - t0 > timeoutMs) throw new Error(`timed out waiting: ${what}`);
    await new Promise((r) => setTimeout(r, 10));
  }
}

async function advance(ticks = 1): Promise<void> {
  const res = await fetch(`${BASE}/advance?ticks=${ticks}`, { method: "POST" });
  expect(res.ok).toBe(true);
}

async function waitForPhase(phase: string, timeoutMs = 10_000): Promise<void> {
  const t0 = Date.now();
  for (;;) {
    const h = await (await fetch(`${BASE}/healthz`)).json();
    if (h.trial_phase === phase) return;
    if (Date.now() - t0 > timeoutMs) {
      throw new Error(`gateway never reached phase ${phase}`);
    }
    await new Promise((r) => setTimeout(r, 50));
  }
}

interface Session {
  client: CockpitClient;
  hellos: HelloFrame[];
  states: StateFrame[];
  scene: SceneModel;
}

function connect(): Session {
  const hellos: HelloFrame[] = [];
  const states: StateFrame[] = [];
  const scene = new SceneModel();
  const client = new CockpitClient(
    () => new WebSocket(`ws://127.0.0.1:${PORT}/ws`) as never,
    {
      onHello: (h) => {
        scene.configure(h, { width: 720, height: 480 });
        hellos.push(h);
      },
      onState: (s) => {
        scene.onState(s);
        states.push(s);
      },
    },
  );
  client.connect();
  return { client, hellos, states, scene };
}

async function greeted(): Promise<Session> {
  const s = connect();
  await waitUntil(() => s.hellos.length > 0, "hello frame");
  return s;
}

beforeAll(async () => {
  server = spawn("python3", ["-c", SERVER_SCRIPT], { stdio: "inherit" });
  const t0 = Date.now();
  for (;;) {
    try {
      const res = await fetch(`${BASE}/healthz`);
      if (res.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() - t0 > 60_000) throw new Error("gateway did not come up");
    await new Promise((r) => setTimeout(r, 200));
  }
}, 90_000);

afterAll(() => {
  server?.kill();
});

describe("gateway conformance", () => {
  it(
    "rejects edits during a running trial and the display reverts",
    async () => {
      const a = await greeted();
      const b = await greeted();
      expect(b.client.chart.editingEnabled).toBe(true);

      a.client.startTrial();
      // the manual-mode gateway does not broadcast, so confirm via health
      await waitForPhase("running");

      // b still believes the session is between trials: its edit goes out
      // optimistically and must come back rejected
      expect(b.client.editFactor("speed", "+")).toBe(true);
      expect(b.client.chart.displayed.speed).toBe(55);
      await waitUntil(
        () => b.client.chart.lastRejection !== null,
        "edit rejection",
      );
      expect(b.client.chart.lastRejection).toBe("trial_running");
      expect(b.client.chart.displayed.speed).toBe(50);

      // closing every client aborts the running trial
      a.client.close();
      b.client.close();
      await waitForPhase("between_trials");
    },
    60_000,
  );

  it(
    "applies accepted edits to the next trial",
    async () => {
      const s = await greeted();
      expect(s.client.editFactor("speed", "+")).toBe(true);
      await waitUntil(
        () => s.client.chart.pendingCount === 0,
        "edit ack",
      );
      expect(s.client.chart.displayed.speed).toBe(55);

      s.client.startTrial();
      // an input message makes the manual-mode gateway echo a state frame
      s.client.sendInput(robotPoseOf(s));
      await waitUntil(() => s.states.length > 0, "state echo");
      const state = s.states[s.states.length - 1];
      expect(state.trial_phase).toBe("running");
      expect(state.factors.speed).toBe(55);
      s.client.close();
    },
    60_000,
  );

  it(
    "shows the red overlay on the frame the buzz flag arrives",
    async () => {
      const s = await greeted();
      s.client.startTrial();
      s.client.sendInput(robotPoseOf(s));
      await waitUntil(() => s.states.length > 0, "first state echo");

      // drive the commanded pose well below the wire so the ring is dragged
      // into contact as the admittance loop follows
      const start = s.states[s.states.length - 1].robot_pose;
      const target = [...start] as PoseArray;
      target[2] -= 0.2;
      // make the drag target the latest-wins input before the first tick
      s.client.sendInput(target);
      await waitUntil(() => s.states.length > 1, "target echo");

      let sawBuzz = false;
      for (let i = 0; i < 200 && !sawBuzz; i++) {
        await advance(1);
        const n = s.states.length;
        s.client.sendInput(target);
        await waitUntil(() => s.states.length > n, "state echo");
        const state = s.states[s.states.length - 1];
        if (state.buzz) {
          sawBuzz = true;
          // same frame: the scene the renderer would draw right now
          expect(s.scene.frame().overlayAlpha).toBeGreaterThan(0);
        } else {
          expect(s.scene.frame().overlayAlpha).toBe(0);
        }
      }
      expect(sawBuzz).toBe(true);
      s.client.close();
    },
    120_000,
  );
});

function robotPoseOf(s: Session): PoseArray {
  const state = s.states[s.states.length - 1];
  if (state) return state.robot_pose;
  // before any state frame: derive the start pose via a probe is not
  // possible, so send identity at the course start; the server replies
  // with a state echo either way
  return [0, 0, 0, 1, 0, 0, 0];
}
