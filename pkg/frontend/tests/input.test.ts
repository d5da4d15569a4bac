import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { PoseMapper, PoseStreamer } from "../src/input.js";
import { PoseArray } from "../src/protocol.js";

const START: PoseArray = [0.1, 0.2, 0.3, 1, 0, 0, 0];

describe("PoseMapper", () => {
  it("starts at the seeded pose", () => {
    const m = new PoseMapper();
    m.resetTo(START);
    expect(m.pose()).toEqual(START);
  });

  it("normalizes the seeded quaternion", () => {
    const m = new PoseMapper();
    m.resetTo([0, 0, 0, 2, 0, 0, 0]);
    expect(m.pose().slice(3)).toEqual([1, 0, 0, 0]);
  });

  it("maps plain mouse motion to the x/z plane", () => {
    const m = new PoseMapper({ translate: 0.001, depth: 0.002, rotate: 0.005, roll: 0.05 });
    m.resetTo(START);
    m.mouseMove(10, -20); // right and up
    const p = m.pose();
    expect(p[0]).toBeCloseTo(0.1 + 0.01, 12);
    expect(p[2]).toBeCloseTo(0.3 + 0.02, 12); // screen up = world +z
    expect(p[1]).toBeCloseTo(0.2, 12); // depth untouched
  });

  it("maps the wheel to depth", () => {
    const m = new PoseMapper({ translate: 0.001, depth: 0.002, rotate: 0.005, roll: 0.05 });
    m.resetTo(START);
    m.wheel(3);
    expect(m.pose()[1]).toBeCloseTo(0.2 + 0.006, 12);
  });

  it("rotates instead of translating while the modifier is held", () => {
    const m = new PoseMapper({ translate: 0.001, depth: 0.002, rotate: 0.01, roll: 0.05 });
    m.resetTo(START);
    m.setRotating(true);
    m.mouseMove(50, 0); // pure yaw
    const p = m.pose();
    expect(p.slice(0, 3)).toEqual([0.1, 0.2, 0.3]); // no translation
    // yaw about +z by -50 * 0.01 = -0.5 rad
    expect(p[3]).toBeCloseTo(Math.cos(-0.25), 12);
    expect(p[6]).toBeCloseTo(Math.sin(-0.25), 12);
    expect(p[4]).toBeCloseTo(0, 12);
    expect(p[5]).toBeCloseTo(0, 12);
  });

  it("roll keys turn about the wire axis", () => {
    const m = new PoseMapper({ translate: 0.001, depth: 0.002, rotate: 0.01, roll: 0.2 });
    m.resetTo(START);
    m.roll(1);
    const p = m.pose();
    expect(p[3]).toBeCloseTo(Math.cos(0.1), 12);
    expect(p[4]).toBeCloseTo(Math.sin(0.1), 12);
  });

  it("keeps the quaternion unit-length through many edits", () => {
    const m = new PoseMapper();
    m.resetTo(START);
    m.setRotating(true);
    for (let i = 0; i < 500; i++) m.mouseMove(7, -3);
    for (let i = 0; i < 500; i++) m.roll(i % 2 ? 1 : -1);
    const q = m.pose().slice(3);
    const n = Math.hypot(q[0], q[1], q[2], q[3]);
    expect(n).toBeCloseTo(1, 9);
  });
});

describe("PoseStreamer", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("emits the current pose at 60 Hz by default", () => {
    const m = new PoseMapper();
    m.resetTo(START);
    const sent: PoseArray[] = [];
    const s = new PoseStreamer(m, (p) => sent.push(p));
    s.start();
    vi.advanceTimersByTime(1000);
    // >= 30 Hz required by the gateway's latest-wins input slot
    expect(sent.length).toBeGreaterThanOrEqual(30);
    expect(sent[0]).toEqual(START);
    s.stop();
  });

  it("stop() halts emission and start() is idempotent", () => {
    const m = new PoseMapper();
    const sent: PoseArray[] = [];
    const s = new PoseStreamer(m, (p) => sent.push(p), 10);
    s.start();
    s.start();
    vi.advanceTimersByTime(100);
    const n = sent.length;
    expect(n).toBeGreaterThanOrEqual(9);
    expect(n).toBeLessThanOrEqual(11); // double start must not double the rate
    s.stop();
    vi.advanceTimersByTime(100);
    expect(sent.length).toBe(n);
    expect(s.running).toBe(false);
  });
});
