/** Browser entry: wires the client, scene, spider chart, and input mapper
 *  to the DOM. Kept deliberately thin — all logic lives in the models. */

import { CockpitClient } from "./client.js";
import { PoseMapper, PoseStreamer } from "./input.js";
import { FactorName } from "./protocol.js";
import { SceneModel } from "./scene.js";
import { radarPolygon } from "./spider.js";

const GATEWAY_URL =
  new URLSearchParams(location.search).get("gateway") ??
  `ws://${location.host}/ws`;

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const chartSvg = document.getElementById("chart") as unknown as SVGSVGElement;
const chartPanel = document.getElementById("chart-panel") as HTMLElement;
const banner = document.getElementById("banner") as HTMLElement;
const progressBar = document.getElementById("progress") as HTMLElement;
const startButton = document.getElementById("start") as HTMLButtonElement;
const confirmButton = document.getElementById("confirm") as HTMLButtonElement;

const scene = new SceneModel();
const mapper = new PoseMapper();

const client = new CockpitClient(
  () => new WebSocket(GATEWAY_URL),
  {
    onHello: (hello) => {
      scene.configure(hello, { width: canvas.width, height: canvas.height });
      scene.onReconnect();
    },
    onState: (state) => {
      scene.onState(state);
      if (state.trial_phase !== "running") mapper.resetTo(state.robot_pose);
    },
    onConnectionChange: (connected) => {
      if (!connected) {
        scene.onDisconnect();
        streamer.stop();
      } else if (client.trialPhase === "running") {
        streamer.start();
      }
    },
  },
);

const streamer = new PoseStreamer(mapper, (pose) => client.sendInput(pose));

// --- input bindings --------------------------------------------------------

canvas.addEventListener("mousemove", (e) => {
  if (e.buttons & 1) mapper.mouseMove(e.movementX, e.movementY);
});
canvas.addEventListener("wheel", (e) => {
  e.preventDefault();
  mapper.wheel(Math.sign(e.deltaY));
});
window.addEventListener("keydown", (e) => {
  if (e.key === "Shift") mapper.setRotating(true);
  if (e.key === "q") mapper.roll(1);
  if (e.key === "e") mapper.roll(-1);
});
window.addEventListener("keyup", (e) => {
  if (e.key === "Shift") mapper.setRotating(false);
});

startButton.addEventListener("click", () => {
  client.startTrial();
  streamer.start();
});
confirmButton.addEventListener("click", () => client.confirmReview());

// --- spider chart ----------------------------------------------------------

function renderChart(): void {
  const axes = client.chart.axes();
  const size = 260;
  const pts = radarPolygon(axes, size);
  const polygon = pts.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(" ");
  const spokes = radarPolygon(
    axes.map((a) => ({ ...a, radius: 1 })),
    size,
  );
  chartSvg.innerHTML = `
    <polygon points="${spokes.map((p) => `${p.x},${p.y}`).join(" ")}"
             fill="none" stroke="#ccc"/>
    <polygon points="${polygon}" fill="rgba(70,130,180,0.4)" stroke="#4682b4"/>
  `;
  const controls = document.getElementById("chart-controls")!;
  controls.innerHTML = "";
  for (const axis of axes) {
    const row = document.createElement("div");
    row.className = "axis-row";
    row.innerHTML = `<span>${axis.label}</span><b>${axis.value}</b>`;
    for (const dir of ["-", "+"] as const) {
      const btn = document.createElement("button");
      btn.textContent = dir;
      btn.disabled = dir === "+" ? !axis.canIncrement : !axis.canDecrement;
      btn.addEventListener("click", () => {
        client.editFactor(axis.name as FactorName, dir);
        renderChart();
      });
      row.appendChild(btn);
    }
    controls.appendChild(row);
  }
}

// --- render loop -----------------------------------------------------------

function draw(): void {
  const frame = scene.frame();
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  ctx.strokeStyle = "#444";
  ctx.beginPath();
  frame.wire.forEach((p, i) => (i ? ctx.lineTo(p.x, p.y) : ctx.moveTo(p.x, p.y)));
  ctx.stroke();

  for (const [ring, color] of [
    [frame.ghostRing, "rgba(120,120,120,0.5)"],
    [frame.ring, "#b8860b"],
  ] as const) {
    if (!ring.length) continue;
    ctx.strokeStyle = color;
    ctx.beginPath();
    ring.forEach((p, i) => (i ? ctx.lineTo(p.x, p.y) : ctx.moveTo(p.x, p.y)));
    ctx.closePath();
    ctx.stroke();
  }

  if (frame.overlayAlpha > 0) {
    ctx.fillStyle = `rgba(255,0,0,${frame.overlayAlpha})`;
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    if (navigator.getGamepads?.()[0]) {
      // vibration if the browser exposes an actuator
      const pad = navigator.getGamepads()[0] as Gamepad & {
        vibrationActuator?: {
          playEffect(kind: string, opts: object): Promise<unknown>;
        };
      };
      pad.vibrationActuator?.playEffect("dual-rumble", {
        duration: 100,
        strongMagnitude: 0.6,
        weakMagnitude: 0.6,
      });
    }
  }

  banner.textContent = frame.connectionBanner ?? (frame.fatal ? "TRIAL FAILED" : "");
  banner.style.display = banner.textContent ? "block" : "none";
  progressBar.style.width = `${(100 * frame.progress).toFixed(1)}%`;
  chartPanel.style.display = frame.trialPhase === "running" ? "none" : "block";
  if (frame.trialPhase !== "running") renderChart();

  requestAnimationFrame(draw);
}

client.connect();
requestAnimationFrame(draw);
