// Console entry point: connect screen, canvas scene, pointer steering,
// gripper toggle, realign button.

import { defaultCamera, type Camera } from "./camera.js";
import { dragMove, dragWheel, sessionPose, startDrag, type DragSession } from "./drag.js";
import { controllerInput, type ClientMessage } from "./protocol.js";
import { insideGraspSphere, renderScene } from "./render.js";
import { GatewaySocket } from "./socket.js";
import {
  applyDisconnect,
  applyMessage,
  initialState,
  realignEnabled,
  type ConsoleState,
} from "./state.js";
import { MessageThrottle } from "./throttle.js";

const $ = (id: string) => document.getElementById(id)!;

let state: ConsoleState = initialState();
let camera: Camera = defaultCamera();
let drag: DragSession | null = null;
let orbit: { lastX: number; lastY: number } | null = null;
let triggerHeld = false;

const canvas = $("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;

const socket = new GatewaySocket({
  onMessage: (msg) => {
    state = applyMessage(state, msg);
    syncChrome();
  },
  onDisconnect: (reason) => {
    state = applyDisconnect(state, reason);
    drag = null;
    syncChrome();
  },
  onOpen: () => {
    ($("banner") as HTMLElement).textContent = "";
  },
});

const throttle = new MessageThrottle<ClientMessage>((m) => socket.send(m), 60);

function syncChrome(): void {
  $("connect-screen").style.display = state.phase === "connect" ? "flex" : "none";
  $("hud").style.display = state.phase === "live" ? "block" : "none";
  ($("banner") as HTMLElement).textContent = state.banner ?? "";
  ($("model-name") as HTMLElement).textContent = state.modelName ?? "";
  if (state.leader) {
    ($("gate-label") as HTMLElement).textContent = state.leader.gate_mode;
    ($("grasp-label") as HTMLElement).textContent = state.leader.grasp_phase;
    ($("gripper-label") as HTMLElement).textContent = state.leader.gripper;
  }
  ($("realign") as HTMLButtonElement).disabled = !realignEnabled(state);
}

function resize(): void {
  canvas.width = canvas.clientWidth * devicePixelRatio;
  canvas.height = canvas.clientHeight * devicePixelRatio;
}

function frame(): void {
  throttle.tick();
  renderScene(ctx, camera, state, canvas.width, canvas.height);
  requestAnimationFrame(frame);
}

function canvasXY(ev: PointerEvent | WheelEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  return {
    x: (ev.clientX - rect.left) * devicePixelRatio,
    y: (ev.clientY - rect.top) * devicePixelRatio,
  };
}

canvas.addEventListener("pointerdown", (ev) => {
  const { x, y } = canvasXY(ev);
  const hit = insideGraspSphere(camera, state, x, y, canvas.width, canvas.height);
  if (hit) {
    drag = startDrag(hit.ee, hit.depth, x, y);
    throttle.force(controllerInput(sessionPose(drag), true, triggerHeld));
  } else {
    orbit = { lastX: x, lastY: y };
  }
  canvas.setPointerCapture(ev.pointerId);
});

canvas.addEventListener("pointermove", (ev) => {
  const { x, y } = canvasXY(ev);
  if (drag) {
    drag = dragMove(drag, camera, x, y, canvas.height, ev.shiftKey);
    throttle.offer(controllerInput(sessionPose(drag), true, triggerHeld));
  } else if (orbit) {
    camera = {
      ...camera,
      yaw: camera.yaw - (x - orbit.lastX) * 0.005,
      pitch: Math.min(1.4, Math.max(-0.2, camera.pitch + (y - orbit.lastY) * 0.005)),
    };
    orbit = { lastX: x, lastY: y };
  }
});

canvas.addEventListener("pointerup", () => {
  if (drag) {
    // release is sent exactly once, immediately
    throttle.force(controllerInput(sessionPose(drag), false, triggerHeld));
    drag = null;
  }
  orbit = null;
});

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  if (drag) {
    drag = dragWheel(drag, camera, ev.deltaY);
    throttle.offer(controllerInput(sessionPose(drag), true, triggerHeld));
  } else {
    camera = { ...camera, dist: Math.min(8, Math.max(0.5, camera.dist + ev.deltaY * 0.002)) };
  }
});

($("gripper") as HTMLButtonElement).addEventListener("click", () => {
  triggerHeld = !triggerHeld;
  ($("gripper") as HTMLButtonElement).textContent = triggerHeld ? "release gripper" : "close gripper";
  if (drag) {
    throttle.force(controllerInput(sessionPose(drag), true, triggerHeld));
  }
});

($("realign") as HTMLButtonElement).addEventListener("click", () => {
  socket.send({ type: "realign" });
});

($("connect-form") as HTMLFormElement).addEventListener("submit", (ev) => {
  ev.preventDefault();
  const host = ($("host") as HTMLInputElement).value || "127.0.0.1";
  const port = parseInt(($("port") as HTMLInputElement).value || "10406", 10);
  ($("banner") as HTMLElement).textContent = "connecting...";
  socket.connect(host, port);
});

window.addEventListener("resize", resize);
resize();
syncChrome();
requestAnimationFrame(frame);
