// Canvas renderer: both arms as polylines through their server-supplied
// link poses, the grasp sphere at the leader end-effector, and a ground
// grid. All geometry comes from broadcasts; the client computes nothing
// kinematic.

import type { Camera } from "./camera.js";
import { project } from "./camera.js";
import type { ConsoleState } from "./state.js";
import { graspColor, overlayColor } from "./state.js";
import type { PoseMsg, Vec3 } from "./protocol.js";

const GRASP_SPHERE_RADIUS_M = 0.15;

const OVERLAY_FILL: Record<string, string> = {
  green: "rgba(80, 200, 120, 0.45)",
  red: "rgba(220, 70, 70, 0.55)",
};

const GRASP_FILL: Record<string, string> = {
  white: "rgba(235, 235, 235, 0.35)",
  blue: "rgba(90, 140, 255, 0.45)",
  green: "rgba(80, 200, 120, 0.5)",
  red: "rgba(220, 70, 70, 0.6)",
};

function drawArm(
  ctx: CanvasRenderingContext2D,
  cam: Camera,
  poses: PoseMsg[],
  color: string,
  width: number,
  w: number,
  h: number
): void {
  const pts = [[0, 0, 0] as Vec3, ...poses.map((p) => p.position)]
    .map((p) => project(cam, p, w, h));
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.lineCap = "round";
  ctx.lineJoin = "round";
  ctx.beginPath();
  let started = false;
  for (const pt of pts) {
    if (!pt) continue;
    if (!started) {
      ctx.moveTo(pt.x, pt.y);
      started = true;
    } else {
      ctx.lineTo(pt.x, pt.y);
    }
  }
  ctx.stroke();
  for (const pt of pts) {
    if (!pt) continue;
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(pt.x, pt.y, Math.max(2, pt.pxPerMeter * 0.015), 0, 2 * Math.PI);
    ctx.fill();
  }
}

function drawGrid(ctx: CanvasRenderingContext2D, cam: Camera, w: number, h: number): void {
  ctx.strokeStyle = "rgba(255,255,255,0.08)";
  ctx.lineWidth = 1;
  const n = 6;
  const step = 0.25;
  for (let i = -n; i <= n; i++) {
    const a = project(cam, [i * step, -n * step, 0], w, h);
    const b = project(cam, [i * step, n * step, 0], w, h);
    const c = project(cam, [-n * step, i * step, 0], w, h);
    const d = project(cam, [n * step, i * step, 0], w, h);
    if (a && b) {
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.stroke();
    }
    if (c && d) {
      ctx.beginPath();
      ctx.moveTo(c.x, c.y);
      ctx.lineTo(d.x, d.y);
      ctx.stroke();
    }
  }
}

export function renderScene(
  ctx: CanvasRenderingContext2D,
  cam: Camera,
  state: ConsoleState,
  w: number,
  h: number
): void {
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#14161a";
  ctx.fillRect(0, 0, w, h);
  drawGrid(ctx, cam, w, h);

  // follower first (semi-transparent overlay behind the leader)
  if (state.follower) {
    drawArm(ctx, cam, state.follower.link_poses, OVERLAY_FILL[overlayColor(state)], 10, w, h);
  }
  if (state.leader) {
    drawArm(ctx, cam, state.leader.link_poses, "#d7dbe0", 5, w, h);
    const ee = state.leader.link_poses[state.leader.link_poses.length - 1];
    const pt = project(cam, ee.position, w, h);
    if (pt) {
      ctx.fillStyle = GRASP_FILL[graspColor(state)];
      ctx.beginPath();
      ctx.arc(pt.x, pt.y, pt.pxPerMeter * GRASP_SPHERE_RADIUS_M, 0, 2 * Math.PI);
      ctx.fill();
      ctx.strokeStyle = "rgba(255,255,255,0.4)";
      ctx.stroke();
    }
  }
}

/** Hit test: is a pointer position inside the rendered grasp sphere? */
export function insideGraspSphere(
  cam: Camera,
  state: ConsoleState,
  xPx: number,
  yPx: number,
  w: number,
  h: number
): { depth: number; ee: PoseMsg } | null {
  if (!state.leader) return null;
  const ee = state.leader.link_poses[state.leader.link_poses.length - 1];
  const pt = project(cam, ee.position, w, h);
  if (!pt) return null;
  const r = pt.pxPerMeter * GRASP_SPHERE_RADIUS_M;
  const d = Math.hypot(xPx - pt.x, yPx - pt.y);
  return d <= r ? { depth: pt.depth, ee } : null;
}
