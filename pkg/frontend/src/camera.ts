// Orbit camera around the shared robot base frame, plus the screen
// projection the renderer and the drag mapper both use.

import type { Vec3 } from "./protocol.js";
import { add, cross, normalize, scale, sub } from "./vec.js";

export interface Camera {
  yaw: number;    // rad, around world z
  pitch: number;  // rad, 0 = horizontal
  dist: number;   // m
  target: Vec3;   // world point the camera looks at
}

export function defaultCamera(): Camera {
  return { yaw: Math.PI / 4, pitch: 0.5, dist: 2.2, target: [0, 0, 0.35] };
}

export function eye(cam: Camera): Vec3 {
  const cp = Math.cos(cam.pitch);
  return add(cam.target, [
    cam.dist * cp * Math.cos(cam.yaw),
    cam.dist * cp * Math.sin(cam.yaw),
    cam.dist * Math.sin(cam.pitch),
  ]);
}

export interface CameraAxes {
  right: Vec3;
  up: Vec3;
  forward: Vec3; // from eye toward target
}

export function axes(cam: Camera): CameraAxes {
  const forward = normalize(sub(cam.target, eye(cam)));
  const right = normalize(cross(forward, [0, 0, 1]));
  const up = cross(right, forward);
  return { right, up, forward };
}

export interface Projected {
  x: number;
  y: number;
  depth: number;      // distance along the view axis, m
  pxPerMeter: number; // local scale for sizing markers
}

export function project(
  cam: Camera,
  p: Vec3,
  width: number,
  height: number
): Projected | null {
  const { right, up, forward } = axes(cam);
  const rel = sub(p, eye(cam));
  const depth = rel[0] * forward[0] + rel[1] * forward[1] + rel[2] * forward[2];
  if (depth <= 0.05) return null; // behind the camera
  const fov = 0.9;
  const f = height / (2 * Math.tan(fov / 2));
  const sx = (rel[0] * right[0] + rel[1] * right[1] + rel[2] * right[2]) / depth;
  const sy = (rel[0] * up[0] + rel[1] * up[1] + rel[2] * up[2]) / depth;
  return {
    x: width / 2 + sx * f,
    y: height / 2 - sy * f,
    depth,
    pxPerMeter: f / depth,
  };
}

/** Screen-pixel delta to a world-space move on the view plane at `depth`. */
export function screenDeltaToWorld(
  cam: Camera,
  dxPx: number,
  dyPx: number,
  depth: number,
  height: number
): Vec3 {
  const { right, up } = axes(cam);
  const fov = 0.9;
  const f = height / (2 * Math.tan(fov / 2));
  const mPerPx = depth / f;
  return add(scale(right, dxPx * mPerPx), scale(up, -dyPx * mPerPx));
}
