// Pointer-to-controller mapping: press inside the rendered grasp sphere,
// drag on the view plane, scroll for depth, hold Shift to rotate instead
// of translate. The server adjudicates hover/engage; the client only
// streams poses plus the pressed flag.

import type { Camera } from "./camera.js";
import { axes, screenDeltaToWorld } from "./camera.js";
import type { PoseMsg, Quat, Vec3 } from "./protocol.js";
import { add, quatFromAxisAngle, quatMultiply, quatNormalize, scale } from "./vec.js";

export interface DragSession {
  position: Vec3;
  orientation: Quat;
  depth: number; // distance from the eye along the view axis at grab time
  lastX: number;
  lastY: number;
}

const ROTATE_RAD_PER_PX = 0.01;
const DEPTH_M_PER_WHEEL = 0.0008;

export function startDrag(
  anchor: PoseMsg,
  depth: number,
  xPx: number,
  yPx: number
): DragSession {
  return {
    position: [...anchor.position] as Vec3,
    orientation: [...anchor.orientation] as Quat,
    depth,
    lastX: xPx,
    lastY: yPx,
  };
}

export function dragMove(
  session: DragSession,
  cam: Camera,
  xPx: number,
  yPx: number,
  viewHeight: number,
  rotate: boolean
): DragSession {
  const dx = xPx - session.lastX;
  const dy = yPx - session.lastY;
  if (rotate) {
    // camera-aligned tumble of the controller orientation
    const { right, up } = axes(cam);
    const spin = quatMultiply(
      quatFromAxisAngle(up, dx * ROTATE_RAD_PER_PX),
      quatFromAxisAngle(right, dy * ROTATE_RAD_PER_PX)
    );
    return {
      ...session,
      orientation: quatNormalize(quatMultiply(spin, session.orientation)),
      lastX: xPx,
      lastY: yPx,
    };
  }
  const move = screenDeltaToWorld(cam, dx, dy, session.depth, viewHeight);
  return { ...session, position: add(session.position, move), lastX: xPx, lastY: yPx };
}

/** Scroll moves the controller along the view axis (depth). */
export function dragWheel(session: DragSession, cam: Camera, deltaY: number): DragSession {
  const { forward } = axes(cam);
  const step = -deltaY * DEPTH_M_PER_WHEEL;
  return {
    ...session,
    position: add(session.position, scale(forward, step)),
    depth: Math.max(0.1, session.depth + step),
  };
}

export function sessionPose(session: DragSession): PoseMsg {
  return { position: session.position, orientation: session.orientation };
}
