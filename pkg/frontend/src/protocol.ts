// Gateway message types mirroring docs/protocol.md. The console never
// invents fields: everything rendered comes from these payloads.

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // (w, x, y, z)

export interface PoseMsg {
  position: Vec3;
  orientation: Quat;
}

export interface HelloMsg {
  type: "hello";
  version: number;
  model_name: string;
}

export type GraspColor = "white" | "blue" | "green" | "red";
export type OverlayColor = "green" | "red";

export interface LeaderStateMsg {
  type: "leader_state";
  t_mono_ns: number;
  q: number[];
  link_poses: PoseMsg[];
  grasp_color: GraspColor;
  grasp_phase: string;
  overlay_color: OverlayColor;
  gate_mode: string;
  gripper: "open" | "close";
}

export interface FollowerStateMsg {
  type: "follower_state";
  seq: number;
  t_mono_ns: number;
  q: number[];
  q_dot: number[];
  link_poses: PoseMsg[];
}

export type ServerMessage = HelloMsg | LeaderStateMsg | FollowerStateMsg;

export interface ControllerInputMsg {
  type: "controller_input";
  pose: PoseMsg;
  pressed: boolean;
  trigger: boolean;
}

export interface RealignMsg {
  type: "realign";
}

export type ClientMessage = ControllerInputMsg | RealignMsg;

function isVec(v: unknown, n: number): boolean {
  return Array.isArray(v) && v.length === n && v.every((x) => typeof x === "number");
}

function isPose(p: unknown): p is PoseMsg {
  return (
    typeof p === "object" &&
    p !== null &&
    isVec((p as PoseMsg).position, 3) &&
    isVec((p as PoseMsg).orientation, 4)
  );
}

/** Strict-ish guard: unknown types yield null, malformed known types too. */
export function parseServerMessage(text: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const msg = doc as Record<string, unknown>;
  switch (msg.type) {
    case "hello":
      if (typeof msg.version === "number" && typeof msg.model_name === "string") {
        return msg as unknown as HelloMsg;
      }
      return null;
    case "leader_state": {
      const ok =
        Array.isArray(msg.q) &&
        Array.isArray(msg.link_poses) &&
        (msg.link_poses as unknown[]).every(isPose) &&
        typeof msg.grasp_color === "string" &&
        typeof msg.overlay_color === "string" &&
        typeof msg.gate_mode === "string";
      return ok ? (msg as unknown as LeaderStateMsg) : null;
    }
    case "follower_state": {
      const ok =
        Array.isArray(msg.q) &&
        Array.isArray(msg.link_poses) &&
        (msg.link_poses as unknown[]).every(isPose);
      return ok ? (msg as unknown as FollowerStateMsg) : null;
    }
    default:
      return null;
  }
}

export function controllerInput(
  pose: PoseMsg,
  pressed: boolean,
  trigger: boolean
): ControllerInputMsg {
  return { type: "controller_input", pose, pressed, trigger };
}
