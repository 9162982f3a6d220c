// Console state: a pure reducer over server messages and socket events.
//
// Two invariants hold by construction and are checked in tests:
//  * the connect screen persists until the first follower_state arrives;
//  * every color shown equals the matching field of the last broadcast —
//    the client never synthesizes grasp or overlay state.

import type {
  FollowerStateMsg,
  GraspColor,
  LeaderStateMsg,
  OverlayColor,
  ServerMessage,
} from "./protocol.js";

export type Phase = "connect" | "live";

export interface ConsoleState {
  phase: Phase;
  modelName: string | null;
  leader: LeaderStateMsg | null;
  follower: FollowerStateMsg | null;
  banner: string | null; // connection trouble, shown over everything
}

export function initialState(): ConsoleState {
  return { phase: "connect", modelName: null, leader: null, follower: null, banner: null };
}

export function applyMessage(state: ConsoleState, msg: ServerMessage): ConsoleState {
  switch (msg.type) {
    case "hello":
      return { ...state, modelName: msg.model_name };
    case "leader_state":
      return { ...state, leader: msg, banner: null };
    case "follower_state":
      // first real-robot state dismisses the connect screen
      return { ...state, follower: msg, phase: "live", banner: null };
  }
}

export function applyDisconnect(state: ConsoleState, reason: string): ConsoleState {
  return { ...state, phase: "connect", banner: reason };
}

export function graspColor(state: ConsoleState): GraspColor {
  return state.leader ? state.leader.grasp_color : "white";
}

export function overlayColor(state: ConsoleState): OverlayColor {
  return state.leader ? state.leader.overlay_color : "green";
}

export function gateMode(state: ConsoleState): string {
  return state.leader ? state.leader.gate_mode : "streaming";
}

/** Realign is offered only when the stream is locked (red overlay). */
export function realignEnabled(state: ConsoleState): boolean {
  return state.leader !== null && state.leader.gate_mode !== "streaming";
}
