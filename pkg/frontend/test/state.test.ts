import { describe, expect, it } from "vitest";

import type { FollowerStateMsg, LeaderStateMsg, ServerMessage } from "../src/protocol.js";
import {
  applyDisconnect,
  applyMessage,
  graspColor,
  initialState,
  overlayColor,
  realignEnabled,
} from "../src/state.js";

function leaderMsg(partial: Partial<LeaderStateMsg> = {}): LeaderStateMsg {
  return {
    type: "leader_state",
    t_mono_ns: 0,
    q: [0, 0],
    link_poses: [
      { position: [0, 0, 0.3], orientation: [1, 0, 0, 0] },
      { position: [0.2, 0, 0.5], orientation: [1, 0, 0, 0] },
      { position: [0.4, 0, 0.6], orientation: [1, 0, 0, 0] },
    ],
    grasp_color: "white",
    grasp_phase: "idle",
    overlay_color: "green",
    gate_mode: "streaming",
    gripper: "open",
    ...partial,
  };
}

function followerMsg(): FollowerStateMsg {
  return {
    type: "follower_state",
    seq: 0,
    t_mono_ns: 0,
    q: [0, 0],
    q_dot: [0, 0],
    link_poses: [
      { position: [0, 0, 0.3], orientation: [1, 0, 0, 0] },
      { position: [0.2, 0, 0.5], orientation: [1, 0, 0, 0] },
      { position: [0.4, 0, 0.6], orientation: [1, 0, 0, 0] },
    ],
  };
}

describe("connect screen", () => {
  it("persists until the first follower_state arrives", () => {
    let s = initialState();
    expect(s.phase).toBe("connect");
    s = applyMessage(s, { type: "hello", version: 1, model_name: "m" });
    expect(s.phase).toBe("connect");
    for (let i = 0; i < 5; i++) {
      s = applyMessage(s, leaderMsg());
      expect(s.phase).toBe("connect");
    }
    s = applyMessage(s, followerMsg());
    expect(s.phase).toBe("live");
  });

  it("returns with a banner on disconnect", () => {
    let s = initialState();
    s = applyMessage(s, followerMsg());
    expect(s.phase).toBe("live");
    s = applyDisconnect(s, "connection lost");
    expect(s.phase).toBe("connect");
    expect(s.banner).toContain("connection lost");
  });
});

describe("color mirroring", () => {
  it("always equals the matching field of the last broadcast", () => {
    // message-log diff: replay a log and compare state colors against the
    // last leader_state seen at every step
    const grasp = ["white", "blue", "green", "red"] as const;
    const overlay = ["green", "red"] as const;
    const log: ServerMessage[] = [];
    for (let i = 0; i < 200; i++) {
      if (i % 7 === 3) log.push(followerMsg());
      else
        log.push(
          leaderMsg({
            grasp_color: grasp[i % 4],
            overlay_color: overlay[i % 2],
            gate_mode: i % 2 === 0 ? "streaming" : "locked:divergence",
          })
        );
    }
    let s = initialState();
    let lastLeader: LeaderStateMsg | null = null;
    for (const msg of log) {
      s = applyMessage(s, msg);
      if (msg.type === "leader_state") lastLeader = msg;
      if (lastLeader) {
        expect(graspColor(s)).toBe(lastLeader.grasp_color);
        expect(overlayColor(s)).toBe(lastLeader.overlay_color);
      }
    }
  });

  it("never synthesizes colors before any broadcast", () => {
    const s = initialState();
    expect(graspColor(s)).toBe("white");
    expect(overlayColor(s)).toBe("green");
  });
});

describe("realign button", () => {
  it("is disabled while streaming and enabled once locked", () => {
    let s = initialState();
    expect(realignEnabled(s)).toBe(false);
    s = applyMessage(s, leaderMsg({ gate_mode: "streaming" }));
    expect(realignEnabled(s)).toBe(false);
    s = applyMessage(s, leaderMsg({ gate_mode: "locked:divergence", overlay_color: "red" }));
    expect(realignEnabled(s)).toBe(true);
    s = applyMessage(s, leaderMsg({ gate_mode: "streaming" }));
    expect(realignEnabled(s)).toBe(false);
  });
});
