"""Framed JSON wire protocol.

A frame is a 4-byte little-endian unsigned payload length followed by a
UTF-8 JSON object with a ``type`` discriminator. Decoding is strict about
required fields and value shapes but tolerates unknown extra fields, so
the schema can grow without breaking old peers. Floats are serialized at
full round-trip precision.

The schema is documented in docs/protocol.md and versioned through the
``hello`` message.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

from puppet.errors import PuppetError

PROTOCOL_VERSION = 1
MAX_PAYLOAD = 1 << 20  # 1 MiB: nothing legitimate comes close
_LEN = struct.Struct("<I")

GRIPPER_OPEN = "open"
GRIPPER_CLOSE = "close"


class EncodeError(PuppetError):
    pass


class DecodeError(PuppetError):
    """kind is one of: frame_length, bad_json, unknown_type, schema_violation."""

    def __init__(self, kind: str, detail: str):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}")


@dataclass(frozen=True)
class WirePose:
    position: tuple[float, float, float]
    orientation: tuple[float, float, float, float]  # (w, x, y, z)


@dataclass(frozen=True)
class Hello:
    version: int
    model_name: str


@dataclass(frozen=True)
class LeaderJointTarget:
    seq: int
    t_mono_ns: int
    q: tuple[float, ...]
    gripper: str  # "open" | "close"


@dataclass(frozen=True)
class FollowerStateMsg:
    seq: int
    t_mono_ns: int
    q: tuple[float, ...]
    q_dot: tuple[float, ...]
    link_poses: tuple[WirePose, ...]


@dataclass(frozen=True)
class Realign:
    seq: int


@dataclass(frozen=True)
class Heartbeat:
    seq: int


@dataclass(frozen=True)
class ErrorMsg:
    code: str
    text: str


WireMessage = Hello | LeaderJointTarget | FollowerStateMsg | Realign | Heartbeat | ErrorMsg

_TYPE_TAGS = {
    Hello: "hello",
    LeaderJointTarget: "leader_joint_target",
    FollowerStateMsg: "follower_state",
    Realign: "realign",
    Heartbeat: "heartbeat",
    ErrorMsg: "error",
}


def _check_finite(values, what: str):
    for v in values:
        if not math.isfinite(v):
            raise EncodeError(f"{what}: non-finite value {v!r}")


def _pose_doc(p: WirePose) -> dict:
    _check_finite(p.position, "pose.position")
    _check_finite(p.orientation, "pose.orientation")
    return {"position": list(p.position), "orientation": list(p.orientation)}


def payload_dict(msg: WireMessage) -> dict:
    tag = _TYPE_TAGS.get(type(msg))
    if tag is None:
        raise EncodeError(f"not a wire message: {type(msg).__name__}")
    if isinstance(msg, Hello):
        return {"type": tag, "version": msg.version, "model_name": msg.model_name}
    if isinstance(msg, LeaderJointTarget):
        _check_finite(msg.q, "q")
        if msg.gripper not in (GRIPPER_OPEN, GRIPPER_CLOSE):
            raise EncodeError(f"gripper must be open/close, got {msg.gripper!r}")
        return {
            "type": tag,
            "seq": msg.seq,
            "t_mono_ns": msg.t_mono_ns,
            "q": list(msg.q),
            "gripper": msg.gripper,
        }
    if isinstance(msg, FollowerStateMsg):
        _check_finite(msg.q, "q")
        _check_finite(msg.q_dot, "q_dot")
        return {
            "type": tag,
            "seq": msg.seq,
            "t_mono_ns": msg.t_mono_ns,
            "q": list(msg.q),
            "q_dot": list(msg.q_dot),
            "link_poses": [_pose_doc(p) for p in msg.link_poses],
        }
    if isinstance(msg, (Realign, Heartbeat)):
        return {"type": tag, "seq": msg.seq}
    return {"type": tag, "code": msg.code, "text": msg.text}


def encode(msg: WireMessage) -> bytes:
    """Serialize one message into a length-prefixed frame."""
    doc = payload_dict(msg)
    try:
        payload = json.dumps(doc, allow_nan=False, separators=(",", ":")).encode()
    except ValueError as exc:
        raise EncodeError(str(exc)) from None
    return _LEN.pack(len(payload)) + payload


# ------------------------------------------------------------------
# decode
# ------------------------------------------------------------------

def _field(doc: dict, key: str, kinds, what: str):
    if key not in doc:
        raise DecodeError("schema_violation", f"{what}: missing field {key!r}")
    value = doc[key]
    if kinds is int:
        # bool is an int subclass; reject it explicitly
        if isinstance(value, bool) or not isinstance(value, int):
            raise DecodeError("schema_violation", f"{what}.{key}: expected integer")
        return value
    if kinds is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DecodeError("schema_violation", f"{what}.{key}: expected number")
        return float(value)
    if not isinstance(value, kinds):
        raise DecodeError("schema_violation", f"{what}.{key}: wrong type")
    return value


def _float_list(doc: dict, key: str, what: str, n: int | None = None) -> tuple[float, ...]:
    raw = _field(doc, key, list, what)
    out = []
    for i, v in enumerate(raw):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise DecodeError("schema_violation", f"{what}.{key}[{i}]: expected finite number")
        out.append(float(v))
    if n is not None and len(out) != n:
        raise DecodeError("schema_violation", f"{what}.{key}: expected length {n}, got {len(out)}")
    return tuple(out)


def _decode_pose(doc, what: str) -> WirePose:
    if not isinstance(doc, dict):
        raise DecodeError("schema_violation", f"{what}: expected object")
    pos = _float_list(doc, "position", what, 3)
    quat = _float_list(doc, "orientation", what, 4)
    return WirePose(pos, quat)


def decode_payload(doc: dict, expected_dof: int | None = None) -> WireMessage:
    if not isinstance(doc, dict):
        raise DecodeError("schema_violation", "payload is not an object")
    tag = doc.get("type")
    if tag == "hello":
        return Hello(_field(doc, "version", int, tag), _field(doc, "model_name", str, tag))
    if tag == "leader_joint_target":
        q = _float_list(doc, "q", tag, expected_dof)
        gripper = _field(doc, "gripper", str, tag)
        if gripper not in (GRIPPER_OPEN, GRIPPER_CLOSE):
            raise DecodeError("schema_violation", f"{tag}.gripper: bad value {gripper!r}")
        return LeaderJointTarget(
            _field(doc, "seq", int, tag), _field(doc, "t_mono_ns", int, tag), q, gripper
        )
    if tag == "follower_state":
        q = _float_list(doc, "q", tag, expected_dof)
        q_dot = _float_list(doc, "q_dot", tag, expected_dof)
        raw_poses = _field(doc, "link_poses", list, tag)
        if expected_dof is not None and len(raw_poses) != expected_dof + 1:
            raise DecodeError(
                "schema_violation",
                f"{tag}.link_poses: expected {expected_dof + 1} poses, got {len(raw_poses)}",
            )
        poses = tuple(
            _decode_pose(p, f"{tag}.link_poses[{i}]") for i, p in enumerate(raw_poses)
        )
        return FollowerStateMsg(
            _field(doc, "seq", int, tag), _field(doc, "t_mono_ns", int, tag), q, q_dot, poses
        )
    if tag == "realign":
        return Realign(_field(doc, "seq", int, tag))
    if tag == "heartbeat":
        return Heartbeat(_field(doc, "seq", int, tag))
    if tag == "error":
        return ErrorMsg(_field(doc, "code", str, tag), _field(doc, "text", str, tag))
    raise DecodeError("unknown_type", f"unknown message type {tag!r}")


def decode(frame: bytes, expected_dof: int | None = None) -> WireMessage:
    """Parse one complete frame (length prefix included)."""
    if len(frame) < _LEN.size:
        raise DecodeError("frame_length", f"frame shorter than length prefix ({len(frame)} bytes)")
    (declared,) = _LEN.unpack_from(frame)
    if declared > MAX_PAYLOAD:
        raise DecodeError("frame_length", f"declared payload {declared} exceeds {MAX_PAYLOAD}")
    payload = frame[_LEN.size:]
    if len(payload) != declared:
        raise DecodeError(
            "frame_length", f"declared payload {declared} bytes, got {len(payload)}"
        )
    try:
        doc = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DecodeError("bad_json", str(exc)) from None
    return decode_payload(doc, expected_dof)


class FrameReader:
    """Incremental splitter for a byte stream of frames."""

    def __init__(self, expected_dof: int | None = None):
        self._buf = bytearray()
        self.expected_dof = expected_dof

    def feed(self, data: bytes) -> list[WireMessage]:
        """Consume bytes; returns every complete message now available."""
        self._buf.extend(data)
        out = []
        while True:
            if len(self._buf) < _LEN.size:
                return out
            (declared,) = _LEN.unpack_from(self._buf)
            if declared > MAX_PAYLOAD:
                raise DecodeError("frame_length", f"declared payload {declared} exceeds maximum")
            end = _LEN.size + declared
            if len(self._buf) < end:
                return out
            frame = bytes(self._buf[:end])
            del self._buf[:end]
            out.append(decode(frame, self.expected_dof))


class MessageFactory:
    """Manufactures outgoing messages with per-type increasing sequence numbers."""

    def __init__(self):
        self._seq: dict[str, int] = {}

    def _next(self, kind: str) -> int:
        n = self._seq.get(kind, 0)
        self._seq[kind] = n + 1
        return n

    def hello(self, model_name: str) -> Hello:
        return Hello(PROTOCOL_VERSION, model_name)

    def target(self, t_mono_ns: int, q, gripper_closed: bool) -> LeaderJointTarget:
        return LeaderJointTarget(
            self._next("leader_joint_target"),
            t_mono_ns,
            tuple(float(v) for v in q),
            GRIPPER_CLOSE if gripper_closed else GRIPPER_OPEN,
        )

    def follower_state(self, t_mono_ns: int, q, q_dot, link_poses) -> FollowerStateMsg:
        return FollowerStateMsg(
            self._next("follower_state"),
            t_mono_ns,
            tuple(float(v) for v in q),
            tuple(float(v) for v in q_dot),
            tuple(
                WirePose(tuple(float(x) for x in p.position), tuple(float(x) for x in p.orientation))
                for p in link_poses
            ),
        )

    def heartbeat(self) -> Heartbeat:
        return Heartbeat(self._next("heartbeat"))

    def realign(self) -> Realign:
        return Realign(self._next("realign"))
