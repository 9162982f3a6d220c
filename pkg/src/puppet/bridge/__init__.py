"""Wire protocol and transports between the leader and follower sides."""

from puppet.bridge.messages import (
    PROTOCOL_VERSION,
    DecodeError,
    EncodeError,
    WirePose,
    Hello,
    LeaderJointTarget,
    FollowerStateMsg,
    Realign,
    Heartbeat,
    ErrorMsg,
    WireMessage,
    encode,
    decode,
    FrameReader,
    MessageFactory,
)

__all__ = [
    "PROTOCOL_VERSION",
    "DecodeError",
    "EncodeError",
    "WirePose",
    "Hello",
    "LeaderJointTarget",
    "FollowerStateMsg",
    "Realign",
    "Heartbeat",
    "ErrorMsg",
    "WireMessage",
    "encode",
    "decode",
    "FrameReader",
    "MessageFactory",
]
