"""Thread-based TCP transport for the leader-follower wire protocol.

Reader and writer are independent per connection; incoming messages are
delivered into single-owner loops through mailboxes. No control loop ever
blocks on the network: targets overwrite a newest-only slot (they are
zero-order-held anyway) and writes happen under a short lock.
"""
from __future__ import annotations

import logging
import socket
import threading
from typing import Callable

from puppet.bridge.messages import DecodeError, FrameReader, WireMessage, encode

logger = logging.getLogger(__name__)


class LatestMailbox:
    """Thread-safe slot keeping only the newest value."""

    def __init__(self):
        self._lock = threading.Lock()
        self._value = None

    def put(self, value) -> None:
        with self._lock:
            self._value = value

    def take(self):
        with self._lock:
            value, self._value = self._value, None
            return value

    def peek(self):
        with self._lock:
            return self._value


class FrameConnection:
    """One socket speaking length-prefixed frames, with a reader thread."""

    def __init__(
        self,
        sock: socket.socket,
        on_message: Callable[[WireMessage], None],
        on_close: Callable[[], None] | None = None,
        expected_dof: int | None = None,
        name: str = "conn",
    ):
        self.sock = sock
        self.name = name
        self._on_message = on_message
        self._on_close = on_close
        self._reader = FrameReader(expected_dof)
        self._send_lock = threading.Lock()
        self._closed = threading.Event()
        self._thread = threading.Thread(target=self._read_loop, name=f"{name}-reader", daemon=True)

    def start(self) -> None:
        self._thread.start()

    @property
    def closed(self) -> bool:
        return self._closed.is_set()

    def send(self, msg: WireMessage) -> bool:
        """Returns False once the transport is down."""
        if self._closed.is_set():
            return False
        frame = encode(msg)
        try:
            with self._send_lock:
                self.sock.sendall(frame)
            return True
        except OSError:
            self.close()
            return False

    def _read_loop(self) -> None:
        try:
            while not self._closed.is_set():
                data = self.sock.recv(65536)
                if not data:
                    break
                for msg in self._reader.feed(data):
                    self._on_message(msg)
        except OSError:
            pass
        except DecodeError as exc:
            logger.warning("%s: dropping connection on decode error: %s", self.name, exc)
        finally:
            self.close()

    def close(self) -> None:
        if self._closed.is_set():
            return
        self._closed.set()
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass
        if self._on_close is not None:
            self._on_close()


def listen_one(
    host: str,
    port: int,
    on_message: Callable[[WireMessage], None],
    on_close: Callable[[], None] | None = None,
    expected_dof: int | None = None,
    name: str = "server",
) -> tuple[socket.socket, Callable[[], FrameConnection | None]]:
    """Bind and listen; returns (server socket, accept-one callable).

    The accept callable blocks until a peer connects (or the server socket
    closes) and returns a started FrameConnection.
    """
    server = socket.create_server((host, port))

    def accept() -> FrameConnection | None:
        try:
            sock, addr = server.accept()
        except OSError:
            return None
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        conn = FrameConnection(sock, on_message, on_close, expected_dof, name=f"{name}{addr}")
        conn.start()
        return conn

    return server, accept


def connect(
    host: str,
    port: int,
    on_message: Callable[[WireMessage], None],
    on_close: Callable[[], None] | None = None,
    expected_dof: int | None = None,
    timeout: float = 5.0,
    name: str = "client",
) -> FrameConnection:
    sock = socket.create_connection((host, port), timeout=timeout)
    sock.settimeout(None)
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    conn = FrameConnection(sock, on_message, on_close, expected_dof, name=name)
    conn.start()
    return conn
