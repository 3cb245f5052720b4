"""Loopback JSON-lines stream: a stand-in for a live tweet feed.

The server replays a record corpus over a local TCP socket using the same
framing as file input (one UTF-8 JSON document per line), so the ingest
path can be exercised end to end without external connectivity.
"""

from __future__ import annotations

import json
import socket
import threading
from typing import Any, Iterator

from .errors import SourceUnreadable


class MockStreamServer:
    """Serve a fixed record corpus to each client that connects."""

    def __init__(self, records: list[dict[str, Any]], host: str = "127.0.0.1"):
        self._payload = b"".join(
            json.dumps(r, ensure_ascii=False).encode("utf-8") + b"\n" for r in records
        )
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, 0))
        self._sock.listen(4)
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._serve, daemon=True)

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._sock.getsockname()[:2]
        return host, port

    @property
    def url(self) -> str:
        host, port = self.address
        return f"tcp://{host}:{port}"

    def _serve(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._sock.accept()
            except OSError:
                return
            try:
                conn.sendall(self._payload)
            except OSError:
                pass
            finally:
                conn.close()

    def __enter__(self) -> "MockStreamServer":
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self._stop.set()
        try:
            # close() alone leaves the acceptor blocked; shutdown wakes it
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()
        self._thread.join(timeout=5)


def open_stream_lines(host: str, port: int, timeout: float = 10.0) -> Iterator[str]:
    """Connect to a loopback stream and yield one line per record."""
    try:
        conn = socket.create_connection((host, port), timeout=timeout)
    except OSError as exc:
        raise SourceUnreadable(f"cannot connect to stream {host}:{port}: {exc}") from exc
    try:
        with conn, conn.makefile("r", encoding="utf-8", newline="\n") as reader:
            yield from reader
    except OSError as exc:
        raise SourceUnreadable(f"stream {host}:{port} failed mid-read: {exc}") from exc
