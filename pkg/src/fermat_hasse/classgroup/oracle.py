"""JSON-lines client for an external class-group oracle, with a disk cache."""

from __future__ import annotations

import hashlib
import json
import logging
import queue
import shlex
import subprocess
import threading
from pathlib import Path

from ..exceptional import _atomic_write_json
from .types import BackendFailure

log = logging.getLogger(__name__)


class _Connection:
    def __init__(self, argv: list[str], timeout: float):
        self.argv = argv
        self.timeout = timeout
        self.next_id = 0
        self.lock = threading.Lock()
        try:
            self.proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                         stderr=subprocess.DEVNULL, text=True, bufsize=1)
        except OSError as exc:
            raise BackendFailure(f"cannot start oracle {argv!r}: {exc}") from exc

    def call(self, payload: dict) -> dict:
        with self.lock:
            if self.proc.poll() is not None:
                raise BackendFailure(f"oracle exited with status {self.proc.returncode}")
            self.next_id += 1
            rid = self.next_id
            msg = dict(payload, id=rid)
            try:
                self.proc.stdin.write(json.dumps(msg) + "\n")
                self.proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise BackendFailure(f"oracle pipe closed: {exc}") from exc
            line = self._readline()
            try:
                resp = json.loads(line)
            except json.JSONDecodeError as exc:
                raise BackendFailure(f"oracle sent malformed JSON: {line[:200]!r}") from exc
            if not isinstance(resp, dict) or resp.get("id") != rid:
                raise BackendFailure(f"oracle response id mismatch (sent {rid}, got {resp.get('id') if isinstance(resp, dict) else None})")
            if not resp.get("ok", False):
                raise BackendFailure(f"oracle error: {resp.get('error', 'unspecified')}")
            return resp

    def _readline(self) -> str:
        box: list = []
        t = threading.Thread(target=lambda: box.append(self.proc.stdout.readline()), daemon=True)
        t.start()
        t.join(self.timeout)
        if t.is_alive():
            self.close()
            raise BackendFailure(f"oracle timed out after {self.timeout}s")
        line = box[0] if box else ""
        if not line:
            raise BackendFailure("oracle closed its output")
        return line

    def close(self):
        try:
            self.proc.kill()
        except OSError:
            pass


class OracleClient:
    """A pool of oracle subprocesses; each connection carries one request at a time."""

    def __init__(self, cmd, pool_size: int = 1, cache_dir: Path | None = None, timeout: float = 3600.0):
        self.argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        if not self.argv:
            raise BackendFailure("empty oracle command")
        self.timeout = timeout
        self.cache_dir = Path(cache_dir) / "oracle" if cache_dir else None
        self.pool_size = max(1, pool_size)
        self._idle: queue.Queue = queue.Queue()
        self._started = 0
        self._start_lock = threading.Lock()

    def _acquire(self) -> _Connection:
        try:
            return self._idle.get_nowait()
        except queue.Empty:
            pass
        with self._start_lock:
            if self._started < self.pool_size:
                self._started += 1
                return _Connection(self.argv, self.timeout)
        return self._idle.get()

    def _cache_path(self, op: str, p: int, c: int, key) -> Path | None:
        if self.cache_dir is None:
            return None
        return self.cache_dir / f"p{p}_c{c}" / f"{op}_{key}.json"

    def request(self, op: str, p: int, c: int, key="-", **payload) -> dict:
        path = self._cache_path(op, p, c, key)
        if path is not None and path.exists():
            try:
                return json.loads(path.read_text())
            except (OSError, json.JSONDecodeError):
                log.warning("ignoring unreadable oracle cache entry %s", path)
        conn = self._acquire()
        try:
            resp = conn.call({"op": op, "p": p, "c": c, **payload})
        except BackendFailure:
            conn.close()
            with self._start_lock:
                self._started -= 1
            raise
        self._idle.put(conn)
        resp = {k: v for k, v in resp.items() if k not in ("id", "ok")}
        if path is not None:
            try:
                _atomic_write_json(path, resp)
            except OSError as exc:
                log.warning("could not write oracle cache %s: %s", path, exc)
        return resp

    def class_group(self, p: int, c: int) -> list[int]:
        resp = self.request("class_group", p, c)
        inv = resp.get("invariants")
        if not isinstance(inv, list) or not all(isinstance(d, int) and d > 0 for d in inv):
            raise BackendFailure(f"bad class_group response {resp!r}")
        return inv

    def ideal_class_order(self, p: int, c: int, ell: int, root: int) -> int:
        resp = self.request("ideal_class_order", p, c, ell, ell=ell, root=root)
        m = resp.get("order")
        if not isinstance(m, int) or m < 1:
            raise BackendFailure(f"bad ideal_class_order response {resp!r}")
        return m

    def is_principal(self, p: int, c: int, hnf, tag: str | None = None) -> dict:
        rows = [[int(x) for x in row] for row in hnf]
        key = tag or hashlib.sha256(json.dumps(rows).encode()).hexdigest()[:24]
        resp = self.request("is_principal", p, c, key, hnf=rows)
        if not isinstance(resp.get("principal"), bool):
            raise BackendFailure(f"bad is_principal response {resp!r}")
        return resp

    def close(self):
        while True:
            try:
                self._idle.get_nowait().close()
            except queue.Empty:
                break


_CLIENTS: dict = {}


def get_client(cmd, pool_size: int = 1, cache_dir=None) -> OracleClient:
    key = (cmd if isinstance(cmd, str) else tuple(cmd), pool_size, str(cache_dir))
    if key not in _CLIENTS:
        _CLIENTS[key] = OracleClient(cmd, pool_size, cache_dir)
    return _CLIENTS[key]
