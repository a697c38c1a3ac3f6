"""External trainer plugins hosted as long-lived subprocesses.

Wire protocol, version 1: one UTF-8 JSON object per line on the
plugin's standard input/output (standard error is free-form log
space). The plugin speaks first:

    plugin -> hello     {"type": "hello", "version": 1, "algorithms": ["..."]}
    host   -> hello_ack {"type": "hello_ack", "version": 1}

then serves one request at a time:

    host   -> train     {"type": "train", "config_id": 0, "algorithm": "...",
                         "params": {...}, "data_ref": "/path/to.csv"}
    plugin -> trained   {"type": "trained", "config_id": 0, "model_id": "m1",
                         "train_seconds": 0.12}
    host   -> predict   {"type": "predict", "model_id": "m1", "data_ref": "..."}
    plugin -> scores    {"type": "scores", "model_id": "m1", "values": [...]}
    plugin -> error     {"type": "error", "message": "...", "config_id": 0}
    host   -> shutdown  {"type": "shutdown"}

Unknown fields must be ignored by both sides. Datasets are handed off
as temporary CSV files in the dense interchange format (feature
columns in order, labels last in a column named "label"); the host
deletes each file once the reply arrives. A subprocess is spawned once
and reused for any number of requests.
"""

from __future__ import annotations

import json
import logging
import os
import queue
import subprocess
import tempfile
import threading
from collections import deque
from dataclasses import dataclass
from time import monotonic
from typing import Sequence

import numpy as np

from .core import Dataset, ModelConfig, dataset_to_csv
from .errors import (
    PluginDeadError,
    PluginProtocolError,
    PluginTaskError,
    PluginTimeoutError,
    TrainingError,
    UnknownAlgorithmError,
)
from .executor import TrainedModel

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
HANDSHAKE_TIMEOUT = 10.0
REQUEST_TIMEOUT = 600.0
SHUTDOWN_TIMEOUT = 5.0


class PluginHandle:
    """One plugin subprocess; at most one request in flight.

    Use :func:`plugin_spawn` to create handles. All message traffic is
    serialized through an internal lock, so a handle may be passed
    between threads but never serves two requests at once.
    """

    def __init__(self, command: Sequence[str], proc: subprocess.Popen, workdir=None):
        self.command = list(command)
        self.proc = proc
        self.workdir = workdir
        self.protocol_version: int | None = None
        self.advertised_algorithms: tuple[str, ...] = ()
        self.state = "starting"
        self._lock = threading.Lock()
        self._replies: queue.Queue = queue.Queue()
        self._stderr_tail: deque[str] = deque(maxlen=50)
        threading.Thread(target=self._pump_stdout, daemon=True).start()
        threading.Thread(target=self._pump_stderr, daemon=True).start()

    def _pump_stdout(self) -> None:
        try:
            for line in self.proc.stdout:
                self._replies.put(line)
        except ValueError:
            pass  # pipe closed during shutdown
        self._replies.put(None)

    def _pump_stderr(self) -> None:
        try:
            for line in self.proc.stderr:
                self._stderr_tail.append(line.rstrip("\n"))
                log.debug("plugin[%d] stderr: %s", self.proc.pid, line.rstrip("\n"))
        except ValueError:
            pass

    def stderr_tail(self) -> str:
        return "\n".join(self._stderr_tail)

    def _die(self) -> None:
        self.state = "dead"
        if self.proc.poll() is None:
            self.proc.kill()
            self.proc.wait()

    def _send(self, message: dict) -> None:
        line = json.dumps(message, ensure_ascii=False)
        try:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
        except (OSError, ValueError) as exc:
            self._die()
            raise PluginDeadError(f"plugin {self.command}: cannot write request: {exc}") from None

    def _read_message(self, timeout: float) -> dict:
        deadline = monotonic() + timeout
        while True:
            remaining = deadline - monotonic()
            if remaining <= 0:
                self._die()
                raise PluginTimeoutError(f"plugin {self.command}: no reply within {timeout:.1f}s")
            try:
                line = self._replies.get(timeout=remaining)
            except queue.Empty:
                self._die()
                raise PluginTimeoutError(f"plugin {self.command}: no reply within {timeout:.1f}s") from None
            if line is None:
                self._die()
                detail = self.stderr_tail()
                raise PluginDeadError(
                    f"plugin {self.command}: process exited (code {self.proc.poll()})"
                    + (f"; stderr tail:\n{detail}" if detail else "")
                )
            if not line.strip():
                continue
            try:
                message = json.loads(line)
            except json.JSONDecodeError:
                self._die()
                raise PluginProtocolError(
                    f"plugin {self.command}: reply is not valid JSON: {line.strip()!r}"
                ) from None
            if not isinstance(message, dict) or "type" not in message:
                self._die()
                raise PluginProtocolError(f"plugin {self.command}: reply has no 'type': {message!r}")
            return message

    def request(self, message: dict, expect: str, timeout: float) -> dict:
        """Send one message and wait for its reply; error replies raise."""
        with self._lock:
            if self.state == "dead":
                raise PluginDeadError(f"plugin {self.command}: handle is dead")
            if self.state != "ready":
                raise PluginProtocolError(f"plugin {self.command}: handle is {self.state}, not ready")
            self.state = "busy"
            try:
                self._send(message)
                reply = self._read_message(timeout)
            finally:
                if self.state == "busy":
                    self.state = "ready"
        if reply["type"] == "error":
            raise PluginTaskError(str(reply.get("message", "plugin reported an unspecified error")))
        if reply["type"] != expect:
            self._die()
            raise PluginProtocolError(
                f"plugin {self.command}: expected {expect!r} reply, got {reply['type']!r}"
            )
        return reply

    def close(self, timeout: float = SHUTDOWN_TIMEOUT) -> None:
        plugin_shutdown(self, timeout)

    def __enter__(self) -> "PluginHandle":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def plugin_spawn(
    command: Sequence[str],
    handshake_timeout: float = HANDSHAKE_TIMEOUT,
    workdir=None,
) -> PluginHandle:
    """Start a plugin subprocess and complete the hello/hello_ack handshake."""
    try:
        proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
    except OSError as exc:
        raise PluginDeadError(f"cannot spawn plugin {list(command)}: {exc}") from None
    handle = PluginHandle(command, proc, workdir=workdir)
    try:
        hello = handle._read_message(handshake_timeout)
    except PluginTimeoutError:
        raise PluginTimeoutError(
            f"plugin {list(command)}: no hello within {handshake_timeout:.1f}s"
        ) from None
    if hello["type"] != "hello":
        handle._die()
        raise PluginProtocolError(f"plugin {list(command)}: expected hello, got {hello['type']!r}")
    version = hello.get("version")
    if version != PROTOCOL_VERSION:
        handle._die()
        raise PluginProtocolError(
            f"plugin {list(command)}: protocol version {version!r}, host speaks {PROTOCOL_VERSION}"
        )
    algorithms = hello.get("algorithms")
    if not isinstance(algorithms, list) or not all(isinstance(a, str) for a in algorithms):
        handle._die()
        raise PluginProtocolError(f"plugin {list(command)}: hello.algorithms must be a list of strings")
    handle.protocol_version = version
    handle.advertised_algorithms = tuple(algorithms)
    handle._send({"type": "hello_ack", "version": PROTOCOL_VERSION})
    handle.state = "ready"
    log.info("plugin %s ready (pid %d, algorithms %s)", list(command), proc.pid, algorithms)
    return handle


def _write_interchange_csv(ds: Dataset, workdir) -> str:
    fd, path = tempfile.mkstemp(prefix="modelsearch-", suffix=".csv", dir=workdir)
    os.close(fd)
    dataset_to_csv(ds, path, label_column="label")
    return path


def plugin_train(
    h: PluginHandle,
    config: ModelConfig,
    ds: Dataset,
    timeout: float = REQUEST_TIMEOUT,
) -> TrainedModel:
    """Train one config in the plugin; the payload is the plugin-side model id."""
    if config.algorithm not in h.advertised_algorithms:
        raise UnknownAlgorithmError(
            f"plugin advertises {list(h.advertised_algorithms)}, not {config.algorithm!r}"
        )
    data_ref = _write_interchange_csv(ds, h.workdir)
    try:
        reply = h.request(
            {
                "type": "train",
                "config_id": config.config_id,
                "algorithm": config.algorithm,
                "params": dict(config.params),
                "data_ref": data_ref,
            },
            expect="trained",
            timeout=timeout,
        )
    finally:
        _remove_quietly(data_ref)
    if reply.get("config_id") != config.config_id:
        h._die()
        raise PluginProtocolError(
            f"trained reply for config {reply.get('config_id')!r}, expected {config.config_id}"
        )
    model_id = reply.get("model_id")
    if not isinstance(model_id, str) or not model_id:
        h._die()
        raise PluginProtocolError(f"trained reply has invalid model_id {model_id!r}")
    train_seconds = reply.get("train_seconds", 0.0)
    if not isinstance(train_seconds, (int, float)) or train_seconds < 0:
        h._die()
        raise PluginProtocolError(f"trained reply has invalid train_seconds {train_seconds!r}")
    return TrainedModel(config.config_id, config.algorithm, model_id, float(train_seconds), 0)


def plugin_predict(
    h: PluginHandle,
    model_id: str,
    ds: Dataset,
    timeout: float = REQUEST_TIMEOUT,
) -> np.ndarray:
    """Score a dataset with a plugin-side model; returns values in [0, 1]."""
    data_ref = _write_interchange_csv(ds, h.workdir)
    try:
        reply = h.request(
            {"type": "predict", "model_id": model_id, "data_ref": data_ref},
            expect="scores",
            timeout=timeout,
        )
    finally:
        _remove_quietly(data_ref)
    if reply.get("model_id") != model_id:
        h._die()
        raise PluginProtocolError(
            f"scores reply for model {reply.get('model_id')!r}, expected {model_id!r}"
        )
    values = reply.get("values")
    if not isinstance(values, list) or len(values) != ds.n_rows:
        h._die()
        raise PluginProtocolError(
            f"scores reply must carry {ds.n_rows} values, got "
            f"{len(values) if isinstance(values, list) else type(values).__name__}"
        )
    scores = np.asarray(values, dtype=np.float64)
    if not np.isfinite(scores).all() or scores.min() < 0.0 or scores.max() > 1.0:
        h._die()
        raise PluginProtocolError("scores must be finite values in [0, 1]")
    return scores


def plugin_shutdown(h: PluginHandle, timeout: float = SHUTDOWN_TIMEOUT) -> None:
    """Ask the plugin to exit, then force-terminate; safe to call twice."""
    if h.state == "dead":
        return
    h.state = "dead"
    try:
        h._send({"type": "shutdown"})
    except PluginDeadError:
        pass
    try:
        h.proc.wait(timeout=timeout)
    except subprocess.TimeoutExpired:
        log.warning("plugin %s ignored shutdown; terminating", h.command)
        h.proc.terminate()
        try:
            h.proc.wait(timeout=timeout)
        except subprocess.TimeoutExpired:
            h.proc.kill()
            h.proc.wait()


def _remove_quietly(path: str) -> None:
    try:
        os.remove(path)
    except OSError:
        pass


@dataclass(frozen=True)
class PluginModelRef:
    """Registry payload tying a plugin-side model to the handle that owns it."""

    handle: PluginHandle
    model_id: str

    @property
    def n_features(self) -> int:  # the plugin knows; the host cannot check
        raise NotImplementedError


class PluginTrainer:
    """Registry adapter for one plugin command.

    Each worker thread gets its own subprocess, spawned lazily on
    first use and reused for every subsequent task on that worker.
    Predictions route back to whichever subprocess trained the model.
    """

    def __init__(
        self,
        command: Sequence[str],
        algorithms: Sequence[str] | None = None,
        handshake_timeout: float = HANDSHAKE_TIMEOUT,
        request_timeout: float = REQUEST_TIMEOUT,
        workdir=None,
    ):
        self.command = list(command)
        self.expected_algorithms = tuple(algorithms) if algorithms else None
        self.handshake_timeout = handshake_timeout
        self.request_timeout = request_timeout
        self.workdir = workdir
        self._local = threading.local()
        self._handles: list[PluginHandle] = []
        self._handles_lock = threading.Lock()

    def _worker_handle(self) -> PluginHandle:
        handle = getattr(self._local, "handle", None)
        if handle is None or handle.state == "dead":
            handle = plugin_spawn(self.command, self.handshake_timeout, workdir=self.workdir)
            if self.expected_algorithms:
                missing = set(self.expected_algorithms) - set(handle.advertised_algorithms)
                if missing:
                    handle.close()
                    raise PluginProtocolError(
                        f"plugin {self.command} does not advertise {sorted(missing)}"
                    )
            self._local.handle = handle
            with self._handles_lock:
                self._handles.append(handle)
        return handle

    def train(self, config: ModelConfig, ds: Dataset) -> PluginModelRef:
        handle = self._worker_handle()
        trained = plugin_train(handle, config, ds, timeout=self.request_timeout)
        return PluginModelRef(handle, trained.payload)

    def predict(self, payload, ds: Dataset) -> np.ndarray:
        if not isinstance(payload, PluginModelRef):
            raise TrainingError(f"payload type {type(payload).__name__} does not belong to this plugin")
        return plugin_predict(payload.handle, payload.model_id, ds, timeout=self.request_timeout)

    def close(self) -> None:
        with self._handles_lock:
            handles, self._handles = list(self._handles), []
        for handle in handles:
            handle.close()

    def __enter__(self) -> "PluginTrainer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
