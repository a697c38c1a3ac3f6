"""Protocol conformance checks for trainer plugins.

``check_plugin`` drives a plugin command through the full request
lifecycle (handshake, repeated train/predict on one subprocess, the
error path, shutdown) and returns a list of human-readable findings;
an empty list means the plugin conforms. Plugin authors can run it
from the package directly:

    python -m modelsearch.conformance -- python3 my_plugin.py
"""

from __future__ import annotations

import sys
from typing import Sequence

import numpy as np

from .core import Dataset, ModelConfig
from .errors import PluginError, PluginTaskError
from .plugin_host import PROTOCOL_VERSION, plugin_predict, plugin_spawn, plugin_train


def conformance_dataset(n_rows: int = 40) -> Dataset:
    """Tiny linearly separable set: label 1 iff the single feature is positive."""
    half = n_rows // 2
    features = np.concatenate([-1.0 - np.arange(half), 1.0 + np.arange(n_rows - half)])
    labels = (features > 0).astype(float)
    return Dataset(features.reshape(-1, 1), labels, ("x",))


def check_plugin(
    command: Sequence[str],
    algorithm: str | None = None,
    params: dict | None = None,
    n_tasks: int = 3,
    request_timeout: float = 120.0,
) -> list[str]:
    """Run the conformance suite; returns findings (empty = pass).

    Trains ``n_tasks`` sequential models through one subprocess with
    the given algorithm and params (default: the first advertised
    algorithm with empty params, so plugins should default every
    hyperparameter).
    """
    findings: list[str] = []
    ds = conformance_dataset()

    try:
        handle = plugin_spawn(command)
    except PluginError as exc:
        return [f"handshake failed: {exc}"]

    try:
        if handle.protocol_version != PROTOCOL_VERSION:
            findings.append(f"advertised protocol version {handle.protocol_version}")
        if not handle.advertised_algorithms:
            findings.append("plugin advertises no algorithms")
            return findings
        if algorithm is None:
            algorithm = handle.advertised_algorithms[0]
        if algorithm not in handle.advertised_algorithms:
            findings.append(f"algorithm {algorithm!r} not advertised")
            return findings
        pid = handle.proc.pid

        model_ids: list[str] = []
        for i in range(n_tasks):
            config = ModelConfig(i, algorithm, dict(params or {}))
            try:
                trained = plugin_train(handle, config, ds, timeout=request_timeout)
            except PluginError as exc:
                findings.append(f"train #{i} failed: {exc}")
                return findings
            model_ids.append(trained.payload)
        if len(set(model_ids)) != n_tasks:
            findings.append(f"model ids reused within one process: {model_ids}")
        if handle.proc.pid != pid or handle.proc.poll() is not None:
            findings.append("subprocess was not reused across sequential tasks")

        # the first model must still be servable after later tasks
        try:
            first = plugin_predict(handle, model_ids[0], ds, timeout=request_timeout)
            again = plugin_predict(handle, model_ids[0], ds, timeout=request_timeout)
        except PluginError as exc:
            findings.append(f"predict failed: {exc}")
            return findings
        if not np.array_equal(first, again):
            findings.append("repeated predict on identical inputs returned different scores")

        try:
            plugin_predict(handle, "no-such-model", ds, timeout=request_timeout)
            findings.append("unknown model_id did not produce an error reply")
        except PluginTaskError:
            pass  # expected
        except PluginError as exc:
            findings.append(f"unknown model_id killed the request channel: {exc}")
            return findings
        if handle.state != "ready":
            findings.append(f"handle is {handle.state!r} after an error reply, expected ready")
        try:
            plugin_train(handle, ModelConfig(n_tasks, algorithm, dict(params or {})), ds,
                         timeout=request_timeout)
        except PluginError as exc:
            findings.append(f"train after error reply failed: {exc}")
    finally:
        handle.close()

    if handle.proc.poll() != 0:
        findings.append(f"plugin exited with code {handle.proc.poll()} on shutdown, expected 0")
    return findings


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "--":
        argv = argv[1:]
    if not argv:
        print("usage: python -m modelsearch.conformance -- <plugin command...>", file=sys.stderr)
        return 2
    findings = check_plugin(argv)
    for finding in findings:
        print(f"FAIL: {finding}")
    if not findings:
        print("plugin conforms to protocol version", PROTOCOL_VERSION)
    return 1 if findings else 0


if __name__ == "__main__":
    raise SystemExit(main())
