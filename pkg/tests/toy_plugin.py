#!/usr/bin/env python3
"""Minimal trainer plugin used by the host tests.

Speaks the line protocol without importing the package, so the tests
exercise a genuinely independent implementation. Serves one algorithm,
"toy_mean", whose model is just the mean training label; an optional
"sleep" param stalls training (for timeout tests).

Env knobs for misbehavior tests:
  TOY_PLUGIN_EXIT_EARLY=1   exit before the handshake
  TOY_PLUGIN_VERSION=N      advertise protocol version N
  TOY_PLUGIN_WRONG_ID=1     reply to train with a mismatched config_id
"""
import json
import os
import sys
import time


def emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        label_idx = header.index("label")
        rows, labels = [], []
        for line in fh:
            cells = [float(c) for c in line.rstrip("\n").split(",")]
            labels.append(cells[label_idx])
            rows.append([c for i, c in enumerate(cells) if i != label_idx])
    return rows, labels


def main():
    if os.environ.get("TOY_PLUGIN_EXIT_EARLY"):
        sys.exit(3)
    version = int(os.environ.get("TOY_PLUGIN_VERSION", "1"))
    emit({"type": "hello", "version": version, "algorithms": ["toy_mean"]})

    models = {}
    counter = 0
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        msg = json.loads(line)
        kind = msg.get("type")

        if kind == "hello_ack":
            continue
        if kind == "shutdown":
            sys.exit(0)

        if kind == "train":
            params = msg.get("params", {})
            unknown = set(params) - {"sleep"}
            if unknown:
                emit({"type": "error", "message": f"unknown parameter {sorted(unknown)[0]!r}",
                      "config_id": msg.get("config_id")})
                continue
            start = time.monotonic()
            time.sleep(float(params.get("sleep", 0.0)))
            _, labels = read_csv(msg["data_ref"])
            counter += 1
            model_id = f"m{counter}"
            models[model_id] = sum(labels) / len(labels)
            config_id = msg["config_id"]
            if os.environ.get("TOY_PLUGIN_WRONG_ID"):
                config_id += 1
            emit({"type": "trained", "config_id": config_id, "model_id": model_id,
                  "train_seconds": time.monotonic() - start})
        elif kind == "predict":
            model_id = msg.get("model_id")
            if model_id not in models:
                emit({"type": "error", "message": f"unknown model_id {model_id!r}"})
                continue
            rows, _ = read_csv(msg["data_ref"])
            emit({"type": "scores", "model_id": model_id, "values": [models[model_id]] * len(rows)})
        else:
            emit({"type": "error", "message": f"unsupported request type {kind!r}"})


if __name__ == "__main__":
    main()
