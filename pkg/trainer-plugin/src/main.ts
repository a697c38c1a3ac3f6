// Reference trainer plugin: serves TensorFlow.js logistic-regression and
// MLP training over the line protocol on stdin/stdout. Spawned by the
// model-search host; also runnable by hand for debugging:
//
//   echo '{"type":"shutdown"}' | node dist/main.js

import * as readline from "node:readline";
import type * as tf from "@tensorflow/tfjs";
import { readDataRef } from "./csv.js";
import { ALGORITHMS, score } from "./trainers.js";
import { emit, PROTOCOL_VERSION } from "./protocol.js";

const logLevel = process.argv.includes("--quiet") ? "quiet" : "info";

function log(message: string): void {
  if (logLevel !== "quiet") {
    process.stderr.write(`[trainer-plugin] ${message}\n`);
  }
}

const models = new Map<string, tf.LayersModel>();
let modelCounter = 0;

async function handleTrain(msg: Record<string, unknown>): Promise<void> {
  const configId = typeof msg.config_id === "number" ? msg.config_id : undefined;
  try {
    const algorithm = msg.algorithm;
    if (typeof algorithm !== "string" || !(algorithm in ALGORITHMS)) {
      throw new Error(`unknown algorithm ${JSON.stringify(algorithm)}; serving ${Object.keys(ALGORITHMS).join(", ")}`);
    }
    if (typeof msg.data_ref !== "string") {
      throw new Error("train request needs a data_ref path");
    }
    if (configId === undefined) {
      throw new Error("train request needs a numeric config_id");
    }
    const params = (msg.params ?? {}) as Record<string, unknown>;
    const data = readDataRef(msg.data_ref);
    const start = performance.now();
    const model = await ALGORITHMS[algorithm](params, data);
    const trainSeconds = (performance.now() - start) / 1000;
    modelCounter += 1;
    const modelId = `m${modelCounter}`;
    models.set(modelId, model);
    log(`trained ${modelId} (${algorithm}, config ${configId}) in ${trainSeconds.toFixed(3)}s`);
    emit({ type: "trained", config_id: configId, model_id: modelId, train_seconds: trainSeconds });
  } catch (err) {
    emit({ type: "error", message: err instanceof Error ? err.message : String(err), config_id: configId });
  }
}

function handlePredict(msg: Record<string, unknown>): void {
  try {
    const modelId = msg.model_id;
    if (typeof modelId !== "string" || !models.has(modelId)) {
      throw new Error(`unknown model_id ${JSON.stringify(modelId)}`);
    }
    if (typeof msg.data_ref !== "string") {
      throw new Error("predict request needs a data_ref path");
    }
    const data = readDataRef(msg.data_ref);
    emit({ type: "scores", model_id: modelId, values: score(models.get(modelId)!, data) });
  } catch (err) {
    emit({ type: "error", message: err instanceof Error ? err.message : String(err) });
  }
}

async function serve(): Promise<void> {
  emit({ type: "hello", version: PROTOCOL_VERSION, algorithms: Object.keys(ALGORITHMS) });
  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  for await (const line of rl) {
    if (!line.trim()) {
      continue;
    }
    let msg: unknown;
    try {
      msg = JSON.parse(line);
    } catch {
      emit({ type: "error", message: "request is not valid JSON" });
      continue;
    }
    if (typeof msg !== "object" || msg === null || typeof (msg as any).type !== "string") {
      emit({ type: "error", message: "request needs a string 'type' field" });
      continue;
    }
    const request = msg as Record<string, unknown>;
    switch (request.type) {
      case "hello_ack":
        break; // handshake complete; nothing to do
      case "train":
        await handleTrain(request);
        break;
      case "predict":
        handlePredict(request);
        break;
      case "shutdown":
        log("shutdown requested");
        rl.close();
        process.exit(0);
        break;
      default:
        emit({ type: "error", message: `unsupported request type '${request.type}'` });
    }
  }
  // stdin closed without a shutdown message: exit cleanly anyway
  process.exit(0);
}

serve().catch((err) => {
  process.stderr.write(`[trainer-plugin] fatal: ${err}\n`);
  process.exit(1);
});
