import * as tf from "@tensorflow/tfjs";
import type { DenseData } from "./csv.js";

export type Params = Record<string, unknown>;

function takeParams(algorithm: string, params: Params, defaults: Params): Params {
  for (const key of Object.keys(params)) {
    if (!(key in defaults)) {
      throw new Error(`unknown parameter '${key}' for ${algorithm}`);
    }
  }
  return { ...defaults, ...params };
}

function asNumber(algorithm: string, name: string, value: unknown, min: number): number {
  if (typeof value !== "number" || !Number.isFinite(value) || value < min) {
    throw new Error(`${algorithm}: parameter '${name}' must be a number >= ${min}, got ${JSON.stringify(value)}`);
  }
  return value;
}

function asInt(algorithm: string, name: string, value: unknown, min: number): number {
  const n = asNumber(algorithm, name, value, min);
  if (!Number.isInteger(n)) {
    throw new Error(`${algorithm}: parameter '${name}' must be an integer, got ${n}`);
  }
  return n;
}

function tensors(data: DenseData): [tf.Tensor2D, tf.Tensor2D] {
  return [
    tf.tensor2d(data.features),
    tf.tensor2d(data.labels.map((l) => [l])),
  ];
}

async function fit(
  model: tf.LayersModel,
  data: DenseData,
  optimizer: tf.Optimizer,
  iterations: number,
): Promise<void> {
  model.compile({ optimizer, loss: "binaryCrossentropy" });
  if (iterations === 0) {
    return;
  }
  const [xs, ys] = tensors(data);
  try {
    // full batch, no shuffle: training is a deterministic function of the data
    await model.fit(xs, ys, {
      epochs: iterations,
      batchSize: data.features.length,
      shuffle: false,
      verbose: 0,
    });
  } finally {
    xs.dispose();
    ys.dispose();
  }
}

/** Logistic regression: a single sigmoid unit, zero-initialized. */
export async function trainLogistic(params: Params, data: DenseData): Promise<tf.LayersModel> {
  const p = takeParams("tfjs_logistic", params, {
    learning_rate: 0.1,
    iterations: 100,
    l2: 0.0,
  });
  const learningRate = asNumber("tfjs_logistic", "learning_rate", p.learning_rate, 1e-12);
  const iterations = asInt("tfjs_logistic", "iterations", p.iterations, 0);
  const l2 = asNumber("tfjs_logistic", "l2", p.l2, 0);
  const model = tf.sequential();
  model.add(tf.layers.dense({
    units: 1,
    activation: "sigmoid",
    inputShape: [data.features[0].length],
    kernelInitializer: "zeros",
    biasInitializer: "zeros",
    kernelRegularizer: l2 > 0 ? tf.regularizers.l2({ l2: l2 / 2 }) : undefined,
  }));
  await fit(model, data, tf.train.sgd(learningRate), iterations);
  return model;
}

/** Multilayer perceptron; hidden sizes come from a "64_64"-style string. */
export async function trainMlp(params: Params, data: DenseData): Promise<tf.LayersModel> {
  const p = takeParams("tfjs_mlp", params, {
    network: "16_16",
    learning_rate: 0.05,
    iterations: 100,
    seed: 0,
  });
  const learningRate = asNumber("tfjs_mlp", "learning_rate", p.learning_rate, 1e-12);
  const iterations = asInt("tfjs_mlp", "iterations", p.iterations, 0);
  const seed = asInt("tfjs_mlp", "seed", p.seed, 0);
  if (typeof p.network !== "string" || !/^\d+(_\d+)*$/.test(p.network)) {
    throw new Error(`tfjs_mlp: parameter 'network' must look like "64_64", got ${JSON.stringify(p.network)}`);
  }
  const sizes = p.network.split("_").map(Number);
  const model = tf.sequential();
  sizes.forEach((units, i) => {
    model.add(tf.layers.dense({
      units,
      activation: "relu",
      ...(i === 0 ? { inputShape: [data.features[0].length] } : {}),
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + i }),
      biasInitializer: "zeros",
    }));
  });
  model.add(tf.layers.dense({
    units: 1,
    activation: "sigmoid",
    kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 1000 }),
    biasInitializer: "zeros",
  }));
  await fit(model, data, tf.train.adam(learningRate), iterations);
  return model;
}

export const ALGORITHMS: Record<string, (params: Params, data: DenseData) => Promise<tf.LayersModel>> = {
  tfjs_logistic: trainLogistic,
  tfjs_mlp: trainMlp,
};

/** Score every row; clamping guards against float32 drift outside [0, 1]. */
export function score(model: tf.LayersModel, data: DenseData): number[] {
  const xs = tf.tensor2d(data.features);
  try {
    const out = model.predict(xs) as tf.Tensor;
    const values = Array.from(out.dataSync());
    out.dispose();
    return values.map((v) => Math.min(1, Math.max(0, v)));
  } finally {
    xs.dispose();
  }
}
