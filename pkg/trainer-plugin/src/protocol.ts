// Line protocol message shapes, version 1. One JSON object per line on
// stdin/stdout; unknown fields are ignored for forward compatibility.

export const PROTOCOL_VERSION = 1;

export interface HelloMsg {
  type: "hello";
  version: number;
  algorithms: string[];
}

export interface TrainMsg {
  type: "train";
  config_id: number;
  algorithm: string;
  params: Record<string, unknown>;
  data_ref: string;
}

export interface TrainedMsg {
  type: "trained";
  config_id: number;
  model_id: string;
  train_seconds: number;
}

export interface PredictMsg {
  type: "predict";
  model_id: string;
  data_ref: string;
}

export interface ScoresMsg {
  type: "scores";
  model_id: string;
  values: number[];
}

export interface ErrorMsg {
  type: "error";
  message: string;
  config_id?: number;
}

export function emit(msg: HelloMsg | TrainedMsg | ScoresMsg | ErrorMsg): void {
  process.stdout.write(JSON.stringify(msg) + "\n");
}
