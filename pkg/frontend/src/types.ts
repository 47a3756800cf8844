/**
 * Payload types mirroring the explanation service JSON API field for field.
 */

export interface ModelSummary {
  n_features: number;
  n_classes: number;
  n_trees: number;
  feature_names: string[];
  feature_ranges: [number, number][];
}

export interface PredictionResponse {
  prediction: number;
  votes: number[];
}

export interface FeatureChange {
  feature_index: number;
  name: string;
  original_value: number;
  new_value: number;
  crossed_thresholds: number[];
  percent_change_of_range: number;
}

export interface CounterfactualResult {
  original_class: number;
  new_class: number;
  final_delta: number;
  iterations: number;
  changes: FeatureChange[];
  counterexample: number[];
}

export interface AttributionResult {
  method: string;
  phi: number[];
  baseline: number;
  ranking: number[];
  stderr: number[] | null;
}

export interface CounterfactualRequest {
  instance: number[];
  delta0?: number;
  growth?: number;
  frozen?: (number | string)[];
  epsilon_fraction?: number;
  max_delta?: number;
}

export interface AttributionRequest {
  instance: number[];
  method: "shapley-exact" | "shapley-mc" | "lime";
  seed?: number;
  n_permutations?: number;
  n_samples?: number;
}

/** Structured error body emitted by the service for 4xx/5xx responses. */
export interface ApiErrorBody {
  error_code: string;
  message: string;
}
