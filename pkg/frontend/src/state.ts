/**
 * Session state for the what-if panel and the pure helpers that evolve it.
 *
 * The UI layer calls these and re-renders; nothing here touches the DOM or
 * the network, which keeps the decision logic unit-testable. The model
 * itself is never evaluated client-side: every prediction on display came
 * from a service round-trip.
 */

import type {
  AttributionResult,
  CounterfactualResult,
  ModelSummary,
  PredictionResponse,
} from "./types.js";

export interface RequestFlags {
  predict: boolean;
  explain: boolean;
  attribution: boolean;
}

export interface SessionState {
  summary: ModelSummary;
  values: number[];
  frozen: Set<number>;
  lastPrediction: PredictionResponse | null;
  lastCounterfactual: CounterfactualResult | null;
  lastAttribution: AttributionResult | null;
  inFlight: RequestFlags;
  banner: string | null;
}

export function midpointValues(summary: ModelSummary): number[] {
  return summary.feature_ranges.map(([lo, hi]) => (lo + hi) / 2);
}

export function newSession(summary: ModelSummary, instance?: number[]): SessionState {
  const values = instance ? instance.slice() : midpointValues(summary);
  if (values.length !== summary.n_features) {
    throw new Error(`instance has ${values.length} values, model expects ${summary.n_features}`);
  }
  return {
    summary,
    values: values.map((v, f) => clampToRange(summary, f, v)),
    frozen: new Set<number>(),
    lastPrediction: null,
    lastCounterfactual: null,
    lastAttribution: null,
    inFlight: { predict: false, explain: false, attribution: false },
    banner: null,
  };
}

export function clampToRange(summary: ModelSummary, feature: number, value: number): number {
  const range = summary.feature_ranges[feature];
  if (!range) throw new Error(`feature ${feature} out of range`);
  const [lo, hi] = range;
  return Math.min(Math.max(value, lo), hi);
}

/** Slider move: clamp into the feature's range and drop stale results. */
export function setValue(state: SessionState, feature: number, value: number): void {
  state.values[feature] = clampToRange(state.summary, feature, value);
  state.lastPrediction = null;
  state.lastCounterfactual = null;
}

export function toggleFrozen(state: SessionState, feature: number): void {
  if (state.frozen.has(feature)) {
    state.frozen.delete(feature);
  } else {
    state.frozen.add(feature);
  }
}

/**
 * Overwrite slider values with a counterfactual's suggestions. Unchanged
 * features keep their exact current values; frozen features are asserted
 * untouched (the engine already guarantees it).
 */
export function applyCounterfactual(state: SessionState, result: CounterfactualResult): void {
  for (const change of result.changes) {
    if (state.frozen.has(change.feature_index)) {
      throw new Error(`recipe touches frozen feature ${change.feature_index}`);
    }
    state.values[change.feature_index] = change.new_value;
  }
  state.lastPrediction = null;
}

export interface RecipeRow {
  name: string;
  original: number;
  target: number;
  crossed: number[];
  percent: number;
}

export function recipeRows(result: CounterfactualResult): RecipeRow[] {
  return result.changes.map((c) => ({
    name: c.name,
    original: c.original_value,
    target: c.new_value,
    crossed: c.crossed_thresholds,
    percent: c.percent_change_of_range,
  }));
}

export interface Bar {
  name: string;
  percent: number;
  /** Bar length as a fraction of the largest magnitude in the recipe. */
  fraction: number;
}

export function percentBars(result: CounterfactualResult): Bar[] {
  const peak = Math.max(...result.changes.map((c) => Math.abs(c.percent_change_of_range)), 1e-12);
  return result.changes.map((c) => ({
    name: c.name,
    percent: c.percent_change_of_range,
    fraction: Math.abs(c.percent_change_of_range) / peak,
  }));
}

export function attributionRows(result: AttributionResult, summary: ModelSummary,
                                topN = 10): { name: string; phi: number }[] {
  return result.ranking.slice(0, topN).map((f) => ({
    name: summary.feature_names[f] ?? `feature ${f}`,
    phi: result.phi[f] ?? 0,
  }));
}

export function classLabel(cls: number): string {
  return `class ${cls}`;
}

export function formatValue(v: number): string {
  if (v === 0) return "0";
  const magnitude = Math.abs(v);
  if (magnitude >= 1000 || magnitude < 0.001) return v.toExponential(3);
  return v.toFixed(4).replace(/0+$/, "").replace(/\.$/, "");
}
