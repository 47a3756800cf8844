/**
 * Typed client for the explanation service.
 *
 * Structured service errors (`{error_code, message}`) become ApiError and are
 * shown verbatim; transport failures become ServiceUnreachable so the panel
 * can offer a retry. At most one solve is in flight per client: starting a
 * new counterfactual or attribution request aborts the previous one.
 */

import type {
  ApiErrorBody,
  AttributionRequest,
  AttributionResult,
  CounterfactualRequest,
  CounterfactualResult,
  ModelSummary,
  PredictionResponse,
} from "./types.js";

export class ApiError extends Error {
  readonly errorCode: string;
  readonly status: number;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.errorCode = body.error_code;
    this.status = status;
  }
}

export class ServiceUnreachable extends Error {
  constructor(baseUrl: string, cause?: unknown) {
    super(`service unreachable at ${baseUrl}`);
    this.cause = cause;
  }
}

export class WhatIfClient {
  private solveAbort: AbortController | null = null;

  constructor(readonly baseUrl: string,
              private readonly fetchFn: typeof fetch = fetch) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") throw err;
      throw new ServiceUnreachable(this.baseUrl, err);
    }
    const text = await response.text();
    if (!response.ok) {
      let body: ApiErrorBody;
      try {
        body = JSON.parse(text) as ApiErrorBody;
      } catch {
        body = { error_code: `HTTP${response.status}`, message: text };
      }
      throw new ApiError(response.status, body);
    }
    return JSON.parse(text) as T;
  }

  private post<T>(path: string, payload: unknown, signal?: AbortSignal): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
      signal,
    });
  }

  /** Aborts the previous solve, if any, and returns a fresh signal. */
  private nextSolveSignal(): AbortSignal {
    this.solveAbort?.abort();
    this.solveAbort = new AbortController();
    return this.solveAbort.signal;
  }

  health(): Promise<{ status: string; model_loaded: boolean }> {
    return this.request("/health");
  }

  modelSummary(): Promise<ModelSummary> {
    return this.request("/model/summary");
  }

  predict(instance: number[]): Promise<PredictionResponse> {
    return this.post("/predict", { instance });
  }

  counterfactual(body: CounterfactualRequest): Promise<CounterfactualResult> {
    return this.post("/counterfactual", body, this.nextSolveSignal());
  }

  attribution(body: AttributionRequest): Promise<AttributionResult> {
    return this.post("/attribution", body, this.nextSolveSignal());
  }
}
