/**
 * Bootstrap: read the service base URL (?service=... or same origin), load
 * the model summary, then wire SessionState, the API client and the panel
 * together. Solves never overlap: a new explain/attribute cancels the
 * previous request (see WhatIfClient).
 */

import { ApiError, ServiceUnreachable, WhatIfClient } from "./api.js";
import { SessionState, applyCounterfactual, newSession, setValue, toggleFrozen } from "./state.js";
import { PanelHandlers, WhatIfPanel } from "./ui.js";

function describeError(err: unknown): string {
  if (err instanceof ApiError) return `${err.errorCode}: ${err.message}`;
  if (err instanceof ServiceUnreachable) return err.message;
  if (err instanceof DOMException && err.name === "AbortError") return "";
  return String(err);
}

async function boot(root: HTMLElement): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const baseUrl = params.get("service") ?? "";
  const client = new WhatIfClient(baseUrl);

  let summary;
  try {
    summary = await client.modelSummary();
  } catch (err) {
    root.textContent = `cannot load model summary: ${describeError(err)}`;
    return;
  }

  const state: SessionState = newSession(summary);
  let panel: WhatIfPanel;

  const report = (err: unknown) => {
    const text = describeError(err);
    if (text) state.banner = text;
  };

  const refreshPrediction = async () => {
    state.inFlight.predict = true;
    state.banner = null;
    panel.render();
    try {
      state.lastPrediction = await client.predict(state.values);
    } catch (err) {
      report(err);
    } finally {
      state.inFlight.predict = false;
      panel.render();
    }
  };

  const handlers: PanelHandlers = {
    onValueChange(feature, value) {
      setValue(state, feature, value);
      panel.render();
    },
    onToggleFrozen(feature) {
      toggleFrozen(state, feature);
      panel.render();
    },
    onPredict() {
      void refreshPrediction();
    },
    async onExplain() {
      state.inFlight.explain = true;
      state.banner = null;
      panel.render();
      try {
        state.lastCounterfactual = await client.counterfactual({
          instance: state.values.slice(),
          frozen: [...state.frozen],
        });
      } catch (err) {
        report(err);
      } finally {
        state.inFlight.explain = false;
        panel.render();
      }
    },
    onApply() {
      if (!state.lastCounterfactual) return;
      applyCounterfactual(state, state.lastCounterfactual);
      panel.render();
      void refreshPrediction();
    },
    async onAttribute(method) {
      state.inFlight.attribution = true;
      state.banner = null;
      panel.render();
      try {
        state.lastAttribution = await client.attribution({
          instance: state.values.slice(),
          method: method as "shapley-mc" | "lime",
        });
      } catch (err) {
        report(err);
      } finally {
        state.inFlight.attribution = false;
        panel.render();
      }
    },
    onRetry() {
      state.banner = null;
      void refreshPrediction();
    },
  };

  panel = new WhatIfPanel(root, state, handlers);
  void refreshPrediction();
}

const root = document.getElementById("app");
if (root) {
  void boot(root);
}
