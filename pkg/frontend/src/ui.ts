/**
 * DOM rendering for the what-if panel.
 *
 * One render pass rebuilds the dynamic regions (badge, recipe, attribution,
 * banner) from SessionState; sliders are built once and patched in place so
 * dragging stays smooth. All mutations flow through the handlers the panel
 * was constructed with; this module never talks to the network itself.
 */

import {
  SessionState,
  attributionRows,
  classLabel,
  formatValue,
  percentBars,
  recipeRows,
} from "./state.js";

export interface PanelHandlers {
  onValueChange(feature: number, value: number): void;
  onToggleFrozen(feature: number): void;
  onPredict(): void;
  onExplain(): void;
  onApply(): void;
  onAttribute(method: string): void;
  onRetry(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class WhatIfPanel {
  private readonly sliders: HTMLInputElement[] = [];
  private readonly readouts: HTMLElement[] = [];
  private readonly freezes: HTMLInputElement[] = [];
  private readonly badge: HTMLElement;
  private readonly votes: HTMLElement;
  private readonly bannerBox: HTMLElement;
  private readonly recipeBox: HTMLElement;
  private readonly attributionBox: HTMLElement;
  private readonly explainButton: HTMLButtonElement;
  private readonly applyButton: HTMLButtonElement;

  constructor(private readonly root: HTMLElement,
              private readonly state: SessionState,
              private readonly handlers: PanelHandlers) {
    root.replaceChildren();

    this.bannerBox = el("div", "banner hidden");
    root.appendChild(this.bannerBox);

    const header = el("div", "header");
    header.appendChild(el("h1", undefined, "What-if explorer"));
    this.badge = el("span", "badge", "no prediction yet");
    this.votes = el("span", "votes", "");
    header.appendChild(this.badge);
    header.appendChild(this.votes);
    root.appendChild(header);

    const controls = el("div", "controls");
    const predictButton = el("button", undefined, "Predict");
    predictButton.addEventListener("click", () => handlers.onPredict());
    this.explainButton = el("button", undefined, "Explain flip");
    this.explainButton.addEventListener("click", () => handlers.onExplain());
    this.applyButton = el("button", undefined, "Apply counterfactual");
    this.applyButton.addEventListener("click", () => handlers.onApply());
    const methodSelect = el("select") as HTMLSelectElement;
    for (const method of ["shapley-mc", "lime"]) {
      const opt = el("option", undefined, method) as HTMLOptionElement;
      opt.value = method;
      methodSelect.appendChild(opt);
    }
    const attributeButton = el("button", undefined, "Attribute");
    attributeButton.addEventListener("click", () =>
      handlers.onAttribute(methodSelect.value));
    controls.append(predictButton, this.explainButton, this.applyButton,
                    methodSelect, attributeButton);
    root.appendChild(controls);

    const grid = el("div", "sliders");
    this.state.summary.feature_names.forEach((name, f) => {
      const range = this.state.summary.feature_ranges[f] ?? [0, 1];
      const row = el("div", "slider-row");
      const label = el("label", "feature-name", name);
      const slider = el("input") as HTMLInputElement;
      slider.type = "range";
      slider.min = String(range[0]);
      slider.max = String(range[1]);
      slider.step = String((range[1] - range[0]) / 1000 || 0.001);
      slider.addEventListener("input", () =>
        this.handlers.onValueChange(f, Number(slider.value)));
      const readout = el("span", "readout");
      const freeze = el("input") as HTMLInputElement;
      freeze.type = "checkbox";
      freeze.title = "freeze (never change this feature)";
      freeze.addEventListener("change", () => this.handlers.onToggleFrozen(f));
      const freezeWrap = el("label", "freeze");
      freezeWrap.append(freeze, document.createTextNode("freeze"));
      row.append(label, slider, readout, freezeWrap);
      grid.appendChild(row);
      this.sliders.push(slider);
      this.readouts.push(readout);
      this.freezes.push(freeze);
    });
    root.appendChild(grid);

    this.recipeBox = el("div", "recipe");
    root.appendChild(this.recipeBox);
    this.attributionBox = el("div", "attribution");
    root.appendChild(this.attributionBox);

    this.render();
  }

  render(): void {
    const s = this.state;

    if (s.banner) {
      this.bannerBox.className = "banner";
      this.bannerBox.replaceChildren(
        el("span", undefined, s.banner),
      );
      const retry = el("button", undefined, "Retry");
      retry.addEventListener("click", () => this.handlers.onRetry());
      this.bannerBox.appendChild(retry);
    } else {
      this.bannerBox.className = "banner hidden";
      this.bannerBox.replaceChildren();
    }

    s.values.forEach((v, f) => {
      const slider = this.sliders[f];
      const readout = this.readouts[f];
      const freeze = this.freezes[f];
      if (!slider || !readout || !freeze) return;
      if (Number(slider.value) !== v) slider.value = String(v);
      readout.textContent = formatValue(v);
      freeze.checked = s.frozen.has(f);
    });

    if (s.inFlight.predict) {
      this.badge.textContent = "predicting…";
      this.badge.className = "badge pending";
    } else if (s.lastPrediction) {
      this.badge.textContent = classLabel(s.lastPrediction.prediction);
      this.badge.className = `badge class-${s.lastPrediction.prediction}`;
      this.votes.textContent = `votes ${s.lastPrediction.votes.join(" : ")}`;
    } else {
      this.badge.textContent = "no prediction yet";
      this.badge.className = "badge";
      this.votes.textContent = "";
    }

    this.explainButton.disabled = s.inFlight.explain;
    this.explainButton.textContent = s.inFlight.explain ? "solving…" : "Explain flip";
    this.applyButton.disabled = s.lastCounterfactual === null;

    this.renderRecipe();
    this.renderAttribution();
  }

  private renderRecipe(): void {
    const result = this.state.lastCounterfactual;
    this.recipeBox.replaceChildren();
    if (!result) return;

    this.recipeBox.appendChild(el(
      "h2", undefined,
      `Smallest flip: ${classLabel(result.original_class)} → ` +
      `${classLabel(result.new_class)} at δ = ${formatValue(result.final_delta)} ` +
      `(${result.iterations} rounds)`));

    const table = el("table", "recipe-table");
    const head = el("tr");
    for (const title of ["feature", "current", "target", "thresholds crossed"]) {
      head.appendChild(el("th", undefined, title));
    }
    table.appendChild(head);
    for (const row of recipeRows(result)) {
      const tr = el("tr");
      tr.appendChild(el("td", undefined, row.name));
      const orig = el("td");
      orig.appendChild(el("strong", undefined, formatValue(row.original)));
      const target = el("td");
      target.appendChild(el("em", undefined, formatValue(row.target)));
      tr.append(orig, target);
      tr.appendChild(el("td", undefined, row.crossed.map(formatValue).join(", ")));
      table.appendChild(tr);
    }
    this.recipeBox.appendChild(table);

    const bars = el("div", "bars");
    for (const bar of percentBars(result)) {
      const rowEl = el("div", "bar-row");
      rowEl.appendChild(el("span", "bar-label", bar.name));
      const track = el("div", "bar-track");
      const fill = el("div", `bar-fill ${bar.percent >= 0 ? "pos" : "neg"}`);
      fill.style.width = `${(bar.fraction * 100).toFixed(1)}%`;
      track.appendChild(fill);
      rowEl.appendChild(track);
      rowEl.appendChild(el("span", "bar-value",
                           `${bar.percent >= 0 ? "+" : ""}${bar.percent.toFixed(2)}%`));
      bars.appendChild(rowEl);
    }
    this.recipeBox.appendChild(bars);
  }

  private renderAttribution(): void {
    const result = this.state.lastAttribution;
    this.attributionBox.replaceChildren();
    if (!result) return;
    this.attributionBox.appendChild(
      el("h2", undefined, `Attribution (${result.method})`));
    const list = el("ol");
    for (const row of attributionRows(result, this.state.summary)) {
      list.appendChild(el("li", undefined,
                          `${row.name}: ${row.phi.toFixed(4)}`));
    }
    this.attributionBox.appendChild(list);
  }
}
