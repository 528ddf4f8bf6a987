/** Bootstrap: wires the what-if panel and sweep browser into the page. */

import { ApiClient } from "./api.js";
import { ScheduleEditorState } from "./schedule.js";
import { SweepBrowser, pointKey, stepMapFor } from "./sweeps.js";
import { WhatIfPanel, type WhatIfParams } from "./whatif.js";

const api = new ApiClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function readParams(): WhatIfParams {
  const distances: number[] = [];
  const lo = Number((el<HTMLInputElement>("distance-lo")).value) * 1000;
  const hi = Number((el<HTMLInputElement>("distance-hi")).value) * 1000;
  const points = 12;
  for (let i = 0; i < points; i++) {
    distances.push(lo * Math.pow(hi / lo, i / (points - 1)));
  }
  return {
    segments: Number(el<HTMLSelectElement>("segments").value),
    multiplexing: Number(el<HTMLSelectElement>("multiplexing").value),
    coupling_eff: Number(el<HTMLInputElement>("coupling").value),
    gate_error: Number(el<HTMLSelectElement>("gate-error").value),
    distances_m: distances,
    fth_threshold: Number(el<HTMLInputElement>("fth").value),
  };
}

function renderEditor(panel: WhatIfPanel): void {
  const host = el<HTMLDivElement>("schedule-editor");
  host.innerHTML = "";
  panel.editor.steps.forEach((steps, level) => {
    const row = document.createElement("div");
    row.className = "schedule-row";
    const label = document.createElement("span");
    label.textContent = level < panel.editor.steps.length - 1 ? `level ${level}` : "end-to-end";
    const minus = document.createElement("button");
    minus.textContent = "-";
    minus.onclick = () => panel.editStep(level, Math.max(0, panel.editor.steps[level] - 1));
    const count = document.createElement("span");
    count.className = "count";
    count.textContent = String(steps);
    const plus = document.createElement("button");
    plus.textContent = "+";
    plus.onclick = () => panel.editStep(level, panel.editor.steps[level] + 1);
    row.append(label, minus, count, plus);
    host.append(row);
  });
}

function wireWhatIf(): WhatIfPanel {
  const panel = new WhatIfPanel(api, readParams());
  panel.onRender = (vm) => {
    el("budget-gauge").textContent =
      `budget ${vm.spent}/${vm.budget} used, ${vm.remaining} remaining`;
    el("budget-gauge").classList.toggle("exhausted", vm.remaining === 0);
    const status = el("whatif-status");
    status.textContent = vm.error ? vm.error : vm.stale ? "evaluating..." : "up to date";
    status.classList.toggle("error", vm.error !== null);
    status.classList.toggle("stale", vm.stale && !vm.error);
    el("whatif-chart").innerHTML = panel.chartMarkup();
    const list = el("skr-readout");
    list.innerHTML = "";
    vm.manualSkrs.forEach((text, i) => {
      const item = document.createElement("li");
      const km = (panel.params.distances_m[i] / 1000).toFixed(0);
      item.textContent = `${km} km: ${text}`;
      item.dataset.skr = text;
      list.append(item);
    });
    renderEditor(panel);
  };
  el("apply-params").onclick = () => {
    try {
      panel.setParams(readParams());
    } catch (err) {
      el("whatif-status").textContent = String(err);
    }
  };
  panel.setParams(readParams());
  return panel;
}

async function wireSweeps(): Promise<void> {
  const browser = new SweepBrowser(api);
  const select = el<HTMLSelectElement>("sweep-select");
  const summaries = await browser.loadSweeps().catch(() => []);
  if (summaries.length === 0) {
    el("sweep-empty").hidden = false;
    return;
  }
  for (const sweep of summaries) {
    const option = document.createElement("option");
    option.value = sweep.id;
    option.textContent = `${sweep.id} (${sweep.record_count} records)`;
    select.append(option);
  }
  const renderSweep = () => {
    const points = browser.visiblePoints();
    const host = el("sweep-points");
    host.innerHTML = "";
    for (const point of points) {
      const section = document.createElement("section");
      const title = document.createElement("h3");
      title.textContent = pointKey(point);
      section.append(title);
      for (const policy of Object.keys(point.policies).sort()) {
        const sub = document.createElement("h4");
        sub.textContent = `schedule map: ${policy}`;
        const div = document.createElement("div");
        div.innerHTML = stepMapFor(point, policy);
        section.append(sub, div);
      }
      host.append(section);
    }
    const errors = [...new Set(browser.plateau.map((r) => r.gate_error))].sort();
    const ratios = el("ratio-charts");
    ratios.innerHTML = "";
    for (const gateError of errors) {
      for (const rule of ["skr", "fth"] as const) {
        const head = document.createElement("h4");
        head.textContent = `inverse plateau ratio vs ${rule} rule, gate error ${gateError}`;
        const div = document.createElement("div");
        div.innerHTML = browser.ratioMarkup(rule, gateError);
        const markers = browser.omissionMarkers(rule, gateError);
        if (markers.length > 0) {
          const note = document.createElement("p");
          note.className = "legend";
          note.textContent =
            "omitted: " + markers.map((m) => `N=${m.n} (${m.reason})`).join(", ");
          div.append(note);
        }
        ratios.append(head, div);
      }
    }
  };
  select.onchange = async () => {
    await browser.open(select.value);
    renderSweep();
  };
  el<HTMLSelectElement>("eps-filter").onchange = async (event) => {
    const raw = (event.target as HTMLSelectElement).value;
    await browser.setGateErrorFilter(raw === "" ? null : Number(raw));
    renderSweep();
  };
  await browser.open(summaries[0].id);
  renderSweep();
}

export function start(): void {
  wireWhatIf();
  void wireSweeps();
}

if (typeof document !== "undefined" && document.getElementById("whatif-chart")) {
  start();
}

export { ScheduleEditorState };
