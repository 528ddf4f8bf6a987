/**
 * Hand-rolled SVG chart builders.
 *
 * Pure functions from data to markup: a log-log curve overlay for
 * SKR vs distance, a level-by-distance step map colored by SKR, and
 * ratio lines with omission markers. No chart library, no DOM access.
 */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  dashed?: boolean;
}

const WIDTH = 640;
const HEIGHT = 400;
const MARGIN = { left: 64, right: 16, top: 18, bottom: 44 };

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo)); Math.pow(10, e) <= hi * 1.0001; e++) {
    ticks.push(Math.pow(10, e));
  }
  return ticks;
}

export function formatSkr(value: number): string {
  if (value === 0) return "0";
  return value.toExponential(3);
}

export function formatDistanceKm(meters: number): string {
  const km = meters / 1000;
  return km >= 1000 ? `${(km / 1000).toFixed(0)}e3 km` : `${km.toFixed(0)} km`;
}

/** Log-log line chart; zero/negative y values are drawn as gaps. */
export function lineChart(series: Series[], yLabel: string, floor = 1e-12): string {
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y).filter((v) => v > floor);
  if (xs.length === 0 || ys.length === 0) {
    return `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img"><text x="20" y="40">no data above ${floor}</text></svg>`;
  }
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = Math.min(...ys);
  const yHi = Math.max(...ys);
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const px = (x: number) =>
    MARGIN.left + ((Math.log10(x) - Math.log10(xLo)) / Math.max(Math.log10(xHi) - Math.log10(xLo), 1e-12)) * plotW;
  const py = (y: number) =>
    MARGIN.top + plotH - ((Math.log10(y) - Math.log10(yLo)) / Math.max(Math.log10(yHi) - Math.log10(yLo), 1e-12)) * plotH;

  const parts: string[] = [
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" class="chart">`,
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" class="plot-bg"/>`,
  ];
  for (const tick of logTicks(xLo, xHi)) {
    const x = px(tick);
    parts.push(`<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${MARGIN.top + plotH}" class="grid"/>`);
    parts.push(`<text x="${x}" y="${HEIGHT - 24}" class="tick" text-anchor="middle">${formatDistanceKm(tick)}</text>`);
  }
  for (const tick of logTicks(yLo, yHi)) {
    const y = py(tick);
    parts.push(`<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" class="grid"/>`);
    parts.push(`<text x="${MARGIN.left - 6}" y="${y + 4}" class="tick" text-anchor="end">1e${Math.round(Math.log10(tick))}</text>`);
  }
  series.forEach((s) => {
    const segments: string[][] = [[]];
    s.x.forEach((x, i) => {
      const y = s.y[i];
      if (y > floor) {
        segments[segments.length - 1].push(`${px(x).toFixed(1)},${py(y).toFixed(1)}`);
      } else if (segments[segments.length - 1].length > 0) {
        segments.push([]);
      }
    });
    for (const seg of segments) {
      if (seg.length > 1) {
        parts.push(
          `<polyline points="${seg.join(" ")}" fill="none" stroke="${s.color}"` +
            `${s.dashed ? ' stroke-dasharray="6 4"' : ""} stroke-width="2"><title>${esc(s.label)}</title></polyline>`,
        );
      } else if (seg.length === 1) {
        const [x, y] = seg[0].split(",");
        parts.push(`<circle cx="${x}" cy="${y}" r="3" fill="${s.color}"/>`);
      }
    }
  });
  parts.push(`<text x="${MARGIN.left}" y="12" class="axis-label">${esc(yLabel)}</text>`);
  let legendY = MARGIN.top + 14;
  for (const s of series) {
    parts.push(
      `<line x1="${WIDTH - 170}" y1="${legendY - 4}" x2="${WIDTH - 146}" y2="${legendY - 4}" stroke="${s.color}"` +
        `${s.dashed ? ' stroke-dasharray="6 4"' : ""} stroke-width="2"/>`,
    );
    parts.push(`<text x="${WIDTH - 140}" y="${legendY}" class="legend">${esc(s.label)}</text>`);
    legendY += 16;
  }
  parts.push("</svg>");
  return parts.join("");
}

/** Viridis-ish three-stop color scale on [0, 1]. */
export function skrColor(fraction: number): string {
  const t = Math.max(0, Math.min(1, fraction));
  const stops = [
    [68, 1, 84],
    [33, 145, 140],
    [253, 231, 37],
  ];
  const seg = t < 0.5 ? 0 : 1;
  const local = (t - seg * 0.5) * 2;
  const mix = (a: number, b: number) => Math.round(a + (b - a) * local);
  const [r, g, b] = [0, 1, 2].map((i) => mix(stops[seg][i], stops[seg + 1][i]));
  return `rgb(${r},${g},${b})`;
}

export interface StepMapCell {
  distanceIndex: number;
  level: number;
  steps: number;
}

/**
 * Schedule map: distillation steps per protocol level across distances,
 * with a per-distance SKR color strip underneath.
 */
export function stepMap(
  distances: number[],
  schedules: number[][],
  skrs: number[],
  negligible = 1e-10,
): string {
  if (schedules.length === 0) {
    return `<svg viewBox="0 0 ${WIDTH} 80"><text x="20" y="40">no schedules</text></svg>`;
  }
  const levels = Math.max(...schedules.map((s) => s.length));
  const maxSteps = Math.max(1, ...schedules.flat());
  const cellW = Math.min(36, (WIDTH - MARGIN.left - MARGIN.right) / distances.length);
  const cellH = 22;
  const height = MARGIN.top + levels * cellH + 40;
  const positives = skrs.filter((v) => v > negligible);
  const logLo = positives.length ? Math.log10(Math.min(...positives)) : 0;
  const logHi = positives.length ? Math.log10(Math.max(...positives)) : 1;
  const parts = [`<svg viewBox="0 0 ${WIDTH} ${height}" role="img" class="chart">`];
  schedules.forEach((schedule, d) => {
    schedule.forEach((steps, level) => {
      const x = MARGIN.left + d * cellW;
      const y = MARGIN.top + (levels - 1 - level) * cellH;
      const shade = steps === 0 ? "#f4f4f4" : skrColor(0.25 + (0.75 * steps) / maxSteps);
      parts.push(
        `<rect x="${x}" y="${y}" width="${cellW - 2}" height="${cellH - 2}" fill="${shade}" ` +
          `data-level="${level}" data-distance="${d}" data-steps="${steps}">` +
          `<title>level ${level}, ${steps} steps</title></rect>`,
      );
      if (steps > 0) {
        parts.push(
          `<text x="${x + cellW / 2 - 1}" y="${y + cellH / 2 + 4}" text-anchor="middle" class="cell">${steps}</text>`,
        );
      }
    });
    const skr = skrs[d];
    const y = MARGIN.top + levels * cellH + 4;
    const fraction =
      skr > negligible && logHi > logLo ? (Math.log10(skr) - logLo) / (logHi - logLo) : skr > negligible ? 1 : 0;
    const fill = skr > negligible ? skrColor(fraction) : "#ddd";
    parts.push(
      `<rect x="${MARGIN.left + d * cellW}" y="${y}" width="${cellW - 2}" height="10" fill="${fill}" data-skr="${skr}">` +
        `<title>skr ${formatSkr(skr)}</title></rect>`,
    );
  });
  for (let level = 0; level < levels; level++) {
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${MARGIN.top + (levels - 1 - level) * cellH + 15}" text-anchor="end" class="tick">L${level}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

export interface RatioPoint {
  n: number;
  inverseRatio: number | null; // LD/GD; below 1 means the global policy wins
  omitted: boolean;
  omissionReason: string | null;
}

/** Inverse plateau-ratio lines; omitted points render as hollow markers. */
export function ratioChart(linesByLabel: Record<string, RatioPoint[]>, colors: string[]): string {
  const entries = Object.entries(linesByLabel);
  const ns = entries.flatMap(([, pts]) => pts.map((p) => p.n));
  const values = entries.flatMap(([, pts]) =>
    pts.filter((p) => !p.omitted && p.inverseRatio !== null && p.inverseRatio > 0).map((p) => p.inverseRatio as number),
  );
  if (ns.length === 0) {
    return `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}"><text x="20" y="40">no ratio data</text></svg>`;
  }
  const xLo = Math.min(...ns);
  const xHi = Math.max(...ns);
  const yLo = Math.min(0.05, ...values);
  const yHi = Math.max(2, ...values);
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const px = (n: number) =>
    MARGIN.left + ((Math.log2(n) - Math.log2(xLo)) / Math.max(Math.log2(xHi) - Math.log2(xLo), 1e-12)) * plotW;
  const py = (v: number) =>
    MARGIN.top + plotH - ((Math.log10(v) - Math.log10(yLo)) / Math.max(Math.log10(yHi) - Math.log10(yLo), 1e-12)) * plotH;
  const parts = [`<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" class="chart">`];
  const one = py(1.0);
  parts.push(`<line x1="${MARGIN.left}" y1="${one}" x2="${MARGIN.left + plotW}" y2="${one}" class="unit-line"/>`);
  parts.push(`<text x="${MARGIN.left + plotW - 4}" y="${one - 6}" text-anchor="end" class="tick">LD = GD</text>`);
  for (const n of ns.filter((v, i, arr) => arr.indexOf(v) === i)) {
    parts.push(`<text x="${px(n)}" y="${HEIGHT - 24}" text-anchor="middle" class="tick">${n}</text>`);
  }
  entries.forEach(([label, pts], index) => {
    const color = colors[index % colors.length];
    const kept = pts.filter((p) => !p.omitted && p.inverseRatio !== null && p.inverseRatio > 0);
    if (kept.length > 1) {
      const path = kept.map((p) => `${px(p.n).toFixed(1)},${py(p.inverseRatio as number).toFixed(1)}`).join(" ");
      parts.push(`<polyline points="${path}" fill="none" stroke="${color}" stroke-width="2"><title>${esc(label)}</title></polyline>`);
    }
    for (const p of kept) {
      parts.push(`<circle cx="${px(p.n)}" cy="${py(p.inverseRatio as number)}" r="4" fill="${color}" data-n="${p.n}"/>`);
    }
    for (const p of pts.filter((q) => q.omitted)) {
      parts.push(
        `<circle cx="${px(p.n)}" cy="${MARGIN.top + plotH - 8}" r="4" fill="none" stroke="${color}" ` +
          `stroke-width="1.5" class="omitted" data-n="${p.n}"><title>${esc(p.omissionReason ?? "omitted")}</title></circle>`,
      );
    }
    parts.push(
      `<text x="${WIDTH - 160}" y="${MARGIN.top + 14 + index * 16}" class="legend" fill="${color}">${esc(label)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}
