/** Panel builders: CSV tables in, SVG text out. */

import { readFileSync } from "node:fs";
import {
  numericColumn, parseCsv, parseMatrix, requireColumns, SchemaError, Table,
} from "./csv.js";
import {
  colorForL, divergingColor, Frame, frameFor, Svg, toPx, WIDTH,
} from "./svg.js";

export const PANEL_KINDS = [
  "sweep", "sweep_mean", "sweep_var", "scaling", "density", "corr_image",
] as const;
export type PanelKind = (typeof PANEL_KINDS)[number];

export interface PanelSpec {
  kind: PanelKind;
  inputs: string[];
  output: string;
  observables?: string[];
}

const DEFAULT_OBSERVABLES = ["energy_density", "c_afm", "c_xy"];

interface SeriesByL {
  L: number;
  xs: number[];
  ys: number[];
}

function groupByL(
  table: Table, valueColumn: string,
): { allL: number[]; series: SeriesByL[] } {
  requireColumns(table, ["L", "param_value", valueColumn]);
  const L = numericColumn(table, "L");
  const x = numericColumn(table, "param_value");
  const y = numericColumn(table, valueColumn);
  const byL = new Map<number, SeriesByL>();
  for (let i = 0; i < L.length; i++) {
    if (!byL.has(L[i])) byL.set(L[i], { L: L[i], xs: [], ys: [] });
    const s = byL.get(L[i])!;
    s.xs.push(x[i]);
    s.ys.push(y[i]);
  }
  const series = [...byL.values()].sort((a, b) => a.L - b.L);
  return { allL: series.map((s) => s.L), series };
}

function sweepRow(
  svg: Svg, table: Table, prefix: "mean" | "var", observables: string[],
  paramName: string, top: number, panelH: number,
): void {
  const panelW = (WIDTH - 80 * observables.length) / observables.length;
  observables.forEach((obs, i) => {
    const col = `${prefix}_${obs}`;
    const { allL, series } = groupByL(table, col);
    const x0 = 70 + i * (panelW + 80);
    const xs = series.flatMap((s) => s.xs);
    const ys = series.flatMap((s) => s.ys);
    const frame = frameFor(x0, top, panelW, panelH, xs, ys);
    svg.axes(frame, paramName, col, prefix === "mean" ? obs : `Var(${obs})`);
    for (const s of series) {
      svg.series(frame, s.xs, s.ys, colorForL(allL, s.L), `L=${s.L}`);
    }
  });
}

function paramName(table: Table): string {
  const at = table.columns.indexOf("param_name");
  return at >= 0 && table.rows.length > 0 ? table.rows[0][at] : "parameter";
}

export function renderSweep(
  summaryCsv: string, kind: "sweep" | "sweep_mean" | "sweep_var",
  observables = DEFAULT_OBSERVABLES,
): string {
  const table = parseCsv(summaryCsv);
  requireColumns(table, ["ensemble", "L", "param_value"]);
  const rows = kind === "sweep" ? 2 : 1;
  const panelH = 250;
  const height = 60 + rows * (panelH + 70);
  const svg = new Svg(WIDTH, height);
  const xname = "coupling";
  const { allL } = groupByL(
    table,
    `${kind === "sweep_var" ? "var" : "mean"}_${observables[0]}`,
  );
  if (kind === "sweep" || kind === "sweep_mean") {
    sweepRow(svg, table, "mean", observables, xname, 40, panelH);
  }
  if (kind === "sweep" || kind === "sweep_var") {
    const top = kind === "sweep" ? 40 + panelH + 70 : 40;
    sweepRow(svg, table, "var", observables, xname, top, panelH);
  }
  svg.legend(WIDTH - 70, 20,
    allL.map((L) => [`L=${L}`, colorForL(allL, L)] as [string, string]));
  return svg.render();
}

interface StudyPoint {
  L: number;
  mean: number;
}

function studyMeans(table: Table): StudyPoint[] {
  requireColumns(table, ["study", "L", "draw", "value"]);
  const L = numericColumn(table, "L");
  const v = numericColumn(table, "value");
  const acc = new Map<number, number[]>();
  for (let i = 0; i < L.length; i++) {
    if (!acc.has(L[i])) acc.set(L[i], []);
    acc.get(L[i])!.push(v[i]);
  }
  return [...acc.entries()]
    .map(([l, vs]) => ({ L: l, mean: vs.reduce((a, b) => a + b) / vs.length }))
    .sort((a, b) => a.L - b.L);
}

export interface StudyFit {
  exponent?: number | null;
  prefactor?: number | null;
}

/** Three stacked panels: raw quantity vs L, then /sqrt(L), then /L. */
export function renderScaling(studyCsv: string, fit?: StudyFit): string {
  const table = parseCsv(studyCsv);
  const points = studyMeans(table);
  const allL = points.map((p) => p.L);
  const panelH = 210;
  const height = 60 + 3 * (panelH + 64);
  const svg = new Svg(WIDTH, height);
  const scales: [string, (p: StudyPoint) => number][] = [
    ["value", (p) => p.mean],
    ["value / sqrt(L)", (p) => p.mean / Math.sqrt(p.L)],
    ["value / L", (p) => p.mean / p.L],
  ];
  scales.forEach(([label, f], row) => {
    const ys = points.map(f);
    const frame = frameFor(90, 40 + row * (panelH + 64), WIDTH - 180,
      panelH, allL, ys);
    svg.axes(frame, "L", label, label);
    // one marker group per system size so series counts mirror L counts
    for (const p of points) {
      svg.series(frame, [p.L], [f(p)], colorForL(allL, p.L), `L=${p.L}`,
        false);
    }
    svg.dashedCurve(frame, allL, ys, "#555");
    if (row === 0 && fit && fit.exponent != null && fit.prefactor != null) {
      const fys = allL.map((l) => fit.prefactor! * Math.pow(l, fit.exponent!));
      svg.dashedCurve(frame, allL, fys, "#000");
      svg.text(frame.x + frame.w - 8, frame.y + 18,
        `fit: ${fit.prefactor.toFixed(3)} L^${fit.exponent.toFixed(3)}`,
        11, "end");
    }
  });
  return svg.render();
}

/** Overlaid spectral-density histograms, one step series per L. */
export function renderDensity(csvTexts: string[]): string {
  const tables = csvTexts.map(parseCsv);
  for (const t of tables) {
    requireColumns(t, ["L", "delta", "bin_lo", "bin_hi", "mass"]);
  }
  interface Hist { L: number; lo: number[]; hi: number[]; mass: number[] }
  const hists: Hist[] = [];
  for (const t of tables) {
    const L = numericColumn(t, "L");
    const lo = numericColumn(t, "bin_lo");
    const hi = numericColumn(t, "bin_hi");
    const mass = numericColumn(t, "mass");
    const byL = new Map<number, Hist>();
    for (let i = 0; i < L.length; i++) {
      if (!byL.has(L[i])) byL.set(L[i], { L: L[i], lo: [], hi: [], mass: [] });
      const h = byL.get(L[i])!;
      h.lo.push(lo[i]);
      h.hi.push(hi[i]);
      h.mass.push(mass[i]);
    }
    hists.push(...byL.values());
  }
  hists.sort((a, b) => a.L - b.L);
  const allL = hists.map((h) => h.L);
  const height = 460;
  const svg = new Svg(WIDTH, height);
  const xs = hists.flatMap((h) => [...h.lo, ...h.hi]);
  const ys = hists.flatMap((h) => h.mass);
  const frame = frameFor(90, 50, WIDTH - 180, 330, xs, [...ys, 0]);
  svg.axes(frame, "energy density", "probability mass", "spectral density");
  for (const h of hists) {
    const sx: number[] = [];
    const sy: number[] = [];
    for (let i = 0; i < h.lo.length; i++) {
      sx.push(h.lo[i], h.hi[i]);
      sy.push(h.mass[i], h.mass[i]);
    }
    const px = sx.map((x, i) => toPx(frame, x, sy[i]));
    const d = px.map(([a, b]) => `${a},${b}`).join(" ");
    svg.raw(`<g class="series" data-label="L=${h.L}">` +
      `<polyline points="${d}" fill="none" ` +
      `stroke="${colorForL(allL, h.L)}" stroke-width="1.5"/></g>`);
  }
  svg.legend(WIDTH - 70, 20,
    allL.map((L) => [`L=${L}`, colorForL(allL, L)] as [string, string]));
  return svg.render();
}

/** Heatmap of an L x L correlation matrix, color range fixed to [-1, 1]. */
export function renderCorrImage(matrixCsv: string): string {
  const mat = parseMatrix(matrixCsv);
  const n = mat.length;
  const cell = Math.min(40, Math.floor(720 / n));
  const size = cell * n;
  const x0 = 80;
  const y0 = 50;
  const svg = new Svg(x0 + size + 160, y0 + size + 60);
  let body = "";
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const v = mat[i][j];
      if (Math.abs(v) > 1 + 1e-9) {
        throw new SchemaError(`correlation value out of range: ${v}`);
      }
      body += `<rect class="cell" x="${x0 + j * cell}" y="${y0 + i * cell}" ` +
        `width="${cell}" height="${cell}" fill="${divergingColor(v)}"/>`;
    }
  }
  svg.raw(`<g class="heatmap">${body}</g>`);
  svg.raw(`<rect x="${x0}" y="${y0}" width="${size}" height="${size}" ` +
    `fill="none" stroke="#333"/>`);
  svg.text(x0 + size / 2, y0 - 12, `correlation image (${n} x ${n})`, 13,
    "middle");
  // colorbar
  const cbX = x0 + size + 40;
  for (let k = 0; k < 64; k++) {
    const v = 1 - (2 * k) / 63;
    svg.raw(`<rect x="${cbX}" y="${y0 + (k * size) / 64}" width="18" ` +
      `height="${size / 64 + 0.5}" fill="${divergingColor(v)}"/>`);
  }
  svg.text(cbX + 24, y0 + 8, "+1", 11);
  svg.text(cbX + 24, y0 + size, "-1", 11);
  return svg.render();
}

export function renderPanel(spec: PanelSpec): string {
  const texts = spec.inputs.map((p) => readFileSync(p, "utf-8"));
  switch (spec.kind) {
    case "sweep":
    case "sweep_mean":
    case "sweep_var":
      return renderSweep(texts[0], spec.kind, spec.observables);
    case "scaling": {
      let fit: StudyFit | undefined;
      const sidecar = spec.inputs[0].replace(/\.csv$/, ".json");
      try {
        fit = JSON.parse(readFileSync(sidecar, "utf-8")) as StudyFit;
      } catch {
        fit = undefined;
      }
      return renderScaling(texts[0], fit);
    }
    case "density":
      return renderDensity(texts);
    case "corr_image":
      return renderCorrImage(texts[0]);
  }
}
