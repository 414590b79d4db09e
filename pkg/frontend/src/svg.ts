/** Deterministic SVG assembly: fixed canvas, fixed fonts, no randomness. */

export const WIDTH = 1200;

/** Colors encode the system size; palette is keyed by sorted L order. */
export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2",
];

export function colorForL(allL: number[], L: number): string {
  const sorted = [...new Set(allL)].sort((a, b) => a - b);
  return PALETTE[sorted.indexOf(L) % PALETTE.length];
}

export interface Frame {
  x: number;
  y: number;
  w: number;
  h: number;
  xlim: [number, number];
  ylim: [number, number];
}

function pad(lo: number, hi: number): [number, number] {
  if (!(hi > lo)) {
    const eps = Math.abs(lo) > 0 ? Math.abs(lo) * 0.1 : 1.0;
    return [lo - eps, hi + eps];
  }
  const margin = (hi - lo) * 0.06;
  return [lo - margin, hi + margin];
}

export function frameFor(
  x: number, y: number, w: number, h: number,
  xs: number[], ys: number[],
): Frame {
  const finite = (v: number) => Number.isFinite(v);
  const fx = xs.filter(finite);
  const fy = ys.filter(finite);
  const xlim = pad(Math.min(...fx), Math.max(...fx));
  const ylim = pad(Math.min(...fy), Math.max(...fy));
  return { x, y, w, h, xlim, ylim };
}

export function toPx(f: Frame, x: number, y: number): [number, number] {
  const px = f.x + ((x - f.xlim[0]) / (f.xlim[1] - f.xlim[0])) * f.w;
  const py = f.y + f.h - ((y - f.ylim[0]) / (f.ylim[1] - f.ylim[0])) * f.h;
  return [round2(px), round2(py)];
}

function round2(v: number): number {
  return Math.round(v * 100) / 100;
}

function fmtTick(v: number): string {
  const a = Math.abs(v);
  if (a !== 0 && (a >= 1e4 || a < 1e-3)) return v.toExponential(1);
  return String(round2(v) === Math.trunc(round2(v))
    ? Math.trunc(round2(v))
    : round2(v));
}

function ticks(lo: number, hi: number, n = 5): number[] {
  const out: number[] = [];
  for (let i = 0; i <= n; i++) out.push(lo + ((hi - lo) * i) / n);
  return out;
}

export class Svg {
  private parts: string[] = [];
  constructor(readonly width: number, readonly height: number) {}

  raw(s: string): void {
    this.parts.push(s);
  }

  text(x: number, y: number, s: string, size = 13, anchor = "start"): void {
    this.raw(
      `<text x="${round2(x)}" y="${round2(y)}" font-size="${size}" ` +
      `font-family="Helvetica, Arial, sans-serif" text-anchor="${anchor}">` +
      `${escapeXml(s)}</text>`,
    );
  }

  axes(f: Frame, xlabel: string, ylabel: string, title: string): void {
    this.raw(
      `<rect x="${f.x}" y="${f.y}" width="${f.w}" height="${f.h}" ` +
      `fill="none" stroke="#333" stroke-width="1"/>`,
    );
    for (const t of ticks(f.xlim[0], f.xlim[1])) {
      const [px] = toPx(f, t, f.ylim[0]);
      this.raw(`<line x1="${px}" y1="${round2(f.y + f.h)}" x2="${px}" ` +
        `y2="${round2(f.y + f.h + 4)}" stroke="#333"/>`);
      this.text(px, f.y + f.h + 16, fmtTick(t), 10, "middle");
    }
    for (const t of ticks(f.ylim[0], f.ylim[1])) {
      const [, py] = toPx(f, f.xlim[0], t);
      this.raw(`<line x1="${round2(f.x - 4)}" y1="${py}" x2="${f.x}" ` +
        `y2="${py}" stroke="#333"/>`);
      this.text(f.x - 6, py + 3, fmtTick(t), 10, "end");
    }
    this.text(f.x + f.w / 2, f.y + f.h + 32, xlabel, 12, "middle");
    this.raw(
      `<text x="${round2(f.x - 44)}" y="${round2(f.y + f.h / 2)}" ` +
      `font-size="12" font-family="Helvetica, Arial, sans-serif" ` +
      `text-anchor="middle" transform="rotate(-90 ${round2(f.x - 44)} ` +
      `${round2(f.y + f.h / 2)})">${escapeXml(ylabel)}</text>`,
    );
    this.text(f.x + f.w / 2, f.y - 8, title, 13, "middle");
  }

  series(
    f: Frame, xs: number[], ys: number[], color: string, label: string,
    withLine = true,
  ): void {
    const pts = xs
      .map((x, i) => [x, ys[i]] as [number, number])
      .filter(([x, y]) => Number.isFinite(x) && Number.isFinite(y))
      .sort((a, b) => a[0] - b[0]);
    const px = pts.map(([x, y]) => toPx(f, x, y));
    let body = "";
    if (withLine && px.length > 1) {
      const d = px.map(([a, b]) => `${a},${b}`).join(" ");
      body += `<polyline points="${d}" fill="none" stroke="${color}" ` +
        `stroke-width="1.5"/>`;
    }
    for (const [a, b] of px) {
      body += `<circle cx="${a}" cy="${b}" r="2.6" fill="${color}"/>`;
    }
    this.raw(`<g class="series" data-label="${escapeXml(label)}">${body}</g>`);
  }

  dashedCurve(f: Frame, xs: number[], ys: number[], color: string): void {
    const px = xs.map((x, i) => toPx(f, x, ys[i]));
    const d = px.map(([a, b]) => `${a},${b}`).join(" ");
    this.raw(`<polyline class="fit" points="${d}" fill="none" ` +
      `stroke="${color}" stroke-width="1.2" stroke-dasharray="6 4"/>`);
  }

  legend(x: number, y: number, entries: [string, string][]): void {
    let body = "";
    entries.forEach(([label, color], i) => {
      const yy = y + i * 16;
      body += `<rect x="${x}" y="${yy - 8}" width="14" height="3" ` +
        `fill="${color}"/>`;
      body += `<text x="${x + 20}" y="${yy - 2}" font-size="11" ` +
        `font-family="Helvetica, Arial, sans-serif">${escapeXml(label)}</text>`;
    });
    this.raw(`<g class="legend">${body}</g>`);
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>` +
      this.parts.join("") +
      `</svg>\n`
    );
  }
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Symmetric blue-white-red map for values in [-1, 1]. */
export function divergingColor(v: number): string {
  const t = Math.max(-1, Math.min(1, v));
  let r: number, g: number, b: number;
  if (t < 0) {
    // blue (-1) to white (0)
    const u = 1 + t;
    r = Math.round(49 + (255 - 49) * u);
    g = Math.round(54 + (255 - 54) * u);
    b = Math.round(149 + (255 - 149) * u);
  } else {
    // white (0) to red (+1)
    const u = 1 - t;
    r = Math.round(165 + (255 - 165) * u);
    g = Math.round(0 + 255 * u);
    b = Math.round(38 + (255 - 38) * u);
  }
  return `rgb(${r},${g},${b})`;
}
