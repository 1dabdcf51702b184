/**
 * Backend-neutral chart model. Figures are described as a flat list of draw
 * ops (rects, lines, text); the SVG and PNG backends replay the same ops, so
 * the two outputs always agree and double-rendering is byte-stable.
 */

export type Anchor = "start" | "middle" | "end";

export type Op =
  | { kind: "rect"; x: number; y: number; w: number; h: number; fill: string }
  | {
      kind: "line";
      x1: number;
      y1: number;
      x2: number;
      y2: number;
      stroke: string;
      width: number;
      dash?: boolean;
    }
  | {
      kind: "text";
      x: number;
      y: number;
      text: string;
      size: number;
      fill: string;
      anchor: Anchor;
    };

export interface Chart {
  name: string;
  width: number;
  height: number;
  ops: Op[];
}

export const PALETTE = [
  "#4477aa",
  "#ee6677",
  "#228833",
  "#ccbb44",
  "#66ccee",
  "#aa3377",
];

export function seriesColor(i: number): string {
  return i < PALETTE.length ? PALETTE[i] : "#bbbbbb";
}

const W = 720;
const H = 420;
const ML = 64;
const MR = 16;
const MT = 66;
const MB = 58;

function tickStep(range: number): number {
  if (!(range > 0)) return 1;
  const raw = range / 4;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10;
  return step * mag;
}

function fmtTick(v: number, step: number): string {
  const dec = step >= 1 ? 0 : step >= 0.1 ? 1 : step >= 0.01 ? 2 : 3;
  return v.toFixed(dec);
}

interface Frame {
  ops: Op[];
  x0: number;
  y0: number;
  plotW: number;
  plotH: number;
  yOf: (v: number) => number;
  step: number;
}

/** Axes, gridlines, title, y ticks shared by bar and line figures. */
function frame(
  title: string,
  yLabel: string,
  yMin: number,
  yMax: number,
): Frame {
  const ops: Op[] = [];
  const x0 = ML;
  const y0 = H - MB;
  const plotW = W - ML - MR;
  const plotH = H - MT - MB;
  const step = tickStep(yMax - yMin);
  const lo = Math.floor(yMin / step) * step;
  const hi = Math.ceil(yMax / step) * step;
  const span = hi - lo || 1;
  const yOf = (v: number) => y0 - ((v - lo) / span) * plotH;
  ops.push({
    kind: "rect",
    x: 0,
    y: 0,
    w: W,
    h: H,
    fill: "#ffffff",
  });
  ops.push({
    kind: "text",
    x: W / 2,
    y: 20,
    text: title,
    size: 14,
    fill: "#000000",
    anchor: "middle",
  });
  for (let v = lo; v <= hi + step / 1e6; v += step) {
    const y = yOf(v);
    ops.push({
      kind: "line",
      x1: x0,
      y1: y,
      x2: x0 + plotW,
      y2: y,
      stroke: "#dddddd",
      width: 1,
    });
    ops.push({
      kind: "text",
      x: x0 - 6,
      y: y + 3,
      text: fmtTick(v, step),
      size: 10,
      fill: "#333333",
      anchor: "end",
    });
  }
  ops.push({
    kind: "text",
    x: x0,
    y: MT - 8,
    text: yLabel,
    size: 10,
    fill: "#333333",
    anchor: "start",
  });
  ops.push({
    kind: "line",
    x1: x0,
    y1: MT,
    x2: x0,
    y2: y0,
    stroke: "#000000",
    width: 1,
  });
  ops.push({
    kind: "line",
    x1: x0,
    y1: y0,
    x2: x0 + plotW,
    y2: y0,
    stroke: "#000000",
    width: 1,
  });
  return { ops, x0, y0, plotW, plotH, yOf, step };
}

function legend(ops: Op[], names: string[]): void {
  let x = ML;
  const y = 38;
  names.forEach((name, i) => {
    ops.push({ kind: "rect", x, y: y - 8, w: 10, h: 10, fill: seriesColor(i) });
    ops.push({
      kind: "text",
      x: x + 14,
      y,
      text: name,
      size: 10,
      fill: "#000000",
      anchor: "start",
    });
    x += 14 + name.length * 7 + 16;
  });
}

export interface BarSpec {
  name: string;
  title: string;
  yLabel: string;
  groups: string[];
  series: string[];
  /** values[group][series]; null means no bar. */
  values: (number | null)[][];
  /** Optional per-bar upper marks drawn as whisker lines (e.g. maxima). */
  whiskers?: (number | null)[][];
  /** Optional dashed per-group reference value. */
  groupRefs?: (number | null)[];
  refLabel?: string;
  /** Optional dashed horizontal line across the whole plot. */
  hline?: number;
}

export function renderBars(spec: BarSpec): Chart {
  let yMax = spec.hline ?? 0;
  for (const g of spec.values) for (const v of g) if (v !== null) yMax = Math.max(yMax, v);
  if (spec.whiskers) {
    for (const g of spec.whiskers) for (const v of g) if (v !== null) yMax = Math.max(yMax, v);
  }
  if (spec.groupRefs) {
    for (const v of spec.groupRefs) if (v !== null) yMax = Math.max(yMax, v);
  }
  const f = frame(spec.title, spec.yLabel, 0, yMax || 1);
  const ops = f.ops;
  legend(ops, spec.series);
  if (spec.refLabel) {
    ops.push({
      kind: "text",
      x: W - MR,
      y: 38,
      text: spec.refLabel,
      size: 10,
      fill: "#555555",
      anchor: "end",
    });
  }
  if (spec.hline !== undefined) {
    const y = f.yOf(spec.hline);
    ops.push({
      kind: "line",
      x1: f.x0,
      y1: y,
      x2: f.x0 + f.plotW,
      y2: y,
      stroke: "#888888",
      width: 1,
      dash: true,
    });
  }
  const slot = f.plotW / spec.groups.length;
  const band = slot * 0.8;
  const barW = band / spec.series.length;
  spec.groups.forEach((label, gi) => {
    const gx = f.x0 + gi * slot + (slot - band) / 2;
    spec.series.forEach((_, si) => {
      const v = spec.values[gi][si];
      if (v === null) return;
      const x = gx + si * barW;
      const y = f.yOf(v);
      ops.push({
        kind: "rect",
        x,
        y,
        w: barW - 2,
        h: f.y0 - y,
        fill: seriesColor(si),
      });
      const wmax = spec.whiskers?.[gi]?.[si];
      if (wmax !== null && wmax !== undefined && wmax > v) {
        const cx = x + (barW - 2) / 2;
        const yw = f.yOf(wmax);
        ops.push({
          kind: "line",
          x1: cx,
          y1: y,
          x2: cx,
          y2: yw,
          stroke: "#333333",
          width: 1,
        });
        ops.push({
          kind: "line",
          x1: cx - barW * 0.3,
          y1: yw,
          x2: cx + barW * 0.3,
          y2: yw,
          stroke: "#333333",
          width: 1,
        });
      }
    });
    const ref = spec.groupRefs?.[gi];
    if (ref !== null && ref !== undefined) {
      const y = f.yOf(ref);
      ops.push({
        kind: "line",
        x1: gx,
        y1: y,
        x2: gx + band,
        y2: y,
        stroke: "#555555",
        width: 1,
        dash: true,
      });
    }
    ops.push({
      kind: "text",
      x: f.x0 + gi * slot + slot / 2,
      y: f.y0 + 16,
      text: label,
      size: 10,
      fill: "#000000",
      anchor: "middle",
    });
  });
  return { name: spec.name, width: W, height: H, ops };
}

export interface LineSpec {
  name: string;
  title: string;
  xLabel: string;
  yLabel: string;
  xs: number[];
  series: { name: string; ys: (number | null)[] }[];
  hline?: number;
}

export function renderLines(spec: LineSpec): Chart {
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const s of spec.series) {
    for (const v of s.ys) {
      if (v === null) continue;
      yMin = Math.min(yMin, v);
      yMax = Math.max(yMax, v);
    }
  }
  if (spec.hline !== undefined) {
    yMin = Math.min(yMin, spec.hline);
    yMax = Math.max(yMax, spec.hline);
  }
  if (!Number.isFinite(yMin)) {
    yMin = 0;
    yMax = 1;
  }
  const pad = (yMax - yMin) * 0.08 || 0.05;
  const f = frame(spec.title, spec.yLabel, yMin - pad, yMax + pad);
  const ops = f.ops;
  legend(
    ops,
    spec.series.map((s) => s.name),
  );
  const xLo = Math.min(...spec.xs);
  const xHi = Math.max(...spec.xs);
  const xOf = (x: number) =>
    f.x0 + ((x - xLo) / (xHi - xLo || 1)) * f.plotW;
  if (spec.hline !== undefined) {
    const y = f.yOf(spec.hline);
    ops.push({
      kind: "line",
      x1: f.x0,
      y1: y,
      x2: f.x0 + f.plotW,
      y2: y,
      stroke: "#888888",
      width: 1,
      dash: true,
    });
  }
  for (const x of spec.xs) {
    ops.push({
      kind: "text",
      x: xOf(x),
      y: f.y0 + 16,
      text: String(x),
      size: 10,
      fill: "#000000",
      anchor: "middle",
    });
  }
  ops.push({
    kind: "text",
    x: f.x0 + f.plotW / 2,
    y: H - 12,
    text: spec.xLabel,
    size: 10,
    fill: "#333333",
    anchor: "middle",
  });
  spec.series.forEach((s, si) => {
    const color = seriesColor(si);
    let prev: { x: number; y: number } | null = null;
    s.ys.forEach((v, i) => {
      if (v === null) {
        prev = null;
        return;
      }
      const pt = { x: xOf(spec.xs[i]), y: f.yOf(v) };
      if (prev) {
        ops.push({
          kind: "line",
          x1: prev.x,
          y1: prev.y,
          x2: pt.x,
          y2: pt.y,
          stroke: color,
          width: 2,
        });
      }
      ops.push({
        kind: "rect",
        x: pt.x - 2,
        y: pt.y - 2,
        w: 4,
        h: 4,
        fill: color,
      });
      prev = pt;
    });
  });
  return { name: spec.name, width: W, height: H, ops };
}
