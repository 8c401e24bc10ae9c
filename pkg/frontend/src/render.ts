/** Turns metric rows into an SVG figure with CI bands and a legend. */

import { MetricsRow } from "./csv.js";
import { FigureSpec } from "./figures.js";
import { formatTick, linearScale, logScale, Scale } from "./scale.js";
import { SvgDoc } from "./svg.js";

const WIDTH = 720;
const HEIGHT = 460;
const MARGIN = { left: 70, right: 200, top: 40, bottom: 50 };

const COLORS = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
  "#e377c2", "#17becf", "#bcbd22", "#7f7f7f", "#aec7e8", "#ff9896",
];

export interface Series {
  label: string;
  points: Array<{ x: number; y: number; ci: number }>;
}

export function groupSeries(spec: FigureSpec, rows: MetricsRow[]): Series[] {
  const selected = rows.filter((row) => row.preset === spec.id);
  if (selected.length === 0) {
    throw new Error(`no rows with preset=${spec.id} in the input CSV`);
  }
  const byLabel = new Map<string, Series>();
  for (const row of selected) {
    const y = Number(row[spec.y.field]);
    if (Number.isNaN(y)) continue;
    const label = spec.seriesLabel(row);
    let series = byLabel.get(label);
    if (!series) {
      series = { label, points: [] };
      byLabel.set(label, series);
    }
    series.points.push({
      x: Number(row[spec.x.field]),
      y,
      ci: spec.ci ? Number(row[spec.ci]) || 0 : 0,
    });
  }
  const out = [...byLabel.values()];
  for (const s of out) {
    s.points.sort((a, b) => a.x - b.x);
  }
  if (out.length === 0 || out.every((s) => s.points.length === 0)) {
    throw new Error(`preset ${spec.id}: every row has an empty ${String(spec.y.field)}`);
  }
  return out;
}

function makeScale(kind: "linear" | "log", lo: number, hi: number,
                   range: [number, number]): Scale {
  return kind === "log" ? logScale([lo, hi], range) : linearScale([lo, hi], range);
}

export function renderFigure(spec: FigureSpec, rows: MetricsRow[]): string {
  const series = groupSeries(spec, rows);
  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ys = series.flatMap((s) =>
    s.points.flatMap((p) => [p.y - p.ci, p.y + p.ci]));
  const positive = ys.filter((v) => v > 0);
  const yLo = spec.y.scale === "log" ? Math.min(...positive, 1) : Math.min(...ys, 0);
  const yHi = spec.y.scale === "log" ? Math.max(...positive, 1e-12) : Math.max(...ys);

  const sx = makeScale(spec.x.scale, Math.min(...xs), Math.max(...xs),
                       [MARGIN.left, WIDTH - MARGIN.right]);
  const sy = makeScale(spec.y.scale, yLo, yHi,
                       [HEIGHT - MARGIN.bottom, MARGIN.top]);

  const doc = new SvgDoc(WIDTH, HEIGHT);
  const axisStyle = 'stroke="#333" stroke-width="1"';
  const gridStyle = 'stroke="#ddd" stroke-width="0.5"';

  for (const tick of sx.ticks()) {
    const x = sx.map(tick);
    doc.line(x, MARGIN.top, x, HEIGHT - MARGIN.bottom, gridStyle);
    doc.text(x, HEIGHT - MARGIN.bottom + 16, formatTick(tick, sx.kind),
             'text-anchor="middle"');
  }
  for (const tick of sy.ticks()) {
    const y = sy.map(tick);
    doc.line(MARGIN.left, y, WIDTH - MARGIN.right, y, gridStyle);
    doc.text(MARGIN.left - 6, y + 4, formatTick(tick, sy.kind),
             'text-anchor="end"');
  }
  doc.line(MARGIN.left, HEIGHT - MARGIN.bottom, WIDTH - MARGIN.right,
           HEIGHT - MARGIN.bottom, axisStyle);
  doc.line(MARGIN.left, MARGIN.top, MARGIN.left, HEIGHT - MARGIN.bottom, axisStyle);
  doc.text((MARGIN.left + WIDTH - MARGIN.right) / 2, HEIGHT - 12,
           spec.x.label, 'text-anchor="middle"');
  doc.text(16, (MARGIN.top + HEIGHT - MARGIN.bottom) / 2, spec.y.label,
           `text-anchor="middle" transform="rotate(-90 16 ${(MARGIN.top + HEIGHT - MARGIN.bottom) / 2})"`);
  doc.text((MARGIN.left + WIDTH - MARGIN.right) / 2, 20, spec.title,
           'text-anchor="middle" font-size="13" font-weight="bold"');

  series.forEach((s, i) => {
    const color = COLORS[i % COLORS.length];
    if (spec.ci && s.points.some((p) => p.ci > 0)) {
      const upper = s.points.map(
        (p) => [sx.map(p.x), sy.map(clampLog(spec, p.y + p.ci))] as [number, number]);
      const lower = s.points.map(
        (p) => [sx.map(p.x), sy.map(clampLog(spec, p.y - p.ci))] as [number, number]);
      doc.polygon([...upper, ...lower.reverse()],
                  `fill="${color}" fill-opacity="0.15" stroke="none" class="ci-band"`);
    }
    const line = s.points.map(
      (p) => [sx.map(p.x), sy.map(clampLog(spec, p.y))] as [number, number]);
    doc.polyline(line, `stroke="${color}" stroke-width="1.8" class="series"`);
    for (const [x, y] of line) {
      doc.circle(x, y, 2.5, `fill="${color}"`);
    }
    const ly = MARGIN.top + 14 + i * 16;
    doc.line(WIDTH - MARGIN.right + 10, ly - 4, WIDTH - MARGIN.right + 30, ly - 4,
             `stroke="${color}" stroke-width="2"`);
    doc.text(WIDTH - MARGIN.right + 36, ly, s.label);
  });

  return doc.render();
}

function clampLog(spec: FigureSpec, v: number): number {
  if (spec.y.scale === "log" && v <= 0) return Number.MIN_VALUE;
  return v;
}
