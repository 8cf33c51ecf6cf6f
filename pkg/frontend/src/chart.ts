// Tiny dependency-free SVG line chart helpers (pure string building, so
// the scaling logic is unit-testable without a DOM).

import type { ChartPoint } from "./dashboard.js";

export interface ChartGeometry {
  width: number;
  height: number;
  padding: number;
}

export function scalePoints(
  series: ChartPoint[],
  geo: ChartGeometry,
): Array<{ x: number; y: number }> {
  if (series.length === 0) return [];
  const ts = series.map((p) => p.t);
  const vs = series.map((p) => p.v);
  const tMin = Math.min(...ts);
  const tMax = Math.max(...ts);
  const vMin = Math.min(...vs);
  const vMax = Math.max(...vs);
  const tSpan = tMax - tMin || 1;
  const vSpan = vMax - vMin || 1;
  const innerW = geo.width - 2 * geo.padding;
  const innerH = geo.height - 2 * geo.padding;
  return series.map((p) => ({
    x: geo.padding + ((p.t - tMin) / tSpan) * innerW,
    y: geo.padding + (1 - (p.v - vMin) / vSpan) * innerH,
  }));
}

export function linePath(series: ChartPoint[], geo: ChartGeometry): string {
  const pts = scalePoints(series, geo);
  if (pts.length === 0) return "";
  return pts
    .map((p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(1)},${p.y.toFixed(1)}`)
    .join(" ");
}

export function chartSvg(series: ChartPoint[], geo: ChartGeometry, stroke: string): string {
  const path = linePath(series, geo);
  const dots = scalePoints(series, geo)
    .map((p) => `<circle cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="2" fill="${stroke}"/>`)
    .join("");
  return (
    `<svg viewBox="0 0 ${geo.width} ${geo.height}" preserveAspectRatio="none">` +
    `<path d="${path}" fill="none" stroke="${stroke}" stroke-width="1.5"/>` +
    dots +
    `</svg>`
  );
}
