// Dashboard view-model: metric tiles and 24 h chart series derived from
// the dashboard payload. The server is the single source of truth; no
// mood math happens here.

import type { Dashboard } from "./types.js";

export const METRICS = [
  { key: "moisture_pct", label: "Soil moisture", unit: "%" },
  { key: "temp_c", label: "Temperature", unit: "°C" },
  { key: "humidity_pct", label: "Air humidity", unit: "%" },
] as const;

export type MetricKey = (typeof METRICS)[number]["key"];

export interface Tile {
  key: MetricKey;
  label: string;
  unit: string;
  value: number | null;
  lo: number | null;
  hi: number | null;
  noData: boolean;
}

export interface ChartPoint {
  t: number;
  v: number;
}

export const MOOD_COLORS: Record<string, string> = {
  Thriving: "#2e9e44",
  Thirsty: "#c98a16",
  Waterlogged: "#2673c9",
  Cold: "#5a7fd6",
  Overheated: "#d64545",
  DryAir: "#b8860b",
  MuggyAir: "#6c8e23",
  Unknown: "#8a8a8a",
};

export function moodColor(label: string): string {
  return MOOD_COLORS[label] ?? MOOD_COLORS["Unknown"];
}

export function tiles(dash: Dashboard): Tile[] {
  const noData = dash.mood.label === "Unknown";
  return METRICS.map((m) => {
    const factor = dash.mood.factors[m.key];
    const latest = dash.latest ? (dash.latest as unknown as Record<string, number>)[m.key] : null;
    return {
      key: m.key,
      label: m.label,
      unit: m.unit,
      value: factor?.value ?? latest,
      lo: factor?.lo ?? null,
      hi: factor?.hi ?? null,
      noData,
    };
  });
}

// One point per hourly aggregate window, positioned at the window centre.
export function chartSeries(dash: Dashboard, metric: MetricKey): ChartPoint[] {
  return dash.aggregates.map((p) => ({
    t: p.window_start + p.window_len_s / 2,
    v: p.stats[metric]?.mean ?? NaN,
  }));
}

export function peakPoint(series: ChartPoint[]): ChartPoint | null {
  if (series.length === 0) return null;
  return series.reduce((best, p) => (p.v > best.v ? p : best));
}
