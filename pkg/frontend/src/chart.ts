/** SVG risk-curve geometry (pure string builders, no DOM). */

import type { CurvePointView } from './view.js';

export interface ChartLayout {
  width: number;
  height: number;
  padLeft: number;
  padBottom: number;
  padTop: number;
  padRight: number;
}

export const DEFAULT_LAYOUT: ChartLayout = {
  width: 560,
  height: 260,
  padLeft: 48,
  padBottom: 28,
  padTop: 10,
  padRight: 12,
};

export interface ChartGeometry {
  path: string;
  xTicks: { x: number; label: string }[];
  yTicks: { y: number; label: string }[];
  yMax: number;
}

export function riskCurveGeometry(
  points: CurvePointView[],
  layout: ChartLayout = DEFAULT_LAYOUT,
): ChartGeometry {
  if (points.length === 0) {
    return { path: '', xTicks: [], yTicks: [], yMax: 0 };
  }
  const x0 = points[0]!.age;
  const x1 = points[points.length - 1]!.age;
  const rawMax = Math.max(...points.map((p) => p.risk));
  const yMax = Math.max(0.01, Math.ceil(rawMax * 20) / 20); // 5% steps
  const plotW = layout.width - layout.padLeft - layout.padRight;
  const plotH = layout.height - layout.padTop - layout.padBottom;
  const sx = (age: number) =>
    layout.padLeft + (x1 === x0 ? 0 : ((age - x0) / (x1 - x0)) * plotW);
  const sy = (risk: number) => layout.padTop + plotH * (1 - risk / yMax);

  const path = points
    .map((p, i) => `${i === 0 ? 'M' : 'L'}${sx(p.age).toFixed(2)} ${sy(p.risk).toFixed(2)}`)
    .join(' ');

  const xTicks = [];
  const step = (x1 - x0) / 5 >= 10 ? 10 : 5;
  for (let age = Math.ceil(x0 / step) * step; age <= x1 + 1e-9; age += step) {
    xTicks.push({ x: sx(age), label: String(Math.round(age)) });
  }
  const yTicks = [];
  const n = 4;
  for (let i = 0; i <= n; i += 1) {
    const risk = (yMax * i) / n;
    yTicks.push({ y: sy(risk), label: `${(100 * risk).toFixed(0)}%` });
  }
  return { path, xTicks, yTicks, yMax };
}
