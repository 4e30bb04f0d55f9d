import { scaleLinear, type ScaleLinear } from "d3-scale";
import { curveStepAfter, line } from "d3-shape";

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
  x: ScaleLinear<number, number>;
  y: ScaleLinear<number, number>;
}

export type Stroke = "solid" | "dashed" | "dotted" | "dotdash";

const DASHES: Record<Stroke, string> = {
  solid: "",
  dashed: "8 5",
  dotted: "2 4",
  dotdash: "10 4 2 4",
};

export function makeFrame(
  xDomain: [number, number],
  yDomain: [number, number],
  width = 640,
  height = 420,
): Frame {
  const margin = { top: 16, right: 16, bottom: 42, left: 58 };
  const x = scaleLinear()
    .domain(xDomain)
    .range([margin.left, width - margin.right])
    .nice();
  const y = scaleLinear()
    .domain(yDomain)
    .range([height - margin.bottom, margin.top])
    .nice();
  return { width, height, margin, x, y };
}

function pathBuilder(frame: Frame, step: boolean) {
  const gen = line<[number, number]>()
    .defined((d) => Number.isFinite(d[0]) && Number.isFinite(d[1]))
    .x((d) => frame.x(d[0]))
    .y((d) => frame.y(d[1]));
  if (step) gen.curve(curveStepAfter);
  return gen;
}

export function curveElement(
  frame: Frame,
  xs: number[],
  ys: number[],
  stroke: Stroke,
  color = "black",
  step = false,
): string {
  const pts: [number, number][] = xs.map((v, i) => [v, ys[i]]);
  const d = pathBuilder(frame, step)(pts) ?? "";
  const dash = DASHES[stroke] ? ` stroke-dasharray="${DASHES[stroke]}"` : "";
  return `<path fill="none" stroke="${color}" stroke-width="1.5"${dash} d="${d}"/>`;
}

export function verticalMarker(frame: Frame, xValue: number, stroke: Stroke = "dashed"): string {
  const px = frame.x(xValue);
  const dash = DASHES[stroke] ? ` stroke-dasharray="${DASHES[stroke]}"` : "";
  return (
    `<line x1="${px}" x2="${px}" y1="${frame.y.range()[1]}" y2="${frame.y.range()[0]}"` +
    ` stroke="grey" stroke-width="1"${dash}/>`
  );
}

function axisTicks(scale: ScaleLinear<number, number>, count = 6): number[] {
  return scale.ticks(count);
}

export function axes(frame: Frame, xLabel: string, yLabel: string): string {
  const { x, y, width, height, margin } = frame;
  const bottom = height - margin.bottom;
  const parts: string[] = [];
  parts.push(
    `<line x1="${margin.left}" x2="${width - margin.right}" y1="${bottom}" y2="${bottom}" stroke="black"/>`,
    `<line x1="${margin.left}" x2="${margin.left}" y1="${margin.top}" y2="${bottom}" stroke="black"/>`,
  );
  for (const t of axisTicks(x)) {
    const px = x(t);
    parts.push(
      `<line x1="${px}" x2="${px}" y1="${bottom}" y2="${bottom + 5}" stroke="black"/>`,
      `<text x="${px}" y="${bottom + 18}" text-anchor="middle" font-size="11">${formatTick(t)}</text>`,
    );
  }
  for (const t of axisTicks(y)) {
    const py = y(t);
    parts.push(
      `<line x1="${margin.left - 5}" x2="${margin.left}" y1="${py}" y2="${py}" stroke="black"/>`,
      `<text x="${margin.left - 8}" y="${py + 3}" text-anchor="end" font-size="11">${formatTick(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${(margin.left + width - margin.right) / 2}" y="${height - 8}" text-anchor="middle" font-size="12">${xLabel}</text>`,
    `<text transform="translate(14 ${(margin.top + bottom) / 2}) rotate(-90)" text-anchor="middle" font-size="12">${yLabel}</text>`,
  );
  return `<g>${parts.join("")}</g>`;
}

function formatTick(v: number): string {
  if (v !== 0 && (Math.abs(v) < 1e-3 || Math.abs(v) >= 1e5)) return v.toExponential(1);
  return String(Number(v.toFixed(6)));
}

export interface SeriesData {
  [name: string]: { x: number[]; y: number[] };
}

export function assembleSvg(frame: Frame, body: string[], series: SeriesData): string {
  const payload = JSON.stringify(series);
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}"` +
    ` viewBox="0 0 ${frame.width} ${frame.height}">` +
    `<metadata id="figure-data">${payload}</metadata>` +
    `<rect width="${frame.width}" height="${frame.height}" fill="white"/>` +
    body.join("") +
    `</svg>`
  );
}

/** Recover the numeric series embedded in a rendered figure. */
export function extractSeries(svg: string): SeriesData {
  const match = svg.match(/<metadata id="figure-data">(.*?)<\/metadata>/s);
  if (!match) throw new Error("no embedded figure data found");
  return JSON.parse(match[1]) as SeriesData;
}
