import { type Table, numericColumn } from "./tables.js";
import {
  type SeriesData,
  type Stroke,
  assembleSvg,
  axes,
  curveElement,
  makeFrame,
  verticalMarker,
} from "./svg.js";

export interface FigureResult {
  svg: string;
  series: SeriesData;
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!(lo < hi)) hi = lo + 1;
  return [lo, hi];
}

/** True hazard (dashed) vs estimated hazard (solid), optional ridge (dotted). */
export function hazardFigure(estimate: Table, truth?: Table, ridge?: Table): FigureResult {
  const series: SeriesData = {
    estimate: { x: numericColumn(estimate, "t"), y: numericColumn(estimate, "hazard") },
  };
  if (truth) series.truth = { x: numericColumn(truth, "t"), y: numericColumn(truth, "hazard") };
  if (ridge) series.ridge = { x: numericColumn(ridge, "t"), y: numericColumn(ridge, "hazard") };
  const allX = Object.values(series).flatMap((s) => s.x);
  const allY = Object.values(series).flatMap((s) => s.y);
  const frame = makeFrame(extent(allX), [0, extent(allY)[1]]);
  const body = [axes(frame, "time", "hazard rate")];
  const styles: [string, Stroke][] = [["truth", "dashed"], ["estimate", "solid"], ["ridge", "dotted"]];
  for (const [name, stroke] of styles) {
    if (series[name]) {
      // hazard curves are step functions with right-closed bins
      body.push(curveElement(frame, series[name].x, series[name].y, stroke, "black", true));
    }
  }
  return { svg: assembleSvg(frame, body, series), series };
}

/** Selection criterion against log10 penalty with the chosen penalty marked. */
export function pathFigure(table: Table, criterion: "bic" | "cv" = "bic"): FigureResult {
  const penalties = numericColumn(table, "penalty");
  const values = numericColumn(table, criterion);
  const series: SeriesData = { [criterion]: { x: penalties, y: values } };
  const logX = penalties.map(Math.log10);
  const frame = makeFrame(extent(logX), extent(values));
  const body = [axes(frame, "log10 penalty", criterion)];
  let selected: number;
  if (table.meta["selected-penalty"] !== undefined) {
    selected = Number(table.meta["selected-penalty"]);
  } else {
    const best = values.reduce(
      (acc, v, i) => ((criterion === "bic" ? v <= acc.v : v >= acc.v) ? { v, i } : acc),
      { v: criterion === "bic" ? Infinity : -Infinity, i: 0 },
    );
    selected = penalties[best.i];
  }
  body.push(verticalMarker(frame, Math.log10(selected)));
  body.push(curveElement(frame, logX, values, "solid"));
  return { svg: assembleSvg(frame, body, series), series };
}

/** Bootstrap survival bands (solid/dot-dash) over Kaplan-Meier (dashed/dotted). */
export function survivalFigure(bands: Table, km?: Table): FigureResult {
  const t = numericColumn(bands, "t");
  const series: SeriesData = {
    median: { x: t, y: numericColumn(bands, "median") },
    lower: { x: t, y: numericColumn(bands, "lower") },
    upper: { x: t, y: numericColumn(bands, "upper") },
  };
  if (km) {
    const kt = numericColumn(km, "t");
    series.km = { x: kt, y: numericColumn(km, "survival") };
    series.km_lower = { x: kt, y: numericColumn(km, "lower") };
    series.km_upper = { x: kt, y: numericColumn(km, "upper") };
  }
  const frame = makeFrame(extent(Object.values(series).flatMap((s) => s.x)), [0, 1]);
  const body = [axes(frame, "time", "survival probability")];
  const styles: [string, Stroke, boolean][] = [
    ["km", "dashed", true],
    ["km_lower", "dotted", true],
    ["km_upper", "dotted", true],
    ["median", "solid", false],
    ["lower", "dotdash", false],
    ["upper", "dotdash", false],
  ];
  for (const [name, stroke, step] of styles) {
    if (series[name]) body.push(curveElement(frame, series[name].x, series[name].y, stroke, "black", step));
  }
  return { svg: assembleSvg(frame, body, series), series };
}
