import type { EChartsOption, SeriesOption } from "echarts";
import { loadCsv, numericColumn, SchemaError } from "../csv";
import { renderSvg, RenderResult } from "../render";

const SWEEP_COLUMNS = ["delta", "t", "kind", "method", "value", "ci", "n_batches", "dt", "seed"];

/** Log-scale variance vs horizon, one curve per irreversibility strength. */
export function renderVarianceCurves(inputs: string[], outPath: string): RenderResult {
  if (inputs.length !== 1) {
    throw new SchemaError(`variance_curves expects exactly one CSV, got ${inputs.length}`);
  }
  const tb = loadCsv(inputs[0], SWEEP_COLUMNS);
  const deltas = numericColumn(tb, "delta");
  const ts = numericColumn(tb, "t");
  const values = numericColumn(tb, "value");

  const byDelta = new Map<number, [number, number][]>();
  for (let i = 0; i < deltas.length; i++) {
    if (!Number.isFinite(values[i]) || values[i] <= 0) continue; // failed cells
    if (!byDelta.has(deltas[i])) byDelta.set(deltas[i], []);
    byDelta.get(deltas[i])!.push([ts[i], values[i]]);
  }
  if (byDelta.size === 0) {
    throw new SchemaError(`${inputs[0]}: no finite positive variance values`);
  }

  const series: SeriesOption[] = [...byDelta.keys()]
    .sort((a, b) => a - b)
    .map((d) => ({
      name: `delta = ${d}`,
      type: "line",
      data: byDelta.get(d)!.sort((a, b) => a[0] - b[0]),
      symbolSize: 5,
    }));

  const option: EChartsOption = {
    legend: { top: 8 },
    grid: { left: 80, right: 30, top: 45, bottom: 55 },
    xAxis: { type: "value", name: "t" },
    yAxis: { type: "log", name: "variance" },
    series,
  };
  return renderSvg(option, outPath, 760, 460);
}
