import * as path from "path";
import type { EChartsOption, SeriesOption } from "echarts";
import { loadCsv, numericColumn } from "../csv";
import { padded, renderSvg, RenderResult } from "../render";

const PANEL_W = 460;
const PANEL_H = 260;
const COLS = 2;

function panelTitle(csvPath: string): string {
  const m = path.basename(csvPath).match(/delta(\d+)/);
  return m ? `delta = ${m[1]}` : path.basename(csvPath, ".csv");
}

/** One x(t) panel per input, laid out on a two-column grid. */
export function renderCoordinateVsTime(
  inputs: string[],
  outPath: string,
  coordinate: "x" | "y" = "x"
): RenderResult {
  const tables = inputs.map((p) => loadCsv(p, ["t", "x", "y"]));
  const k = tables.length;
  const nrows = Math.ceil(k / COLS);

  const grids = [];
  const xAxes = [];
  const yAxes = [];
  const titles = [];
  const series: SeriesOption[] = [];
  for (let g = 0; g < k; g++) {
    const row = Math.floor(g / COLS);
    const col = g % COLS;
    const ts = numericColumn(tables[g], "t");
    const vs = numericColumn(tables[g], coordinate);
    const yr = padded(vs);
    grids.push({
      left: 70 + col * PANEL_W,
      top: 50 + row * PANEL_H,
      width: PANEL_W - 110,
      height: PANEL_H - 100,
    });
    xAxes.push({ gridIndex: g, name: "t", min: ts[0], max: ts[ts.length - 1] });
    yAxes.push({ gridIndex: g, name: coordinate, min: yr[0], max: yr[1] });
    titles.push({
      text: panelTitle(tables[g].path),
      left: 70 + col * PANEL_W + (PANEL_W - 110) / 2,
      top: 20 + row * PANEL_H,
      textAlign: "center" as const,
    });
    series.push({
      type: "line",
      xAxisIndex: g,
      yAxisIndex: g,
      data: ts.map((t, i) => [t, vs[i]]),
      showSymbol: false,
      lineStyle: { width: 0.7 },
    });
  }

  const option: EChartsOption = { title: titles, grid: grids, xAxis: xAxes, yAxis: yAxes, series };
  return renderSvg(option, outPath, 70 + COLS * PANEL_W, 50 + nrows * PANEL_H);
}
