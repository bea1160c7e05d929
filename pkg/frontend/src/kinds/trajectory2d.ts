import * as path from "path";
import type { EChartsOption, SeriesOption } from "echarts";
import { loadCsv, numericColumn } from "../csv";
import { levelSegments, potential, PotentialName } from "../contours";
import { padded, renderSvg, RenderResult } from "../render";

const PANEL_W = 420;
const PANEL_H = 420;

function panelTitle(csvPath: string): string {
  const m = path.basename(csvPath).match(/delta(\d+)/);
  return m ? `delta = ${m[1]}` : path.basename(csvPath, ".csv");
}

/** Side-by-side x-y path panels with level-set contours of U underneath. */
export function renderTrajectory2d(
  inputs: string[],
  outPath: string,
  potentialName: PotentialName
): RenderResult {
  const tables = inputs.map((p) => loadCsv(p, ["t", "x", "y"]));
  const k = tables.length;

  const allX: number[] = [];
  const allY: number[] = [];
  const paths = tables.map((tb) => {
    const xs = numericColumn(tb, "x");
    const ys = numericColumn(tb, "y");
    allX.push(...xs);
    allY.push(...ys);
    return xs.map((x, i) => [x, ys[i]]);
  });
  const xr = padded(allX);
  const yr = padded(allY);

  // contour levels spanning the energies the paths actually visit
  const energies = allX.map((x, i) => potential(potentialName, x, allY[i]));
  const emax = Math.max(...energies);
  const levels = [0.1, 0.3, 0.6, 1.0].map((f) => f * Math.max(emax, 0.2));

  const grids = [];
  const xAxes = [];
  const yAxes = [];
  const titles = [];
  const series: SeriesOption[] = [];
  for (let g = 0; g < k; g++) {
    grids.push({
      left: 60 + g * PANEL_W,
      top: 50,
      width: PANEL_W - 90,
      height: PANEL_H - 100,
    });
    xAxes.push({ gridIndex: g, min: xr[0], max: xr[1], name: "x" });
    yAxes.push({ gridIndex: g, min: yr[0], max: yr[1], name: "y" });
    titles.push({
      text: panelTitle(tables[g].path),
      left: 60 + g * PANEL_W + (PANEL_W - 90) / 2,
      textAlign: "center" as const,
    });
    for (const level of levels) {
      for (const s of levelSegments(potentialName, level, [xr[0], xr[1], yr[0], yr[1]])) {
        series.push({
          type: "line",
          xAxisIndex: g,
          yAxisIndex: g,
          data: [
            [s.x0, s.y0],
            [s.x1, s.y1],
          ],
          showSymbol: false,
          lineStyle: { color: "#bbbbbb", width: 0.6 },
          silent: true,
        });
      }
    }
    series.push({
      type: "line",
      xAxisIndex: g,
      yAxisIndex: g,
      data: paths[g],
      showSymbol: false,
      lineStyle: { color: "#c23531", width: 0.8 },
    });
  }

  const option: EChartsOption = {
    title: titles,
    grid: grids,
    xAxis: xAxes,
    yAxis: yAxes,
    series,
  };
  return renderSvg(option, outPath, 60 + k * PANEL_W, PANEL_H);
}
