import * as fs from "fs";
import * as path from "path";
import * as echarts from "echarts";

export interface RenderResult {
  outPath: string;
  bytes: number;
}

/** Render an echarts option to a standalone SVG file (server-side). */
export function renderSvg(
  option: echarts.EChartsOption,
  outPath: string,
  width: number,
  height: number
): RenderResult {
  const chart = echarts.init(null as unknown as HTMLElement, undefined, {
    renderer: "svg",
    ssr: true,
    width,
    height,
  });
  try {
    chart.setOption({ animation: false, ...option });
    const svg = stableClassNames(chart.renderToSVGString());
    fs.mkdirSync(path.dirname(path.resolve(outPath)), { recursive: true });
    fs.writeFileSync(outPath, svg);
    return { outPath, bytes: Buffer.byteLength(svg) };
  } finally {
    chart.dispose();
  }
}

/** Renumber the generated zr*-cls-* classes so repeated renders are byte-identical.
 *
 * The renderer names hover classes with process-global counters, so the same
 * option produces different class ids on each call.
 */
function stableClassNames(svg: string): string {
  const seen = new Map<string, string>();
  return svg
    .replace(/zr\d+-cls-\d+/g, (tok) => {
      if (!seen.has(tok)) seen.set(tok, `zr-cls-${seen.size}`);
      return seen.get(tok)!;
    })
    .replace(/zr\d+-/g, "zr-"); // clip-path ids restart per chart, only drop the instance id
}

/** Data range expanded by a 5% margin on each side. */
export function padded(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const m = 0.05 * (hi - lo);
  return [lo - m, hi + m];
}
