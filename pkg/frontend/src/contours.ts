/** Level-set polylines of the two built-in potentials, for plot overlays.
 *
 * Plain marching squares on a uniform grid; segments are left unjoined since
 * the renderer only needs short line pieces, not closed paths.
 */

export type PotentialName = "bowl" | "double_well";

export function potential(name: PotentialName, x: number, y: number): number {
  if (name === "bowl") return 0.5 * (x * x + y * y);
  const q = x * x - 1;
  return 0.25 * q * q + 0.5 * y * y;
}

export interface Segment {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

function interp(pa: number, pb: number, a: number, b: number, level: number): number {
  return pa + ((level - a) / (b - a)) * (pb - pa);
}

/** Segments of { U = level } inside [xmin,xmax] x [ymin,ymax]. */
export function levelSegments(
  name: PotentialName,
  level: number,
  box: [number, number, number, number],
  n = 120
): Segment[] {
  const [xmin, xmax, ymin, ymax] = box;
  const xs = Array.from({ length: n }, (_, i) => xmin + ((xmax - xmin) * i) / (n - 1));
  const ys = Array.from({ length: n }, (_, j) => ymin + ((ymax - ymin) * j) / (n - 1));
  const u = xs.map((x) => ys.map((y) => potential(name, x, y)));
  const segs: Segment[] = [];
  for (let i = 0; i < n - 1; i++) {
    for (let j = 0; j < n - 1; j++) {
      // cell corners: 00 (x_i,y_j), 10, 11, 01, counter-clockwise
      const v00 = u[i][j];
      const v10 = u[i + 1][j];
      const v11 = u[i + 1][j + 1];
      const v01 = u[i][j + 1];
      const crossings: [number, number][] = [];
      if (v00 < level !== v10 < level) {
        crossings.push([interp(xs[i], xs[i + 1], v00, v10, level), ys[j]]);
      }
      if (v10 < level !== v11 < level) {
        crossings.push([xs[i + 1], interp(ys[j], ys[j + 1], v10, v11, level)]);
      }
      if (v11 < level !== v01 < level) {
        crossings.push([interp(xs[i + 1], xs[i], v11, v01, level), ys[j + 1]]);
      }
      if (v01 < level !== v00 < level) {
        crossings.push([xs[i], interp(ys[j + 1], ys[j], v01, v00, level)]);
      }
      // ambiguous saddle cells yield 4 crossings; pair them arbitrarily,
      // the overlay is qualitative
      for (let k = 0; k + 1 < crossings.length; k += 2) {
        segs.push({
          x0: crossings[k][0],
          y0: crossings[k][1],
          x1: crossings[k + 1][0],
          y1: crossings[k + 1][1],
        });
      }
    }
  }
  return segs;
}
