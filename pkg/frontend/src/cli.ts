#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { SchemaError } from "./csv";
import { PotentialName } from "./contours";
import { renderTrajectory2d } from "./kinds/trajectory2d";
import { renderCoordinateVsTime } from "./kinds/coordinateVsTime";
import { renderVarianceCurves } from "./kinds/varianceCurves";

const KINDS = ["trajectory2d", "coordinate_vs_time", "variance_curves"] as const;
type Kind = (typeof KINDS)[number];

export function run(kind: Kind, inputs: string[], out: string, opts: { potential: PotentialName; coordinate: "x" | "y" }) {
  switch (kind) {
    case "trajectory2d":
      return renderTrajectory2d(inputs, out, opts.potential);
    case "coordinate_vs_time":
      return renderCoordinateVsTime(inputs, out, opts.coordinate);
    case "variance_curves":
      return renderVarianceCurves(inputs, out);
  }
}

export function main(argv: string[]): number {
  try {
    const args = parse(argv);
    const res = run(args.kind as Kind, args.in as string[], args.out, {
      potential: args.potential as PotentialName,
      coordinate: args.coordinate,
    });
    console.log(`wrote ${res.outPath} (${res.bytes} bytes)`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 3;
  }
}

function parse(argv: string[]) {
  return yargs(argv)
    .scriptName("figures")
    .usage("$0 <kind> --in <csv...> --out <file.svg>")
    .command("$0 <kind>", "render a figure from CSV output files", (y) =>
      y.positional("kind", { choices: KINDS, demandOption: true })
    )
    .option("in", { type: "string", array: true, demandOption: true, describe: "input CSV file(s)" })
    .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
    .option("potential", {
      choices: ["bowl", "double_well"] as const,
      default: "double_well" as PotentialName,
      describe: "potential for contour overlays (trajectory2d)",
    })
    .option("coordinate", {
      choices: ["x", "y"] as const,
      default: "x" as const,
      describe: "which coordinate to plot (coordinate_vs_time)",
    })
    .strict()
    .exitProcess(false)
    .fail((msg) => {
      throw new SchemaError(msg);
    })
    .parseSync();
}

if (require.main === module) {
  process.exitCode = main(hideBin(process.argv));
}
