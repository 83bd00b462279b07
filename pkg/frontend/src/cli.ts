#!/usr/bin/env node
/** Render irsmec metrics CSVs to SVG.
 *
 *   irsmec-plot --spec figure.json
 *   irsmec-plot --inputs a.csv,b.csv --labels A,B --metric reward \
 *               --kind line --window 50 --out fig.svg [--dump-data d.json]
 */

import { readFileSync } from "fs";
import { PlotSpec } from "./spec";
import { render } from "./render";

function parseArgs(argv: string[]): Partial<PlotSpec> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new Error(`unexpected argument: ${arg}`);
    }
    const key = arg.slice(2);
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) {
      throw new Error(`flag --${key} needs a value`);
    }
    flags.set(key, value);
    i++;
  }
  if (flags.has("spec")) {
    return JSON.parse(readFileSync(flags.get("spec")!, "utf8"));
  }
  const spec: Partial<PlotSpec> = {
    inputs: flags.get("inputs")?.split(","),
    labels: flags.get("labels")?.split(","),
    metric: flags.get("metric"),
    kind: flags.get("kind") as PlotSpec["kind"],
    out: flags.get("out"),
    dumpData: flags.get("dump-data"),
    title: flags.get("title"),
  };
  if (flags.has("window")) {
    spec.window = Number(flags.get("window"));
  }
  if (flags.has("width")) spec.width = Number(flags.get("width"));
  if (flags.has("height")) spec.height = Number(flags.get("height"));
  return spec;
}

function main(): number {
  try {
    const spec = parseArgs(process.argv.slice(2));
    const series = render(spec);
    console.log(
      `wrote ${spec.out} (${series.length} series, metric ${spec.metric})`,
    );
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

process.exit(main());
