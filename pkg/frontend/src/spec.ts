/** Plot request: which CSVs, which metric column, how to draw it. */

export type PlotKind = "line" | "bar";

export interface PlotSpec {
  /** One CSV per series (line) or per group (bar). */
  inputs: string[];
  /** Legend labels, one per input; defaults to file stems. */
  labels?: string[];
  /** Metric column that must exist in every input. */
  metric: string;
  /** Trailing moving-average window in rows (>= 1); line plots only. */
  window?: number;
  kind: PlotKind;
  /** Output image path (SVG). */
  out: string;
  /** Optional JSON dump of the exact plotted arrays. */
  dumpData?: string;
  title?: string;
  width?: number;
  height?: number;
}

export function validateSpec(raw: Partial<PlotSpec>): PlotSpec {
  if (!raw.inputs || raw.inputs.length === 0) {
    throw new Error("spec needs at least one input CSV");
  }
  if (!raw.metric) {
    throw new Error("spec needs a metric column name");
  }
  if (raw.kind !== "line" && raw.kind !== "bar") {
    throw new Error(`spec kind must be "line" or "bar", got ${raw.kind}`);
  }
  if (!raw.out) {
    throw new Error("spec needs an output image path");
  }
  const window = raw.window ?? 1;
  if (!Number.isInteger(window) || window < 1) {
    throw new Error(`smoothing window must be an integer >= 1, got ${window}`);
  }
  if (raw.labels && raw.labels.length !== raw.inputs.length) {
    throw new Error("labels must match inputs one to one");
  }
  return {
    inputs: raw.inputs,
    labels: raw.labels,
    metric: raw.metric,
    window,
    kind: raw.kind,
    out: raw.out,
    dumpData: raw.dumpData,
    title: raw.title,
    width: raw.width ?? 800,
    height: raw.height ?? 500,
  };
}
