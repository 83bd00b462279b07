import { writeFileSync } from "fs";
import * as echarts from "echarts";
import { PlotSpec, validateSpec } from "./spec";
import { fileStem, loadMetricColumn } from "./csv";
import { mean, movingAverage, std } from "./smoothing";

export interface Series {
  label: string;
  /** Smoothed per-row values (line) or raw values (bar). */
  values: number[];
  mean: number;
  std: number;
}

/** Deterministic data preparation: everything the figure will draw. */
export function prepareSeries(spec: PlotSpec): Series[] {
  return spec.inputs.map((path, idx) => {
    const raw = loadMetricColumn(path, spec.metric);
    const values =
      spec.kind === "line" ? movingAverage(raw, spec.window ?? 1) : raw;
    return {
      label: spec.labels?.[idx] ?? fileStem(path),
      values,
      mean: mean(values),
      std: std(values),
    };
  });
}

function lineOption(spec: PlotSpec, series: Series[]): echarts.EChartsOption {
  const longest = Math.max(...series.map((s) => s.values.length));
  return {
    animation: false,
    backgroundColor: "#ffffff",
    title: spec.title ? { text: spec.title, left: "center" } : undefined,
    legend: { bottom: 0, data: series.map((s) => s.label) },
    grid: { left: 60, right: 20, top: spec.title ? 50 : 20, bottom: 60 },
    xAxis: {
      type: "category",
      name: "episode",
      data: Array.from({ length: longest }, (_, i) => String(i)),
    },
    yAxis: { type: "value", name: spec.metric, scale: true },
    series: series.map((s) => ({
      name: s.label,
      type: "line",
      showSymbol: false,
      data: s.values,
    })),
  };
}

function barOption(spec: PlotSpec, series: Series[]): echarts.EChartsOption {
  const whiskerWidth = 8;
  return {
    animation: false,
    backgroundColor: "#ffffff",
    title: spec.title ? { text: spec.title, left: "center" } : undefined,
    grid: { left: 60, right: 20, top: spec.title ? 50 : 20, bottom: 40 },
    xAxis: { type: "category", data: series.map((s) => s.label) },
    yAxis: { type: "value", name: spec.metric, scale: true },
    series: [
      {
        type: "bar",
        data: series.map((s) => s.mean),
        barWidth: "50%",
      },
      {
        // standard-deviation whiskers drawn over the bars
        type: "custom",
        renderItem: (_params: unknown, api: any) => {
          const idx = api.value(0) as number;
          const lo = api.coord([idx, api.value(1)]);
          const hi = api.coord([idx, api.value(2)]);
          const style = { stroke: "#333", lineWidth: 1.5 };
          return {
            type: "group",
            children: [
              { type: "line", shape: { x1: hi[0], y1: hi[1], x2: lo[0], y2: lo[1] }, style },
              { type: "line", shape: { x1: hi[0] - whiskerWidth, y1: hi[1], x2: hi[0] + whiskerWidth, y2: hi[1] }, style },
              { type: "line", shape: { x1: lo[0] - whiskerWidth, y1: lo[1], x2: lo[0] + whiskerWidth, y2: lo[1] }, style },
            ],
          };
        },
        data: series.map((s, i) => [i, s.mean - s.std, s.mean + s.std]),
        z: 10,
      },
    ],
  };
}

/** Render the figure (and the optional data dump) described by the spec. */
export function render(rawSpec: Partial<PlotSpec>): Series[] {
  const spec = validateSpec(rawSpec);
  const series = prepareSeries(spec);
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: spec.width,
    height: spec.height,
  });
  chart.setOption(spec.kind === "line" ? lineOption(spec, series)
                                       : barOption(spec, series));
  const svg = chart.renderToSVGString();
  chart.dispose();
  writeFileSync(spec.out, svg, "utf8");
  if (spec.dumpData) {
    const dump = {
      metric: spec.metric,
      kind: spec.kind,
      window: spec.window,
      series: series.map((s) => ({
        label: s.label,
        values: s.values,
        mean: s.mean,
        std: s.std,
      })),
    };
    writeFileSync(spec.dumpData, JSON.stringify(dump, null, 2), "utf8");
  }
  return series;
}
