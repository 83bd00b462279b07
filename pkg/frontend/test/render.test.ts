import { describe, expect, it } from "vitest";
import { readFileSync, statSync, writeFileSync, mkdtempSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { movingAverage, mean, std } from "../src/smoothing";
import { loadMetricColumn } from "../src/csv";
import { prepareSeries, render } from "../src/render";
import { validateSpec } from "../src/spec";

const SAMPLES = [
  join(__dirname, "..", "sample-data", "full.csv"),
  join(__dirname, "..", "sample-data", "td3.csv"),
  join(__dirname, "..", "sample-data", "ddpg.csv"),
];

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "irsmec-plots-"));
}

describe("movingAverage", () => {
  it("window 1 is the identity", () => {
    const series = [3, -1, 4, 1.5, -9];
    expect(movingAverage(series, 1)).toEqual(series);
  });

  it("averages a trailing window with a short prefix", () => {
    expect(movingAverage([1, 2, 3, 4], 2)).toEqual([1, 1.5, 2.5, 3.5]);
    expect(movingAverage([2, 4, 6], 3)).toEqual([2, 3, 4]);
  });

  it("rejects fractional or nonpositive windows", () => {
    expect(() => movingAverage([1], 0)).toThrow();
    expect(() => movingAverage([1], 1.5)).toThrow();
  });
});

describe("csv loading", () => {
  it("reads a metric column from the bundled samples", () => {
    const rewards = loadMetricColumn(SAMPLES[0], "reward");
    expect(rewards.length).toBeGreaterThan(2);
    expect(rewards.every(Number.isFinite)).toBe(true);
  });

  it("names missing columns in the error", () => {
    expect(() => loadMetricColumn(SAMPLES[0], "nope")).toThrow(/nope/);
  });

  it("rejects empty inputs", () => {
    const dir = tempDir();
    const empty = join(dir, "empty.csv");
    writeFileSync(empty, "episode,reward\n");
    expect(() => loadMetricColumn(empty, "reward")).toThrow(/empty/);
  });
});

describe("render", () => {
  it("produces a nonempty SVG for the bundled three-algorithm set", () => {
    const dir = tempDir();
    const out = join(dir, "curves.svg");
    render({
      inputs: SAMPLES,
      labels: ["full", "td3", "ddpg"],
      metric: "reward",
      kind: "line",
      window: 5,
      out,
    });
    expect(statSync(out).size).toBeGreaterThan(500);
    expect(readFileSync(out, "utf8")).toContain("<svg");
  });

  it("produces a nonempty grouped-bar SVG with whiskers", () => {
    const dir = tempDir();
    const out = join(dir, "bars.svg");
    render({
      inputs: SAMPLES,
      metric: "avg_delay_s",
      kind: "bar",
      out,
    });
    expect(statSync(out).size).toBeGreaterThan(500);
  });

  it("data dump equals the input after documented smoothing", () => {
    const dir = tempDir();
    const out = join(dir, "fig.svg");
    const dump = join(dir, "data.json");
    render({
      inputs: [SAMPLES[0]],
      metric: "reward",
      kind: "line",
      window: 7,
      out,
      dumpData: dump,
    });
    const payload = JSON.parse(readFileSync(dump, "utf8"));
    const expected = movingAverage(loadMetricColumn(SAMPLES[0], "reward"), 7);
    expect(payload.series[0].values).toEqual(expected);
    expect(payload.window).toBe(7);
  });

  it("window 1 plots the raw series", () => {
    const spec = validateSpec({
      inputs: [SAMPLES[1]],
      metric: "reward",
      kind: "line",
      window: 1,
      out: "unused.svg",
    });
    const series = prepareSeries(spec);
    expect(series[0].values).toEqual(loadMetricColumn(SAMPLES[1], "reward"));
  });

  it("constant series stays flat after smoothing", () => {
    const dir = tempDir();
    const csv = join(dir, "const.csv");
    writeFileSync(csv, "episode,reward\n0,2.5\n1,2.5\n2,2.5\n3,2.5\n");
    const spec = validateSpec({
      inputs: [csv],
      metric: "reward",
      kind: "line",
      window: 3,
      out: "unused.svg",
    });
    const series = prepareSeries(spec);
    expect(Math.min(...series[0].values)).toBe(Math.max(...series[0].values));
  });

  it("identical inputs give identical plotted arrays", () => {
    const spec = validateSpec({
      inputs: SAMPLES,
      metric: "reward",
      kind: "line",
      window: 4,
      out: "unused.svg",
    });
    expect(prepareSeries(spec)).toEqual(prepareSeries(spec));
  });

  it("bar means and stds match an independent computation", () => {
    const spec = validateSpec({
      inputs: [SAMPLES[2]],
      metric: "avg_energy_j",
      kind: "bar",
      out: "unused.svg",
    });
    const series = prepareSeries(spec);
    const raw = loadMetricColumn(SAMPLES[2], "avg_energy_j");
    expect(series[0].mean).toBeCloseTo(mean(raw), 12);
    expect(series[0].std).toBeCloseTo(std(raw), 12);
  });

  it("validates specs with named errors", () => {
    expect(() => validateSpec({ metric: "reward", kind: "line", out: "x" }))
      .toThrow(/input/);
    expect(() => validateSpec({ inputs: ["a"], kind: "line", out: "x" }))
      .toThrow(/metric/);
    expect(() =>
      validateSpec({ inputs: ["a"], metric: "r", kind: "pie" as never, out: "x" }),
    ).toThrow(/kind/);
    expect(() =>
      validateSpec({ inputs: ["a"], metric: "r", kind: "line", out: "x", window: 0 }),
    ).toThrow(/window/);
    expect(() =>
      validateSpec({
        inputs: ["a", "b"], labels: ["only-one"], metric: "r",
        kind: "line", out: "x",
      }),
    ).toThrow(/labels/);
  });
});
