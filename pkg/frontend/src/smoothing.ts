/** Trailing moving average: out[i] = mean(values[max(0, i-w+1) .. i]).
 *
 * Window 1 is the identity. Early rows average over the shorter prefix so
 * the output has the same length as the input.
 */
export function movingAverage(values: number[], window: number): number[] {
  if (!Number.isInteger(window) || window < 1) {
    throw new Error(`window must be an integer >= 1, got ${window}`);
  }
  if (window === 1) {
    return values.slice(); // exact identity, no running-sum rounding
  }
  const out = new Array<number>(values.length);
  let sum = 0;
  for (let i = 0; i < values.length; i++) {
    sum += values[i];
    if (i >= window) {
      sum -= values[i - window];
    }
    out[i] = sum / Math.min(i + 1, window);
  }
  return out;
}

export function mean(values: number[]): number {
  return values.reduce((a, b) => a + b, 0) / values.length;
}

/** Sample standard deviation; 0 for fewer than two values. */
export function std(values: number[]): number {
  if (values.length < 2) return 0;
  const m = mean(values);
  const ss = values.reduce((a, b) => a + (b - m) ** 2, 0);
  return Math.sqrt(ss / (values.length - 1));
}
