export interface Histogram {
  start: number;
  binWidth: number;
  counts: number[];
}

function quantile(sorted: number[], q: number): number {
  const pos = (sorted.length - 1) * q;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

// Freedman-Diaconis bin width: 2 * IQR / n^(1/3), with fallbacks for
// degenerate samples.
export function freedmanDiaconisWidth(values: number[]): number {
  const sorted = [...values].sort((a, b) => a - b);
  const iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  const span = sorted[sorted.length - 1] - sorted[0];
  if (iqr > 0) return (2 * iqr) / Math.cbrt(values.length);
  if (span > 0) return span / Math.ceil(Math.log2(values.length) + 1);
  return 1;
}

export function buildHistogram(values: number[], binWidth?: number, binCount?: number): Histogram {
  if (values.length === 0) throw new Error('histogram of empty sample');
  if (binCount !== undefined && binCount < 1) throw new Error('bin count must be >= 1');
  const span = Math.max(...values) - Math.min(...values);
  const width =
    binWidth ?? (binCount !== undefined && span > 0 ? span / binCount : freedmanDiaconisWidth(values));
  const min = Math.min(...values);
  const max = Math.max(...values);
  const n = Math.max(1, Math.ceil((max - min) / width + 1e-12));
  const counts = new Array<number>(n).fill(0);
  for (const v of values) {
    const i = Math.min(Math.floor((v - min) / width), n - 1);
    counts[i] += 1;
  }
  return { start: min, binWidth: width, counts };
}

// An eigenvalue sample has a detached outlier when the largest value sits
// more than 5 bin widths above the second largest.
export function hasDetachedTop(values: number[], binWidth: number): boolean {
  if (values.length < 2) return false;
  const sorted = [...values].sort((a, b) => a - b);
  const top = sorted[sorted.length - 1];
  const second = sorted[sorted.length - 2];
  return top - second > 5 * binWidth;
}
