import { describe, expect, it } from 'vitest';

import { buildHistogram, freedmanDiaconisWidth, hasDetachedTop } from '../src/histogram';

describe('freedmanDiaconisWidth', () => {
  it('matches the closed form on a uniform grid', () => {
    // 0..999: IQR = 499.5, width = 2 * 499.5 / 1000^(1/3) = 99.9.
    const values = Array.from({ length: 1000 }, (_, i) => i);
    expect(freedmanDiaconisWidth(values)).toBeCloseTo(99.9, 6);
  });

  it('falls back for degenerate samples', () => {
    expect(freedmanDiaconisWidth([2, 2, 2, 2])).toBe(1);
  });
});

describe('buildHistogram', () => {
  it('counts every sample exactly once', () => {
    const values = [0, 0.1, 0.9, 1.0, 2.5, 2.5];
    const hist = buildHistogram(values, 1);
    expect(hist.start).toBe(0);
    expect(hist.counts).toEqual([3, 1, 2]);
    expect(hist.counts.reduce((a, b) => a + b, 0)).toBe(values.length);
  });

  it('rejects an empty sample', () => {
    expect(() => buildHistogram([])).toThrow('empty sample');
  });
});

describe('hasDetachedTop', () => {
  it('flags a top value more than 5 bin widths above the rest', () => {
    expect(hasDetachedTop([0, 1, 2, 9], 1)).toBe(true);
    expect(hasDetachedTop([0, 1, 2, 7], 1)).toBe(false);
    expect(hasDetachedTop([3], 1)).toBe(false);
  });
});
