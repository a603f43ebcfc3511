import { Table, columnIndices } from './csv';
import { buildHistogram, hasDetachedTop } from './histogram';
import { axes, document, fmt, linearScale, polyline } from './svg';

const WIDTH = 640;
const HEIGHT = 420;
const BOX = { left: 60, top: 20, width: WIDTH - 80, height: HEIGHT - 80 };

function domainOf(values: number[], pad = 0.05): [number, number] {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  return [lo - pad * span, hi + pad * span];
}

// AMP matrix-MSE points per seed with the state-evolution prediction as a
// reference curve.  Expects the amp command's CSV; only summary rows carry
// the prediction.
export function renderMseCurve(table: Table, path = 'amp.csv'): string {
  const idx = columnIndices(table, ['row', 'snr', 'seed', 'block', 'mse', 'se_mse'], path);
  const summaries = table.rows.filter(
    (r) => r[idx.get('row')!] === 'summary' && r[idx.get('block')!] === '0'
  );
  if (summaries.length === 0) {
    throw new Error(`${path}: no summary rows`);
  }
  const points = summaries.map((r) => ({
    snr: Number(r[idx.get('snr')!]),
    mse: Number(r[idx.get('mse')!]),
    se: Number(r[idx.get('se_mse')!]),
  }));
  const curve = new Map<number, number>();
  for (const p of points) curve.set(p.snr, p.se);
  const snrs = [...curve.keys()].sort((a, b) => a - b);

  const x = linearScale(domainOf(points.map((p) => p.snr)), [BOX.left, BOX.left + BOX.width]);
  const yVals = points.map((p) => p.mse).concat([...curve.values()]);
  const y = linearScale(domainOf(yVals), [BOX.top + BOX.height, BOX.top]);

  const parts: string[] = [axes(x, y, BOX, 'snr', 'matrix MSE')];
  parts.push(
    polyline(snrs.map((s) => [x(s), y(curve.get(s)!)] as [number, number]), '#1f77b4')
  );
  for (const p of points) {
    parts.push(
      `<circle cx="${fmt(x(p.snr))}" cy="${fmt(y(p.mse))}" r="3" fill="#d62728" fill-opacity="0.7"/>`
    );
  }
  parts.push(
    `<text x="${BOX.left + 8}" y="${BOX.top + 14}" font-size="11" fill="#1f77b4">state evolution</text>`,
    `<text x="${BOX.left + 8}" y="${BOX.top + 28}" font-size="11" fill="#d62728">AMP runs</text>`
  );
  return document(WIDTH, HEIGHT, parts.join('\n'));
}

// Fixed-point overlap of both state-evolution branches against snr; the
// region where they disagree is the hard phase.  Expects the se command's
// fixed-point CSV.
export function renderGapCurve(table: Table, path = 'se_fixed_points.csv'): string {
  const idx = columnIndices(table, ['snr', 'block', 'mu_star', 'init_mode'], path);
  const series = new Map<string, Map<number, number[]>>();
  for (const r of table.rows) {
    const mode = r[idx.get('init_mode')!];
    const snr = Number(r[idx.get('snr')!]);
    const mu = Number(r[idx.get('mu_star')!]);
    if (!series.has(mode)) series.set(mode, new Map());
    const bySnr = series.get(mode)!;
    if (!bySnr.has(snr)) bySnr.set(snr, []);
    bySnr.get(snr)!.push(mu);
  }
  const modes = [...series.keys()].sort();
  const allSnr = [...new Set(table.rows.map((r) => Number(r[idx.get('snr')!])))].sort(
    (a, b) => a - b
  );
  const mean = (vals: number[]) => vals.reduce((a, b) => a + b, 0) / vals.length;
  const allMu: number[] = [];
  for (const bySnr of series.values()) for (const v of bySnr.values()) allMu.push(mean(v));

  const x = linearScale(domainOf(allSnr), [BOX.left, BOX.left + BOX.width]);
  const y = linearScale(domainOf(allMu.concat([0])), [BOX.top + BOX.height, BOX.top]);
  const colors: Record<string, string> = { uninformed: '#1f77b4', informed: '#d62728' };

  const parts: string[] = [axes(x, y, BOX, 'snr', 'fixed-point overlap')];
  modes.forEach((mode, i) => {
    const bySnr = series.get(mode)!;
    const pts = allSnr
      .filter((s) => bySnr.has(s))
      .map((s) => [x(s), y(mean(bySnr.get(s)!))] as [number, number]);
    const color = colors[mode] ?? '#2ca02c';
    parts.push(polyline(pts, color, mode === 'uninformed' ? '4 3' : ''));
    parts.push(
      `<text x="${BOX.left + 8}" y="${BOX.top + 14 + 14 * i}" font-size="11" fill="${color}">${mode}</text>`
    );
  });
  return document(WIDTH, HEIGHT, parts.join('\n'));
}

export interface SpectrumPanel {
  label: string;
  values: number[];
}

// Side-by-side eigenvalue histograms (Freedman-Diaconis bins by default,
// overridable bin count).  A panel is marked with an outlier flag when its
// top eigenvalue sits more than 5 bin widths above the second one.
export function renderSpectrumPair(panels: SpectrumPanel[], binCount?: number): string {
  if (panels.length !== 2) {
    throw new Error(`spectrum_pair needs exactly 2 spectra, got ${panels.length}`);
  }
  const panelWidth = WIDTH / 2;
  const body = panels
    .map((panel, i) => {
      const hist = buildHistogram(panel.values, undefined, binCount);
      const outlier = hasDetachedTop(panel.values, hist.binWidth);
      const box = {
        left: i * panelWidth + 52,
        top: 30,
        width: panelWidth - 72,
        height: HEIGHT - 90,
      };
      const lo = hist.start;
      const hi = hist.start + hist.binWidth * hist.counts.length;
      const x = linearScale([lo, hi], [box.left, box.left + box.width]);
      const y = linearScale([0, Math.max(...hist.counts)], [box.top + box.height, box.top]);
      const parts: string[] = [axes(x, y, box, 'eigenvalue', i === 0 ? 'count' : '')];
      hist.counts.forEach((count, k) => {
        if (count === 0) return;
        const x0 = x(lo + k * hist.binWidth);
        const x1 = x(lo + (k + 1) * hist.binWidth);
        parts.push(
          `<rect x="${fmt(x0)}" y="${fmt(y(count))}" width="${fmt(x1 - x0)}" height="${fmt(
            y(0) - y(count)
          )}" fill="#1f77b4" stroke="none"/>`
        );
      });
      parts.push(
        `<text x="${fmt(box.left + box.width / 2)}" y="18" font-size="12" text-anchor="middle">${panel.label}</text>`
      );
      if (outlier) {
        const top = Math.max(...panel.values);
        parts.push(
          `<circle class="outlier" cx="${fmt(x(top))}" cy="${fmt(y(1))}" r="4" fill="none" stroke="#d62728" stroke-width="1.5"/>`,
          `<text class="outlier" x="${fmt(x(top))}" y="${fmt(y(1) - 10)}" font-size="10" text-anchor="middle" fill="#d62728">outlier</text>`
        );
      }
      return parts.join('\n');
    })
    .join('\n');
  return document(WIDTH, HEIGHT, body);
}
