// Small deterministic SVG helpers: fixed styling, fixed number formatting,
// no timestamps, so re-rendering the same data gives identical bytes.

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

export function fmt(v: number): string {
  if (v === 0) return '0';
  const s = v.toFixed(3);
  return s.replace(/\.?0+$/, '');
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  return scale;
}

export function ticks(domain: [number, number], count = 5): number[] {
  const span = domain[1] - domain[0] || 1;
  const rawStep = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const start = Math.ceil(domain[0] / step) * step;
  const out: number[] = [];
  for (let v = start; v <= domain[1] + 1e-9; v += step) {
    out.push(Math.round(v / step) * step);
  }
  return out;
}

export function axes(
  x: Scale,
  y: Scale,
  box: { left: number; top: number; width: number; height: number },
  xLabel: string,
  yLabel: string
): string {
  const bottom = box.top + box.height;
  const right = box.left + box.width;
  const parts: string[] = [];
  parts.push(
    `<line x1="${box.left}" y1="${bottom}" x2="${right}" y2="${bottom}" stroke="black"/>`
  );
  parts.push(
    `<line x1="${box.left}" y1="${box.top}" x2="${box.left}" y2="${bottom}" stroke="black"/>`
  );
  for (const t of ticks(x.domain)) {
    const px = fmt(x(t));
    parts.push(`<line x1="${px}" y1="${bottom}" x2="${px}" y2="${bottom + 4}" stroke="black"/>`);
    parts.push(
      `<text x="${px}" y="${bottom + 16}" font-size="10" text-anchor="middle">${fmt(t)}</text>`
    );
  }
  for (const t of ticks(y.domain)) {
    const py = fmt(y(t));
    parts.push(`<line x1="${box.left - 4}" y1="${py}" x2="${box.left}" y2="${py}" stroke="black"/>`);
    parts.push(
      `<text x="${box.left - 6}" y="${py}" font-size="10" text-anchor="end" dominant-baseline="middle">${fmt(t)}</text>`
    );
  }
  parts.push(
    `<text x="${fmt(box.left + box.width / 2)}" y="${bottom + 32}" font-size="11" text-anchor="middle">${xLabel}</text>`
  );
  parts.push(
    `<text x="${box.left - 34}" y="${fmt(box.top + box.height / 2)}" font-size="11" text-anchor="middle" transform="rotate(-90 ${box.left - 34} ${fmt(box.top + box.height / 2)})">${yLabel}</text>`
  );
  return parts.join('\n');
}

export function polyline(points: Array<[number, number]>, stroke: string, dash = ''): string {
  const attr = dash ? ` stroke-dasharray="${dash}"` : '';
  const pts = points.map(([px, py]) => `${fmt(px)},${fmt(py)}`).join(' ');
  return `<polyline fill="none" stroke="${stroke}"${attr} points="${pts}"/>`;
}

export function document(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n` +
    body +
    '\n</svg>\n'
  );
}
