import * as fs from 'fs';
import * as path from 'path';

import { numericColumn, parseCsv } from './csv';
import { renderGapCurve, renderMseCurve, renderSpectrumPair, SpectrumPanel } from './figures';

const FIGURES = ['mse_curve', 'gap_curve', 'spectrum_pair'] as const;
type FigureId = (typeof FIGURES)[number];

export interface Args {
  figure: FigureId;
  inputs: string[];
  out: string;
  bins?: number;
}

export function parseArgs(argv: string[]): Args {
  const [figure, ...rest] = argv;
  if (!figure || !(FIGURES as readonly string[]).includes(figure)) {
    throw new Error(`usage: render <${FIGURES.join('|')}> --in <csv...> --out <path> [--bins <n>]`);
  }
  const inputs: string[] = [];
  let out = '';
  let bins: number | undefined;
  for (let i = 0; i < rest.length; i++) {
    if (rest[i] === '--in') {
      while (i + 1 < rest.length && !rest[i + 1].startsWith('--')) {
        inputs.push(rest[++i]);
      }
    } else if (rest[i] === '--out') {
      out = rest[++i] ?? '';
    } else if (rest[i] === '--bins') {
      bins = Number(rest[++i]);
      if (!Number.isInteger(bins) || bins < 1) {
        throw new Error('--bins needs a positive integer');
      }
    } else {
      throw new Error(`unknown argument ${rest[i]}`);
    }
  }
  if (inputs.length === 0) throw new Error('--in requires at least one CSV');
  if (!out) throw new Error('--out is required');
  return { figure: figure as FigureId, inputs, out, bins };
}

function panelLabel(file: string): string {
  const match = path.basename(file).match(/snr([0-9.]+[0-9])/);
  return match ? `snr ${match[1]}` : path.basename(file);
}

export function render(args: Args): string {
  if (args.figure === 'spectrum_pair') {
    const panels: SpectrumPanel[] = args.inputs.map((file) => {
      const table = parseCsv(fs.readFileSync(file, 'utf8'), file);
      return { label: panelLabel(file), values: numericColumn(table, 'eigenvalue', file) };
    });
    return renderSpectrumPair(panels, args.bins);
  }
  if (args.inputs.length !== 1) {
    throw new Error(`${args.figure} takes exactly one CSV`);
  }
  const file = args.inputs[0];
  const table = parseCsv(fs.readFileSync(file, 'utf8'), file);
  return args.figure === 'mse_curve' ? renderMseCurve(table, file) : renderGapCurve(table, file);
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    const svg = render(args);
    fs.writeFileSync(args.out, svg);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
