import { describe, expect, it } from 'vitest';

import { columnIndices, numericColumn, parseCsv } from '../src/csv';

describe('parseCsv', () => {
  it('skips comment lines and splits the header', () => {
    const table = parseCsv('# blockamp=0.1.0 config=abc seed=0\na,b\n1,2\n3,4\n');
    expect(table.columns).toEqual(['a', 'b']);
    expect(table.rows).toEqual([
      ['1', '2'],
      ['3', '4'],
    ]);
  });

  it('rejects an empty file', () => {
    expect(() => parseCsv('', 'x.csv')).toThrow('x.csv: no header row');
    expect(() => parseCsv('# only a comment\n', 'x.csv')).toThrow('no header row');
  });

  it('rejects a header-only file', () => {
    expect(() => parseCsv('a,b\n', 'x.csv')).toThrow('no data rows');
  });

  it('rejects ragged rows', () => {
    expect(() => parseCsv('a,b\n1,2,3\n')).toThrow('row has 3 fields');
  });
});

describe('columnIndices', () => {
  it('reports every missing column', () => {
    const table = parseCsv('a,b\n1,2\n');
    expect(() => columnIndices(table, ['a', 'c', 'd'], 'f.csv')).toThrow(
      'f.csv: missing columns c, d'
    );
    expect(columnIndices(table, ['b']).get('b')).toBe(1);
  });
});

describe('numericColumn', () => {
  it('parses numbers and rejects junk', () => {
    const table = parseCsv('v\n1.5\n-2\n');
    expect(numericColumn(table, 'v')).toEqual([1.5, -2]);
    expect(() => numericColumn(parseCsv('v\nabc\n'), 'v')).toThrow('non-numeric');
  });
});
