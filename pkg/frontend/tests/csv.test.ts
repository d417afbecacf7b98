import { readFileSync } from 'node:fs';
import { join, dirname } from 'node:path';
import { fileURLToPath } from 'node:url';
import { describe, expect, it } from 'vitest';

import { CsvError, asNumber, groupRows, parseCsv, requireColumns } from '../src/csv.js';

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), 'fixtures');
const modeCsv = readFileSync(join(FIXTURES, 'mode_comparison.csv'), 'utf8');

describe('parseCsv', () => {
  it('reads the metadata comment and all rows', () => {
    const table = parseCsv(modeCsv);
    expect(table.comment).toContain('config_hash=');
    expect(table.columns[0]).toBe('mode');
    expect(table.rows.length).toBe(24);
  });

  it('keeps cell values as exact strings', () => {
    const table = parseCsv(modeCsv);
    expect(table.rows[0].eps_target).toBe('2.0');
    expect(table.rows[0].mode).toBe('uniform');
    // full-precision float strings survive untouched
    expect(table.rows[0].sigma_sq).toMatch(/^\d+\.\d{10,}$/);
  });

  it('rejects empty input', () => {
    expect(() => parseCsv('')).toThrow(CsvError);
    expect(() => parseCsv('# only a comment\n')).toThrow(CsvError);
  });

  it('rejects a header-only file', () => {
    expect(() => parseCsv('a,b,c\n')).toThrow(/no data rows/);
  });

  it('rejects ragged rows', () => {
    expect(() => parseCsv('a,b\n1,2,3\n')).toThrow(/expected 2/);
  });
});

describe('requireColumns', () => {
  it('names the missing column', () => {
    const table = parseCsv(modeCsv);
    expect(() => requireColumns(table, ['nonexistent_column']))
      .toThrow('missing column: nonexistent_column');
  });
});

describe('asNumber', () => {
  it('parses numerics and rejects junk', () => {
    const table = parseCsv('x\n1.5e3\n');
    expect(asNumber(table.rows[0], 'x')).toBe(1500);
    const bad = parseCsv('x\nhello\n');
    expect(() => asNumber(bad.rows[0], 'x')).toThrow(CsvError);
  });
});

describe('groupRows', () => {
  it('splits the three modes in file order', () => {
    const groups = groupRows(parseCsv(modeCsv), 'mode');
    expect([...groups.keys()]).toEqual(['uniform', 'weight', 'clip']);
    expect(groups.get('weight')!.length).toBe(8);
  });

  it('null grouping yields a single series', () => {
    const groups = groupRows(parseCsv(modeCsv), null);
    expect(groups.size).toBe(1);
  });
});
