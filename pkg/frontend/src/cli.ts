#!/usr/bin/env node
/**
 * plotkit <kind> --in sweep.csv --out fig.svg [--group-by mode]
 *
 * kinds: ACC_VS_EPS | MSE_VS_EPS | BOUND_OVERLAY
 *
 * Reads a sweep CSV produced by the simulator harness and writes a
 * deterministic SVG figure. The input file is never modified.
 */

import { readFileSync, writeFileSync } from 'node:fs';
import { CsvError, PLOT_KINDS, PlotKind, renderSvg } from './render.js';

function usage(): never {
  console.error(
    'usage: plotkit <ACC_VS_EPS|MSE_VS_EPS|BOUND_OVERLAY> --in sweep.csv --out fig.svg [--group-by COLUMN]',
  );
  process.exit(2);
}

export function main(argv: string[]): number {
  if (argv.length === 0) usage();
  const kind = argv[0] as PlotKind;
  if (!PLOT_KINDS.includes(kind)) {
    console.error(`unknown kind: ${argv[0]}`);
    usage();
  }
  let input: string | null = null;
  let output: string | null = null;
  let groupBy: string | null = 'mode';
  let groupBySet = false;
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) usage();
    if (flag === '--in') input = value;
    else if (flag === '--out') output = value;
    else if (flag === '--group-by') { groupBy = value; groupBySet = true; }
    else usage();
  }
  if (input === null || output === null) usage();

  const csvText = readFileSync(input, 'utf8');
  // default grouping: by mode when the column exists, single curve otherwise
  if (!groupBySet) {
    const header = csvText.split(/\r?\n/).find((l) => !l.startsWith('#')) ?? '';
    if (!header.split(',').includes('mode')) groupBy = null;
  }
  try {
    const svg = renderSvg(csvText, { kind, seriesGrouping: groupBy });
    writeFileSync(output, svg);
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`invalid input: ${err.message}`);
      return 1;
    }
    throw err;
  }
  console.error(`wrote ${output}`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
