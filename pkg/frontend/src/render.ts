/**
 * Figure rendering for simulator sweep CSVs.
 *
 * Three figure kinds:
 *   ACC_VS_EPS    accuracy against the epsilon target, error bars from
 *                 acc_stderr, one curve per mode
 *   MSE_VS_EPS    empirical MSE against epsilon (log-log), error bars from
 *                 mse_stderr
 *   BOUND_OVERLAY empirical MSE points under the analytic bound curve
 *
 * The epsilon axis is logarithmic. Rendering is pure: same CSV text in,
 * same SVG text out.
 */

import { SweepTable, asNumber, groupRows, parseCsv, requireColumns, CsvError } from './csv.js';
import {
  HEIGHT, MARGIN, SERIES_COLORS, SvgDoc, WIDTH,
  extractSeries, linearScale, logScale, Scale,
} from './svg.js';

export type PlotKind = 'ACC_VS_EPS' | 'MSE_VS_EPS' | 'BOUND_OVERLAY';

export const PLOT_KINDS: PlotKind[] = ['ACC_VS_EPS', 'MSE_VS_EPS', 'BOUND_OVERLAY'];

export interface PlotJob {
  kind: PlotKind;
  /** Column used to split rows into labeled curves; null = single curve. */
  seriesGrouping: string | null;
}

interface KindSpec {
  y: string;
  err: string | null;
  overlay: string | null;
  logY: boolean;
  title: string;
  yLabel: string;
}

const KIND_SPECS: Record<PlotKind, KindSpec> = {
  ACC_VS_EPS: {
    y: 'acc_empirical', err: 'acc_stderr', overlay: null, logY: false,
    title: 'Classification accuracy vs privacy budget',
    yLabel: 'accuracy',
  },
  MSE_VS_EPS: {
    y: 'mse_empirical', err: 'mse_stderr', overlay: null, logY: true,
    title: 'Aggregation MSE vs privacy budget',
    yLabel: 'empirical MSE',
  },
  BOUND_OVERLAY: {
    y: 'mse_empirical', err: 'mse_stderr', overlay: 'mse_bound_total', logY: true,
    title: 'Analytic MSE bound over empirical MSE',
    yLabel: 'MSE',
  },
};

const X_COLUMN = 'eps_target';

function yRange(table: SweepTable, spec: KindSpec): [number, number] {
  let min = Infinity;
  let max = -Infinity;
  for (const row of table.rows) {
    const cols = spec.overlay ? [spec.y, spec.overlay] : [spec.y];
    for (const col of cols) {
      const v = asNumber(row, col);
      const e = spec.err ? asNumber(row, spec.err) : 0;
      min = Math.min(min, v - e);
      max = Math.max(max, v + e);
    }
  }
  if (spec.logY) {
    min = Math.max(min, 1e-12);
  }
  if (min === max) {
    // single-value data: pad so the point sits mid-plot
    min -= 0.5;
    max += 0.5;
  }
  return [min, max];
}

function makeYScale(spec: KindSpec, min: number, max: number): Scale {
  const lo = HEIGHT - MARGIN.bottom;
  const hi = MARGIN.top;
  return spec.logY ? logScale(min, max, lo, hi) : linearScale(min, max, lo, hi);
}

function tickValues(min: number, max: number, log: boolean): number[] {
  if (log) {
    const out: number[] = [];
    for (let e = Math.ceil(Math.log10(min)); Math.pow(10, e) <= max; e++) {
      out.push(Math.pow(10, e));
    }
    return out.length > 0 ? out : [min, max];
  }
  const out: number[] = [];
  const step = (max - min) / 5;
  for (let i = 0; i <= 5; i++) {
    out.push(min + i * step);
  }
  return out;
}

function tickLabel(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 1e4 || Math.abs(v) < 1e-2)) {
    return v.toExponential(0);
  }
  return Number.isInteger(v) ? String(v) : v.toPrecision(3);
}

export function renderSvg(csvText: string, job: PlotJob): string {
  const table = parseCsv(csvText);
  const spec = KIND_SPECS[job.kind];
  const needed = [X_COLUMN, spec.y];
  if (spec.err) needed.push(spec.err);
  if (spec.overlay) needed.push(spec.overlay);
  requireColumns(table, needed);

  const groups = groupRows(table, job.seriesGrouping);

  const xs = table.rows.map((r) => asNumber(r, X_COLUMN));
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const xScale = logScale(
    xMin, xMax === xMin ? xMin * 10 : xMax,
    MARGIN.left, WIDTH - MARGIN.right,
  );
  const [yMin, yMax] = yRange(table, spec);
  const yScale = makeYScale(spec, yMin, yMax);

  const doc = new SvgDoc(spec.title);
  if (table.comment) {
    doc.comment(`source: ${table.comment}`);
  }
  doc.axes('privacy budget (epsilon target, log scale)', spec.yLabel);
  for (const v of tickValues(xMin, Math.max(xMax, xMin), true)) {
    if (v >= xMin && v <= Math.max(xMax, xMin * 10)) {
      doc.xTick(xScale(v), tickLabel(v));
    }
  }
  for (const v of tickValues(yMin, yMax, spec.logY)) {
    doc.yTick(yScale(v), tickLabel(v));
  }

  let seriesIndex = 0;
  for (const [label, rows] of groups) {
    const color = SERIES_COLORS[seriesIndex % SERIES_COLORS.length];
    const sorted = [...rows].sort(
      (a, b) => asNumber(a, X_COLUMN) - asNumber(b, X_COLUMN),
    );
    const line: [number, number][] = [];
    for (const row of sorted) {
      const x = asNumber(row, X_COLUMN);
      const y = asNumber(row, spec.y);
      const px = xScale(x);
      const py = yScale(spec.logY ? Math.max(y, yMin) : y);
      line.push([px, py]);
      if (spec.err) {
        const e = asNumber(row, spec.err);
        if (e > 0) {
          const lo = spec.logY ? Math.max(y - e, yMin) : y - e;
          doc.errorBar(px, yScale(lo), yScale(y + e), color);
        }
      }
      doc.marker(px, py, color, label, row[X_COLUMN], row[spec.y]);
    }
    doc.polyline(line, color);
    doc.legendEntry(seriesIndex, label, color);

    if (spec.overlay) {
      const boundLine: [number, number][] = sorted.map((row) => [
        xScale(asNumber(row, X_COLUMN)),
        yScale(asNumber(row, spec.overlay!)),
      ]);
      doc.polyline(boundLine, color, true);
      seriesIndex += 1;
      doc.legendEntry(seriesIndex, `${label} (bound)`, color, true);
    }
    seriesIndex += 1;
  }
  return doc.render();
}

export { CsvError, extractSeries, parseCsv };
