/**
 * Tiny SVG builder for deterministic line charts.
 *
 * Every plotted marker carries the source values in `data-x` / `data-y`
 * attributes as the *exact* strings from the input CSV, so a figure can be
 * checked against its data without pixel comparison.
 */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { top: 32, right: 24, bottom: 56, left: 72 };

export const SERIES_COLORS = [
  '#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b',
];

export interface Scale {
  (value: number): number;
}

export function logScale(min: number, max: number, lo: number, hi: number): Scale {
  const lmin = Math.log10(min);
  const lmax = Math.log10(max);
  const span = lmax === lmin ? 1 : lmax - lmin;
  return (v: number) => lo + ((Math.log10(v) - lmin) / span) * (hi - lo);
}

export function linearScale(min: number, max: number, lo: number, hi: number): Scale {
  const span = max === min ? 1 : max - min;
  return (v: number) => lo + ((v - min) / span) * (hi - lo);
}

function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(2);
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(title: string) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      `<text x="${WIDTH / 2}" y="20" text-anchor="middle" font-family="sans-serif" font-size="15">${esc(title)}</text>`,
    );
  }

  axes(xLabel: string, yLabel: string): void {
    const { top, right, bottom, left } = MARGIN;
    this.parts.push(
      `<line x1="${left}" y1="${HEIGHT - bottom}" x2="${WIDTH - right}" y2="${HEIGHT - bottom}" stroke="black"/>`,
      `<line x1="${left}" y1="${top}" x2="${left}" y2="${HEIGHT - bottom}" stroke="black"/>`,
      `<text x="${(left + WIDTH - right) / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="13">${esc(xLabel)}</text>`,
      `<text x="18" y="${(top + HEIGHT - bottom) / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 ${(top + HEIGHT - bottom) / 2})">${esc(yLabel)}</text>`,
    );
  }

  xTick(px: number, label: string): void {
    const y = HEIGHT - MARGIN.bottom;
    this.parts.push(
      `<line x1="${fmt(px)}" y1="${y}" x2="${fmt(px)}" y2="${y + 5}" stroke="black"/>`,
      `<text x="${fmt(px)}" y="${y + 20}" text-anchor="middle" font-family="sans-serif" font-size="11">${esc(label)}</text>`,
    );
  }

  yTick(py: number, label: string): void {
    const x = MARGIN.left;
    this.parts.push(
      `<line x1="${x - 5}" y1="${fmt(py)}" x2="${x}" y2="${fmt(py)}" stroke="black"/>`,
      `<text x="${x - 8}" y="${fmt(py + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">${esc(label)}</text>`,
    );
  }

  polyline(points: [number, number][], color: string, dashed = false): void {
    const d = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(' ');
    const dash = dashed ? ' stroke-dasharray="6 4"' : '';
    this.parts.push(
      `<polyline points="${d}" fill="none" stroke="${color}" stroke-width="1.8"${dash}/>`,
    );
  }

  /** Data marker carrying the exact source strings. */
  marker(
    px: number, py: number, color: string,
    series: string, rawX: string, rawY: string,
  ): void {
    this.parts.push(
      `<circle cx="${fmt(px)}" cy="${fmt(py)}" r="3.5" fill="${color}" ` +
      `class="datapoint" data-series="${esc(series)}" data-x="${esc(rawX)}" data-y="${esc(rawY)}"/>`,
    );
  }

  errorBar(px: number, yLow: number, yHigh: number, color: string): void {
    this.parts.push(
      `<line x1="${fmt(px)}" y1="${fmt(yLow)}" x2="${fmt(px)}" y2="${fmt(yHigh)}" stroke="${color}" stroke-width="1.2" class="errorbar"/>`,
      `<line x1="${fmt(px - 4)}" y1="${fmt(yLow)}" x2="${fmt(px + 4)}" y2="${fmt(yLow)}" stroke="${color}" stroke-width="1.2"/>`,
      `<line x1="${fmt(px - 4)}" y1="${fmt(yHigh)}" x2="${fmt(px + 4)}" y2="${fmt(yHigh)}" stroke="${color}" stroke-width="1.2"/>`,
    );
  }

  legendEntry(index: number, label: string, color: string, dashed = false): void {
    const x = WIDTH - MARGIN.right - 160;
    const y = MARGIN.top + 14 + index * 18;
    const dash = dashed ? ' stroke-dasharray="6 4"' : '';
    this.parts.push(
      `<line x1="${x}" y1="${y - 4}" x2="${x + 26}" y2="${y - 4}" stroke="${color}" stroke-width="1.8"${dash}/>`,
      `<text x="${x + 32}" y="${y}" font-family="sans-serif" font-size="12" class="legend" data-series="${esc(label)}">${esc(label)}</text>`,
    );
  }

  comment(text: string): void {
    this.parts.push(`<!-- ${text.replace(/--/g, '- -')} -->`);
  }

  render(): string {
    return [...this.parts, '</svg>'].join('\n') + '\n';
  }
}

/** Pull the plotted series back out of a rendered figure. */
export function extractSeries(
  svg: string,
): Map<string, { x: string; y: string }[]> {
  const out = new Map<string, { x: string; y: string }[]>();
  const re = /<circle[^>]*class="datapoint"[^>]*data-series="([^"]*)"[^>]*data-x="([^"]*)"[^>]*data-y="([^"]*)"/g;
  let m: RegExpExecArray | null;
  while ((m = re.exec(svg)) !== null) {
    const [, series, x, y] = m;
    if (!out.has(series)) {
      out.set(series, []);
    }
    out.get(series)!.push({ x, y });
  }
  return out;
}
