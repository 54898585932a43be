import { readFileSync, writeFileSync } from "fs";
import Papa from "papaparse";

export class SchemaError extends Error {}

export interface SweepRow {
  sweep_kind: string;
  sweep_value: number;
  solver: string;
  mean_utility_pct: number;
  ci95_low: number;
  ci95_high: number;
  mean_cpu_usage: number;
  mean_ram_usage: number;
  mean_runtime_ms: number;
}

const NUMERIC_COLUMNS = [
  "sweep_value",
  "mean_utility_pct",
  "ci95_low",
  "ci95_high",
  "mean_cpu_usage",
  "mean_ram_usage",
  "mean_runtime_ms",
] as const;

const REQUIRED_COLUMNS = ["sweep_kind", "solver", ...NUMERIC_COLUMNS];

export function parseResults(text: string): SweepRow[] {
  // Metadata comment lines may precede the header.
  const body = text
    .split("\n")
    .filter((line) => !line.startsWith("#"))
    .join("\n");
  const parsed = Papa.parse<Record<string, string>>(body, {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  for (const column of REQUIRED_COLUMNS) {
    if (!fields.includes(column)) {
      throw new SchemaError(`missing column: ${column}`);
    }
  }
  if (parsed.data.length === 0) {
    throw new SchemaError("no data rows in CSV body");
  }
  return parsed.data.map((raw, index) => {
    const row: Record<string, unknown> = {
      sweep_kind: raw.sweep_kind,
      solver: raw.solver,
    };
    for (const column of NUMERIC_COLUMNS) {
      const value = Number(raw[column]);
      if (!Number.isFinite(value)) {
        throw new SchemaError(
          `non-numeric value in column ${column}, row ${index + 1}`,
        );
      }
      row[column] = value;
    }
    return row as unknown as SweepRow;
  });
}

interface FigureSpec {
  kind: string;
  xLabel: string;
  title: string;
}

const FIGURES: Record<string, FigureSpec> = {
  fig3: {
    kind: "options",
    xLabel: "configuration options per provider",
    title: "Utility vs number of options",
  },
  fig4: {
    kind: "nodes",
    xLabel: "edge nodes",
    title: "Utility vs cluster size",
  },
};

const SOLVERS = [
  { name: "exact", color: "#1f4e9c" },
  { name: "greedy", color: "#2e8b57" },
  { name: "naive", color: "#c0392b" },
];

const WIDTH = 760;
const PANEL_HEIGHT = 210;
const MARGIN = { top: 34, right: 24, bottom: 44, left: 64 };
const PANEL_GAP = 18;

const fmt = (value: number) => {
  const rounded = Math.round(value * 100) / 100;
  return Object.is(rounded, -0) ? "0" : String(rounded);
};

function niceTicks(lo: number, hi: number, count: number): number[] {
  if (hi <= lo) return [lo];
  const span = hi - lo;
  const step0 = span / Math.max(count - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  let step = mag;
  for (const m of [1, 2, 2.5, 5, 10]) {
    if (m * mag >= step0) {
      step = m * mag;
      break;
    }
  }
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    ticks.push(Math.round(t / step) * step);
  }
  return ticks;
}

interface Panel {
  label: string;
  // Per solver: x, line value, optional band bounds.
  value: (row: SweepRow) => number;
  bandLow?: (row: SweepRow) => number;
  bandHigh?: (row: SweepRow) => number;
  floorAtZero: boolean;
}

const PANELS: Panel[] = [
  {
    label: "utility (% of max)",
    value: (r) => r.mean_utility_pct,
    bandLow: (r) => r.ci95_low,
    bandHigh: (r) => r.ci95_high,
    floorAtZero: true,
  },
  {
    label: "resource usage (fraction)",
    value: (r) => (r.mean_cpu_usage + r.mean_ram_usage) / 2,
    floorAtZero: true,
  },
  {
    label: "runtime (ms)",
    value: (r) => r.mean_runtime_ms,
    floorAtZero: true,
  },
];

export function renderFigure(rows: SweepRow[], figure: string): string {
  const spec = FIGURES[figure];
  if (!spec) {
    throw new SchemaError(
      `unknown figure "${figure}", expected fig3 or fig4`,
    );
  }
  const relevant = rows.filter((r) => r.sweep_kind === spec.kind);
  if (relevant.length === 0) {
    throw new SchemaError(
      `no rows with sweep_kind=${spec.kind} for ${figure}`,
    );
  }
  const xs = [...new Set(relevant.map((r) => r.sweep_value))].sort(
    (a, b) => a - b,
  );
  const solvers = SOLVERS.filter((s) =>
    relevant.some((r) => r.solver === s.name),
  );

  const innerW = WIDTH - MARGIN.left - MARGIN.right;
  const innerH = PANEL_HEIGHT - MARGIN.top - MARGIN.bottom;
  const xLo = xs[0];
  const xHi = xs[xs.length - 1];
  const xPos = (v: number) =>
    MARGIN.left + (xHi === xLo ? innerW / 2 : ((v - xLo) / (xHi - xLo)) * innerW);

  const totalHeight = PANELS.length * PANEL_HEIGHT + (PANELS.length - 1) * PANEL_GAP;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${totalHeight}" ` +
      `viewBox="0 0 ${WIDTH} ${totalHeight}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${totalHeight}" fill="white"/>`);

  PANELS.forEach((panel, panelIndex) => {
    const top = panelIndex * (PANEL_HEIGHT + PANEL_GAP);
    const plotTop = top + MARGIN.top;
    const plotBottom = plotTop + innerH;

    let yLo = Infinity;
    let yHi = -Infinity;
    for (const row of relevant) {
      const candidates = [panel.value(row)];
      if (panel.bandLow) candidates.push(panel.bandLow(row));
      if (panel.bandHigh) candidates.push(panel.bandHigh(row));
      for (const c of candidates) {
        yLo = Math.min(yLo, c);
        yHi = Math.max(yHi, c);
      }
    }
    if (panel.floorAtZero) yLo = Math.min(yLo, 0);
    if (yHi === yLo) yHi = yLo + 1;
    const pad = (yHi - yLo) * 0.06;
    yHi += pad;
    const yPos = (v: number) =>
      plotBottom - ((v - yLo) / (yHi - yLo)) * innerH;

    parts.push(`<g class="panel" data-metric="${panel.label}">`);
    if (panelIndex === 0) {
      parts.push(
        `<text x="${MARGIN.left}" y="${top + 16}" font-size="14" font-weight="bold">` +
          `${spec.title}</text>`,
      );
    }
    // Frame and gridlines.
    parts.push(
      `<rect x="${MARGIN.left}" y="${plotTop}" width="${innerW}" height="${innerH}" ` +
        `fill="none" stroke="#444" stroke-width="1"/>`,
    );
    for (const tick of niceTicks(yLo, yHi, 5)) {
      const y = yPos(tick);
      if (y < plotTop - 1e-6 || y > plotBottom + 1e-6) continue;
      parts.push(
        `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + innerW}" ` +
          `y2="${fmt(y)}" stroke="#ddd" stroke-width="0.5"/>`,
      );
      parts.push(
        `<text x="${MARGIN.left - 8}" y="${fmt(y + 3.5)}" font-size="10" ` +
          `text-anchor="end">${fmt(tick)}</text>`,
      );
    }
    for (const x of xs) {
      parts.push(
        `<text x="${fmt(xPos(x))}" y="${plotBottom + 16}" font-size="10" ` +
          `text-anchor="middle">${fmt(x)}</text>`,
      );
    }
    parts.push(
      `<text x="${MARGIN.left + innerW / 2}" y="${plotBottom + 34}" font-size="11" ` +
        `text-anchor="middle">${spec.xLabel}</text>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 48}" y="${plotTop + innerH / 2}" font-size="11" ` +
        `text-anchor="middle" transform="rotate(-90 ${MARGIN.left - 48} ` +
        `${plotTop + innerH / 2})">${panel.label}</text>`,
    );

    for (const solver of solvers) {
      const series = xs
        .map((x) =>
          relevant.find((r) => r.solver === solver.name && r.sweep_value === x),
        )
        .filter((r): r is SweepRow => r !== undefined);
      if (series.length === 0) continue;

      if (panel.bandLow && panel.bandHigh) {
        const upper = series.map(
          (r) => `${fmt(xPos(r.sweep_value))},${fmt(yPos(panel.bandHigh!(r)))}`,
        );
        const lower = series
          .slice()
          .reverse()
          .map(
            (r) => `${fmt(xPos(r.sweep_value))},${fmt(yPos(panel.bandLow!(r)))}`,
          );
        parts.push(
          `<polygon class="band" data-solver="${solver.name}" ` +
            `points="${[...upper, ...lower].join(" ")}" fill="${solver.color}" ` +
            `fill-opacity="0.15" stroke="none"/>`,
        );
      }
      const points = series.map(
        (r) => `${fmt(xPos(r.sweep_value))},${fmt(yPos(panel.value(r)))}`,
      );
      parts.push(
        `<polyline class="series" data-solver="${solver.name}" ` +
          `points="${points.join(" ")}" fill="none" stroke="${solver.color}" ` +
          `stroke-width="1.8"/>`,
      );
      for (const r of series) {
        parts.push(
          `<circle cx="${fmt(xPos(r.sweep_value))}" cy="${fmt(yPos(panel.value(r)))}" ` +
            `r="2.6" fill="${solver.color}"/>`,
        );
      }
    }

    // Legend in the first panel only.
    if (panelIndex === 0) {
      let lx = MARGIN.left + innerW - solvers.length * 86;
      for (const solver of solvers) {
        parts.push(
          `<line x1="${lx}" y1="${plotTop + 12}" x2="${lx + 20}" y2="${plotTop + 12}" ` +
            `stroke="${solver.color}" stroke-width="2"/>`,
        );
        parts.push(
          `<text x="${lx + 25}" y="${plotTop + 16}" font-size="11">${solver.name}</text>`,
        );
        lx += 86;
      }
    }
    parts.push("</g>");
  });

  parts.push("</svg>");
  return parts.join("\n");
}

export function renderFile(csvPath: string, figure: string, outPath: string) {
  const rows = parseResults(readFileSync(csvPath, "utf-8"));
  writeFileSync(outPath, renderFigure(rows, figure));
}

export function main(argv: string[]): number {
  if (argv.length !== 3) {
    console.error("usage: render <results.csv> <fig3|fig4> <out.svg>");
    return 2;
  }
  const [csvPath, figure, outPath] = argv;
  if (!(figure in FIGURES)) {
    console.error(`unknown figure "${figure}", expected fig3 or fig4`);
    return 2;
  }
  try {
    renderFile(csvPath, figure, outPath);
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
  return 0;
}
