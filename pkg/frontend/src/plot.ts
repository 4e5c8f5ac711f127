/**
 * Convergence-panel rendering for airig benchmark output.
 *
 * Consumes the benchmark CLI's artifacts as-is: a summary.json plus one
 * trace CSV per solver (header: k,f_bar,phi_bar,f_last,phi_last,gamma_k,
 * eta_k,elapsed_s) and produces a two-panel SVG, suboptimality on the left
 * and infeasibility on the right, every solver overlaid in a fixed order
 * and color so figures stay comparable across runs.
 *
 * Rendering is pure string building: identical inputs give identical bytes.
 */

import { readFileSync } from "fs";
import path from "path";

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

export interface TraceRow {
  k: number;
  f_bar: number;
  phi_bar: number;
  f_last: number;
  phi_last: number;
  gamma_k: number;
  eta_k: number;
  elapsed_s: number;
}

export interface SolverTrace {
  solver: string;
  rows: TraceRow[];
}

export type Axis = "time" | "iteration";

export interface PanelSpec {
  traces: SolverTrace[];
  axis: Axis;
  /** log y on the suboptimality panel (default true) */
  logSubopt: boolean;
  /** log y on the infeasibility panel (default false) */
  logInfeas: boolean;
  fStar: number | null;
  /** subtitle line, typically problem identity from the summary */
  subtitle: string;
}

interface SummaryRun {
  solver: string;
  error: string | null;
  trace?: string;
}

interface SummaryFile {
  problem?: { source?: string; n?: number; m?: number };
  f_star?: number | null;
  runs?: SummaryRun[];
}

export const SOLVER_ORDER = ["airig", "proj_ig", "prox_iag", "saga"] as const;

export const SOLVER_COLORS: Record<string, string> = {
  airig: "#1f77b4",
  proj_ig: "#ff7f0e",
  prox_iag: "#2ca02c",
  saga: "#d62728",
};

const TRACE_HEADER =
  "k,f_bar,phi_bar,f_last,phi_last,gamma_k,eta_k,elapsed_s";

// ---------------------------------------------------------------------------
// Input parsing
// ---------------------------------------------------------------------------

/** Strict trace parser; any malformed content names the file and 1-based line. */
export function parseTrace(text: string, file: string): TraceRow[] {
  const lines = text.split("\n");
  if ((lines[0] ?? "").trim() !== TRACE_HEADER) {
    throw new Error(`${file}:1: expected header "${TRACE_HEADER}"`);
  }
  const rows: TraceRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const line = (lines[i] ?? "").trim();
    if (line === "") continue;
    const parts = line.split(",");
    if (parts.length !== 8) {
      throw new Error(`${file}:${i + 1}: expected 8 fields, got ${parts.length}`);
    }
    const nums = parts.map(Number);
    const bad = nums.findIndex((v) => Number.isNaN(v));
    if (bad >= 0) {
      throw new Error(`${file}:${i + 1}: field ${bad + 1} is not a number: "${parts[bad]}"`);
    }
    rows.push({
      k: nums[0]!,
      f_bar: nums[1]!,
      phi_bar: nums[2]!,
      f_last: nums[3]!,
      phi_last: nums[4]!,
      gamma_k: nums[5]!,
      eta_k: nums[6]!,
      elapsed_s: nums[7]!,
    });
  }
  if (rows.length === 0) {
    throw new Error(`${file}: trace has a header but no data rows`);
  }
  return rows;
}

/**
 * Assemble a panel from one summary file: every successful run's trace is
 * loaded from the summary's directory, which is what ties all curves to the
 * same problem. Solvers missing from SOLVER_ORDER render after the known
 * ones, in summary order.
 */
export function loadPanel(
  summaryPath: string,
  axis: Axis = "time",
  opts: { logSubopt?: boolean; logInfeas?: boolean } = {},
): PanelSpec {
  const summary: SummaryFile = JSON.parse(readFileSync(summaryPath, "utf-8"));
  const runs = summary.runs ?? [];
  const dir = path.dirname(summaryPath);
  const usable = runs.filter((r) => r.error === null && r.trace);
  if (usable.length === 0) {
    throw new Error(`${summaryPath}: no successful runs with traces`);
  }
  const order = (s: SummaryRun) => {
    const i = (SOLVER_ORDER as readonly string[]).indexOf(s.solver);
    return i < 0 ? SOLVER_ORDER.length : i;
  };
  usable.sort((a, b) => order(a) - order(b));
  const traces = usable.map((r) => ({
    solver: r.solver,
    rows: parseTrace(readFileSync(path.join(dir, r.trace!), "utf-8"), r.trace!),
  }));
  const p = summary.problem ?? {};
  const subtitle = `${p.source ?? "problem"}  n=${p.n ?? "?"}  m=${p.m ?? "?"}`;
  return {
    traces,
    axis,
    logSubopt: opts.logSubopt ?? true,
    logInfeas: opts.logInfeas ?? false,
    fStar: summary.f_star ?? null,
    subtitle,
  };
}

// ---------------------------------------------------------------------------
// SVG helpers
// ---------------------------------------------------------------------------

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 0.01; v += step) {
    ticks.push(v);
  }
  return ticks;
}

function decadeTicks(min: number, max: number): number[] {
  const lo = Math.ceil(Math.log10(min) - 1e-9);
  const hi = Math.floor(Math.log10(max) + 1e-9);
  const ticks: number[] = [];
  for (let e = lo; e <= hi; e++) ticks.push(Math.pow(10, e));
  return ticks;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    const e = Math.floor(Math.log10(a) + 1e-9);
    const mant = v / Math.pow(10, e);
    const m = Math.abs(mant - 1) < 1e-9 ? "" : `${mant.toFixed(0)}·`;
    return `${m}1e${e}`;
  }
  return a >= 100 ? v.toFixed(0) : a >= 1 ? String(Number(v.toPrecision(3))) : String(Number(v.toPrecision(2)));
}

// ---------------------------------------------------------------------------
// Panel geometry
// ---------------------------------------------------------------------------

const W = 920;
const H = 320;
const PANEL_W = 400;
const ML = 62; // left margin inside each panel
const MT = 46;
const MB = 46;
const GAP = (W - 2 * PANEL_W) / 3;

interface Curve {
  solver: string;
  xs: number[];
  ys: number[];
}

function buildSubPanel(
  offsetX: number,
  title: string,
  xLabel: string,
  curves: Curve[],
  logY: boolean,
): string {
  const ph = H - MT - MB;
  const pw = PANEL_W - ML - 14;
  const x0 = offsetX + ML;

  // drop non-finite points, and non-positives under a log axis
  const cleaned = curves.map((c) => {
    const xs: number[] = [];
    const ys: number[] = [];
    for (let i = 0; i < c.xs.length; i++) {
      const x = c.xs[i]!;
      const y = c.ys[i]!;
      if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
      if (logY && y <= 0) continue;
      xs.push(x);
      ys.push(y);
    }
    return { solver: c.solver, xs, ys };
  });

  const allX = cleaned.flatMap((c) => c.xs);
  const allY = cleaned.flatMap((c) => c.ys);
  let s = "";
  s += `<text x="${x0}" y="${MT - 10}" font-size="11" font-weight="600" fill="#222">${esc(title)}</text>\n`;
  if (allY.length === 0) {
    s += `<text x="${x0 + pw / 2}" y="${MT + ph / 2}" text-anchor="middle" font-size="9" fill="#999">no positive values to draw</text>\n`;
  }

  const xMin = allX.length ? Math.min(...allX) : 0;
  const xMax = allX.length ? Math.max(...allX) : 1;
  const yMinRaw = allY.length ? Math.min(...allY) : logY ? 1e-3 : 0;
  const yMaxRaw = allY.length ? Math.max(...allY) : 1;
  const yMin = logY ? yMinRaw : Math.min(0, yMinRaw);
  const yMax = logY ? yMaxRaw : yMaxRaw * 1.05 || 1;

  const xOf = (v: number) => x0 + ((v - xMin) / (xMax - xMin || 1)) * pw;
  const tY = (v: number) => (logY ? Math.log10(v) : v);
  const yLo = tY(yMin);
  const yHi = tY(yMax);
  const yOf = (v: number) => MT + ph - ((tY(v) - yLo) / (yHi - yLo || 1)) * ph;

  // grid + y ticks; decades always print as 1e<exp> so log axes read as such
  const yTicks = logY ? decadeTicks(yMin, yMax) : niceTicks(yMin, yMax, 5);
  const yTickLabel = logY
    ? (v: number) => `1e${Math.round(Math.log10(v))}`
    : fmtTick;
  for (const v of yTicks) {
    const y = yOf(v);
    s += `<line x1="${x0}" y1="${y.toFixed(1)}" x2="${x0 + pw}" y2="${y.toFixed(1)}" stroke="#eee" stroke-width="0.5"/>\n`;
    s += `<line x1="${x0 - 3}" y1="${y.toFixed(1)}" x2="${x0}" y2="${y.toFixed(1)}" stroke="#333" stroke-width="0.5"/>\n`;
    s += `<text x="${x0 - 5}" y="${(y + 3).toFixed(1)}" text-anchor="end" font-size="7.5" fill="#555">${esc(yTickLabel(v))}</text>\n`;
  }

  // curves in declared order
  for (const c of cleaned) {
    if (c.xs.length === 0) continue;
    const color = SOLVER_COLORS[c.solver] ?? "#555";
    const pts = c.xs
      .map((x, i) => `${xOf(x).toFixed(1)},${yOf(c.ys[i]!).toFixed(1)}`)
      .join(" ");
    s += `<polyline fill="none" stroke="${color}" stroke-width="1.3" points="${pts}"/>\n`;
    const lastX = xOf(c.xs[c.xs.length - 1]!).toFixed(1);
    const lastY = yOf(c.ys[c.ys.length - 1]!).toFixed(1);
    s += `<circle cx="${lastX}" cy="${lastY}" r="1.8" fill="${color}"/>\n`;
  }

  // frame
  s += `<line x1="${x0}" y1="${MT}" x2="${x0}" y2="${MT + ph}" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<line x1="${x0}" y1="${MT + ph}" x2="${x0 + pw}" y2="${MT + ph}" stroke="#333" stroke-width="0.8"/>\n`;

  // x ticks
  for (const v of niceTicks(xMin, xMax, 5)) {
    const x = xOf(v);
    s += `<line x1="${x.toFixed(1)}" y1="${MT + ph}" x2="${x.toFixed(1)}" y2="${MT + ph + 3}" stroke="#333" stroke-width="0.5"/>\n`;
    s += `<text x="${x.toFixed(1)}" y="${MT + ph + 13}" text-anchor="middle" font-size="7.5" fill="#555">${esc(fmtTick(v))}</text>\n`;
  }
  s += `<text x="${x0 + pw / 2}" y="${H - 8}" text-anchor="middle" font-size="9" fill="#444">${esc(xLabel)}</text>\n`;
  return s;
}

// ---------------------------------------------------------------------------
// Main renderer
// ---------------------------------------------------------------------------

/** Render the 2-panel figure as an SVG string. Pure; byte-stable. */
export function renderPanel(spec: PanelSpec): string {
  if (spec.traces.length === 0) {
    throw new Error("panel needs at least one trace");
  }
  const xLabel = spec.axis === "time" ? "elapsed (s)" : "iteration k";
  const xOfRow = (r: TraceRow) => (spec.axis === "time" ? r.elapsed_s : r.k);

  const subCurves: Curve[] = [];
  const infCurves: Curve[] = [];
  for (const t of spec.traces) {
    const xs = t.rows.map(xOfRow);
    if (spec.fStar !== null) {
      subCurves.push({
        solver: t.solver,
        xs,
        ys: t.rows.map((r) => r.f_bar - spec.fStar!),
      });
    }
    infCurves.push({ solver: t.solver, xs, ys: t.rows.map((r) => r.phi_bar) });
  }

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  s += `<text x="${GAP + ML}" y="16" font-size="8" fill="#888">${esc(spec.subtitle)}</text>\n`;

  const subTitle = spec.fStar !== null
    ? "suboptimality f(x̄) − f*"
    : "objective f(x̄) (no reference optimum)";
  const leftCurves = spec.fStar !== null
    ? subCurves
    : spec.traces.map((t) => ({
        solver: t.solver,
        xs: t.rows.map(xOfRow),
        ys: t.rows.map((r) => r.f_bar),
      }));
  s += buildSubPanel(GAP, subTitle, xLabel, leftCurves,
    spec.fStar !== null && spec.logSubopt);
  s += buildSubPanel(
    2 * GAP + PANEL_W,
    "infeasibility φ(x̄)",
    xLabel,
    infCurves,
    spec.logInfeas,
  );

  // legend, fixed order, between the panel titles
  let lx = W - GAP - 4 - spec.traces.length * 78;
  for (const t of spec.traces) {
    const color = SOLVER_COLORS[t.solver] ?? "#555";
    s += `<line x1="${lx}" y1="13" x2="${lx + 16}" y2="13" stroke="${color}" stroke-width="1.6"/>\n`;
    s += `<text x="${lx + 20}" y="16" font-size="8.5" fill="#333">${esc(t.solver)}</text>\n`;
    lx += 78;
  }

  s += `</svg>\n`;
  return s;
}
