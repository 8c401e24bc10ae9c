/** The four figure presets: which columns they plot and how series group. */

import { MetricsRow } from "./csv.js";
import { ScaleKind } from "./scale.js";

export interface FigureSpec {
  id: string;
  title: string;
  x: { field: keyof MetricsRow; label: string; scale: ScaleKind };
  y: { field: keyof MetricsRow; label: string; scale: ScaleKind };
  /** column carrying the 95% confidence half-width, when the figure has one */
  ci?: keyof MetricsRow;
  /** series identity within the figure */
  seriesLabel(row: MetricsRow): string;
}

function policyMode(row: MetricsRow): string {
  return row.ack_mode === "none" ? row.policy : `${row.policy}/${row.ack_mode}`;
}

function withSeTarget(row: MetricsRow): string {
  return `${policyMode(row)} se=${row.se_target}`;
}

export const FIGURES: Record<string, FigureSpec> = {
  fig5a: {
    id: "fig5a",
    title: "Reconstruction error vs training codebook size",
    x: { field: "n_tr", label: "training configurations", scale: "linear" },
    y: { field: "se_mean", label: "normalized expected SE", scale: "log" },
    seriesLabel: (r) => `tolerance ${r.se_target}`,
  },
  fig5b: {
    id: "fig5b",
    title: "Access probability vs channel load (no ACK)",
    x: { field: "kappa", label: "channel load", scale: "linear" },
    y: { field: "p_access_mean", label: "probability of access", scale: "linear" },
    ci: "p_access_ci95",
    seriesLabel: withSeTarget,
  },
  fig6: {
    id: "fig6",
    title: "End-to-end throughput vs channel load",
    x: { field: "kappa", label: "channel load", scale: "linear" },
    y: { field: "throughput_mean", label: "throughput [packet/use]", scale: "linear" },
    ci: "throughput_ci95",
    seriesLabel: policyMode,
  },
  fig7: {
    id: "fig7",
    title: "Throughput vs reconfiguration latency",
    x: { field: "t_sw", label: "switching time [uses]", scale: "linear" },
    y: { field: "throughput_mean", label: "throughput [packet/use]", scale: "linear" },
    ci: "throughput_ci95",
    seriesLabel: policyMode,
  },
};

export function figureSpec(id: string): FigureSpec {
  const spec = FIGURES[id];
  if (!spec) {
    throw new Error(
      `unknown figure ${JSON.stringify(id)}; choose one of ${Object.keys(FIGURES).join(", ")}`,
    );
  }
  return spec;
}
