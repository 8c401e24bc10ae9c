/** Linear and logarithmic axis scales with tick generation. */

export type ScaleKind = "linear" | "log";

export interface Scale {
  kind: ScaleKind;
  domain: [number, number];
  range: [number, number];
  map(value: number): number;
  ticks(): number[];
}

function niceStep(span: number): number {
  const raw = span / 5;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  let [lo, hi] = domain;
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const map = (v: number) =>
    range[0] + ((v - lo) / (hi - lo)) * (range[1] - range[0]);
  return {
    kind: "linear",
    domain: [lo, hi],
    range,
    map,
    ticks() {
      const step = niceStep(hi - lo);
      const first = Math.ceil(lo / step) * step;
      const out: number[] = [];
      for (let v = first; v <= hi + 1e-9 * step; v += step) {
        out.push(Math.abs(v) < 1e-12 ? 0 : v);
      }
      return out;
    },
  };
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  let [lo, hi] = domain;
  if (lo <= 0) {
    throw new Error(`log scale needs positive values, got ${lo}`);
  }
  if (lo === hi) {
    lo /= 10;
    hi *= 10;
  }
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const map = (v: number) =>
    range[0] + ((Math.log10(v) - llo) / (lhi - llo)) * (range[1] - range[0]);
  return {
    kind: "log",
    domain: [lo, hi],
    range,
    map,
    ticks() {
      const out: number[] = [];
      for (let e = Math.ceil(llo - 1e-9); e <= Math.floor(lhi + 1e-9); e++) {
        out.push(Math.pow(10, e));
      }
      return out;
    },
  };
}

export function formatTick(v: number, kind: ScaleKind): string {
  if (kind === "log") {
    const e = Math.round(Math.log10(v));
    return `1e${e}`;
  }
  if (Number.isInteger(v)) return String(v);
  return v.toPrecision(3).replace(/\.?0+$/, "");
}
