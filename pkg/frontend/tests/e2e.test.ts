/** End-to-end checks against a locally running prediction service.
 *
 * Set FLOWSUR_URL to point somewhere else; when no service answers the
 * health probe the suite skips instead of failing, so unit tests stay
 * runnable offline.
 */

import { beforeAll, describe, expect, it } from "vitest";

import { decodeField, fetchMeta, fetchPrediction } from "../src/api.js";
import { paintField } from "../src/heatmap.js";

const base = process.env.FLOWSUR_URL ?? "http://127.0.0.1:8000";
let alive = false;

beforeAll(async () => {
  try {
    const res = await fetch(`${base}/api/health`, { signal: AbortSignal.timeout(1500) });
    alive = res.ok;
  } catch {
    alive = false;
  }
});

describe("live service", () => {
  it("reports the expected grid", async (ctx) => {
    if (!alive) return ctx.skip();
    const meta = await fetchMeta(base);
    expect(meta.grid).toEqual({ ny: 100, nx: 150 });
    expect(meta.velocity_range[0]).toBeCloseTo(0.05, 9);
    expect(meta.velocity_range[1]).toBeCloseTo(1.0, 9);
  });

  it("turns a slider change into pixels in under 300 ms", async (ctx) => {
    if (!alive) return ctx.skip();
    const meta = await fetchMeta(base);
    const t0 = performance.now();
    const resp = await fetchPrediction(base, 0.37, 0.81);
    const payload = resp.fields["velocity"]!;
    const values = decodeField(payload.data);
    const pixels = paintField(values, resp.grid.ny, resp.grid.nx, payload.min, payload.max);
    const elapsed = performance.now() - t0;

    expect(values.length).toBe(meta.grid.ny * meta.grid.nx);
    expect(pixels.length).toBe(values.length * 4);
    expect(elapsed).toBeLessThan(300);
  });

  it("returns identical bytes for identical requests", async (ctx) => {
    if (!alive) return ctx.skip();
    const a = await fetchPrediction(base, 0.5, 0.25);
    const b = await fetchPrediction(base, 0.5, 0.25);
    expect(a.fields["velocity"]!.data).toBe(b.fields["velocity"]!.data);
    expect(a.fields["temperature"]!.data).toBe(b.fields["temperature"]!.data);
  });

  it("decodes fields whose extremes match the advertised min/max", async (ctx) => {
    if (!alive) return ctx.skip();
    const resp = await fetchPrediction(base, 0.8, 0.1);
    for (const name of ["velocity", "temperature"]) {
      const payload = resp.fields[name]!;
      const values = decodeField(payload.data);
      let lo = Infinity;
      let hi = -Infinity;
      for (const v of values) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
      }
      expect(lo).toBeCloseTo(payload.min, 5);
      expect(hi).toBeCloseTo(payload.max, 5);
    }
  });
});
