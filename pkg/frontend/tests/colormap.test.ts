import { describe, expect, it } from "vitest";

import { normalize, rampRgb } from "../src/colormap.js";

describe("rampRgb", () => {
  it("matches the report-image convention at the endpoints", () => {
    expect(rampRgb(0)).toEqual([0, 0, 255]);
    expect(rampRgb(1)).toEqual([255, 0, 0]);
  });

  it("keeps green at zero and interpolates linearly", () => {
    const [r, g, b] = rampRgb(0.5);
    expect(g).toBe(0);
    expect(r).toBe(128);
    expect(b).toBe(128);
    expect(rampRgb(0.25)[0]).toBe(Math.round(255 * 0.25));
  });

  it("clamps out-of-range inputs", () => {
    expect(rampRgb(-3)).toEqual([0, 0, 255]);
    expect(rampRgb(7)).toEqual([255, 0, 0]);
  });
});

describe("normalize", () => {
  it("maps the range ends to 0 and 1", () => {
    expect(normalize(2, 2, 10)).toBe(0);
    expect(normalize(10, 2, 10)).toBe(1);
    expect(normalize(6, 2, 10)).toBeCloseTo(0.5, 12);
  });

  it("renders a constant field solid blue", () => {
    expect(normalize(4, 4, 4)).toBe(0);
  });
});
