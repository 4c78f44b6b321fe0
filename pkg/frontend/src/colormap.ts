/** Blue-to-red ramp, identical to the report images the service exports:
 * 0 -> (0,0,255), 1 -> (255,0,0), green stays 0. */
export function rampRgb(t: number): [number, number, number] {
  const c = Math.min(1, Math.max(0, t));
  return [Math.round(255 * c), 0, Math.round(255 * (1 - c))];
}

/** Position of value in [lo, hi]; a constant field maps to 0 (solid blue). */
export function normalize(value: number, lo: number, hi: number): number {
  return hi > lo ? (value - lo) / (hi - lo) : 0;
}
