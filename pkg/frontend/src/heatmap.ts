import { normalize, rampRgb } from "./colormap.js";

/** Paint a field into an RGBA pixel buffer (one pixel per cell).
 *
 * Data row 0 is the floor and lands at the bottom of the image, matching
 * the service's exported report images.
 */
export function paintField(
  values: ArrayLike<number>,
  ny: number,
  nx: number,
  lo: number,
  hi: number,
): Uint8ClampedArray<ArrayBuffer> {
  if (values.length !== ny * nx) {
    throw new Error(`expected ${ny * nx} values, got ${values.length}`);
  }
  const out = new Uint8ClampedArray(ny * nx * 4);
  for (let row = 0; row < ny; row++) {
    const srcRow = ny - 1 - row;
    for (let col = 0; col < nx; col++) {
      const value = values[srcRow * nx + col] as number;
      const [r, g, b] = rampRgb(normalize(value, lo, hi));
      const p = (row * nx + col) * 4;
      out[p] = r;
      out[p + 1] = g;
      out[p + 2] = b;
      out[p + 3] = 255;
    }
  }
  return out;
}

/** Map a pointer position on the canvas back to the data cell under it,
 * or null when outside. Row 0 is the floor (bottom of the canvas). */
export function cellAt(
  px: number,
  py: number,
  canvasW: number,
  canvasH: number,
  ny: number,
  nx: number,
): { row: number; col: number } | null {
  if (px < 0 || py < 0 || px >= canvasW || py >= canvasH) return null;
  const col = Math.floor((px / canvasW) * nx);
  const imgRow = Math.floor((py / canvasH) * ny);
  const row = ny - 1 - imgRow;
  if (row < 0 || row >= ny || col < 0 || col >= nx) return null;
  return { row, col };
}
