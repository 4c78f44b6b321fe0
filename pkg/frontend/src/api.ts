/** Typed client for the prediction service. */

export interface GridSize {
  ny: number;
  nx: number;
}

export interface FieldPayload {
  /** base64 of little-endian float32, row major, row 0 = floor */
  data: string;
  min: number;
  max: number;
  units: string;
}

export interface PredictResponse {
  grid: GridSize;
  latency_ms: number;
  fields: Record<string, FieldPayload>;
}

export interface MetaResponse {
  grid: GridSize;
  velocity_range: [number, number];
  model_checksum: string;
}

export function decodeField(b64: string): Float32Array {
  const raw = atob(b64);
  const bytes = new Uint8Array(raw.length);
  for (let i = 0; i < raw.length; i++) bytes[i] = raw.charCodeAt(i);
  // explicit little-endian read; never trust platform byte order
  const view = new DataView(bytes.buffer);
  const out = new Float32Array(bytes.length / 4);
  for (let i = 0; i < out.length; i++) out[i] = view.getFloat32(i * 4, true);
  return out;
}

export async function fetchMeta(
  base: string,
  fetchImpl: typeof fetch = fetch,
): Promise<MetaResponse> {
  const res = await fetchImpl(`${base}/api/meta`);
  if (!res.ok) throw new Error(`meta failed: HTTP ${res.status}`);
  return (await res.json()) as MetaResponse;
}

/** Always asks for both fields so toggling the view needs no new request. */
export async function fetchPrediction(
  base: string,
  left: number,
  right: number,
  fetchImpl: typeof fetch = fetch,
): Promise<PredictResponse> {
  const res = await fetchImpl(`${base}/api/predict`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({
      left_velocity: left,
      right_velocity: right,
      fields: ["velocity", "temperature"],
    }),
  });
  if (!res.ok) throw new Error(`predict failed: HTTP ${res.status}`);
  return (await res.json()) as PredictResponse;
}
