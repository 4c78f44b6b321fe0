import type { PredictResponse } from "./api.js";

export const VELOCITY_MIN = 0.05;
export const VELOCITY_MAX = 1.0;

export type FieldName = "velocity" | "temperature";

export const FIELD_TITLES: Record<FieldName, string> = {
  velocity: "velocity magnitude (m/s)",
  temperature: "temperature (degC)",
};

export interface ViewState {
  left: number;
  right: number;
  activeField: FieldName;
  /** newest accepted prediction; both fields cached for instant toggling */
  response: PredictResponse | null;
  inFlight: boolean;
  latencyMs: number | null;
  /** non-blocking error banner; the previous field stays on screen */
  banner: string | null;
}

/** Inputs are clamped here, before anything can reach the wire. */
export function clampVelocity(raw: number): number {
  if (!Number.isFinite(raw)) return VELOCITY_MIN;
  return Math.min(VELOCITY_MAX, Math.max(VELOCITY_MIN, raw));
}

export function initialState(): ViewState {
  return {
    left: 0.5,
    right: 0.5,
    activeField: "velocity",
    response: null,
    inFlight: false,
    latencyMs: null,
    banner: null,
  };
}
