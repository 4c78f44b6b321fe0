import { fetchPrediction } from "./api.js";
import {
  clampVelocity,
  initialState,
  type FieldName,
  type ViewState,
} from "./state.js";

export const DEBOUNCE_MS = 50;

/** Drives the slider-to-heatmap loop: debounced requests, monotone
 * sequence numbers so a stale response can never replace a newer one,
 * at most one request pattern in flight, errors as a banner that leaves
 * the previous field on screen.
 */
export class PredictionLoop {
  private state: ViewState = initialState();
  private seqIssued = 0;
  private seqShown = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly base: string,
    private readonly onChange: (s: ViewState) => void,
    private readonly fetchImpl: typeof fetch = fetch,
    private readonly debounceMs: number = DEBOUNCE_MS,
  ) {}

  get view(): ViewState {
    return this.state;
  }

  /** Initial fetch for the starting slider values, no debounce. */
  start(): void {
    void this.fire();
  }

  setVelocity(side: "left" | "right", raw: number): void {
    const value = clampVelocity(raw);
    if (this.state[side] === value) return;
    this.update({ [side]: value } as Partial<ViewState>);
    this.schedule();
  }

  /** Repaints from the cached response; never a network request. */
  setField(field: FieldName): void {
    if (this.state.activeField !== field) this.update({ activeField: field });
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    this.onChange(this.state);
  }

  private schedule(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire();
    }, this.debounceMs);
  }

  private async fire(): Promise<void> {
    const seq = ++this.seqIssued;
    const { left, right } = this.state;
    this.update({ inFlight: true });
    try {
      const response = await fetchPrediction(this.base, left, right, this.fetchImpl);
      // superseded by newer slider values: discard silently
      if (seq !== this.seqIssued || seq <= this.seqShown) return;
      this.seqShown = seq;
      this.update({
        response,
        latencyMs: response.latency_ms,
        inFlight: false,
        banner: null,
      });
    } catch (err) {
      if (seq !== this.seqIssued) return;
      this.update({ inFlight: false, banner: String(err) });
    }
  }
}
