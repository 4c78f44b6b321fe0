import { decodeField, fetchMeta, type PredictResponse } from "./api.js";
import { PredictionLoop } from "./controller.js";
import { cellAt, paintField } from "./heatmap.js";
import {
  FIELD_TITLES,
  VELOCITY_MAX,
  VELOCITY_MIN,
  type FieldName,
  type ViewState,
} from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("field-canvas");
const banner = el<HTMLDivElement>("banner");
const latency = el<HTMLSpanElement>("latency");
const hover = el<HTMLSpanElement>("hover");
const barMin = el<HTMLSpanElement>("bar-min");
const barMax = el<HTMLSpanElement>("bar-max");
const fieldTitle = el<HTMLSpanElement>("field-title");
const sliders = {
  left: el<HTMLInputElement>("left-slider"),
  right: el<HTMLInputElement>("right-slider"),
};
const numbers = {
  left: el<HTMLInputElement>("left-number"),
  right: el<HTMLInputElement>("right-number"),
};
const toggles: Record<FieldName, HTMLButtonElement> = {
  velocity: el<HTMLButtonElement>("show-velocity"),
  temperature: el<HTMLButtonElement>("show-temperature"),
};

let grid = { ny: 100, nx: 150 };
const offscreen = document.createElement("canvas");

// decoded fields per response, so toggling never re-decodes
const decoded = new WeakMap<PredictResponse, Map<string, Float32Array>>();

function fieldValues(response: PredictResponse, name: string): Float32Array {
  let cache = decoded.get(response);
  if (!cache) {
    cache = new Map();
    decoded.set(response, cache);
  }
  let values = cache.get(name);
  if (!values) {
    const payload = response.fields[name];
    if (!payload) throw new Error(`response lacks field ${name}`);
    values = decodeField(payload.data);
    cache.set(name, values);
  }
  return values;
}

function render(state: ViewState): void {
  for (const side of ["left", "right"] as const) {
    const text = state[side].toFixed(2);
    sliders[side].value = text;
    if (document.activeElement !== numbers[side]) numbers[side].value = text;
  }
  for (const name of ["velocity", "temperature"] as const) {
    toggles[name].classList.toggle("active", state.activeField === name);
  }
  fieldTitle.textContent = FIELD_TITLES[state.activeField];
  latency.textContent = state.latencyMs === null ? "-" : `${state.latencyMs.toFixed(1)} ms`;
  banner.textContent = state.banner ?? "";
  banner.hidden = state.banner === null;
  canvas.classList.toggle("stale", state.inFlight);

  const response = state.response;
  if (!response) return;
  const payload = response.fields[state.activeField];
  if (!payload) return;
  const values = fieldValues(response, state.activeField);
  const { ny, nx } = response.grid;
  const pixels = paintField(values, ny, nx, payload.min, payload.max);
  offscreen.width = nx;
  offscreen.height = ny;
  const octx = offscreen.getContext("2d");
  const ctx = canvas.getContext("2d");
  if (!octx || !ctx) return;
  octx.putImageData(new ImageData(pixels, nx, ny), 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(offscreen, 0, 0, canvas.width, canvas.height);
  // colorbar bounds always equal the response extremes
  barMin.textContent = `${payload.min.toFixed(3)} ${payload.units}`;
  barMax.textContent = `${payload.max.toFixed(3)} ${payload.units}`;
}

const loop = new PredictionLoop("", render);

function bindSide(side: "left" | "right"): void {
  sliders[side].addEventListener("input", () => {
    loop.setVelocity(side, Number(sliders[side].value));
  });
  numbers[side].addEventListener("change", () => {
    loop.setVelocity(side, Number(numbers[side].value));
  });
}

for (const side of ["left", "right"] as const) {
  for (const input of [sliders[side], numbers[side]]) {
    input.min = String(VELOCITY_MIN);
    input.max = String(VELOCITY_MAX);
    input.step = "0.01";
  }
  bindSide(side);
}
toggles.velocity.addEventListener("click", () => loop.setField("velocity"));
toggles.temperature.addEventListener("click", () => loop.setField("temperature"));

canvas.addEventListener("mousemove", (ev) => {
  const state = loop.view;
  if (!state.response) return;
  const rect = canvas.getBoundingClientRect();
  const cell = cellAt(
    ((ev.clientX - rect.left) / rect.width) * canvas.width,
    ((ev.clientY - rect.top) / rect.height) * canvas.height,
    canvas.width,
    canvas.height,
    grid.ny,
    grid.nx,
  );
  if (!cell) {
    hover.textContent = "";
    return;
  }
  const payload = state.response.fields[state.activeField];
  if (!payload) return;
  const values = fieldValues(state.response, state.activeField);
  const value = values[cell.row * grid.nx + cell.col];
  hover.textContent = `cell (${cell.row}, ${cell.col}): ${value?.toFixed(3)} ${payload.units}`;
});
canvas.addEventListener("mouseleave", () => {
  hover.textContent = "";
});

fetchMeta("")
  .then((meta) => {
    grid = meta.grid;
    canvas.width = meta.grid.nx * 4;
    canvas.height = meta.grid.ny * 4;
    loop.start();
  })
  .catch((err) => {
    banner.textContent = `service unreachable: ${err}`;
    banner.hidden = false;
  });
