// Consumption dashboard: bucket table, SVG bar chart with a forecast
// overlay, and the day/week/month/year toggle. Rendered values come
// straight from the last API responses.

import { NourIdClient } from "./api.js";
import type { ConsumptionView, ForecastResponse, Granularity } from "./types.js";

export const GRANULARITIES: Granularity[] = ["day", "week", "month", "year"];

export class Dashboard {
  view: ConsumptionView | null = null;
  forecast: ForecastResponse | null = null;
  granularity: Granularity = "day";

  constructor(
    private readonly client: NourIdClient,
    readonly deid: string,
    private readonly forecastHorizon = 14,
  ) {}

  async load(granularity: Granularity = this.granularity): Promise<ConsumptionView> {
    this.granularity = granularity;
    this.view = await this.client.consumption(this.deid, granularity);
    return this.view;
  }

  async loadForecast(): Promise<ForecastResponse> {
    this.forecast = await this.client.forecast(this.deid, this.forecastHorizon);
    return this.forecast;
  }
}

const SVG_NS = "http://www.w3.org/2000/svg";
const CHART_W = 640;
const CHART_H = 220;
const PAD = 24;

/** Table with one row per bucket, values formatted to 3 decimals. */
export function renderBucketTable(doc: Document, view: ConsumptionView): HTMLTableElement {
  const table = doc.createElement("table");
  table.className = "buckets";
  const head = table.insertRow();
  for (const label of ["period", "total kWh", "mean hourly kWh", "peak hour"]) {
    const th = doc.createElement("th");
    th.textContent = label;
    head.appendChild(th);
  }
  for (const bucket of view.buckets) {
    const row = table.insertRow();
    row.dataset.period = bucket.period;
    row.insertCell().textContent = bucket.period;
    row.insertCell().textContent = bucket.total_kwh.toFixed(3);
    row.insertCell().textContent = bucket.mean_hourly_kwh.toFixed(3);
    row.insertCell().textContent = bucket.peak_hour;
  }
  return table;
}

/** Bars for the trailing buckets plus an optional forecast polyline. */
export function renderChart(
  doc: Document,
  view: ConsumptionView,
  forecast: ForecastResponse | null = null,
  maxBars = 60,
): SVGSVGElement {
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 ${CHART_W} ${CHART_H}`);
  svg.setAttribute("class", "consumption-chart");

  const buckets = view.buckets.slice(-maxBars);
  const forecastValues = forecast?.points.map((p) => p.kwh) ?? [];
  const yMax = Math.max(
    1e-9,
    ...buckets.map((b) => b.total_kwh),
    ...forecastValues,
  );
  const slots = buckets.length + forecastValues.length;
  const slotW = (CHART_W - 2 * PAD) / Math.max(slots, 1);
  const scaleY = (value: number) => CHART_H - PAD - (value / yMax) * (CHART_H - 2 * PAD);

  buckets.forEach((bucket, i) => {
    const rect = doc.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(PAD + i * slotW + slotW * 0.1));
    rect.setAttribute("y", String(scaleY(bucket.total_kwh)));
    rect.setAttribute("width", String(slotW * 0.8));
    rect.setAttribute("height", String(CHART_H - PAD - scaleY(bucket.total_kwh)));
    rect.setAttribute("class", "bar");
    rect.setAttribute("data-period", bucket.period);
    rect.setAttribute("data-kwh", String(bucket.total_kwh));
    svg.appendChild(rect);
  });

  if (forecast && forecastValues.length) {
    const points = forecast.points
      .map((p, i) => {
        const x = PAD + (buckets.length + i + 0.5) * slotW;
        return `${x},${scaleY(p.kwh)}`;
      })
      .join(" ");
    const line = doc.createElementNS(SVG_NS, "polyline");
    line.setAttribute("points", points);
    line.setAttribute("class", "forecast-line");
    line.setAttribute("fill", "none");
    svg.appendChild(line);
  }
  return svg;
}

/** Granularity toggle buttons; the active one carries aria-pressed. */
export function renderToggle(
  doc: Document,
  active: Granularity,
  onSelect: (granularity: Granularity) => void,
): HTMLDivElement {
  const wrap = doc.createElement("div");
  wrap.className = "granularity-toggle";
  for (const granularity of GRANULARITIES) {
    const button = doc.createElement("button");
    button.textContent = granularity;
    button.dataset.granularity = granularity;
    button.setAttribute("aria-pressed", granularity === active ? "true" : "false");
    button.addEventListener("click", () => onSelect(granularity));
    wrap.appendChild(button);
  }
  return wrap;
}
