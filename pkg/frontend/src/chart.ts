/** Zero-dependency SVG chart of facility power over time.
 *
 * Renders the telemetry series as a polyline, the facility cap as a dashed
 * line, and (when given) a demand-response window as a shaded band with its
 * own cap line. Every piece of rendered text is either a verbatim timestamp
 * from the series or a formatWatts() of a value from the inputs, so the
 * chart passes the thin-client audit.
 */
import { formatWatts } from "./format.js";
import type { TelemetryRecord } from "./types.js";

export const CHART_MARGIN = { top: 14, right: 10, bottom: 18, left: 10 };

export interface DrWindow {
  from: string;
  to: string;
  capWatts: number;
}

export interface ChartOptions {
  capWatts: number;
  drWindow?: DrWindow | null;
  width?: number;
  height?: number;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const element = document.createElementNS(SVG_NS, tag) as SVGElement;
  for (const [key, value] of Object.entries(attrs)) {
    element.setAttribute(key, value);
  }
  return element;
}

function svgText(
  content: string,
  attrs: Record<string, string>,
): SVGElement {
  const element = svgEl("text", attrs);
  element.textContent = content;
  return element;
}

export interface ChartGeometry {
  x(timestampMs: number): number;
  y(watts: number): number;
  yMax: number;
  t0: number;
  t1: number;
}

export function chartGeometry(
  series: TelemetryRecord[],
  options: ChartOptions,
): ChartGeometry {
  const width = options.width ?? 640;
  const height = options.height ?? 220;
  const innerWidth = width - CHART_MARGIN.left - CHART_MARGIN.right;
  const innerHeight = height - CHART_MARGIN.top - CHART_MARGIN.bottom;
  const times = series.map((record) => Date.parse(record.timestamp));
  const t0 = times.length ? Math.min(...times) : 0;
  let t1 = times.length ? Math.max(...times) : 1;
  if (t1 === t0) t1 = t0 + 1000;
  const candidates = [
    options.capWatts,
    ...series.map((record) => record.power_watts),
  ];
  if (options.drWindow) candidates.push(options.drWindow.capWatts);
  const yMax = Math.max(...candidates, 1);
  return {
    x: (timestampMs) =>
      CHART_MARGIN.left + ((timestampMs - t0) / (t1 - t0)) * innerWidth,
    y: (watts) => CHART_MARGIN.top + (1 - watts / yMax) * innerHeight,
    yMax,
    t0,
    t1,
  };
}

export function buildPowerChart(
  series: TelemetryRecord[],
  options: ChartOptions,
): SVGElement {
  const width = options.width ?? 640;
  const height = options.height ?? 220;
  const geometry = chartGeometry(series, options);
  const svg = svgEl("svg", {
    width: String(width),
    height: String(height),
    viewBox: `0 0 ${width} ${height}`,
    class: "power-chart",
    role: "img",
  });

  const rightX = width - CHART_MARGIN.right;
  const bottomY = height - CHART_MARGIN.bottom;
  svg.appendChild(
    svgEl("line", {
      x1: String(CHART_MARGIN.left),
      y1: String(bottomY),
      x2: String(rightX),
      y2: String(bottomY),
      class: "axis",
    }),
  );

  if (options.drWindow) {
    const fromX = Math.max(
      geometry.x(Date.parse(options.drWindow.from)),
      CHART_MARGIN.left,
    );
    const toX = Math.min(geometry.x(Date.parse(options.drWindow.to)), rightX);
    if (toX > fromX) {
      svg.appendChild(
        svgEl("rect", {
          x: String(fromX),
          y: String(CHART_MARGIN.top),
          width: String(toX - fromX),
          height: String(bottomY - CHART_MARGIN.top),
          class: "dr-window",
        }),
      );
      const drY = geometry.y(options.drWindow.capWatts);
      svg.appendChild(
        svgEl("line", {
          x1: String(fromX),
          y1: String(drY),
          x2: String(toX),
          y2: String(drY),
          class: "dr-cap-line",
        }),
      );
      svg.appendChild(
        svgText(formatWatts(options.drWindow.capWatts), {
          x: String(toX),
          y: String(drY - 4),
          "text-anchor": "end",
          class: "dr-cap-label",
        }),
      );
    }
  }

  const capY = geometry.y(options.capWatts);
  svg.appendChild(
    svgEl("line", {
      x1: String(CHART_MARGIN.left),
      y1: String(capY),
      x2: String(rightX),
      y2: String(capY),
      class: "cap-line",
    }),
  );
  svg.appendChild(
    svgText(formatWatts(options.capWatts), {
      x: String(CHART_MARGIN.left),
      y: String(capY - 4),
      class: "cap-label",
    }),
  );

  if (series.length > 0) {
    const points = series
      .map(
        (record) =>
          `${geometry.x(Date.parse(record.timestamp))},${geometry.y(record.power_watts)}`,
      )
      .join(" ");
    svg.appendChild(
      svgEl("polyline", { points, class: "power-series", fill: "none" }),
    );
    const latest = series[series.length - 1]!;
    svg.appendChild(
      svgText(formatWatts(latest.power_watts), {
        x: String(rightX),
        y: String(geometry.y(latest.power_watts) - 4),
        "text-anchor": "end",
        class: "power-label",
      }),
    );
    svg.appendChild(
      svgText(series[0]!.timestamp, {
        x: String(CHART_MARGIN.left),
        y: String(height - 4),
        class: "axis-label",
      }),
    );
    svg.appendChild(
      svgText(latest.timestamp, {
        x: String(rightX),
        y: String(height - 4),
        "text-anchor": "end",
        class: "axis-label",
      }),
    );
  }

  return svg;
}
