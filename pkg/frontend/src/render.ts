/** DOM renderers for the console views.
 *
 * Every renderer is a pure function from API data to an element; none of
 * them fetch. Static copy is kept digit-free so the thin-client audit can
 * insist that any digit on screen came from recorded traffic.
 */
import { buildPowerChart } from "./chart.js";
import {
  formatCount,
  formatDelta,
  formatFactor,
  formatPercent,
  formatWatts,
} from "./format.js";
import type { Snapshot } from "./store.js";
import type {
  Alert,
  ApplyResponse,
  DemandResponseEvent,
  FacilityView,
  JobRecord,
  ProfileInfo,
  SavingsReport,
} from "./types.js";

type Child = Node | string;

export function el(
  tag: string,
  attrs: Record<string, string> = {},
  children: Child[] = [],
): HTMLElement {
  const element = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    element.setAttribute(key, value);
  }
  for (const child of children) {
    element.append(child);
  }
  return element;
}

function row(cells: Child[], cellTag: "td" | "th" = "td"): HTMLElement {
  return el(
    "tr",
    {},
    cells.map((cell) => el(cellTag, {}, [cell])),
  );
}

function table(headers: string[], rows: HTMLElement[]): HTMLElement {
  return el("table", { class: "data" }, [
    el("thead", {}, [row(headers, "th")]),
    el("tbody", {}, rows),
  ]);
}

export function renderFacilitySummary(facility: FacilityView): HTMLElement {
  const rackCount = Object.keys(facility.racks).length;
  const nodeCount = Object.keys(facility.nodes).length;
  const gpuCount = Object.keys(facility.gpus).length;
  const fraction =
    facility.power_cap_watts > 0
      ? Math.min(facility.power_watts / facility.power_cap_watts, 1)
      : 0;
  const bar = el("div", { class: "power-bar" }, [
    el("div", {
      class: "power-bar-fill",
      style: `width: ${(fraction * 100).toFixed(2)}%`,
    }),
  ]);
  return el("section", { class: "facility-summary", id: "facility" }, [
    el("h2", {}, ["Facility"]),
    el("p", { class: "facility-line" }, [
      el("span", { class: "arch" }, [facility.arch]),
      " fleet — ",
      el("strong", {}, [formatCount(rackCount)]),
      " rack(s), ",
      el("strong", {}, [formatCount(nodeCount)]),
      " node(s), ",
      el("strong", {}, [formatCount(gpuCount)]),
      " GPU(s) — sim clock ",
      el("time", {}, [facility.now]),
    ]),
    el("p", { class: "power-line" }, [
      "Drawing ",
      el("strong", { class: "power-now" }, [formatWatts(facility.power_watts)]),
      " of a ",
      el("strong", { class: "power-cap" }, [
        formatWatts(facility.power_cap_watts),
      ]),
      " cap (busy baseline ",
      formatWatts(facility.baseline_busy_watts),
      ")",
    ]),
    bar,
  ]);
}

export function renderPowerChartSection(snapshot: Snapshot): HTMLElement {
  const activeEvent = snapshot.events.find(
    (event) => event.status === "active" || event.status === "pending",
  );
  const chart = buildPowerChart(snapshot.telemetry, {
    capWatts: snapshot.facility.power_cap_watts,
    drWindow: activeEvent
      ? {
          from: activeEvent.effective_at,
          to: activeEvent.expires_at,
          capWatts: activeEvent.new_cap_watts,
        }
      : null,
  });
  const caption = activeEvent
    ? el("p", { class: "dr-note" }, [
        "Demand-response cap ",
        el("strong", {}, [formatWatts(activeEvent.new_cap_watts)]),
        " in effect ",
        el("time", {}, [activeEvent.effective_at]),
        " → ",
        el("time", {}, [activeEvent.expires_at]),
      ])
    : el("p", { class: "dr-note" }, ["No demand-response window active"]);
  return el("section", { id: "power" }, [
    el("h2", {}, ["Facility power"]),
    chart,
    caption,
  ]);
}

export function renderRacks(facility: FacilityView): HTMLElement {
  const rows: HTMLElement[] = [];
  for (const [rackId, nodeIds] of Object.entries(facility.racks)) {
    for (const nodeId of nodeIds) {
      const node = facility.nodes[nodeId];
      if (!node) continue;
      const chips = el(
        "div",
        { class: "gpu-chips" },
        node.gpu_ids.map((gpuId) => {
          const gpu = facility.gpus[gpuId];
          return el("span", { class: "gpu-chip", title: gpuId }, [
            el("span", { class: "gpu-id" }, [gpuId]),
            " ",
            el("span", { class: "gpu-profile" }, [
              gpu ? gpu.active_profile : "",
            ]),
            " ",
            el("span", { class: "gpu-watts" }, [
              gpu ? formatWatts(gpu.power_watts) : "",
            ]),
          ]);
        }),
      );
      rows.push(
        row([rackId, nodeId, formatWatts(node.power_watts), chips]),
      );
    }
  }
  return el("section", { id: "racks" }, [
    el("h2", {}, ["Racks and nodes"]),
    table(["Rack", "Node", "Node power", "GPUs"], rows),
  ]);
}

export function renderJobs(
  jobs: JobRecord[],
  onReport?: (jobId: string) => void,
): HTMLElement {
  const rows = jobs.map((job) => {
    const workload = job.application ?? job.workload_class ?? "—";
    const saving = job.expected
      ? formatPercent(job.expected.energy_saving)
      : "—";
    const actions = el("span", {}, []);
    if (job.status === "finished" && onReport) {
      const button = el("button", { class: "report-btn", type: "button" }, [
        "Report",
      ]);
      button.addEventListener("click", () => onReport(job.job_id));
      actions.append(button);
    }
    return row([
      job.job_id,
      workload,
      job.profile_id,
      formatCount(job.nodes),
      job.status,
      saving,
      actions,
    ]);
  });
  return el("section", { id: "jobs" }, [
    el("h2", {}, ["Jobs"]),
    jobs.length
      ? table(
          [
            "Job",
            "Workload",
            "Profile",
            "Nodes",
            "Status",
            "Expected saving",
            "",
          ],
          rows,
        )
      : el("p", { class: "empty" }, ["No jobs submitted"]),
  ]);
}

export function renderReport(report: SavingsReport): HTMLElement {
  // Delta cells show only the deltas the API computes; the console never
  // does its own arithmetic on displayed values.
  const metrics: [string, number, number, number | null][] = [
    [
      "perf_factor",
      report.expected.perf_factor,
      report.actual.perf_factor,
      report.perf_delta,
    ],
    [
      "gpu_power_factor",
      report.expected.gpu_power_factor,
      report.actual.gpu_power_factor,
      null,
    ],
    [
      "system_power_factor",
      report.expected.system_power_factor,
      report.actual.system_power_factor,
      null,
    ],
    [
      "energy_saving",
      report.expected.energy_saving,
      report.actual.energy_saving,
      report.energy_saving_delta,
    ],
  ];
  const rows = metrics.map(([name, expected, actual, delta]) =>
    row([
      name,
      formatFactor(expected),
      formatFactor(actual),
      delta === null ? "—" : formatDelta(delta),
    ]),
  );
  return el("section", { class: "report", id: "report" }, [
    el("h3", {}, [
      "Savings report — ",
      report.job_id,
      " (",
      report.profile_id,
      ")",
    ]),
    table(["Metric", "Expected", "Actual", "Delta"], rows),
    el("p", { class: "recommendation" }, [report.recommendation]),
  ]);
}

export function renderAlerts(alerts: Alert[]): HTMLElement {
  const rows = alerts.map((alert) =>
    row([
      alert.alert_id,
      alert.rule_id,
      alert.job_id,
      alert.profile_id,
      formatFactor(alert.measured_perf_factor),
      formatPercent(alert.degradation),
      alert.at,
    ]),
  );
  return el("section", { id: "alerts" }, [
    el("h2", {}, ["Alerts"]),
    alerts.length
      ? table(
          ["Alert", "Rule", "Job", "Profile", "Measured", "Degradation", "At"],
          rows,
        )
      : el("p", { class: "empty" }, ["No alerts fired"]),
  ]);
}

export function renderEvents(events: DemandResponseEvent[]): HTMLElement {
  const cards = events.map((event) => {
    const flags: string[] = [event.status];
    if (event.cap_unreachable) flags.push("cap unreachable");
    if (event.noop) flags.push("no-op");
    return el("article", { class: `dr-card dr-${event.status}` }, [
      el("h3", {}, [event.event_id, " — ", formatWatts(event.new_cap_watts)]),
      el("p", {}, [
        el("time", {}, [event.effective_at]),
        " → ",
        el("time", {}, [event.expires_at]),
      ]),
      el("p", { class: "dr-flags" }, [flags.join(" · ")]),
      el("p", {}, [
        "switched: ",
        event.switched_jobs.length
          ? event.switched_jobs.join(", ")
          : "none",
        " — suspended: ",
        event.suspended_jobs.length
          ? event.suspended_jobs.join(", ")
          : "none",
      ]),
      event.note ? el("p", { class: "dr-note" }, [event.note]) : el("span"),
    ]);
  });
  return el("section", { id: "events" }, [
    el("h2", {}, ["Demand response"]),
    events.length
      ? el("div", { class: "dr-cards" }, cards)
      : el("p", { class: "empty" }, ["No demand-response events"]),
  ]);
}

export function renderConflictReport(result: ApplyResponse): HTMLElement {
  const discardTotal = result.devices.reduce(
    (sum, device) => sum + device.discarded.length,
    0,
  );
  const summary = el("p", { class: "conflict-summary" }, [
    "Applied ",
    el("strong", {}, [result.profile_id]),
    " to ",
    el("strong", {}, [formatCount(result.devices.length)]),
    " device(s); ",
    el("strong", {}, [formatCount(discardTotal)]),
    " mode(s) discarded in arbitration",
  ]);
  const items: HTMLElement[] = [];
  for (const device of result.devices) {
    for (const [loser, winner] of device.discarded) {
      items.push(
        el("li", {}, [
          el("code", {}, [device.gpu_id]),
          ": ",
          el("code", { class: "loser" }, [loser]),
          " lost to ",
          el("code", { class: "winner" }, [winner]),
        ]),
      );
    }
  }
  const detail =
    result.devices.find((device) => device.discarded.length > 0) ??
    result.devices[0];
  return el("section", { class: "conflict-report", id: "conflicts" }, [
    el("h3", {}, ["Arbitration result"]),
    summary,
    items.length
      ? el("ul", { class: "discards" }, items)
      : el("p", { class: "empty" }, ["No modes discarded"]),
    detail
      ? el("pre", { class: "explain" }, [detail.explain_report])
      : el("span"),
  ]);
}

export interface ApplyFormValues {
  pathway: "in_band" | "out_of_band";
  scope: string;
  profile_id: string;
  hints: string[];
}

export function renderApplyForm(
  profiles: ProfileInfo[],
  defaultPathway: "in_band" | "out_of_band",
  onApply: (values: ApplyFormValues) => void,
): HTMLElement {
  const profileSelect = el(
    "select",
    { name: "profile" },
    profiles.map((profile) =>
      el("option", { value: profile.profile_id }, [profile.profile_id]),
    ),
  ) as HTMLSelectElement;
  const scopeInput = el("input", {
    name: "scope",
    value: "fleet",
    placeholder: "fleet, rack:<id>, node:<id>, gpu:<id>, job:<id>",
  }) as HTMLInputElement;
  const hintsInput = el("input", {
    name: "hints",
    placeholder: "comma-separated workload hints",
  }) as HTMLInputElement;
  const pathwaySelect = el("select", { name: "pathway" }, [
    el("option", { value: "in_band" }, ["in-band (tenant)"]),
    el("option", { value: "out_of_band" }, ["out-of-band (operator)"]),
  ]) as HTMLSelectElement;
  pathwaySelect.value = defaultPathway;
  const button = el("button", { type: "submit" }, ["Apply profile"]);
  const form = el("form", { class: "apply-form", id: "apply-form" }, [
    el("label", {}, ["Profile ", profileSelect]),
    el("label", {}, ["Scope ", scopeInput]),
    el("label", {}, ["Hints ", hintsInput]),
    el("label", {}, ["Pathway ", pathwaySelect]),
    button,
  ]) as HTMLFormElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    onApply({
      pathway: pathwaySelect.value as "in_band" | "out_of_band",
      scope: scopeInput.value.trim(),
      profile_id: profileSelect.value,
      hints: hintsInput.value
        .split(",")
        .map((token) => token.trim())
        .filter((token) => token.length > 0),
    });
  });
  return form;
}

export interface DrFormValues {
  new_cap_watts: number;
  expires_at: string;
  effective_at: string | null;
  note: string;
}

export function renderDrForm(
  onCreate: (values: DrFormValues) => void,
): HTMLElement {
  const capInput = el("input", {
    name: "cap",
    type: "number",
    placeholder: "watts",
  }) as HTMLInputElement;
  const effectiveInput = el("input", {
    name: "effective",
    placeholder: "effective at (UTC, blank = now)",
  }) as HTMLInputElement;
  const expiresInput = el("input", {
    name: "expires",
    placeholder: "expires at (UTC)",
  }) as HTMLInputElement;
  const noteInput = el("input", {
    name: "note",
    placeholder: "note",
  }) as HTMLInputElement;
  const form = el("form", { class: "dr-form", id: "dr-form" }, [
    el("label", {}, ["New cap ", capInput]),
    el("label", {}, ["Effective ", effectiveInput]),
    el("label", {}, ["Expires ", expiresInput]),
    el("label", {}, ["Note ", noteInput]),
    el("button", { type: "submit" }, ["Create demand-response event"]),
  ]) as HTMLFormElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    onCreate({
      new_cap_watts: Number(capInput.value),
      expires_at: expiresInput.value.trim(),
      effective_at: effectiveInput.value.trim() || null,
      note: noteInput.value,
    });
  });
  return form;
}

/** Renders the full dashboard for a snapshot into a detached element. */
export function renderDashboard(
  snapshot: Snapshot,
  onReport?: (jobId: string) => void,
): HTMLElement {
  return el("div", { class: "dashboard" }, [
    renderFacilitySummary(snapshot.facility),
    renderPowerChartSection(snapshot),
    renderRacks(snapshot.facility),
    renderJobs(snapshot.jobs, onReport),
    renderAlerts(snapshot.alerts),
    renderEvents(snapshot.events),
  ]);
}
