import { describe, expect, it } from "vitest";

import { ApiClient, TrafficLog } from "../src/api.js";
import { auditDom, collectSources } from "../src/audit.js";
import {
  el,
  renderApplyForm,
  renderConflictReport,
  renderDashboard,
  renderDrForm,
  renderFacilitySummary,
  renderJobs,
  renderReport,
} from "../src/render.js";
import { ConsoleStore } from "../src/store.js";
import {
  ALERT,
  APPLY_CONFLICT,
  DR_EVENT,
  FACILITY,
  JOB_FINISHED,
  JOB_RUNNING,
  REPORT,
  TELEMETRY_NDJSON,
} from "./fixtures.js";
import { stubFetch } from "./helpers.js";

const JOB_DONE = { ...JOB_FINISHED, job_id: "job-2" };

function dashboardRoutes() {
  return {
    "GET /v1/facility": JSON.stringify(FACILITY),
    "GET /v1/telemetry": TELEMETRY_NDJSON,
    "GET /v1/jobs": JSON.stringify({ jobs: [JOB_RUNNING, JOB_DONE] }),
    "GET /v1/alerts": JSON.stringify({ alerts: [ALERT] }),
    "GET /v1/events/demand-response": JSON.stringify({ events: [DR_EVENT] }),
    "POST /v1/apply": JSON.stringify(APPLY_CONFLICT),
    "GET /v1/jobs/job-2/report": JSON.stringify({
      ...REPORT,
      job_id: "job-2",
    }),
  };
}

describe("facility summary", () => {
  it("shows draw, cap, baseline, and hierarchy sizes", () => {
    const section = renderFacilitySummary(FACILITY);
    const text = section.textContent!;
    expect(text).toContain("7758 W");
    expect(text).toContain("14800 W");
    expect(text).toContain("B200");
    expect(text).toContain("2025-01-01T00:00:10Z");
    expect(text).toMatch(/1\s+rack/);
    expect(text).toMatch(/2\s+node/);
    expect(text).toMatch(/16\s+GPU/);
  });
});

describe("jobs view", () => {
  it("offers a report action only for finished jobs", () => {
    const seen: string[] = [];
    const section = renderJobs([JOB_RUNNING, JOB_DONE], (id) => seen.push(id));
    const rows = section.querySelectorAll("tbody tr");
    expect(rows).toHaveLength(2);
    const buttons = section.querySelectorAll("button.report-btn");
    expect(buttons).toHaveLength(1);
    (buttons[0] as HTMLButtonElement).click();
    expect(seen).toEqual(["job-2"]);
    expect(section.textContent).toContain("12.1%");
  });
});

describe("savings report view", () => {
  it("tabulates expected vs actual and only API-computed deltas", () => {
    const section = renderReport(REPORT);
    const rows = Array.from(section.querySelectorAll("tbody tr")).map((tr) =>
      Array.from(tr.querySelectorAll("td")).map((td) => td.textContent),
    );
    expect(rows).toHaveLength(4);
    expect(rows[0]).toEqual(["perf_factor", "0.9900", "0.9900", "+0.0000"]);
    expect(rows[1]).toEqual(["gpu_power_factor", "0.8500", "0.8500", "—"]);
    expect(rows[3]![0]).toBe("energy_saving");
    expect(rows[3]![1]).toBe("0.1212");
    expect(section.textContent).toContain("keep MAX_Q_HPC_COMPUTE");
  });
});

describe("conflict report view", () => {
  it("names every discarded mode and its winner", () => {
    const section = renderConflictReport(APPLY_CONFLICT);
    const text = section.textContent!;
    expect(text).toContain("2");
    expect(text).toContain("1");
    expect(text).toContain("max_p_training");
    expect(text).toContain("admin:max_q_training");
    const losers = section.querySelectorAll(".discards .loser");
    expect(losers).toHaveLength(1);
    expect(section.querySelector("pre.explain")!.textContent).toContain(
      "discarded max_p_training",
    );
  });
});

describe("forms", () => {
  it("collects apply values and parses hint tokens", () => {
    const submissions: unknown[] = [];
    const form = renderApplyForm(
      [
        {
          profile_id: "MAX_Q_TRAINING",
          workload_class: "ai_training",
          goal: "max_q",
          status: "released",
          description: "",
          mode_ids: [],
        },
      ],
      "out_of_band",
      (values) => submissions.push(values),
    );
    const hints = form.querySelector(
      "input[name=hints]",
    ) as HTMLInputElement;
    hints.value = " memory_bound , nvlink_heavy ";
    form.dispatchEvent(new Event("submit", { cancelable: true }));
    expect(submissions).toEqual([
      {
        pathway: "out_of_band",
        scope: "fleet",
        profile_id: "MAX_Q_TRAINING",
        hints: ["memory_bound", "nvlink_heavy"],
      },
    ]);
  });

  it("collects demand-response values with optional effective time", () => {
    const submissions: unknown[] = [];
    const form = renderDrForm((values) => submissions.push(values));
    (form.querySelector("input[name=cap]") as HTMLInputElement).value =
      "13320";
    (form.querySelector("input[name=expires]") as HTMLInputElement).value =
      "2025-01-01T00:01:10Z";
    form.dispatchEvent(new Event("submit", { cancelable: true }));
    expect(submissions).toEqual([
      {
        new_cap_watts: 13320,
        expires_at: "2025-01-01T00:01:10Z",
        effective_at: null,
        note: "",
      },
    ]);
  });
});

describe("thin-client audit", () => {
  async function renderEverything() {
    const traffic = new TrafficLog();
    const { fetch } = stubFetch(dashboardRoutes());
    const client = new ApiClient({
      endpoint: "http://ctrl.example",
      token: "admin-token",
      fetchImpl: fetch,
      traffic,
    });
    const store = new ConsoleStore(client);
    const snapshot = await store.refresh();
    const applied = await client.apply({
      pathway: "out_of_band",
      scope: "fleet",
      profile_id: "MAX_Q_TRAINING",
    });
    const report = await client.jobReport("job-2");
    const root = el("div", {}, [
      renderDashboard(snapshot),
      renderConflictReport(applied),
      renderReport(report),
    ]);
    return { root, traffic };
  }

  it("finds no rendered number without a recorded source", async () => {
    const { root, traffic } = await renderEverything();
    expect(auditDom(root, collectSources(traffic))).toEqual([]);
  });

  it("flags a number that no response contained", async () => {
    const { root, traffic } = await renderEverything();
    root.append(el("p", {}, ["peak draw was 99917 W yesterday"]));
    const violations = auditDom(root, collectSources(traffic));
    expect(violations).toEqual(["99917"]);
  });
});
