/** Canned API payloads mirroring real control-plane responses. */
import type {
  Alert,
  ApplyResponse,
  DemandResponseEvent,
  FacilityView,
  JobRecord,
  SavingsReport,
  TelemetryRecord,
} from "../src/types.js";

export const FACILITY: FacilityView = {
  arch: "B200",
  power_cap_watts: 14800.0,
  power_watts: 7758.0,
  baseline_busy_watts: 14800.0,
  now: "2025-01-01T00:00:10Z",
  racks: { "rack-0": ["node-0-0", "node-0-1"] },
  nodes: {
    "node-0-0": {
      gpu_ids: [
        "gpu-0-0-0",
        "gpu-0-0-1",
        "gpu-0-0-2",
        "gpu-0-0-3",
        "gpu-0-0-4",
        "gpu-0-0-5",
        "gpu-0-0-6",
        "gpu-0-0-7",
      ],
      power_watts: 6438.0,
    },
    "node-0-1": {
      gpu_ids: [
        "gpu-0-1-0",
        "gpu-0-1-1",
        "gpu-0-1-2",
        "gpu-0-1-3",
        "gpu-0-1-4",
        "gpu-0-1-5",
        "gpu-0-1-6",
        "gpu-0-1-7",
      ],
      power_watts: 1320.0,
    },
  },
  gpus: Object.fromEntries(
    Array.from({ length: 8 }, (_, i) => [
      `gpu-0-0-${i}`,
      { active_profile: "MAX_Q_HPC_COMPUTE", power_watts: 722.5 },
    ]).concat(
      Array.from({ length: 8 }, (_, i) => [
        `gpu-0-1-${i}`,
        { active_profile: "DEFAULT", power_watts: 90.0 },
      ]),
    ),
  ) as FacilityView["gpus"],
};

export const TELEMETRY: TelemetryRecord[] = [
  {
    timestamp: "2025-01-01T00:00:00Z",
    level: "facility",
    id: "facility",
    power_watts: 2640.0,
    energy_joules_cum: 0.0,
    active_profile: "DEFAULT",
  },
  {
    timestamp: "2025-01-01T00:00:01Z",
    level: "facility",
    id: "facility",
    power_watts: 7758.0,
    energy_joules_cum: 7758.0,
    active_profile: "mixed",
  },
  {
    timestamp: "2025-01-01T00:00:02Z",
    level: "facility",
    id: "facility",
    power_watts: 7758.0,
    energy_joules_cum: 15516.0,
    active_profile: "mixed",
  },
];

export const TELEMETRY_NDJSON =
  TELEMETRY.map((record) => JSON.stringify(record)).join("\n") + "\n";

export const JOB_RUNNING: JobRecord = {
  job_id: "job-1",
  application: "HPL",
  workload_class: null,
  profile_id: "MAX_Q_HPC_COMPUTE",
  hints: [],
  nodes: 1,
  submitted_at: "2025-01-01T00:00:00Z",
  started_at: "2025-01-01T00:00:00Z",
  ended_at: null,
  status: "running",
  expected: {
    perf_factor: 0.99,
    gpu_power_factor: 0.85,
    system_power_factor: 0.87,
    energy_saving: 0.12121212121212122,
  },
  actual: null,
  energy_joules: null,
  recommendation: null,
};

export const JOB_FINISHED: JobRecord = {
  ...JOB_RUNNING,
  ended_at: "2025-01-01T00:00:06Z",
  status: "finished",
  actual: {
    perf_factor: 0.9900000000000001,
    gpu_power_factor: 0.85,
    system_power_factor: 0.87,
    energy_saving: 0.12121212121212133,
  },
  energy_joules: 38628.0,
  recommendation:
    "Profile performed within calibration; keep MAX_Q_HPC_COMPUTE for future submissions of this workload.",
};

export const REPORT: SavingsReport = {
  job_id: "job-1",
  application: "HPL",
  profile_id: "MAX_Q_HPC_COMPUTE",
  expected: {
    perf_factor: 0.99,
    gpu_power_factor: 0.85,
    system_power_factor: 0.87,
    energy_saving: 0.12121212121212122,
  },
  actual: {
    perf_factor: 0.9900000000000001,
    gpu_power_factor: 0.85,
    system_power_factor: 0.87,
    energy_saving: 0.12121212121212133,
  },
  perf_delta: 1.1102230246251565e-16,
  energy_saving_delta: 1.1102230246251565e-16,
  recommendation:
    "Profile performed within calibration; keep MAX_Q_HPC_COMPUTE for future submissions of this workload.",
};

export const ALERT: Alert = {
  alert_id: "alert-1",
  rule_id: "rule-1",
  job_id: "job-2",
  profile_id: "MAX_Q_TRAINING",
  measured_perf_factor: 0.95,
  degradation: 0.05,
  at: "2025-01-01T00:00:12Z",
};

export const DR_EVENT: DemandResponseEvent = {
  event_id: "dr-1",
  new_cap_watts: 13320.0,
  effective_at: "2025-01-01T00:00:10+00:00",
  expires_at: "2025-01-01T00:01:10+00:00",
  status: "active",
  cap_unreachable: false,
  noop: false,
  suspended_jobs: [],
  switched_jobs: ["job-1"],
  note: "grid curtailment",
};

export const APPLY_CONFLICT: ApplyResponse = {
  profile_id: "MAX_Q_TRAINING",
  audit_seq: 3,
  devices: [
    {
      gpu_id: "gpu-0-0-0",
      active_profile: "MAX_Q_TRAINING",
      active_modes: ["admin:max_q_training"],
      entries: { TGP: 850, FMAX: 1965 },
      discarded: [["max_p_training", "admin:max_q_training"]],
      explain_report:
        "arbitration for gpu-0-0-0\n  kept admin:max_q_training\n  discarded max_p_training (conflict with admin:max_q_training)",
    },
    {
      gpu_id: "gpu-0-0-1",
      active_profile: "MAX_Q_TRAINING",
      active_modes: ["admin:max_q_training"],
      entries: { TGP: 850, FMAX: 1965 },
      discarded: [],
      explain_report: "arbitration for gpu-0-0-1\n  kept admin:max_q_training",
    },
  ],
};
