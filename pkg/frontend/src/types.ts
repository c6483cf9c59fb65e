/** JSON shapes returned by the control-plane HTTP API. */

export interface ProfileInfo {
  profile_id: string;
  workload_class: string;
  goal: string;
  status: string;
  description: string;
  mode_ids: string[];
}

export interface ProfilesResponse {
  profiles: ProfileInfo[];
}

export interface ModePriority {
  mode_id: string;
  priority: number;
  conflicts_with: string[];
  assignments: Record<string, number>;
}

export interface ModePrioritiesResponse {
  arch: string;
  modes: ModePriority[];
}

export interface NodeView {
  gpu_ids: string[];
  power_watts: number;
}

export interface GpuView {
  active_profile: string;
  power_watts: number;
}

export interface FacilityView {
  arch: string;
  power_cap_watts: number;
  power_watts: number;
  baseline_busy_watts: number;
  now: string;
  racks: Record<string, string[]>;
  nodes: Record<string, NodeView>;
  gpus: Record<string, GpuView>;
}

export interface TelemetryRecord {
  timestamp: string;
  level: string;
  id: string;
  power_watts: number;
  energy_joules_cum: number;
  active_profile: string;
}

export interface FactorSet {
  perf_factor: number;
  gpu_power_factor: number;
  system_power_factor: number;
  energy_saving: number;
}

export interface JobRecord {
  job_id: string;
  application: string | null;
  workload_class: string | null;
  profile_id: string;
  hints: string[];
  nodes: number;
  submitted_at: string;
  started_at: string | null;
  ended_at: string | null;
  status: string;
  expected: FactorSet | null;
  actual: FactorSet | null;
  energy_joules: number | null;
  recommendation: string | null;
}

export interface JobsResponse {
  jobs: JobRecord[];
}

export interface SavingsReport {
  job_id: string;
  application: string | null;
  profile_id: string;
  expected: FactorSet;
  actual: FactorSet;
  perf_delta: number;
  energy_saving_delta: number;
  recommendation: string;
}

export interface Alert {
  alert_id: string;
  rule_id: string;
  job_id: string;
  profile_id: string;
  measured_perf_factor: number;
  degradation: number;
  at: string;
}

export interface AlertsResponse {
  alerts: Alert[];
}

export interface DemandResponseEvent {
  event_id: string;
  new_cap_watts: number;
  effective_at: string;
  expires_at: string;
  status: string;
  cap_unreachable: boolean;
  noop: boolean;
  suspended_jobs: string[];
  switched_jobs: string[];
  note: string;
}

export interface EventsResponse {
  events: DemandResponseEvent[];
}

export interface ApplyDevice {
  gpu_id: string;
  active_profile: string;
  active_modes: string[];
  entries: Record<string, number>;
  /** [discarded mode, surviving mode it lost to] pairs. */
  discarded: [string, string][];
  explain_report: string;
}

export interface ApplyResponse {
  profile_id: string;
  audit_seq: number;
  devices: ApplyDevice[];
}

export interface ApplyBody {
  pathway: "in_band" | "out_of_band";
  scope: string;
  profile_id: string;
  requester?: string;
  hints?: string[];
}

export interface JobSubmitBody {
  application?: string | null;
  workload_class?: string | null;
  profile_id?: string;
  nodes?: number;
  baseline_seconds: number;
  hints?: string[];
  requester?: string;
}

export interface DemandResponseBody {
  new_cap_watts: number;
  expires_at: string;
  effective_at?: string | null;
  note?: string;
}

export interface AlertRuleBody {
  metric?: "perf_degradation";
  threshold_fraction: number;
  scope?: string;
}

export interface AlertRuleResponse {
  rule_id: string;
  metric: string;
  threshold_fraction: number;
  scope: string;
}

export interface AdvanceResponse {
  now: string;
  finished_job_ids: string[];
  facility_power_watts: number;
}
