/** Typed client for the control-plane HTTP API.
 *
 * Every byte the console renders flows through this module, and every
 * exchange can be recorded, so the UI is auditably a thin client: a rendered
 * value either appears verbatim in a recorded response or is a declared
 * derivation of one (see audit.ts).
 */
import type {
  AdvanceResponse,
  AlertRuleBody,
  AlertRuleResponse,
  AlertsResponse,
  ApplyBody,
  ApplyResponse,
  DemandResponseBody,
  EventsResponse,
  FacilityView,
  JobRecord,
  JobsResponse,
  ModePrioritiesResponse,
  ProfilesResponse,
  SavingsReport,
  TelemetryRecord,
} from "./types.js";

/** The subset of fetch the client needs; the browser fetch satisfies it. */
export interface ResponseLike {
  ok: boolean;
  status: number;
  text(): Promise<string>;
}

export type FetchLike = (
  url: string,
  init: { method: string; headers: Record<string, string>; body?: string },
) => Promise<ResponseLike>;

export interface Exchange {
  method: string;
  path: string;
  status: number;
  requestBody: unknown;
  responseBody: unknown;
  responseText: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorType: string,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
  }
}

/** Accumulates every request/response pair the client performs. */
export class TrafficLog {
  readonly exchanges: Exchange[] = [];

  record(exchange: Exchange): void {
    this.exchanges.push(exchange);
  }
}

export interface ClientOptions {
  endpoint: string;
  token: string;
  fetchImpl?: FetchLike;
  traffic?: TrafficLog;
}

interface QueryParams {
  [key: string]: string | undefined;
}

function withQuery(path: string, params?: QueryParams): string {
  if (!params) return path;
  const pairs = Object.entries(params).filter(
    (pair): pair is [string, string] => pair[1] !== undefined,
  );
  if (pairs.length === 0) return path;
  const query = pairs
    .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(v)}`)
    .join("&");
  return `${path}?${query}`;
}

export class ApiClient {
  private readonly endpoint: string;
  private readonly token: string;
  private readonly fetchImpl: FetchLike;
  private readonly traffic?: TrafficLog;

  constructor(options: ClientOptions) {
    this.endpoint = options.endpoint.replace(/\/+$/, "");
    this.token = options.token;
    this.fetchImpl =
      options.fetchImpl ?? (globalThis.fetch as unknown as FetchLike);
    this.traffic = options.traffic;
  }

  private async request(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<{ text: string; json: unknown }> {
    const headers: Record<string, string> = { "X-Auth-Token": this.token };
    let encoded: string | undefined;
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      encoded = JSON.stringify(body);
    }
    const response = await this.fetchImpl(`${this.endpoint}${path}`, {
      method,
      headers,
      body: encoded,
    });
    const text = await response.text();
    let json: unknown = null;
    try {
      json = text ? JSON.parse(text) : null;
    } catch {
      json = null; // NDJSON and other non-JSON bodies
    }
    this.traffic?.record({
      method,
      path,
      status: response.status,
      requestBody: body ?? null,
      responseBody: json,
      responseText: text,
    });
    if (!response.ok) {
      const err = (json ?? {}) as { error?: string; detail?: unknown };
      const detail =
        typeof err.detail === "string" ? err.detail : text || "request failed";
      throw new ApiError(response.status, err.error ?? "HTTPError", detail);
    }
    return { text, json };
  }

  private async getJson<T>(path: string, params?: QueryParams): Promise<T> {
    const { json } = await this.request("GET", withQuery(path, params));
    return json as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const { json } = await this.request("POST", path, body);
    return json as T;
  }

  profiles(): Promise<ProfilesResponse> {
    return this.getJson("/v1/profiles");
  }

  modePriorities(arch?: string): Promise<ModePrioritiesResponse> {
    return this.getJson("/v1/modes/priorities", { arch });
  }

  facility(): Promise<FacilityView> {
    return this.getJson("/v1/facility");
  }

  async telemetry(params?: {
    level?: string;
    id?: string;
    from?: string;
    to?: string;
  }): Promise<TelemetryRecord[]> {
    const { text } = await this.request(
      "GET",
      withQuery("/v1/telemetry", params),
    );
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as TelemetryRecord);
  }

  jobs(params?: {
    application?: string;
    profile_id?: string;
    from?: string;
    to?: string;
  }): Promise<JobsResponse> {
    return this.getJson("/v1/jobs", params);
  }

  jobReport(jobId: string): Promise<SavingsReport> {
    return this.getJson(`/v1/jobs/${encodeURIComponent(jobId)}/report`);
  }

  alerts(): Promise<AlertsResponse> {
    return this.getJson("/v1/alerts");
  }

  demandResponseEvents(): Promise<EventsResponse> {
    return this.getJson("/v1/events/demand-response");
  }

  apply(body: ApplyBody): Promise<ApplyResponse> {
    return this.postJson("/v1/apply", body);
  }

  submitJob(body: {
    application?: string | null;
    workload_class?: string | null;
    profile_id?: string;
    nodes?: number;
    baseline_seconds: number;
    hints?: string[];
    requester?: string;
  }): Promise<JobRecord> {
    return this.postJson("/v1/jobs", body);
  }

  createDemandResponse(body: DemandResponseBody): Promise<EventsResponse> {
    return this.postJson("/v1/events/demand-response", body);
  }

  addAlertRule(body: AlertRuleBody): Promise<AlertRuleResponse> {
    return this.postJson("/v1/alerts/rules", body);
  }

  advance(seconds: number): Promise<AdvanceResponse> {
    return this.postJson("/v1/sim/advance", { seconds });
  }
}
