/** Polling snapshot store: one fetch cycle gathers everything the dashboard
 * renders, so views never issue their own requests. */
import type { ApiClient } from "./api.js";
import type {
  Alert,
  DemandResponseEvent,
  FacilityView,
  JobRecord,
  TelemetryRecord,
} from "./types.js";

export interface Snapshot {
  fetchedAt: string;
  facility: FacilityView;
  telemetry: TelemetryRecord[];
  jobs: JobRecord[];
  alerts: Alert[];
  events: DemandResponseEvent[];
}

export type Listener = (snapshot: Snapshot) => void;

export class ConsoleStore {
  snapshot: Snapshot | null = null;
  lastError: string | null = null;

  private readonly listeners = new Set<Listener>();
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly intervalMs = 2000,
  ) {}

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    if (this.snapshot) listener(this.snapshot);
    return () => {
      this.listeners.delete(listener);
    };
  }

  async refresh(): Promise<Snapshot> {
    const [facility, telemetry, jobs, alerts, events] = await Promise.all([
      this.client.facility(),
      this.client.telemetry({ level: "facility" }),
      this.client.jobs(),
      this.client.alerts(),
      this.client.demandResponseEvents(),
    ]);
    const snapshot: Snapshot = {
      fetchedAt: facility.now,
      facility,
      telemetry,
      jobs: jobs.jobs,
      alerts: alerts.alerts,
      events: events.events,
    };
    this.snapshot = snapshot;
    this.lastError = null;
    for (const listener of this.listeners) listener(snapshot);
    return snapshot;
  }

  start(): void {
    if (this.timer !== null) return;
    const tick = () => {
      this.refresh().catch((error: unknown) => {
        this.lastError = error instanceof Error ? error.message : String(error);
      });
    };
    tick();
    this.timer = setInterval(tick, this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
