/** Console bootstrap: wires the API client, the polling store, and the
 * renderers into the page. Connection settings come from query parameters:
 * ?endpoint=http://host:port&token=admin-token
 */
import { ApiClient, ApiError, TrafficLog } from "./api.js";
import {
  el,
  renderApplyForm,
  renderConflictReport,
  renderDashboard,
  renderDrForm,
  renderReport,
} from "./render.js";
import { ConsoleStore } from "./store.js";

declare global {
  interface Window {
    /** Recorded API traffic, exposed for the thin-client audit. */
    __traffic?: TrafficLog;
  }
}

function describeError(error: unknown): string {
  if (error instanceof ApiError) return error.message;
  if (error instanceof Error) return error.message;
  return String(error);
}

export function bootstrap(root: HTMLElement): ConsoleStore {
  const params = new URLSearchParams(window.location.search);
  const endpoint = params.get("endpoint") ?? "http://127.0.0.1:8040";
  const token = params.get("token") ?? "tenant-token";
  const defaultPathway =
    token === "admin-token" ? "out_of_band" : "in_band";

  const traffic = new TrafficLog();
  window.__traffic = traffic;
  const client = new ApiClient({ endpoint, token, traffic });
  const store = new ConsoleStore(client);

  const statusLine = el("p", { class: "status", id: "status" }, [
    "Connecting to ",
    el("code", {}, [endpoint]),
    " …",
  ]);
  const dashboardHost = el("div", { id: "dashboard-host" });
  const sidePanel = el("div", { id: "side-panel" });
  const operate = el("section", { id: "operate" }, [
    el("h2", {}, ["Operate"]),
  ]);
  root.replaceChildren(
    el("header", {}, [el("h1", {}, ["GPU power-profile console"]), statusLine]),
    dashboardHost,
    operate,
    sidePanel,
  );

  const showReport = (jobId: string): void => {
    client
      .jobReport(jobId)
      .then((report) => sidePanel.replaceChildren(renderReport(report)))
      .catch((error: unknown) =>
        sidePanel.replaceChildren(
          el("p", { class: "error" }, [describeError(error)]),
        ),
      );
  };

  store.subscribe((snapshot) => {
    statusLine.replaceChildren(
      "Connected to ",
      el("code", {}, [endpoint]),
      " — sim clock ",
      el("time", {}, [snapshot.fetchedAt]),
    );
    dashboardHost.replaceChildren(renderDashboard(snapshot, showReport));
  });

  client
    .profiles()
    .then(({ profiles }) => {
      const applyForm = renderApplyForm(profiles, defaultPathway, (values) => {
        client
          .apply({ ...values, requester: "console" })
          .then((result) => {
            sidePanel.replaceChildren(renderConflictReport(result));
            return store.refresh();
          })
          .catch((error: unknown) =>
            sidePanel.replaceChildren(
              el("p", { class: "error" }, [describeError(error)]),
            ),
          );
      });
      const drForm = renderDrForm((values) => {
        client
          .createDemandResponse(values)
          .then(() => store.refresh())
          .catch((error: unknown) =>
            sidePanel.replaceChildren(
              el("p", { class: "error" }, [describeError(error)]),
            ),
          );
      });
      operate.append(applyForm, drForm);
    })
    .catch((error: unknown) =>
      operate.append(el("p", { class: "error" }, [describeError(error)])),
    );

  store.start();
  return store;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap(document.getElementById("app") as HTMLElement);
}
