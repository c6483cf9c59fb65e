/** Test utilities: a canned-response fetch stub for unit tests and a
 * node:http-backed fetch for driving a real control plane. */
import * as http from "node:http";
import * as net from "node:net";
import { spawn, type ChildProcess } from "node:child_process";

import type { FetchLike, ResponseLike } from "../src/api.js";

export interface StubCall {
  url: string;
  method: string;
  headers: Record<string, string>;
  body?: string;
}

export interface StubRoute {
  /** "GET /v1/facility" — query string excluded from the match key. */
  [methodAndPath: string]: { status?: number; body: string } | string;
}

export function stubFetch(routes: StubRoute): {
  fetch: FetchLike;
  calls: StubCall[];
} {
  const calls: StubCall[] = [];
  const fetch: FetchLike = (url, init) => {
    calls.push({
      url,
      method: init.method,
      headers: init.headers,
      body: init.body,
    });
    const path = url.replace(/^https?:\/\/[^/]+/, "").split("?")[0];
    const route = routes[`${init.method} ${path}`];
    if (route === undefined) {
      const body = JSON.stringify({ error: "NotFound", detail: `no stub for ${path}` });
      return Promise.resolve(makeResponse(404, body));
    }
    const { status = 200, body } =
      typeof route === "string" ? { body: route } : route;
    return Promise.resolve(makeResponse(status, body));
  };
  return { fetch, calls };
}

function makeResponse(status: number, body: string): ResponseLike {
  return {
    ok: status >= 200 && status < 300,
    status,
    text: () => Promise.resolve(body),
  };
}

/** Real-HTTP fetch built on node:http, independent of the DOM environment. */
export const nodeFetch: FetchLike = (url, init) =>
  new Promise((resolve, reject) => {
    const request = http.request(
      url,
      { method: init.method, headers: init.headers },
      (response) => {
        const chunks: Buffer[] = [];
        response.on("data", (chunk: Buffer) => chunks.push(chunk));
        response.on("end", () => {
          const text = Buffer.concat(chunks).toString("utf8");
          resolve({
            ok: (response.statusCode ?? 0) >= 200 && (response.statusCode ?? 0) < 300,
            status: response.statusCode ?? 0,
            text: () => Promise.resolve(text),
          });
        });
      },
    );
    request.on("error", reject);
    if (init.body !== undefined) request.write(init.body);
    request.end();
  });

export function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = net.createServer();
    server.once("error", reject);
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        server.close(() => reject(new Error("no port assigned")));
      }
    });
  });
}

export interface LiveServer {
  endpoint: string;
  child: ChildProcess;
  stop(): void;
}

/** Launches the Python control plane and waits until it answers. */
export async function startControlPlane(options?: {
  racks?: number;
  nodesPerRack?: number;
}): Promise<LiveServer> {
  const port = await freePort();
  const child = spawn(
    "ppserve",
    [
      "--port",
      String(port),
      "--racks",
      String(options?.racks ?? 1),
      "--nodes-per-rack",
      String(options?.nodesPerRack ?? 2),
    ],
    { stdio: "ignore" },
  );
  const endpoint = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 20_000;
  for (;;) {
    try {
      const response = await nodeFetch(`${endpoint}/v1/profiles`, {
        method: "GET",
        headers: { "X-Auth-Token": "tenant-token" },
      });
      if (response.ok) break;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      child.kill("SIGKILL");
      throw new Error("control plane did not come up in time");
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  return {
    endpoint,
    child,
    stop: () => {
      child.kill("SIGTERM");
    },
  };
}
