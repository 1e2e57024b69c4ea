// HTTP client for the run server. Everything the dashboard knows arrives
// through these calls; there is no other channel and no local persistence.

import type {
  Axis,
  ProgressEvent,
  RunDetail,
  RunSummary,
  ComponentEntry,
} from "./types.js";

export class HttpError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
    readonly field?: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = "HttpError";
  }
}

function errorFrom(status: number, body: unknown): HttpError {
  if (typeof body === "object" && body !== null) {
    const record = body as Record<string, unknown>;
    const detail = typeof record["detail"] === "string" ? record["detail"] : JSON.stringify(body);
    const field = typeof record["field"] === "string" ? record["field"] : undefined;
    return new HttpError(status, detail, field);
  }
  return new HttpError(status, typeof body === "string" && body ? body : `HTTP ${status}`);
}

export type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchFn = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchFn(this.base + path, init);
    const text = await response.text();
    let body: unknown = null;
    if (text) {
      try {
        body = JSON.parse(text);
      } catch {
        body = text;
      }
    }
    if (!response.ok) {
      throw errorFrom(response.status, body);
    }
    return body;
  }

  async listRuns(): Promise<RunSummary[]> {
    const body = (await this.request("/runs")) as { runs: RunSummary[] };
    return body.runs;
  }

  async runDetail(runId: string): Promise<RunDetail> {
    return (await this.request(`/runs/${encodeURIComponent(runId)}`)) as RunDetail;
  }

  async components(runId: string): Promise<ComponentEntry[]> {
    const body = (await this.request(
      `/runs/${encodeURIComponent(runId)}/components`,
    )) as { components: ComponentEntry[] };
    return body.components;
  }

  // Stored evaluation report, or null when none has been written yet.
  async report(runId: string): Promise<Record<string, unknown> | null> {
    try {
      return (await this.request(
        `/runs/${encodeURIComponent(runId)}/report`,
      )) as Record<string, unknown>;
    } catch (err) {
      if (err instanceof HttpError && err.status === 404) {
        return null;
      }
      throw err;
    }
  }

  async startRun(config: Record<string, unknown>): Promise<string> {
    const body = (await this.request("/runs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    })) as { run_id: string };
    return body.run_id;
  }

  async evaluate(
    component: string,
    axis: Axis,
    runId?: string,
  ): Promise<Record<string, unknown>> {
    const params = new URLSearchParams({ axis });
    if (runId) {
      params.set("run", runId);
    }
    return (await this.request(
      `/components/${encodeURIComponent(component)}/evaluate?${params.toString()}`,
      { method: "POST" },
    )) as Record<string, unknown>;
  }
}

// --- server-sent events ------------------------------------------------------

// Frames look like "event: {kind}\ndata: {json}\n\n". Chunk boundaries can
// fall anywhere, including inside a frame, so the parser buffers until it
// sees the blank-line terminator.
export class SseParser {
  private buffer = "";

  push(chunk: string): ProgressEvent[] {
    this.buffer += chunk;
    const events: ProgressEvent[] = [];
    let split: number;
    while ((split = this.buffer.indexOf("\n\n")) !== -1) {
      const frame = this.buffer.slice(0, split);
      this.buffer = this.buffer.slice(split + 2);
      const event = parseFrame(frame);
      if (event !== null) {
        events.push(event);
      }
    }
    return events;
  }
}

function parseFrame(frame: string): ProgressEvent | null {
  let data = "";
  for (const line of frame.split("\n")) {
    if (line.startsWith("data:")) {
      data += line.slice(5).trimStart();
    }
  }
  if (!data) {
    return null;
  }
  let parsed: unknown;
  try {
    parsed = JSON.parse(data);
  } catch {
    return null;
  }
  if (typeof parsed !== "object" || parsed === null) {
    return null;
  }
  const record = parsed as Record<string, unknown>;
  if (typeof record["seq"] !== "number" || typeof record["kind"] !== "string") {
    return null;
  }
  return {
    seq: record["seq"],
    kind: record["kind"],
    component: typeof record["component"] === "string" ? record["component"] : null,
    payload:
      typeof record["payload"] === "object" && record["payload"] !== null
        ? (record["payload"] as Record<string, unknown>)
        : {},
  };
}

export type ConnectionPhase = "connected" | "reconnecting" | "closed" | "not_found";

export interface StreamOptions {
  baseUrl: string;
  runId: string;
  onEvent: (event: ProgressEvent) => void;
  onConnection?: (phase: ConnectionPhase) => void;
  from?: number;
  fetchFn?: FetchFn;
  retryDelayMs?: number;
  // Connection attempts, not events; tests cap this so a dead stream ends.
  maxAttempts?: number;
}

export interface StreamHandle {
  stop(): void;
  done: Promise<void>;
}

const DEFAULT_RETRY_MS = 1000;

// Follow /runs/{id}/events until run_done. The server treats ?from as
// inclusive, so after a drop we reconnect at the last seq we saw and the
// projection's seq guard swallows the overlap; nothing is skipped and
// nothing is applied twice.
export function streamEvents(options: StreamOptions): StreamHandle {
  const fetchFn = options.fetchFn ?? ((input: string, init?: RequestInit) => fetch(input, init));
  const retryDelay = options.retryDelayMs ?? DEFAULT_RETRY_MS;
  const maxAttempts = options.maxAttempts ?? Number.POSITIVE_INFINITY;
  const controller = new AbortController();
  let stopped = false;
  let lastSeq = 0;

  const done = (async () => {
    let from = options.from ?? 0;
    let attempts = 0;
    while (!stopped && attempts < maxAttempts) {
      attempts += 1;
      const url =
        `${options.baseUrl}/runs/${encodeURIComponent(options.runId)}/events` +
        (from > 0 ? `?from=${from}` : "");
      let sawRunDone = false;
      try {
        const response = await fetchFn(url, { signal: controller.signal });
        if (response.status === 404) {
          options.onConnection?.("not_found");
          return;
        }
        if (!response.ok) {
          throw new HttpError(response.status, `stream failed: HTTP ${response.status}`);
        }
        options.onConnection?.("connected");
        const parser = new SseParser();
        const deliver = (chunk: string) => {
          for (const event of parser.push(chunk)) {
            lastSeq = Math.max(lastSeq, event.seq);
            if (event.kind === "run_done") {
              sawRunDone = true;
            }
            options.onEvent(event);
          }
        };
        if (response.body !== null) {
          const reader = response.body.getReader();
          const decoder = new TextDecoder();
          for (;;) {
            const { done: eof, value } = await reader.read();
            if (eof) {
              break;
            }
            deliver(decoder.decode(value, { stream: true }));
          }
        } else {
          deliver(await response.text());
        }
      } catch (err) {
        if (stopped) {
          break;
        }
        if (err instanceof HttpError && err.status === 404) {
          options.onConnection?.("not_found");
          return;
        }
        // fall through to the reconnect path below
      }
      if (sawRunDone || stopped) {
        break;
      }
      options.onConnection?.("reconnecting");
      if (retryDelay > 0) {
        await new Promise((resolve) => setTimeout(resolve, retryDelay));
      }
      if (lastSeq > 0) {
        from = lastSeq;
      }
    }
    options.onConnection?.("closed");
  })();

  return {
    stop() {
      stopped = true;
      controller.abort();
    },
    done,
  };
}
