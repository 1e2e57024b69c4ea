// Shared fixtures and a fake server for stream tests. The fixture files were
// exported from a real scripted run so shapes match the live API exactly.

import { readFileSync } from "node:fs";
import type { ProgressEvent, RunDetail } from "../src/types.js";

function load(name: string): unknown {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8"));
}

export const FIXTURE_EVENTS = load("events.json") as ProgressEvent[];
export const FIXTURE_DETAIL = load("run_detail.json") as RunDetail;
export const FIXTURE_REPORT = load("evaluation.json") as Record<string, unknown>;

export function sseBody(events: ProgressEvent[]): string {
  return events
    .map((e) => `event: ${e.kind}\ndata: ${JSON.stringify(e)}\n\n`)
    .join("");
}

export interface ServedRequest {
  from: number;
  served: number[];
}

// Mimics GET /runs/{id}/events with the server's inclusive ?from semantics
// (seq >= from). dropAfter[i] caps how many events connection i delivers
// before the stream closes mid-run; once the plan runs out, connections
// deliver everything left.
export function fakeEventServer(
  events: ProgressEvent[],
  dropAfter: number[],
): { fetchFn: (input: string, init?: RequestInit) => Promise<Response>; requests: ServedRequest[] } {
  const requests: ServedRequest[] = [];
  let connection = 0;
  const fetchFn = async (input: string): Promise<Response> => {
    const url = new URL(input, "http://test.invalid");
    const from = Number.parseInt(url.searchParams.get("from") ?? "0", 10);
    const pending = events.filter((e) => e.seq >= from);
    const cap = dropAfter[connection];
    connection += 1;
    const slice = cap === undefined ? pending : pending.slice(0, cap);
    requests.push({ from, served: slice.map((e) => e.seq) });
    return new Response(sseBody(slice), {
      status: 200,
      headers: { "content-type": "text/event-stream" },
    });
  };
  return { fetchFn, requests };
}
