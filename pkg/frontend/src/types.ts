// Shapes mirrored from the HTTP API. Keep field names byte-identical to the
// server payloads; the dashboard never invents state of its own.

export type EventKind =
  | "run_started"
  | "component_started"
  | "agent_step"
  | "component_done"
  | "warning"
  | "run_done";

export interface ProgressEvent {
  seq: number;
  kind: EventKind | string;
  component: string | null;
  payload: Record<string, unknown>;
}

export interface RunSummary {
  run_id: string;
  status: string;
  components: number;
  processed: number;
}

export interface RunDetail extends RunSummary {
  mode: string;
  order: string;
  plan: string[];
  statuses: Record<string, string>;
  error?: string;
}

export interface ComponentEntry {
  qualified_name: string;
  kind: string;
  status: string | null;
  docstring: string | null;
}

export type Axis = "completeness" | "helpfulness" | "truthfulness";

export const AXES: readonly Axis[] = ["completeness", "helpfulness", "truthfulness"];

// What an evaluate call (or a cached report) yields for one badge.
export interface BadgeValue {
  axis: Axis;
  score: number;
}

export type ComponentStatus =
  | "pending"
  | "running"
  | "approved"
  | "failed"
  | "limit_reached"
  | "skipped"
  | string;

// Everything a page needs to paint. Reconstructed from scratch on reload:
// replay GET /runs/{id}/events, then apply the live stream on top.
export interface ViewState {
  runId: string;
  lastSeq: number;
  done: boolean;
  runStatus: string;
  order: string[];
  statuses: Map<string, ComponentStatus>;
  activity: Map<string, string>;
  // Per-component agent-step log, the closest thing to a transcript the
  // HTTP surface exposes. Rendered when a row is selected.
  steps: Map<string, string[]>;
  warnings: string[];
  approved: number;
}

export interface EvaluatePayload {
  component: string;
  axis: Axis;
  report: Record<string, unknown>;
}

export interface ApiError {
  status: number;
  detail: string;
}
