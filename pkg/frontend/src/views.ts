// DOM construction. No state lives here: every render takes the current
// ViewState (or form values) and rebuilds the page section from it.

import type { Axis, BadgeValue, ViewState } from "./types.js";
import { AXES } from "./types.js";
import type { ConfigFormValues, FieldError } from "./form.js";
import { badgeKey, type BadgeMap } from "./state.js";

type Child = Node | string;

export function el(
  tag: string,
  attrs: Record<string, string> = {},
  children: Child[] = [],
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

// --- configure page ----------------------------------------------------------

export interface ConfigFormHooks {
  onSubmit: (values: ConfigFormValues) => void;
}

interface FieldSpec {
  name: keyof ConfigFormValues;
  label: string;
  kind?: "text" | "checkbox" | "select";
  options?: string[];
  placeholder?: string;
}

const REPO_FIELDS: FieldSpec[] = [
  { name: "repo_path", label: "repository path", placeholder: "/path/to/project" },
  { name: "output_dir", label: "output directory" },
];

const LLM_FIELDS: FieldSpec[] = [
  { name: "backend", label: "backend", kind: "select", options: ["http", "scripted"] },
  { name: "base_url", label: "base url", placeholder: "https://llm.internal/v1" },
  { name: "model", label: "model" },
  { name: "api_key_env", label: "api key env var" },
  { name: "script_path", label: "script path", placeholder: "fixtures/script.json" },
];

const FLOW_FIELDS: FieldSpec[] = [
  { name: "mode", label: "mode", kind: "select", options: ["agent", "chat"] },
  { name: "order", label: "order", kind: "select", options: ["topological", "random"] },
  { name: "seed", label: "seed" },
  { name: "overwrite_existing", label: "overwrite existing docstrings", kind: "checkbox" },
  { name: "budget_limit", label: "context budget (tokens)" },
  { name: "max_reader_searcher_rounds", label: "reader/searcher rounds" },
  { name: "max_writer_verifier_rounds", label: "writer/verifier rounds" },
  { name: "max_outer_cycles", label: "outer cycles" },
];

function fieldRow(spec: FieldSpec, values: ConfigFormValues): HTMLElement {
  const id = `field-${spec.name}`;
  const row = el("div", { class: "field", "data-field": spec.name });
  row.append(el("label", { for: id }, [spec.label]));
  let input: HTMLElement;
  if (spec.kind === "select") {
    input = el("select", { id, name: spec.name });
    for (const option of spec.options ?? []) {
      const node = el("option", { value: option }, [option]);
      if (values[spec.name] === option) {
        node.setAttribute("selected", "selected");
      }
      input.append(node);
    }
  } else if (spec.kind === "checkbox") {
    input = el("input", { id, name: spec.name, type: "checkbox" });
    if (values[spec.name] === true) {
      input.setAttribute("checked", "checked");
    }
  } else {
    input = el("input", {
      id,
      name: spec.name,
      type: "text",
      value: String(values[spec.name] ?? ""),
    });
    if (spec.placeholder) {
      input.setAttribute("placeholder", spec.placeholder);
    }
  }
  row.append(input);
  row.append(el("span", { class: "field-error", role: "alert" }));
  return row;
}

export function renderConfigForm(
  values: ConfigFormValues,
  hooks: ConfigFormHooks,
): HTMLElement {
  const form = el("form", { id: "config-form", novalidate: "novalidate" });
  const sections: [string, FieldSpec[]][] = [
    ["repository", REPO_FIELDS],
    ["llm configuration", LLM_FIELDS],
    ["flow control", FLOW_FIELDS],
  ];
  for (const [title, specs] of sections) {
    const fieldset = el("fieldset", {}, [el("legend", {}, [title])]);
    for (const spec of specs) {
      fieldset.append(fieldRow(spec, values));
    }
    form.append(fieldset);
  }
  form.append(el("div", { class: "form-banner", role: "status" }));
  form.append(el("button", { type: "submit" }, ["start run"]));
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    hooks.onSubmit(readFormValues(form));
  });
  return form;
}

export function readFormValues(form: HTMLElement): ConfigFormValues {
  const values: Record<string, unknown> = {};
  for (const input of Array.from(form.querySelectorAll("input, select"))) {
    const name = input.getAttribute("name");
    if (!name) {
      continue;
    }
    if (input instanceof HTMLInputElement && input.type === "checkbox") {
      values[name] = input.checked;
    } else if (input instanceof HTMLInputElement || input instanceof HTMLSelectElement) {
      values[name] = input.value;
    }
  }
  return values as unknown as ConfigFormValues;
}

export function showFieldErrors(form: HTMLElement, errors: FieldError[]): void {
  for (const node of Array.from(form.querySelectorAll(".field-error"))) {
    node.textContent = "";
  }
  for (const error of errors) {
    const row = form.querySelector(`[data-field="${error.field}"] .field-error`);
    if (row) {
      row.textContent = error.message;
    }
  }
}

export function showFormBanner(
  form: HTMLElement,
  message: string,
  retry?: () => void,
): void {
  const banner = form.querySelector(".form-banner");
  if (!(banner instanceof HTMLElement)) {
    return;
  }
  clear(banner);
  if (!message) {
    return;
  }
  banner.append(el("span", {}, [message]));
  if (retry) {
    const button = el("button", { type: "button", class: "retry" }, ["retry"]);
    button.addEventListener("click", retry);
    banner.append(" ");
    banner.append(button);
  }
}

// --- live run page -----------------------------------------------------------

export interface RunPageHooks {
  onEvaluate: (component: string, axis: Axis) => void;
  onSelect: (component: string) => void;
}

function statusCell(status: string): HTMLElement {
  return el("td", { class: `status status-${status}` }, [status]);
}

function badgeCell(
  component: string,
  axis: Axis,
  badges: BadgeMap,
  pending: Set<string>,
  enabled: boolean,
  hooks: RunPageHooks,
): HTMLElement {
  const cell = el("td", { class: `badge badge-${axis}` });
  const key = badgeKey(component, axis);
  const badge: BadgeValue | undefined = badges.get(key);
  if (badge !== undefined) {
    cell.append(el("span", { class: "score" }, [badge.score.toFixed(3)]));
    return cell;
  }
  if (pending.has(key)) {
    cell.append(el("span", { class: "spinner" }, ["…"]));
    return cell;
  }
  const button = el("button", { type: "button", class: "evaluate" }, ["Evaluate"]);
  if (!enabled) {
    button.setAttribute("disabled", "disabled");
  }
  button.addEventListener("click", () => hooks.onEvaluate(component, axis));
  cell.append(button);
  return cell;
}

export interface RunPageModel {
  state: ViewState;
  badges: BadgeMap;
  // keys currently showing a spinner
  pending: Set<string>;
  tooltips: Map<string, string>;
  connection: string;
  selected: string | null;
  docstrings: Map<string, string>;
}

export function renderRunPage(model: RunPageModel, hooks: RunPageHooks): HTMLElement {
  const { state } = model;
  const page = el("section", { class: "run-page" });
  const headline = `${state.runId} — ${state.done ? state.runStatus : "running"}`;
  page.append(el("h1", {}, [headline]));
  const meta = el("p", { class: "run-meta" }, [
    `${state.approved} approved of ${state.order.length} planned`,
  ]);
  page.append(meta);

  const indicator = el("p", { class: `connection connection-${model.connection}` });
  if (model.connection === "reconnecting") {
    indicator.textContent = "connection lost, reconnecting…";
  } else if (model.connection === "closed" && !state.done) {
    indicator.textContent = "stream closed";
  }
  page.append(indicator);

  const table = el("table", { class: "components" });
  const head = el("tr", {}, [el("th", {}, ["component"]), el("th", {}, ["status"])]);
  for (const axis of AXES) {
    head.append(el("th", {}, [axis]));
  }
  table.append(head);
  for (const name of state.order) {
    const status = state.statuses.get(name) ?? "pending";
    const row = el("tr", { "data-component": name });
    const nameCell = el("td", { class: "name" }, [name]);
    nameCell.addEventListener("click", () => hooks.onSelect(name));
    row.append(nameCell);
    const cell = statusCell(status);
    const activity = state.activity.get(name);
    if (activity && status === "running") {
      cell.append(el("span", { class: "activity" }, [` (${activity})`]));
    }
    row.append(cell);
    const finished = status !== "pending" && status !== "running" && status !== "skipped";
    for (const axis of AXES) {
      const badge = badgeCell(name, axis, model.badges, model.pending, finished, hooks);
      const tooltip = model.tooltips.get(badgeKey(name, axis));
      if (tooltip) {
        badge.setAttribute("title", tooltip);
      }
      row.append(badge);
    }
    table.append(row);
  }
  page.append(table);

  if (model.selected) {
    page.append(renderTranscript(model, model.selected));
  }

  if (state.warnings.length > 0) {
    const list = el("ul", { class: "warnings" });
    for (const warning of state.warnings) {
      list.append(el("li", {}, [warning]));
    }
    page.append(el("h2", {}, ["warnings"]));
    page.append(list);
  }
  return page;
}

function renderTranscript(model: RunPageModel, name: string): HTMLElement {
  const pane = el("aside", { class: "transcript" });
  pane.append(el("h2", {}, [name]));
  const steps = model.state.steps.get(name) ?? [];
  const list = el("ol", { class: "steps" });
  for (const step of steps) {
    list.append(el("li", {}, [step]));
  }
  pane.append(list);
  const docstring = model.docstrings.get(name);
  if (docstring) {
    pane.append(el("pre", { class: "docstring" }, [docstring]));
  }
  return pane;
}

// --- misc pages ---------------------------------------------------------------

export function renderNotFound(runId: string): HTMLElement {
  return el("section", { class: "not-found" }, [
    el("h1", {}, ["run not found"]),
    el("p", {}, [`No run named ${runId} is known to the server.`]),
    el("a", { href: "#/configure" }, ["back to configuration"]),
  ]);
}

export function renderRunList(
  runs: { run_id: string; status: string; processed: number; components: number }[],
): HTMLElement {
  const section = el("section", { class: "run-list" }, [el("h2", {}, ["recent runs"])]);
  if (runs.length === 0) {
    section.append(el("p", {}, ["no runs yet"]));
    return section;
  }
  const list = el("ul");
  for (const run of runs) {
    list.append(
      el("li", {}, [
        el("a", { href: `#/runs/${run.run_id}` }, [run.run_id]),
        ` — ${run.status}, ${run.processed}/${run.components}`,
        " ",
        el("a", { href: `#/runs/${run.run_id}/report` }, ["report"]),
      ]),
    );
  }
  section.append(list);
  return section;
}

export function renderReportPage(
  runId: string,
  payload: Record<string, unknown> | null,
): HTMLElement {
  const section = el("section", { class: "report-page" }, [
    el("h1", {}, [`${runId} evaluation`]),
  ]);
  if (payload === null) {
    section.append(
      el("p", {}, ["No evaluation report has been written for this run yet."]),
    );
    section.append(el("a", { href: `#/runs/${runId}` }, ["back to run"]));
    return section;
  }
  const table = typeof payload["table"] === "string" ? payload["table"] : null;
  if (table) {
    section.append(el("pre", { class: "report-table" }, [table]));
  } else {
    section.append(el("pre", {}, [JSON.stringify(payload, null, 2)]));
  }
  section.append(el("a", { href: `#/runs/${runId}` }, ["back to run"]));
  return section;
}
