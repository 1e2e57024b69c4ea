// Hash-routed single page app: #/configure, #/runs/{id}, #/runs/{id}/report.
// All state is rebuilt from the server on navigation or reload; the URL is
// the only thing the client persists.

import { ApiClient, HttpError, streamEvents, type StreamHandle } from "./api.js";
import {
  DEFAULT_FORM_VALUES,
  buildRunConfig,
  fieldForDetail,
  validateForm,
  type ConfigFormValues,
} from "./form.js";
import {
  EvaluateCache,
  applyEvent,
  badgeKey,
  initialViewState,
  loadReportBadges,
  scoreFromAxisReport,
  type BadgeMap,
} from "./state.js";
import type { Axis, BadgeValue, ViewState } from "./types.js";
import {
  clear,
  renderConfigForm,
  renderNotFound,
  renderReportPage,
  renderRunList,
  renderRunPage,
  showFieldErrors,
  showFormBanner,
  type RunPageModel,
} from "./views.js";

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "http://127.0.0.1:8765";
}

interface Route {
  page: "configure" | "run" | "report";
  runId?: string;
}

export function parseRoute(hash: string): Route {
  const path = hash.replace(/^#/, "");
  let match = /^\/runs\/([^/]+)\/report$/.exec(path);
  if (match && match[1]) {
    return { page: "report", runId: decodeURIComponent(match[1]) };
  }
  match = /^\/runs\/([^/]+)$/.exec(path);
  if (match && match[1]) {
    return { page: "run", runId: decodeURIComponent(match[1]) };
  }
  return { page: "configure" };
}

class App {
  private readonly client: ApiClient;
  private stream: StreamHandle | null = null;

  constructor(
    private readonly root: HTMLElement,
    baseUrl: string,
  ) {
    this.client = new ApiClient(baseUrl);
    this.baseUrl = baseUrl;
  }

  private readonly baseUrl: string;

  start(): void {
    window.addEventListener("hashchange", () => this.navigate());
    this.navigate();
  }

  private navigate(): void {
    if (this.stream) {
      this.stream.stop();
      this.stream = null;
    }
    const route = parseRoute(window.location.hash);
    if (route.page === "run" && route.runId) {
      void this.showRun(route.runId);
    } else if (route.page === "report" && route.runId) {
      void this.showReport(route.runId);
    } else {
      void this.showConfigure();
    }
  }

  // --- configure -------------------------------------------------------------

  private async showConfigure(): Promise<void> {
    clear(this.root);
    const values: ConfigFormValues = { ...DEFAULT_FORM_VALUES };
    const form = renderConfigForm(values, {
      onSubmit: (submitted) => void this.submitConfig(form, submitted),
    });
    this.root.append(form);
    try {
      const runs = await this.client.listRuns();
      this.root.append(renderRunList(runs));
    } catch {
      // server not reachable yet; the form alone is still useful
    }
  }

  private async submitConfig(form: HTMLElement, values: ConfigFormValues): Promise<void> {
    showFormBanner(form, "");
    const errors = validateForm(values);
    showFieldErrors(form, errors);
    if (errors.length > 0) {
      return;
    }
    try {
      const runId = await this.client.startRun(buildRunConfig(values));
      window.location.hash = `#/runs/${runId}`;
    } catch (err) {
      if (err instanceof HttpError && err.status === 422) {
        const field = fieldForDetail(err.detail, err.field);
        if (field) {
          showFieldErrors(form, [{ field, message: err.detail }]);
        } else {
          showFormBanner(form, err.detail);
        }
      } else if (err instanceof HttpError && err.status === 409) {
        // another run holds the output directory lock; offer to try again
        showFormBanner(form, err.detail, () => void this.submitConfig(form, values));
      } else {
        showFormBanner(form, `request failed: ${String(err)}`);
      }
    }
  }

  // --- live run --------------------------------------------------------------

  private async showRun(runId: string): Promise<void> {
    clear(this.root);
    let state: ViewState;
    try {
      const detail = await this.client.runDetail(runId);
      state = initialViewState(runId, detail.plan);
    } catch (err) {
      if (err instanceof HttpError && err.status === 404) {
        this.root.append(renderNotFound(runId));
        return;
      }
      throw err;
    }

    const model: RunPageModel = {
      state,
      badges: new Map<string, BadgeValue & { axis: Axis }>() as BadgeMap,
      pending: new Set<string>(),
      tooltips: new Map<string, string>(),
      connection: "connected",
      selected: null,
      docstrings: new Map<string, string>(),
    };
    // Evaluations that 404ed (no docstring); never auto-retried.
    const refused = new Set<string>();

    const cache = new EvaluateCache(async (component, axis) => {
      const report = await this.client.evaluate(component, axis, runId);
      const score = scoreFromAxisReport(axis, report);
      if (score === null) {
        throw new HttpError(500, `no score in ${axis} report`);
      }
      return { axis, score };
    });

    const stored = await this.client.report(runId);
    if (stored !== null) {
      const badges = loadReportBadges(stored);
      cache.seed(badges);
      for (const [key, value] of badges) {
        model.badges.set(key, value);
      }
    }
    await this.refreshDocstrings(runId, model);

    const evaluate = (component: string, axis: Axis): void => {
      const key = badgeKey(component, axis);
      if (model.badges.has(key) || model.pending.has(key) || refused.has(key)) {
        return;
      }
      model.pending.add(key);
      model.tooltips.delete(key);
      rerender();
      cache.get(component, axis).then(
        (badge) => {
          model.pending.delete(key);
          model.badges.set(key, badge);
          rerender();
        },
        (err) => {
          model.pending.delete(key);
          if (err instanceof HttpError && err.status === 409) {
            model.tooltips.set(key, err.detail);
          } else if (err instanceof HttpError && err.status === 404) {
            refused.add(key);
            model.tooltips.set(key, err.detail);
          } else {
            model.tooltips.set(key, String(err));
          }
          rerender();
        },
      );
    };

    // Completeness needs no judge, so finished components get their badge
    // without a click. Judged axes stay behind the button.
    const autoCompleteness = (): void => {
      for (const [name, status] of model.state.statuses) {
        if (status === "pending" || status === "running" || status === "skipped") {
          continue;
        }
        if (status === "failed") {
          continue;
        }
        const key = badgeKey(name, "completeness");
        if (!model.badges.has(key) && !model.pending.has(key) && !refused.has(key)) {
          evaluate(name, "completeness");
        }
      }
    };

    const rerender = (): void => {
      clear(this.root);
      this.root.append(
        renderRunPage(model, {
          onEvaluate: evaluate,
          onSelect: (component) => {
            model.selected = model.selected === component ? null : component;
            rerender();
          },
        }),
      );
    };

    rerender();
    autoCompleteness();

    this.stream = streamEvents({
      baseUrl: this.baseUrl,
      runId,
      onEvent: (event) => {
        applyEvent(model.state, event);
        if (event.kind === "component_done") {
          autoCompleteness();
        }
        if (event.kind === "run_done") {
          void this.refreshDocstrings(runId, model).then(rerender);
        }
        rerender();
      },
      onConnection: (phase) => {
        model.connection = phase;
        rerender();
      },
    });
  }

  private async refreshDocstrings(runId: string, model: RunPageModel): Promise<void> {
    try {
      for (const entry of await this.client.components(runId)) {
        if (entry.docstring) {
          model.docstrings.set(entry.qualified_name, entry.docstring);
        }
      }
    } catch {
      // transient; the pane just shows steps until the next refresh
    }
  }

  // --- report ----------------------------------------------------------------

  private async showReport(runId: string): Promise<void> {
    clear(this.root);
    try {
      await this.client.runDetail(runId);
    } catch (err) {
      if (err instanceof HttpError && err.status === 404) {
        this.root.append(renderNotFound(runId));
        return;
      }
      throw err;
    }
    const payload = await this.client.report(runId);
    this.root.append(renderReportPage(runId, payload));
  }
}

export function mount(root: HTMLElement, baseUrl?: string): void {
  new App(root, baseUrl ?? apiBase()).start();
}

// Booted from index.html; guarded so importing this module in tests is inert.
if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document.getElementById("app") as HTMLElement);
}
