// Client-side validation must agree with the server: anything rejected here
// would also 422 there, and the assembled body uses the server's key names.

import { describe, expect, it } from "vitest";
import {
  DEFAULT_FORM_VALUES,
  buildRunConfig,
  fieldForDetail,
  validateForm,
  type ConfigFormValues,
} from "../src/form.js";

function values(overrides: Partial<ConfigFormValues> = {}): ConfigFormValues {
  return {
    ...DEFAULT_FORM_VALUES,
    repo_path: "/work/project",
    base_url: "http://llm.test/v1",
    model: "m-1",
    ...overrides,
  };
}

function fieldsOf(errors: { field: string }[]): string[] {
  return errors.map((e) => e.field);
}

describe("config form validation", () => {
  it("a filled-in http form passes", () => {
    expect(validateForm(values())).toEqual([]);
  });

  it("empty repo path is rejected before any request", () => {
    const errors = validateForm(values({ repo_path: "   " }));
    expect(fieldsOf(errors)).toContain("repo_path");
  });

  it("http backend needs base_url and model", () => {
    const errors = validateForm(values({ base_url: "", model: "" }));
    expect(fieldsOf(errors)).toEqual(expect.arrayContaining(["base_url", "model"]));
  });

  it("scripted backend needs script_path and ignores http fields", () => {
    const bad = validateForm(values({ backend: "scripted", script_path: "" }));
    expect(fieldsOf(bad)).toContain("script_path");
    const good = validateForm(
      values({ backend: "scripted", script_path: "s.json", base_url: "", model: "" }),
    );
    expect(good).toEqual([]);
  });

  it("random order requires a seed, topological forbids one", () => {
    expect(fieldsOf(validateForm(values({ order: "random", seed: "" })))).toContain("seed");
    expect(fieldsOf(validateForm(values({ order: "topological", seed: "3" })))).toContain("seed");
    expect(validateForm(values({ order: "random", seed: "11" }))).toEqual([]);
  });

  it("budget and iteration limits must be positive integers", () => {
    expect(fieldsOf(validateForm(values({ budget_limit: "0" })))).toContain("budget_limit");
    expect(fieldsOf(validateForm(values({ budget_limit: "lots" })))).toContain("budget_limit");
    expect(fieldsOf(validateForm(values({ max_outer_cycles: "0" })))).toContain(
      "max_outer_cycles",
    );
  });
});

describe("run config body", () => {
  it("assembles server key names and types", () => {
    const body = buildRunConfig(
      values({ order: "random", seed: "11", overwrite_existing: true, budget_limit: "4096" }),
    );
    expect(body).toEqual({
      repo_path: "/work/project",
      llm: {
        backend: "http",
        base_url: "http://llm.test/v1",
        model: "m-1",
        api_key_env: "LLM_API_KEY",
      },
      mode: "agent",
      order: "random",
      seed: 11,
      overwrite_existing: true,
      budget: { limit: 4096 },
    });
  });

  it("defaults are omitted so the server's own defaults apply", () => {
    const body = buildRunConfig(values());
    expect(body["budget"]).toBeUndefined();
    expect(body["limits"]).toBeUndefined();
    expect(body["seed"]).toBeUndefined();
    expect(body["output_dir"]).toBeUndefined();
  });

  it("non-default limits are sent nested", () => {
    const body = buildRunConfig(values({ max_outer_cycles: "5" }));
    expect(body["limits"]).toEqual({ max_outer_cycles: 5 });
  });
});

describe("server 422 placement", () => {
  it("explicit field name wins", () => {
    expect(fieldForDetail("repo_path is not a directory: /nope", "repo_path")).toBe(
      "repo_path",
    );
  });

  it("known server messages land on the right field", () => {
    expect(fieldForDetail("order=random requires a seed")).toBe("seed");
    expect(fieldForDetail("budget limit must be positive")).toBe("budget_limit");
    expect(fieldForDetail("http backend requires base_url and model")).toBe("base_url");
    expect(fieldForDetail("limits.max_outer_cycles must be >= 1")).toBe("max_outer_cycles");
    expect(fieldForDetail("repo_path is not a directory: /nope")).toBe("repo_path");
  });

  it("unplaceable details fall back to the banner", () => {
    expect(fieldForDetail("unknown config key: retriever.kindd")).toBeNull();
  });
});
