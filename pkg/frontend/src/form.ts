// Config form model: flat input values, client-side checks that mirror the
// server's validation, and assembly of the POST /runs body. Pure functions so
// the mirroring can be tested without a DOM.

export interface ConfigFormValues {
  repo_path: string;
  output_dir: string;
  backend: string;
  base_url: string;
  model: string;
  api_key_env: string;
  script_path: string;
  mode: string;
  order: string;
  seed: string;
  overwrite_existing: boolean;
  budget_limit: string;
  max_reader_searcher_rounds: string;
  max_writer_verifier_rounds: string;
  max_outer_cycles: string;
}

export const DEFAULT_FORM_VALUES: ConfigFormValues = {
  repo_path: "",
  output_dir: "runs",
  backend: "http",
  base_url: "",
  model: "",
  api_key_env: "LLM_API_KEY",
  script_path: "",
  mode: "agent",
  order: "topological",
  seed: "",
  overwrite_existing: false,
  budget_limit: "8192",
  max_reader_searcher_rounds: "3",
  max_writer_verifier_rounds: "2",
  max_outer_cycles: "2",
};

export interface FieldError {
  field: keyof ConfigFormValues;
  message: string;
}

function intOrNull(text: string): number | null {
  if (!/^-?\d+$/.test(text.trim())) {
    return null;
  }
  return Number.parseInt(text, 10);
}

// Same conditions the server enforces, phrased for the form. Anything that
// passes here and still 422s is placed by fieldForDetail below.
export function validateForm(values: ConfigFormValues): FieldError[] {
  const errors: FieldError[] = [];
  if (!values.repo_path.trim()) {
    errors.push({ field: "repo_path", message: "repository path is required" });
  }
  if (values.backend === "http") {
    if (!values.base_url.trim()) {
      errors.push({ field: "base_url", message: "http backend requires base_url" });
    }
    if (!values.model.trim()) {
      errors.push({ field: "model", message: "http backend requires model" });
    }
  } else if (values.backend === "scripted") {
    if (!values.script_path.trim()) {
      errors.push({ field: "script_path", message: "scripted backend requires script_path" });
    }
  } else {
    errors.push({ field: "backend", message: `unknown llm backend: ${values.backend}` });
  }
  if (values.mode !== "agent" && values.mode !== "chat") {
    errors.push({ field: "mode", message: "mode must be 'agent' or 'chat'" });
  }
  if (values.order !== "topological" && values.order !== "random") {
    errors.push({ field: "order", message: "order must be 'topological' or 'random'" });
  }
  const seedText = values.seed.trim();
  if (values.order === "random" && !seedText) {
    errors.push({ field: "seed", message: "order=random requires a seed" });
  }
  if (values.order === "topological" && seedText) {
    errors.push({ field: "seed", message: "seed is only meaningful with order=random" });
  }
  if (seedText && intOrNull(seedText) === null) {
    errors.push({ field: "seed", message: "seed must be an integer" });
  }
  const budget = intOrNull(values.budget_limit);
  if (budget === null || budget <= 0) {
    errors.push({ field: "budget_limit", message: "budget limit must be positive" });
  }
  const roundFields: (keyof ConfigFormValues)[] = [
    "max_reader_searcher_rounds",
    "max_writer_verifier_rounds",
    "max_outer_cycles",
  ];
  for (const field of roundFields) {
    const value = intOrNull(values[field] as string);
    if (value === null || value < 1) {
      errors.push({ field, message: `limits.${field} must be >= 1` });
    }
  }
  return errors;
}

// Body for POST /runs. Only built after validateForm returns no errors.
export function buildRunConfig(values: ConfigFormValues): Record<string, unknown> {
  const llm: Record<string, unknown> = { backend: values.backend };
  if (values.backend === "http") {
    llm["base_url"] = values.base_url.trim();
    llm["model"] = values.model.trim();
    if (values.api_key_env.trim()) {
      llm["api_key_env"] = values.api_key_env.trim();
    }
  } else {
    llm["script_path"] = values.script_path.trim();
  }
  const body: Record<string, unknown> = {
    repo_path: values.repo_path.trim(),
    llm,
    mode: values.mode,
    order: values.order,
  };
  if (values.output_dir.trim() && values.output_dir.trim() !== "runs") {
    body["output_dir"] = values.output_dir.trim();
  }
  if (values.order === "random") {
    body["seed"] = intOrNull(values.seed) ?? undefined;
  }
  if (values.overwrite_existing) {
    body["overwrite_existing"] = true;
  }
  const budget = intOrNull(values.budget_limit);
  if (budget !== null && budget !== 8192) {
    body["budget"] = { limit: budget };
  }
  const limits: Record<string, number> = {};
  const defaults: Record<string, number> = {
    max_reader_searcher_rounds: 3,
    max_writer_verifier_rounds: 2,
    max_outer_cycles: 2,
  };
  for (const [name, fallback] of Object.entries(defaults)) {
    const value = intOrNull(values[name as keyof ConfigFormValues] as string);
    if (value !== null && value !== fallback) {
      limits[name] = value;
    }
  }
  if (Object.keys(limits).length > 0) {
    body["limits"] = limits;
  }
  return body;
}

// Place a server-side 422 next to the input it talks about. The repo_path
// rejection carries an explicit field; the rest only have a message, so we
// look for a field name inside it and fall back to the form banner.
const DETAIL_PATTERNS: [RegExp, keyof ConfigFormValues][] = [
  [/repo_path/, "repo_path"],
  [/base_url/, "base_url"],
  [/\bmodel\b/, "model"],
  [/script_path/, "script_path"],
  [/\bseed\b/, "seed"],
  [/\bbudget\b/, "budget_limit"],
  [/max_reader_searcher_rounds/, "max_reader_searcher_rounds"],
  [/max_writer_verifier_rounds/, "max_writer_verifier_rounds"],
  [/max_outer_cycles/, "max_outer_cycles"],
  [/\bmode\b/, "mode"],
  [/\border\b/, "order"],
  [/backend/, "backend"],
  [/output_dir/, "output_dir"],
];

export function fieldForDetail(
  detail: string,
  explicit?: string,
): keyof ConfigFormValues | null {
  if (explicit && explicit in DEFAULT_FORM_VALUES) {
    return explicit as keyof ConfigFormValues;
  }
  for (const [pattern, field] of DETAIL_PATTERNS) {
    if (pattern.test(detail)) {
      return field;
    }
  }
  return null;
}
