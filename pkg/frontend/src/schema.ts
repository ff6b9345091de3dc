// Analysis configuration schema: the same keys, completeness rules, and
// domain checks the server enforces with its 422 responses. The draft is
// validated here before submission so errors land on the offending field.

export interface AnalysisConfigData {
  stopwords: {
    base_path: string;
    extra: string[];
    ratio_threshold: number;
    min_count: number;
  };
  markers: {
    similarity_threshold: number;
    min_tokens: number;
  };
  slices: {
    buckets_per_sequence: number;
  };
  terms: {
    mode: string;
    depth: number;
    label_depth: number;
  };
  groups: {
    include: string[];
  };
  counts: {
    include_dm: boolean;
  };
}

export interface FieldError {
  field: string;
  message: string;
}

export const TERM_MODES = ["bow", "tfidf", "centrality"];

type Kind = "str" | "int" | "float" | "bool" | "strlist";

const KEYS: Array<[string, string, Kind]> = [
  ["stopwords", "base_path", "str"],
  ["stopwords", "extra", "strlist"],
  ["stopwords", "ratio_threshold", "float"],
  ["stopwords", "min_count", "int"],
  ["markers", "similarity_threshold", "float"],
  ["markers", "min_tokens", "int"],
  ["slices", "buckets_per_sequence", "int"],
  ["terms", "mode", "str"],
  ["terms", "depth", "int"],
  ["terms", "label_depth", "int"],
  ["groups", "include", "strlist"],
  ["counts", "include_dm", "bool"],
];

export function defaultConfig(): AnalysisConfigData {
  return {
    stopwords: { base_path: "", extra: [], ratio_threshold: 5.0, min_count: 10 },
    markers: { similarity_threshold: 0.8, min_tokens: 50 },
    slices: { buckets_per_sequence: 1 },
    terms: { mode: "bow", depth: 20, label_depth: 3 },
    groups: { include: [] },
    counts: { include_dm: false },
  };
}

function checkKind(value: unknown, kind: Kind): string | null {
  switch (kind) {
    case "str":
      return typeof value === "string" ? null : "expected a string";
    case "int":
      return typeof value === "number" && Number.isInteger(value)
        ? null : "expected an integer";
    case "float":
      return typeof value === "number" && Number.isFinite(value)
        ? null : "expected a number";
    case "bool":
      return typeof value === "boolean" ? null : "expected true or false";
    case "strlist":
      return Array.isArray(value) && value.every((v) => typeof v === "string")
        ? null : "expected a list of strings";
  }
}

/** Structural checks: every key present (lists may be omitted when their
 * section exists), nothing unknown, right value kinds. */
export function validateShape(data: unknown): FieldError[] {
  const errors: FieldError[] = [];
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    return [{ field: "", message: "config must be an object of sections" }];
  }
  const obj = data as Record<string, unknown>;
  const known = new Map<string, Map<string, Kind>>();
  for (const [section, name, kind] of KEYS) {
    if (!known.has(section)) known.set(section, new Map());
    known.get(section)!.set(name, kind);
  }
  for (const section of Object.keys(obj)) {
    const names = known.get(section);
    if (!names) {
      errors.push({ field: section, message: "unknown config section" });
      continue;
    }
    const sectionObj = obj[section];
    if (typeof sectionObj !== "object" || sectionObj === null) {
      errors.push({ field: section, message: "section must be an object" });
      continue;
    }
    for (const name of Object.keys(sectionObj as object)) {
      if (!names.has(name)) {
        errors.push({ field: `${section}.${name}`, message: "unknown config key" });
      }
    }
  }
  for (const [section, name, kind] of KEYS) {
    const sectionObj = obj[section] as Record<string, unknown> | undefined;
    if (sectionObj === undefined || !(name in sectionObj)) {
      if (kind === "strlist" && sectionObj !== undefined) continue;
      errors.push({ field: `${section}.${name}`, message: "missing config key" });
      continue;
    }
    const problem = checkKind(sectionObj[name], kind);
    if (problem) errors.push({ field: `${section}.${name}`, message: problem });
  }
  return errors;
}

/** Domain checks, mirroring the server's field-level 422 rules. */
export function validateDomains(cfg: AnalysisConfigData): FieldError[] {
  const errors: FieldError[] = [];
  const bad = (field: string, message: string) => errors.push({ field, message });
  if (cfg.stopwords.ratio_threshold < 1.0) {
    bad("stopwords.ratio_threshold", "must be >= 1");
  }
  if (cfg.stopwords.min_count < 0) bad("stopwords.min_count", "must be >= 0");
  if (cfg.markers.similarity_threshold < 0 || cfg.markers.similarity_threshold > 1) {
    bad("markers.similarity_threshold", "must be in [0, 1]");
  }
  if (cfg.markers.min_tokens < 1) bad("markers.min_tokens", "must be >= 1");
  if (cfg.slices.buckets_per_sequence < 1) {
    bad("slices.buckets_per_sequence", "must be >= 1");
  }
  if (!TERM_MODES.includes(cfg.terms.mode)) {
    bad("terms.mode", `must be one of ${TERM_MODES.join(", ")}`);
  }
  if (cfg.terms.depth < 1) bad("terms.depth", "must be >= 1");
  if (cfg.terms.label_depth < 1 || cfg.terms.label_depth > cfg.terms.depth) {
    bad("terms.label_depth", "must be in [1, terms.depth]");
  }
  return errors;
}

export function validateConfig(data: unknown): FieldError[] {
  const shape = validateShape(data);
  if (shape.length) return shape;
  return validateDomains(data as AnalysisConfigData);
}

/** Serialize the draft as the shared config-file document the CLI loads:
 * {"analysis": {...}} with stable key order. */
export function configFileText(cfg: AnalysisConfigData): string {
  return JSON.stringify({ analysis: cfg }, null, 2) + "\n";
}

/** Parse an uploaded config file; throws with a pointed message on schema
 * violations (the offending key) or malformed JSON (the parser's position). */
export function parseConfigFile(text: string): AnalysisConfigData {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (exc) {
    throw new Error(`malformed config file: ${(exc as Error).message}`);
  }
  if (typeof doc !== "object" || doc === null || !("analysis" in doc)) {
    throw new Error("config file must carry an \"analysis\" section");
  }
  const analysis = (doc as Record<string, unknown>)["analysis"];
  const errors = validateConfig(analysis);
  if (errors.length) {
    const first = errors[0];
    throw new Error(`invalid config: ${first.field}: ${first.message}`);
  }
  return analysis as AnalysisConfigData;
}
