import { describe, expect, it } from "vitest";

import {
  configFileText, defaultConfig, parseConfigFile, validateConfig,
} from "../src/schema.js";

describe("config validation (server 422 parity)", () => {
  it("accepts the default config", () => {
    expect(validateConfig(defaultConfig())).toEqual([]);
  });

  it("names a missing dotted key", () => {
    const cfg = defaultConfig() as any;
    delete cfg.terms.depth;
    const errors = validateConfig(cfg);
    expect(errors).toEqual([
      { field: "terms.depth", message: "missing config key" },
    ]);
  });

  it("rejects unknown keys and sections", () => {
    const cfg = defaultConfig() as any;
    cfg.terms.fancy = 1;
    expect(validateConfig(cfg)).toContainEqual(
      { field: "terms.fancy", message: "unknown config key" });
    const cfg2 = defaultConfig() as any;
    cfg2.embeddings = {};
    expect(validateConfig(cfg2)).toContainEqual(
      { field: "embeddings", message: "unknown config section" });
  });

  it("flags similarity threshold above one on the field", () => {
    const cfg = defaultConfig();
    cfg.markers.similarity_threshold = 1.01;
    expect(validateConfig(cfg)).toEqual([
      { field: "markers.similarity_threshold", message: "must be in [0, 1]" },
    ]);
  });

  it("flags label depth beyond depth", () => {
    const cfg = defaultConfig();
    cfg.terms.label_depth = 25;
    const errors = validateConfig(cfg);
    expect(errors[0].field).toBe("terms.label_depth");
  });

  it("checks value kinds", () => {
    const cfg = defaultConfig() as any;
    cfg.counts.include_dm = "yes";
    expect(validateConfig(cfg)).toEqual([
      { field: "counts.include_dm", message: "expected true or false" },
    ]);
    const cfg2 = defaultConfig() as any;
    cfg2.terms.depth = 2.5;
    expect(validateConfig(cfg2)[0].field).toBe("terms.depth");
  });

  it("allows omitted list keys when the section exists", () => {
    const cfg = defaultConfig() as any;
    delete cfg.stopwords.extra;
    expect(validateConfig(cfg)).toEqual([]);
  });
});

describe("config file io", () => {
  it("round-trips through the shared file document", () => {
    const cfg = defaultConfig();
    cfg.stopwords.extra = ["d20"];
    cfg.terms.depth = 10;
    expect(parseConfigFile(configFileText(cfg))).toEqual(cfg);
  });

  it("rejects malformed json with the parser message", () => {
    expect(() => parseConfigFile("{not json")).toThrow(/malformed config file/);
  });

  it("rejects schema violations naming the key", () => {
    const cfg = defaultConfig() as any;
    delete cfg.markers.min_tokens;
    const text = JSON.stringify({ analysis: cfg });
    expect(() => parseConfigFile(text)).toThrow(/markers\.min_tokens/);
  });

  it("requires the analysis section", () => {
    expect(() => parseConfigFile("{}")).toThrow(/analysis/);
  });
});
