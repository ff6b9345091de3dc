// Session state and the single-flight analysis rule: a new submission
// supersedes any pending one, whose (still immutable, server-side) result is
// simply never rendered.

import { ApiClient, ConvergenceDoc, MapDoc, RunDescriptor } from "./api.js";
import { AnalysisConfigData, defaultConfig, validateConfig } from "./schema.js";

export type View = "map" | "convergence" | "posts";

export interface RunOutcome {
  run: RunDescriptor;
  map: MapDoc | null;
  convergence: ConvergenceDoc | null;
}

export class SessionState {
  corpusId: string | null = null;
  groups: string[] = [];
  draft: AnalysisConfigData = defaultConfig();
  lastRunId: string | null = null;
  view: View = "map";
  private generation = 0;

  constructor(public api: ApiClient) {}

  /** Client-side validation against the same key schema the server's 422
   * rules use; the draft must pass before a submission goes out. */
  validateDraft() {
    return validateConfig(this.draft);
  }

  /** Submit the draft. Returns null when a newer submission superseded this
   * one before its results arrived (the pending render is cancelled). */
  async submit(): Promise<RunOutcome | null> {
    if (!this.corpusId) throw new Error("no corpus selected");
    const errors = this.validateDraft();
    if (errors.length) {
      const first = errors[0];
      throw new Error(`invalid config: ${first.field}: ${first.message}`);
    }
    const ticket = ++this.generation;
    const run = await this.api.runAnalysis(this.corpusId, this.draft);
    if (ticket !== this.generation) return null;
    this.lastRunId = run.run_id;
    if (run.status === "failed") {
      return { run, map: null, convergence: null };
    }
    const [map, convergence] = await Promise.all([
      this.api.getMap(run.run_id),
      this.api.getConvergence(run.run_id),
    ]);
    if (ticket !== this.generation) return null;
    return { run, map, convergence };
  }
}
