import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { SessionState } from "../src/state.js";
import { makeFetch, newServedState } from "./mockserver.js";

function makeState() {
  const served = newServedState();
  const api = new ApiClient("", makeFetch(served));
  const state = new SessionState(api);
  state.corpusId = served.corpusId;
  return { state, served };
}

describe("session state", () => {
  it("submits and resolves a full outcome", async () => {
    const { state } = makeState();
    const outcome = await state.submit();
    expect(outcome).not.toBeNull();
    expect(outcome!.run.status).toBe("done");
    expect(outcome!.map!.places).toHaveLength(4);
    expect(outcome!.convergence!.per_k).toHaveLength(1);
    expect(state.lastRunId).toBe(outcome!.run.run_id);
  });

  it("requires a corpus", async () => {
    const { state } = makeState();
    state.corpusId = null;
    await expect(state.submit()).rejects.toThrow(/no corpus/);
  });

  it("refuses an invalid draft before any request", async () => {
    const { state, served } = makeState();
    state.draft.markers.similarity_threshold = 1.5;
    await expect(state.submit()).rejects.toThrow(
      /markers\.similarity_threshold/);
    expect(served.requests).toHaveLength(0);
  });

  it("cancels the pending render when a newer submission lands", async () => {
    const served = newServedState();
    const inner = makeFetch(served);
    let stall: (() => void) | null = null;
    // Stall the FIRST analysis response until after the second completes.
    const gated: typeof inner = async (url, init) => {
      const resp = await inner(url, init);
      if (init?.method === "POST" && url.includes("/analyses") && stall === null) {
        await new Promise<void>((resolve) => { stall = resolve; });
      }
      return resp;
    };
    const api = new ApiClient("", gated);
    const state = new SessionState(api);
    state.corpusId = served.corpusId;

    const first = state.submit();          // will stall inside fetch
    state.draft.terms.depth = 10;          // different config -> different run
    const second = state.submit();         // supersedes the first
    const secondOutcome = await second;
    expect(secondOutcome).not.toBeNull();

    (stall as unknown as () => void)();    // release the first submission
    const firstOutcome = await first;
    expect(firstOutcome).toBeNull();       // superseded: nothing to render
    expect(state.lastRunId).toBe(secondOutcome!.run.run_id);
  });

  it("identical drafts map to the identical run id", async () => {
    const { state } = makeState();
    const a = await state.submit();
    const b = await state.submit();
    expect(a!.run.run_id).toBe(b!.run.run_id);
  });

  it("different drafts map to different run ids", async () => {
    const { state } = makeState();
    const a = await state.submit();
    state.draft.terms.depth = 5;
    const b = await state.submit();
    expect(a!.run.run_id).not.toBe(b!.run.run_id);
  });
});
