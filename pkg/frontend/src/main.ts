// Analyst explorer: upload a corpus, steer the analysis configuration, run,
// and explore the resulting belief map, convergence whiskers, and posts.
// All analytics live on the server; this page only submits configs and
// renders the responses.

import { ApiClient, ApiError, PostRow } from "./api.js";
import { renderConvergence } from "./render/convergence.js";
import { renderMap } from "./render/map.js";
import { renderPosts } from "./render/posts.js";
import { configFileText, parseConfigFile } from "./schema.js";
import { SessionState, View } from "./state.js";

// Field order of the editable scalar inputs; dotted key -> [section, name].
const SCALAR_FIELDS: Array<[string, string, string]> = [
  ["stopwords.ratio_threshold", "stopwords", "ratio_threshold"],
  ["stopwords.min_count", "stopwords", "min_count"],
  ["markers.similarity_threshold", "markers", "similarity_threshold"],
  ["markers.min_tokens", "markers", "min_tokens"],
  ["slices.buckets_per_sequence", "slices", "buckets_per_sequence"],
  ["terms.depth", "terms", "depth"],
  ["terms.label_depth", "terms", "label_depth"],
];

export function createApp(root: HTMLElement, api: ApiClient): SessionState {
  const state = new SessionState(api);
  root.innerHTML = `
    <header>
      <h1>beliefmap explorer</h1>
      <p id="corpus-info" data-testid="corpus-info">No corpus uploaded.</p>
      <input type="file" id="corpus-file" data-testid="corpus-file" />
    </header>
    <section id="config-panel">
      <h2>Analysis configuration</h2>
      <form id="config-form"></form>
      <label>stop words (extra, comma separated)
        <input id="extra-stopwords" data-testid="extra-stopwords" type="text" />
      </label>
      <label>groups to include (comma separated, empty = all)
        <input id="groups-include" data-testid="groups-include" type="text" />
      </label>
      <label>term mode
        <select id="terms-mode" data-testid="terms-mode">
          <option>bow</option><option>tfidf</option><option>centrality</option>
        </select>
      </label>
      <label><input type="checkbox" id="include-dm" data-testid="include-dm" />
        count dm posts</label>
      <div>
        <button id="run" data-testid="run-button" type="button">Run analysis</button>
        <button id="save-config" data-testid="save-config" type="button">Save config</button>
        <input type="file" id="load-config" data-testid="load-config" />
      </div>
      <p id="run-hash" data-testid="run-hash"></p>
      <p id="error-banner" data-testid="error-banner" role="alert"></p>
    </section>
    <nav>
      <button data-view="map" data-testid="tab-map" type="button">Map</button>
      <button data-view="convergence" data-testid="tab-convergence" type="button">Convergence</button>
      <button data-view="posts" data-testid="tab-posts" type="button">Posts</button>
    </nav>
    <main>
      <div id="view-map" data-testid="view-map"></div>
      <div id="view-convergence" data-testid="view-convergence" hidden></div>
      <div id="view-posts" data-testid="view-posts" hidden></div>
    </main>
  `;

  const byId = <T extends HTMLElement>(id: string) =>
    root.querySelector(`#${id}`) as T;
  const form = byId<HTMLFormElement>("config-form");
  const banner = byId<HTMLParagraphElement>("error-banner");
  const runHash = byId<HTMLParagraphElement>("run-hash");

  for (const [key] of SCALAR_FIELDS) {
    const label = document.createElement("label");
    label.textContent = key + " ";
    const input = document.createElement("input");
    input.type = "number";
    input.step = "any";
    input.dataset.field = key;
    input.setAttribute("data-testid", `field-${key}`);
    const fieldError = document.createElement("span");
    fieldError.setAttribute("data-testid", `field-error-${key}`);
    fieldError.className = "field-error";
    label.append(input, fieldError);
    form.append(label);
  }

  function drawDraft() {
    for (const [key, section, name] of SCALAR_FIELDS) {
      const input = form.querySelector(`[data-field="${key}"]`) as HTMLInputElement;
      input.value = String(
        (state.draft as any)[section][name]);
    }
    byId<HTMLInputElement>("extra-stopwords").value =
      state.draft.stopwords.extra.join(",");
    byId<HTMLInputElement>("groups-include").value =
      state.draft.groups.include.join(",");
    byId<HTMLSelectElement>("terms-mode").value = state.draft.terms.mode;
    byId<HTMLInputElement>("include-dm").checked = state.draft.counts.include_dm;
  }

  function readDraft() {
    for (const [key, section, name] of SCALAR_FIELDS) {
      const input = form.querySelector(`[data-field="${key}"]`) as HTMLInputElement;
      const value = Number(input.value);
      (state.draft as any)[section][name] =
        key.includes("threshold") ? value : Math.trunc(value);
    }
    const csv = (id: string) =>
      byId<HTMLInputElement>(id).value.split(",").map((s) => s.trim())
        .filter((s) => s.length > 0);
    state.draft.stopwords.extra = csv("extra-stopwords");
    state.draft.groups.include = csv("groups-include");
    state.draft.terms.mode = byId<HTMLSelectElement>("terms-mode").value;
    state.draft.counts.include_dm = byId<HTMLInputElement>("include-dm").checked;
  }

  function showFieldErrors(errors: Array<{ field: string; message: string }>) {
    for (const [key] of SCALAR_FIELDS) {
      const span = form.querySelector(
        `[data-testid="field-error-${key}"]`) as HTMLSpanElement;
      span.textContent = "";
    }
    for (const err of errors) {
      const span = form.querySelector(
        `[data-testid="field-error-${err.field}"]`) as HTMLSpanElement | null;
      if (span) span.textContent = err.message;
      else banner.textContent = `${err.field}: ${err.message}`;
    }
  }

  function setView(view: View) {
    state.view = view;
    for (const name of ["map", "convergence", "posts"] as View[]) {
      byId<HTMLDivElement>(`view-${name}`).hidden = name !== view;
    }
  }

  let containsFilter: string[] = [];
  let currentSequence = 0;
  let currentGroup: string | undefined;

  async function openPosts(sequence: number, group?: string) {
    if (!state.lastRunId) return;
    currentSequence = sequence;
    currentGroup = group;
    const rows: PostRow[] = await api.getSequencePosts(
      state.lastRunId, sequence, group, containsFilter);
    const filterText = containsFilter.length
      ? ` containing ${containsFilter.join(", ")}` : "";
    renderPosts(byId<HTMLDivElement>("view-posts"), rows,
                `Sequence ${sequence}${group ? `, ${group}` : ""}${filterText}`);
    setView("posts");
  }

  async function runAnalysis() {
    banner.textContent = "";
    readDraft();
    const errors = state.validateDraft();
    showFieldErrors(errors);
    if (errors.length) return;
    try {
      const outcome = await state.submit();
      if (outcome === null) return; // superseded by a newer submission
      if (outcome.run.status === "failed") {
        banner.textContent = `run failed: ${outcome.run.error ?? "unknown error"}`;
        return;
      }
      runHash.textContent = `run ${outcome.run.run_id}`;
      state.groups = outcome.run.groups ?? [];
      containsFilter = [];
      renderMap(byId<HTMLDivElement>("view-map"), outcome.map!, state.groups, {
        onPlaceClick: (sequence) => { void openPosts(sequence); },
        onTermClick: (sequence, group, term) => {
          if (!containsFilter.includes(term)) containsFilter.push(term);
          void openPosts(sequence, group);
        },
      });
      renderConvergence(byId<HTMLDivElement>("view-convergence"),
                        outcome.convergence);
      setView("map");
    } catch (exc) {
      if (exc instanceof ApiError) {
        const details = exc.body.details ?? [];
        const fieldErrors = details.filter(
          (d): d is { field: string; message: string } => typeof d !== "string");
        showFieldErrors(fieldErrors);
        banner.textContent = exc.body.message;
      } else {
        banner.textContent = (exc as Error).message;
      }
    }
  }

  byId<HTMLInputElement>("corpus-file").addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    banner.textContent = "";
    try {
      const upload = await api.uploadCorpus(await file.text());
      state.corpusId = upload.corpus_id;
      state.groups = upload.groups;
      byId<HTMLParagraphElement>("corpus-info").textContent =
        `corpus ${upload.corpus_id}: ${upload.counts.posts} posts, ` +
        `${upload.counts.groups} groups` +
        (upload.rejects.length ? `, ${upload.rejects.length} rejected lines` : "");
    } catch (exc) {
      banner.textContent = exc instanceof ApiError
        ? exc.body.message : (exc as Error).message;
    }
  });

  byId<HTMLButtonElement>("run").addEventListener("click", () => {
    void runAnalysis();
  });

  byId<HTMLButtonElement>("save-config").addEventListener("click", () => {
    readDraft();
    const blob = new Blob([configFileText(state.draft)],
                          { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "config.json";
    a.click();
    URL.revokeObjectURL(a.href);
  });

  byId<HTMLInputElement>("load-config").addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    banner.textContent = "";
    try {
      state.draft = parseConfigFile(await file.text());
      drawDraft();
    } catch (exc) {
      banner.textContent = (exc as Error).message;
    }
  });

  for (const button of root.querySelectorAll("nav button")) {
    button.addEventListener("click", () => {
      const view = (button as HTMLButtonElement).dataset.view as View;
      if (view === "posts") void openPosts(currentSequence, currentGroup);
      else setView(view);
    });
  }

  drawDraft();
  return state;
}

declare global {
  interface Window { BELIEFMAP_API_BASE?: string }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const base = window.BELIEFMAP_API_BASE ?? "";
  createApp(document.getElementById("app") as HTMLElement, new ApiClient(base));
}
