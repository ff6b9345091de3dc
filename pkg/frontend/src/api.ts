// Thin typed client over the documented server endpoints. Every byte shown
// in the UI comes through here; the request log lets tests assert that no
// number is computed client-side.

import type { AnalysisConfigData } from "./schema.js";

export interface CorpusUpload {
  corpus_id: string;
  groups: string[];
  counts: { groups: number; posts: number };
  rejects: Array<{ line: number; reason: string }>;
}

export interface RunDescriptor {
  run_id: string;
  corpus_id: string;
  status: "done" | "failed";
  place_labels?: string[];
  sequence_count?: number;
  groups?: string[];
  diagnostics?: string[];
  error?: string;
}

export interface TermListDoc {
  scope: string;
  mode: string;
  depth: number;
  entries: Array<[string, number]>;
}

export interface MapDoc {
  format: string;
  places: Array<{ sequence: number; label: string; terms: TermListDoc }>;
  spaces: Array<{ sequence: number; group: string; terms: TermListDoc }>;
  snippets: Array<{
    sequence: number; group: string; author: string; text: string;
    truncated: boolean; post_id: string;
  }>;
}

export interface KStatsDoc {
  k: number;
  pairs: number;
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
}

export interface ConvergenceDoc {
  mode: string;
  label_depth: number;
  per_k: KStatsDoc[];
}

export interface PostRow {
  post_id: string;
  group_id: string;
  player_id: string;
  role: string;
  timestamp: string;
  text: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details: Array<{ field: string; message: string } | string>;
}

export class ApiError extends Error {
  constructor(public status: number, public body: ApiErrorBody) {
    super(body.message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  readonly log: Array<{ method: string; url: string }> = [];

  constructor(private baseUrl: string, private fetchImpl: FetchLike = fetch) {}

  private async request(method: string, path: string, body?: BodyInit,
                        contentType?: string): Promise<unknown> {
    const url = this.baseUrl + path;
    this.log.push({ method, url });
    const headers: Record<string, string> = {};
    if (contentType) headers["Content-Type"] = contentType;
    const resp = await this.fetchImpl(url, { method, body, headers });
    const text = await resp.text();
    const data = text ? JSON.parse(text) : null;
    if (!resp.ok) {
      throw new ApiError(resp.status, data as ApiErrorBody);
    }
    return data;
  }

  async uploadCorpus(fileText: string): Promise<CorpusUpload> {
    return (await this.request("POST", "/corpora", fileText,
                               "application/octet-stream")) as CorpusUpload;
  }

  async runAnalysis(corpusId: string,
                    config: AnalysisConfigData): Promise<RunDescriptor> {
    return (await this.request(
      "POST", `/corpora/${corpusId}/analyses`,
      JSON.stringify(config), "application/json")) as RunDescriptor;
  }

  async getMap(runId: string): Promise<MapDoc> {
    return (await this.request(
      "GET", `/analyses/${runId}/map?format=structured`)) as MapDoc;
  }

  async getConvergence(runId: string): Promise<ConvergenceDoc | null> {
    const body = (await this.request(
      "GET", `/analyses/${runId}/convergence`)) as { convergence: ConvergenceDoc | null };
    return body.convergence;
  }

  async getSequencePosts(runId: string, sequence: number, group?: string,
                         contains?: string[]): Promise<PostRow[]> {
    const params = new URLSearchParams();
    if (group) params.set("group", group);
    if (contains && contains.length) params.set("contains", contains.join(","));
    const query = params.toString();
    const path = `/analyses/${runId}/sequences/${sequence}/posts`
      + (query ? `?${query}` : "");
    return (await this.request("GET", path)) as PostRow[];
  }
}
