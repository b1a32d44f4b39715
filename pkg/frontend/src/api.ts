/** Thin HTTP client for the service API. Fetch is injectable for tests. */

import type {
  ActionEnvelope,
  ErrorEnvelope,
  PageDoc,
  RefsDoc,
  SchemaDoc,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly code: string;
  readonly detail: unknown;

  constructor(code: string, message: string, detail?: unknown) {
    super(message);
    this.code = code;
    this.detail = detail;
  }
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base = "", fetchImpl: FetchLike = (u, i) => fetch(u, i)) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, init);
    const body = await resp.json();
    if (!resp.ok) {
      const env = body as ErrorEnvelope;
      if (env && env.error) {
        throw new ApiError(env.error.code, env.error.message, env.error.detail);
      }
      throw new ApiError("http_error", `request failed with status ${resp.status}`);
    }
    return body as T;
  }

  schema(): Promise<SchemaDoc> {
    return this.request<SchemaDoc>("/schema");
  }

  async createSession(): Promise<string> {
    const doc = await this.request<{ session: string }>("/sessions", { method: "POST" });
    return doc.session;
  }

  action(session: string, envelope: ActionEnvelope): Promise<PageDoc> {
    return this.request<PageDoc>(`/sessions/${session}/actions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(envelope),
    });
  }

  table(session: string, page = 1, size?: number): Promise<PageDoc> {
    const params = new URLSearchParams({ page: String(page) });
    if (size !== undefined) params.set("size", String(size));
    return this.request<PageDoc>(`/sessions/${session}/table?${params}`);
  }

  refs(
    session: string,
    row: string,
    column: string,
    page = 1,
    size = 50,
  ): Promise<RefsDoc> {
    const params = new URLSearchParams({
      row,
      column,
      page: String(page),
      size: String(size),
    });
    return this.request<RefsDoc>(`/sessions/${session}/refs?${params}`);
  }

  sql(session: string): Promise<string> {
    return this.request<{ sql: string }>(`/sessions/${session}/sql`).then((d) => d.sql);
  }
}
