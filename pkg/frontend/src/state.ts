/** View state and the action loop: at most one request in flight at a time. */

import { ApiClient, ApiError } from "./api.js";
import { envelopeFor, type Gesture } from "./dispatch.js";
import type { PageDoc, SchemaDoc } from "./types.js";

export interface ViewState {
  schema: SchemaDoc | null;
  session: string | null;
  page: PageDoc | null;
  error: string | null;
  busy: boolean;
}

export type Listener = (state: ViewState) => void;

export class AppState {
  private readonly api: ApiClient;
  private readonly listeners: Listener[] = [];
  readonly state: ViewState = {
    schema: null,
    session: null,
    page: null,
    error: null,
    busy: false,
  };

  constructor(api: ApiClient) {
    this.api = api;
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  async boot(): Promise<void> {
    this.state.schema = await this.api.schema();
    this.state.session = await this.api.createSession();
    this.notify();
  }

  /** Apply one gesture. Errors keep the previous page and surface a banner. */
  async dispatch(gesture: Gesture): Promise<void> {
    if (this.state.busy || this.state.session === null) return;
    this.state.busy = true;
    this.state.error = null;
    this.notify();
    try {
      this.state.page = await this.api.action(this.state.session, envelopeFor(gesture));
    } catch (err) {
      this.state.error =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    } finally {
      this.state.busy = false;
      this.notify();
    }
  }
}
