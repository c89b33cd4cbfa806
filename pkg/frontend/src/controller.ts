/** Event-to-request wiring: debounced queries, stale-response
 * discards, and via-path clicks.
 *
 * At most one query is applied per burst of slider changes: each
 * change restarts a 300 ms timer, and only the newest sequence number
 * may update the view. The fetch function is injected so tests can
 * run against recorded responses.
 */

import {
  ViewState,
  initialState,
  nodeClicked,
  queryFailed,
  queryRequested,
  queryResolved,
  requestBody,
  sliderChanged,
  Sliders,
  viaResolved,
} from "./state.js";
import { QueryDoc } from "./types.js";

export interface HttpResponse {
  status: number;
  json(): Promise<unknown>;
}

export type FetchFn = (url: string, init: {
  method: string;
  headers: Record<string, string>;
  body: string;
}) => Promise<HttpResponse>;

export const DEBOUNCE_MS = 300;

async function errorMessage(response: HttpResponse): Promise<string> {
  try {
    const body = (await response.json()) as {
      message?: string;
      error?: string;
    };
    return body.message ?? body.error ?? `request failed (${response.status})`;
  } catch {
    return `request failed (${response.status})`;
  }
}

export class Controller {
  state: ViewState;
  private fetchFn: FetchFn;
  private debounceMs: number;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private seq = 0;
  private listeners: Array<(state: ViewState) => void> = [];

  constructor(fetchFn: FetchFn, debounceMs: number = DEBOUNCE_MS) {
    this.fetchFn = fetchFn;
    this.debounceMs = debounceMs;
    this.state = initialState();
  }

  onChange(listener: (state: ViewState) => void): void {
    this.listeners.push(listener);
  }

  private setState(next: ViewState): void {
    if (next === this.state) return;
    this.state = next;
    for (const listener of this.listeners) {
      listener(next);
    }
  }

  setEndpoints(sourceCode: string, targetCode: string): void {
    this.setState({ ...this.state, sourceCode, targetCode });
  }

  /** Slider moved: update state now, query after the debounce gap. */
  onSliderInput(name: keyof Sliders, value: number): void {
    this.setState(sliderChanged(this.state, name, value));
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.issueQuery();
    }, this.debounceMs);
  }

  /** Fire the query immediately (initial load, explicit run button). */
  async runQuery(): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    await this.issueQuery();
  }

  private async issueQuery(): Promise<void> {
    const seq = ++this.seq;
    this.setState(queryRequested(this.state, seq));
    const body = JSON.stringify(requestBody(this.state));
    try {
      const response = await this.fetchFn("/query", {
        method: "POST",
        headers: { "content-type": "application/json" },
        body,
      });
      if (response.status !== 200) {
        this.setState(
          queryFailed(this.state, seq, await errorMessage(response)),
        );
        return;
      }
      const doc = (await response.json()) as QueryDoc;
      this.setState(queryResolved(this.state, seq, doc));
    } catch (err) {
      this.setState(queryFailed(this.state, seq, String(err)));
    }
  }

  /** Node click: select it and reroute the path through it. */
  async onNodeClick(nodeId: string): Promise<void> {
    const before = this.state;
    this.setState(nodeClicked(this.state, nodeId));
    if (this.state === before) {
      return; // no result yet, endpoint click, or unknown node
    }
    const body = JSON.stringify({
      ...requestBody(this.state),
      via_node_id: nodeId,
    });
    try {
      const response = await this.fetchFn("/via", {
        method: "POST",
        headers: { "content-type": "application/json" },
        body,
      });
      if (response.status !== 200) {
        this.setState(
          queryFailed(this.state, this.state.requestSeq,
            await errorMessage(response)),
        );
        return;
      }
      const doc = (await response.json()) as QueryDoc;
      this.setState(viaResolved(this.state, doc));
    } catch (err) {
      this.setState(
        queryFailed(this.state, this.state.requestSeq, String(err)),
      );
    }
  }
}
