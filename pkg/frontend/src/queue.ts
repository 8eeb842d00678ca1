/** Cursor-paginated queue navigation with filter state.
 *
 * The pager remembers the cursor each loaded page started from, so previous
 * navigation and reloads re-issue the same request instead of restarting
 * from page one.
 */

import type { ReviewApiClient } from "./api.js";
import type { QueueFilters, QueuePage } from "./types.js";

export class QueuePager {
  readonly pageSize: number;
  private readonly api: ReviewApiClient;
  private filters: QueueFilters = {};
  /** history[i] is the cursor page i was requested with (undefined = first). */
  private history: (string | undefined)[] = [];
  private index = -1;
  page: QueuePage | null = null;

  constructor(api: ReviewApiClient, pageSize = 50) {
    this.api = api;
    this.pageSize = pageSize;
  }

  get pageIndex(): number {
    return this.index;
  }

  get currentFilters(): QueueFilters {
    return { ...this.filters };
  }

  get hasNext(): boolean {
    return this.page?.next_cursor != null;
  }

  get hasPrev(): boolean {
    return this.index > 0;
  }

  /** Changing filters restarts pagination; cursors are filter-specific. */
  async setFilters(filters: QueueFilters): Promise<QueuePage> {
    this.filters = { ...filters };
    this.history = [];
    this.index = -1;
    return this.loadFirst();
  }

  async loadFirst(): Promise<QueuePage> {
    this.history = [undefined];
    this.index = 0;
    return this.fetchCurrent();
  }

  async next(): Promise<QueuePage> {
    const cursor = this.page?.next_cursor;
    if (cursor == null) throw new Error("no next page");
    this.history = this.history.slice(0, this.index + 1);
    this.history.push(cursor);
    this.index += 1;
    return this.fetchCurrent();
  }

  async prev(): Promise<QueuePage> {
    if (!this.hasPrev) throw new Error("already on first page");
    this.index -= 1;
    return this.fetchCurrent();
  }

  /** Re-fetch the current page with its original cursor. */
  async reload(): Promise<QueuePage> {
    if (this.index < 0) return this.loadFirst();
    return this.fetchCurrent();
  }

  private async fetchCurrent(): Promise<QueuePage> {
    const cursor = this.history[this.index];
    this.page = await this.api.listCases(this.filters, cursor, this.pageSize);
    return this.page;
  }
}
