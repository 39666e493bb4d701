import { ApiError, ReviewApi } from './api.js';
import type {
  Evaluation,
  ItemFilters,
  ItemView,
  ResolutionInfo,
  VoteDirection,
} from './types.js';

export interface Notice {
  kind: 'info' | 'warn' | 'error';
  text: string;
}

export interface PendingAction {
  kind: 'vote' | 'override';
  itemId: string;
  run: () => Promise<void>;
}

export interface ReviewState {
  items: ItemView[];
  total: number;
  page: number;
  selected: number;
  filters: ItemFilters;
  pending: Set<string>;
  notices: Notice[];
  resolution: ResolutionInfo | null;
  lastFailed: PendingAction | null;
}

type Listener = (state: ReviewState) => void;

/** Queue state for the review loop.
 *
 * Item state only ever changes from a server-acknowledged response: while a
 * write is in flight the item is marked pending, and on failure the pending
 * mark is dropped with a notice. Nothing is queued for auto-retry; a failed
 * write stays available for one explicit retry.
 */
export class ReviewStore {
  state: ReviewState = {
    items: [],
    total: 0,
    page: 1,
    selected: 0,
    filters: {},
    pending: new Set(),
    notices: [],
    resolution: null,
    lastFailed: null,
  };

  private listeners: Listener[] = [];

  constructor(private api: ReviewApi, public reviewerId: string) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit() {
    for (const listener of this.listeners) listener(this.state);
  }

  notify(kind: Notice['kind'], text: string) {
    this.state.notices = [...this.state.notices.slice(-4), { kind, text }];
    this.emit();
  }

  get selectedItem(): ItemView | null {
    return this.state.items[this.state.selected] ?? null;
  }

  async loadPage(page = 1, filters?: ItemFilters) {
    if (filters) this.state.filters = filters;
    const result = await this.api.listItems(this.state.filters, page);
    this.state.items = result.items;
    this.state.total = result.total;
    this.state.page = result.page;
    this.state.selected = Math.min(this.state.selected, Math.max(0, result.items.length - 1));
    this.emit();
  }

  select(index: number) {
    if (this.state.items.length === 0) return;
    this.state.selected = Math.max(0, Math.min(index, this.state.items.length - 1));
    this.emit();
  }

  moveNext() {
    this.select(this.state.selected + 1);
  }

  movePrev() {
    this.select(this.state.selected - 1);
  }

  /** Replace the local copy of an item with the server-acknowledged view. */
  private applyAck(item: ItemView) {
    this.state.items = this.state.items.map((i) =>
      i.id === item.id ? { ...i, ...item } : i,
    );
    this.emit();
  }

  private async performWrite(action: PendingAction) {
    this.state.pending = new Set(this.state.pending).add(action.itemId);
    this.state.lastFailed = null;
    this.emit();
    try {
      await action.run();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // duplicate vote: surfaced, never blocking, nothing retried
        this.notify('warn', `already voted: ${err.message}`);
      } else {
        this.state.lastFailed = action;
        const status = err instanceof ApiError ? err.status : 0;
        this.notify('error', `${action.kind} failed (${status || 'network'}); press r to retry`);
      }
    } finally {
      const pending = new Set(this.state.pending);
      pending.delete(action.itemId);
      this.state.pending = pending;
      this.emit();
    }
  }

  async vote(direction: VoteDirection, note?: string) {
    const item = this.selectedItem;
    if (!item) return;
    if (this.state.pending.has(item.id)) return; // one in-flight write per item
    await this.performWrite({
      kind: 'vote',
      itemId: item.id,
      run: async () => {
        const resp = await this.api.vote(item.id, this.reviewerId, direction, note);
        this.applyAck(resp.item);
        this.notify('info', `${direction === 'UP' ? 'up' : 'down'}-vote recorded on ${item.id}`);
      },
    });
  }

  async override(evaluation: Evaluation, surrogate?: string) {
    const item = this.selectedItem;
    if (!item) return;
    if (this.state.pending.has(item.id)) return;
    await this.performWrite({
      kind: 'override',
      itemId: item.id,
      run: async () => {
        const resp = await this.api.override(item.id, evaluation, surrogate);
        this.applyAck(resp.item);
        this.notify('info', `override recorded on ${item.id}`);
      },
    });
  }

  /** Explicit retry of the one most recent failed write; no queueing. */
  async retryLastFailed() {
    const action = this.state.lastFailed;
    if (!action) return;
    await this.performWrite(action);
  }

  async refreshResolution(iteration: number) {
    this.state.resolution = await this.api.resolution(iteration);
    this.emit();
  }
}
