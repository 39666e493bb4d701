import type {
  Evaluation,
  ItemFilters,
  ItemPage,
  ItemView,
  ResolutionInfo,
  ReviewConfig,
  StatsInfo,
  VoteDirection,
} from './types.js';

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/** Typed client for the review service; every write resolves only after the
 * server has acknowledged (and therefore durably logged) the event. */
export class ReviewApi {
  constructor(private config: ReviewConfig, private fetchFn: typeof fetch = fetch) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (this.config.token) headers['X-Auth-Token'] = this.config.token;
    let resp: Response;
    try {
      resp = await this.fetchFn(this.config.apiBase + path, { ...init, headers });
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === 'string') detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  listItems(filters: ItemFilters = {}, page = 1, pageSize = 50): Promise<ItemPage> {
    const params = new URLSearchParams();
    if (filters.status) params.set('status', filters.status);
    if (filters.iteration !== undefined) params.set('iteration', String(filters.iteration));
    if (filters.type) params.set('type', filters.type);
    params.set('page', String(page));
    params.set('page_size', String(pageSize));
    return this.request<ItemPage>(`/api/items?${params.toString()}`);
  }

  getItem(id: string): Promise<ItemView> {
    return this.request<ItemView>(`/api/items/${encodeURIComponent(id)}`);
  }

  vote(id: string, reviewerId: string, direction: VoteDirection, note?: string) {
    return this.request<{ ok: boolean; item: ItemView }>(
      `/api/items/${encodeURIComponent(id)}/vote`,
      {
        method: 'POST',
        body: JSON.stringify({ reviewer_id: reviewerId, direction, note: note ?? null }),
      },
    );
  }

  override(id: string, evaluation: Evaluation, surrogate?: string) {
    return this.request<{ ok: boolean; item: ItemView }>(
      `/api/items/${encodeURIComponent(id)}/override`,
      {
        method: 'POST',
        body: JSON.stringify({ evaluation, surrogate: surrogate ?? null }),
      },
    );
  }

  resolution(iteration: number): Promise<ResolutionInfo> {
    return this.request<ResolutionInfo>(`/api/iterations/${iteration}/resolution`);
  }

  stats(): Promise<StatsInfo> {
    return this.request<StatsInfo>('/api/stats');
  }
}

export function readConfig(doc: Document): ReviewConfig {
  const blob = doc.getElementById('review-config');
  if (blob && blob.textContent) {
    try {
      return JSON.parse(blob.textContent) as ReviewConfig;
    } catch {
      // fall through to the default
    }
  }
  return { apiBase: '' };
}
