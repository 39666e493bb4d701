export type Evaluation = 'PII' | 'NOT_PII' | 'UNCERTAIN';
export type ItemStatus = 'PENDING' | 'APPROVED' | 'REJECTED' | 'OVERRIDDEN';
export type VoteDirection = 'UP' | 'DOWN';

export interface Vote {
  reviewer_id: string;
  direction: VoteDirection;
  timestamp: number;
  note: string | null;
}

export interface ContextMessage {
  index: number;
  role: string;
  text: string;
}

export interface ItemView {
  id: string;
  session_id: string;
  message_index: number;
  pii_type: string;
  evaluation: Evaluation;
  surrogate: string | null;
  iteration: number;
  status: ItemStatus;
  ai_redacted_content: string | null;
  start: number | null;
  end: number | null;
  original_text: string | null;
  flags: string[];
  votes: Vote[];
  context?: ContextMessage[];
  highlight?: { start: number; end: number } | null;
}

export interface ItemPage {
  items: ItemView[];
  total: number;
  page: number;
  page_size: number;
}

export interface ResolutionInfo {
  iteration: number;
  rate: number;
  stop: boolean;
  resolved: number;
  previously_downvoted: number;
}

export interface StatsInfo {
  items: number;
  verdicts: Record<Evaluation, number>;
  not_pii_share: number;
  by_type: Record<string, Record<Evaluation, number>>;
}

export interface ItemFilters {
  status?: ItemStatus;
  iteration?: number;
  type?: string;
}

/** Injected by the host page as a JSON blob with id "review-config". */
export interface ReviewConfig {
  apiBase: string;
  token?: string;
}
