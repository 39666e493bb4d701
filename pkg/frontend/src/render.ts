/** Pure HTML renderers; main.ts owns the actual DOM. */

import type { ItemView, ResolutionInfo } from './types.js';
import type { Notice, ReviewState } from './store.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

/** Highlight the audited span inside its message text. */
export function highlightText(text: string, span: { start: number; end: number } | null): string {
  if (!span || span.start == null || span.end == null || span.start < 0 || span.end > text.length) {
    return escapeHtml(text);
  }
  return (
    escapeHtml(text.slice(0, span.start)) +
    `<mark>${escapeHtml(text.slice(span.start, span.end))}</mark>` +
    escapeHtml(text.slice(span.end))
  );
}

function voteBadges(item: ItemView): string {
  return item.votes
    .map(
      (v) =>
        `<span class="vote vote-${v.direction.toLowerCase()}" title="${escapeHtml(v.reviewer_id)}">` +
        `${v.direction === 'UP' ? '▲' : '▼'} ${escapeHtml(v.reviewer_id)}</span>`,
    )
    .join(' ');
}

export function renderItemRow(item: ItemView, selected: boolean, pending: boolean): string {
  const classes = ['item-row'];
  if (selected) classes.push('selected');
  if (pending) classes.push('pending');
  const discovered = item.ai_redacted_content ? ' <span class="tag">new</span>' : '';
  return (
    `<li class="${classes.join(' ')}" data-item-id="${escapeHtml(item.id)}">` +
    `<span class="item-id">${escapeHtml(item.id)}</span>` +
    `<span class="item-type">${escapeHtml(item.pii_type)}</span>` +
    `<span class="item-eval eval-${item.evaluation.toLowerCase()}">${item.evaluation}</span>` +
    `<span class="item-status">${item.status}</span>${discovered} ${voteBadges(item)}</li>`
  );
}

export function renderItemDetail(item: ItemView | null, pending: boolean): string {
  if (!item) return '<p class="empty">no items match the current filter</p>';
  const context = (item.context ?? [])
    .map((m) => {
      const isTarget = m.index === item.message_index;
      const body = isTarget
        ? highlightText(m.text, item.highlight ?? null)
        : escapeHtml(m.text);
      return (
        `<div class="msg${isTarget ? ' target' : ''}">` +
        `<span class="role">[${m.index}] ${escapeHtml(m.role)}</span> ${body}</div>`
      );
    })
    .join('');
  const surrogate = item.surrogate ? escapeHtml(item.surrogate) : '<em>none</em>';
  const flags = item.flags.length
    ? `<p class="flags">flags: ${item.flags.map(escapeHtml).join(', ')}</p>`
    : '';
  const spellingHint =
    item.evaluation !== 'NOT_PII'
      ? '<p class="hint">surrogate checklist: realistic for the type, consistent within ' +
        'the transcript, never reused across transcripts, spelled well away from any original</p>'
      : '';
  return (
    `<h2>${escapeHtml(item.id)} ${pending ? '<span class="pending-tag">saving…</span>' : ''}</h2>` +
    `<dl><dt>type</dt><dd>${escapeHtml(item.pii_type)}</dd>` +
    `<dt>evaluation</dt><dd>${item.evaluation}</dd>` +
    `<dt>surrogate</dt><dd>${surrogate}</dd>` +
    `<dt>status</dt><dd>${item.status}</dd>` +
    `<dt>iteration</dt><dd>${item.iteration}</dd></dl>` +
    flags +
    `<div class="context">${context}</div>` +
    spellingHint
  );
}

export function renderResolution(info: ResolutionInfo | null): string {
  if (!info) return '';
  const pct = (info.rate * 100).toFixed(1);
  const banner = info.stop
    ? '<span class="stop-banner">stopping rule met (≥ 95%)</span>'
    : '<span class="continue-banner">below 95%: revise the prompt and rerun</span>';
  return (
    `iteration ${info.iteration}: ${info.resolved}/${info.previously_downvoted} ` +
    `resolved (${pct}%) ${banner}`
  );
}

export function renderNotices(notices: Notice[]): string {
  return notices
    .map((n) => `<div class="notice notice-${n.kind}">${escapeHtml(n.text)}</div>`)
    .join('');
}

export function renderList(state: ReviewState): string {
  return state.items
    .map((item, i) =>
      renderItemRow(item, i === state.selected, state.pending.has(item.id)),
    )
    .join('');
}
