import { describe, expect, it } from 'vitest';

import { actionForKey } from '../src/keyboard.js';
import {
  escapeHtml,
  highlightText,
  renderItemDetail,
  renderItemRow,
  renderResolution,
} from '../src/render.js';
import type { ItemView } from '../src/types.js';

const ITEM: ItemView = {
  id: 'sg000:1:2',
  session_id: 'sg000',
  message_index: 1,
  pii_type: 'US_DRIVER_LICENSE',
  evaluation: 'NOT_PII',
  surrogate: '3',
  iteration: 1,
  status: 'PENDING',
  ai_redacted_content: null,
  start: 24,
  end: 43,
  original_text: '<US_DRIVER_LICENSE>',
  flags: [],
  votes: [{ reviewer_id: 'alice', direction: 'DOWN', timestamp: 1, note: null }],
  context: [
    { index: 0, role: 'Volunteer', text: "so let's break this down" },
    { index: 1, role: 'Volunteer', text: '<US_DRIVER_LICENSE> and <US_DRIVER_LICENSE> are the numbers of our coordinate' },
    { index: 2, role: 'Volunteer', text: 'or in this case our point which is (1,3)' },
  ],
  highlight: { start: 24, end: 43 },
};

describe('render', () => {
  it('escapes markup in message text', () => {
    expect(escapeHtml('<PERSON> & "x"')).toBe('&lt;PERSON&gt; &amp; &quot;x&quot;');
  });

  it('highlights the audited span', () => {
    const html = highlightText('ab <X> cd', { start: 3, end: 6 });
    expect(html).toBe('ab <mark>&lt;X&gt;</mark> cd');
  });

  it('ignores out-of-range highlights', () => {
    expect(highlightText('ab', { start: 0, end: 99 })).toBe('ab');
  });

  it('renders rows with vote badges and selection', () => {
    const html = renderItemRow(ITEM, true, false);
    expect(html).toContain('selected');
    expect(html).toContain('US_DRIVER_LICENSE');
    expect(html).toContain('▼ alice');
  });

  it('renders the detail view with the full context window', () => {
    const html = renderItemDetail(ITEM, false);
    expect(html).toContain('sg000:1:2');
    expect((html.match(/class="msg/g) ?? []).length).toBe(3);
    expect(html).toContain('<mark>');
    expect(html).toContain('break this down');
  });

  it('renders the stopping-rule banner at >= 95%', () => {
    const met = renderResolution({
      iteration: 2, rate: 0.95, stop: true, resolved: 19, previously_downvoted: 20,
    });
    expect(met).toContain('stopping rule met (≥ 95%)');
    expect(met).toContain('19/20');
    const notMet = renderResolution({
      iteration: 2, rate: 0.9, stop: false, resolved: 18, previously_downvoted: 20,
    });
    expect(notMet).toContain('below 95%');
  });
});

describe('keyboard map', () => {
  it('covers the whole vote loop', () => {
    expect(actionForKey('j', false)).toEqual({ kind: 'next' });
    expect(actionForKey('k', false)).toEqual({ kind: 'prev' });
    expect(actionForKey('ArrowDown', false)).toEqual({ kind: 'next' });
    expect(actionForKey('u', false)).toEqual({ kind: 'vote', direction: 'UP' });
    expect(actionForKey('d', false)).toEqual({ kind: 'vote', direction: 'DOWN' });
    expect(actionForKey('o', false)).toEqual({ kind: 'override' });
    expect(actionForKey('r', false)).toEqual({ kind: 'retry' });
  });

  it('stays inert while typing in a field', () => {
    expect(actionForKey('j', true)).toEqual({ kind: 'none' });
    expect(actionForKey('d', true)).toEqual({ kind: 'none' });
  });
});
