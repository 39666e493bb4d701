import { readConfig, ReviewApi } from './api.js';
import { actionForKey, isEditableTarget } from './keyboard.js';
import { renderItemDetail, renderList, renderNotices, renderResolution } from './render.js';
import { ReviewStore } from './store.js';
import type { Evaluation, ItemFilters, ItemStatus } from './types.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function main() {
  const config = readConfig(document);
  const reviewer =
    window.localStorage.getItem('reviewer_id') ||
    window.prompt('reviewer id?', 'reviewer-1') ||
    'reviewer-1';
  window.localStorage.setItem('reviewer_id', reviewer);

  const api = new ReviewApi(config);
  const store = new ReviewStore(api, reviewer);

  const listNode = el<HTMLUListElement>('item-list');
  const detailNode = el<HTMLDivElement>('item-detail');
  const noticesNode = el<HTMLDivElement>('notices');
  const resolutionNode = el<HTMLDivElement>('resolution');
  const overrideForm = el<HTMLFormElement>('override-form');

  store.subscribe((state) => {
    listNode.innerHTML = renderList(state);
    const item = store.selectedItem;
    detailNode.innerHTML = renderItemDetail(item, item ? state.pending.has(item.id) : false);
    noticesNode.innerHTML = renderNotices(state.notices);
    resolutionNode.innerHTML = renderResolution(state.resolution);
  });

  listNode.addEventListener('click', (event) => {
    const row = (event.target as HTMLElement).closest('[data-item-id]');
    if (!row) return;
    const id = row.getAttribute('data-item-id');
    store.select(store.state.items.findIndex((i) => i.id === id));
  });

  document.addEventListener('keydown', (event) => {
    const action = actionForKey(event.key, isEditableTarget(event.target));
    if (action.kind === 'none') return;
    event.preventDefault();
    if (action.kind === 'next') store.moveNext();
    else if (action.kind === 'prev') store.movePrev();
    else if (action.kind === 'vote') void store.vote(action.direction);
    else if (action.kind === 'retry') void store.retryLastFailed();
    else if (action.kind === 'override') overrideForm.hidden = !overrideForm.hidden;
  });

  el<HTMLButtonElement>('vote-up').addEventListener('click', () => void store.vote('UP'));
  el<HTMLButtonElement>('vote-down').addEventListener('click', () => void store.vote('DOWN'));

  overrideForm.addEventListener('submit', (event) => {
    event.preventDefault();
    const evaluation = el<HTMLSelectElement>('override-eval').value as Evaluation;
    const surrogate = el<HTMLInputElement>('override-surrogate').value || undefined;
    void store.override(evaluation, surrogate).then(() => {
      overrideForm.hidden = true;
    });
  });

  el<HTMLFormElement>('filters').addEventListener('submit', (event) => {
    event.preventDefault();
    const filters: ItemFilters = {};
    const status = el<HTMLSelectElement>('filter-status').value;
    const type = el<HTMLInputElement>('filter-type').value.trim();
    const iteration = el<HTMLInputElement>('filter-iteration').value.trim();
    if (status) filters.status = status as ItemStatus;
    if (type) filters.type = type;
    if (iteration) filters.iteration = Number(iteration);
    void store.loadPage(1, filters).catch((err) => store.notify('error', String(err)));
  });

  el<HTMLButtonElement>('resolution-refresh').addEventListener('click', () => {
    const k = Number(el<HTMLInputElement>('resolution-iteration').value || '2');
    void store.refreshResolution(k).catch((err) => store.notify('error', String(err)));
  });

  void store.loadPage(1).catch((err) => store.notify('error', String(err)));
}

document.addEventListener('DOMContentLoaded', main);
