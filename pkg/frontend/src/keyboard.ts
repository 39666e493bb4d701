/** Keyboard bindings for the vote loop.
 *
 * The whole review cycle works without a pointer: j/k (or arrows) move
 * through the queue, u/d cast votes, o opens the override form, r retries
 * the last failed write.
 */

export type KeyAction =
  | { kind: 'next' }
  | { kind: 'prev' }
  | { kind: 'vote'; direction: 'UP' | 'DOWN' }
  | { kind: 'override' }
  | { kind: 'retry' }
  | { kind: 'none' };

export function actionForKey(key: string, inEditable: boolean): KeyAction {
  if (inEditable) return { kind: 'none' };
  switch (key) {
    case 'j':
    case 'ArrowDown':
      return { kind: 'next' };
    case 'k':
    case 'ArrowUp':
      return { kind: 'prev' };
    case 'u':
      return { kind: 'vote', direction: 'UP' };
    case 'd':
      return { kind: 'vote', direction: 'DOWN' };
    case 'o':
      return { kind: 'override' };
    case 'r':
      return { kind: 'retry' };
    default:
      return { kind: 'none' };
  }
}

export function isEditableTarget(target: EventTarget | null): boolean {
  if (!(target instanceof HTMLElement)) return false;
  return (
    target.tagName === 'INPUT' ||
    target.tagName === 'TEXTAREA' ||
    target.tagName === 'SELECT' ||
    target.isContentEditable
  );
}
