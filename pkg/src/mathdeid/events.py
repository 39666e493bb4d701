"""Append-only event log backing the annotation review workflow.

Review state is never edited in place: the audit pass produces a base item
store, and every vote or override lands as one JSONL event. Current state is
the base items with the log replayed over them, which gives the workflow a
complete audit trail for free.
"""

from __future__ import annotations

import json
import os
import threading
import time
from pathlib import Path

from .surrogation import (
    STATUS_OVERRIDDEN,
    AnnotationItem,
    DuplicateVoteError,
    parse_evaluation,
)

EVENT_VOTE = "vote"
EVENT_OVERRIDE = "override"


class EventLog:
    """Single-appender JSONL log; appends are flushed and fsynced before return."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._seq = sum(1 for _ in self.read_all())

    def read_all(self) -> list[dict]:
        if not self.path.exists():
            return []
        events = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    events.append(json.loads(line))
        return events

    def append(self, kind: str, item_id: str, payload: dict) -> dict:
        with self._lock:
            self._seq += 1
            event = {
                "seq": self._seq,
                "kind": kind,
                "item_id": item_id,
                "timestamp": time.time(),
                "payload": payload,
            }
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, ensure_ascii=False))
                fh.write("\n")
                fh.flush()
                os.fsync(fh.fileno())
        return event


def apply_event(item: AnnotationItem, event: dict) -> None:
    """Apply one event to its target item instance."""
    payload = event.get("payload", {})
    if event["kind"] == EVENT_VOTE:
        try:
            item.record_vote(
                payload["reviewer_id"],
                payload["direction"],
                payload.get("note"),
                timestamp=event.get("timestamp"),
            )
        except DuplicateVoteError:
            pass  # replay is idempotent against historical duplicates
    elif event["kind"] == EVENT_OVERRIDE:
        evaluation, _ = parse_evaluation(payload["evaluation"])
        item.evaluation = evaluation
        if payload.get("surrogate") is not None:
            item.surrogate = payload["surrogate"]
        item.status = STATUS_OVERRIDDEN


def replay(items: list[AnnotationItem], events: list[dict]) -> list[AnnotationItem]:
    """Fold a sorted event stream over base items; returns the same list.

    Events recorded with an iteration land on that exact (id, iteration)
    instance; older events without one fall back to the item's latest
    instance. That keeps historical votes attached to the iteration they
    judged when reissued items share an id.
    """
    by_instance: dict[tuple[str, int], AnnotationItem] = {}
    latest: dict[str, AnnotationItem] = {}
    for item in items:
        by_instance[(item.id, item.iteration)] = item
        cur = latest.get(item.id)
        if cur is None or item.iteration > cur.iteration:
            latest[item.id] = item
    for event in sorted(events, key=lambda e: e.get("seq", 0)):
        iteration = event.get("payload", {}).get("iteration")
        target = None
        if iteration is not None:
            target = by_instance.get((event["item_id"], iteration))
        if target is None:
            target = latest.get(event["item_id"])
        if target is not None:
            apply_event(target, event)
    return items


def load_review_state(store_path: str | Path, events_path: str | Path | None = None) -> list[AnnotationItem]:
    from .surrogation import load_items

    items = load_items(store_path)
    if events_path is not None and Path(events_path).exists():
        log = EventLog(events_path)
        replay(items, log.read_all())
    return items
