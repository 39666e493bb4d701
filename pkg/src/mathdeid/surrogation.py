"""Human-in-the-loop audit and surrogate substitution workflow.

An LLM pass audits every upstream redaction (and hunts for missed PII),
producing one annotation item per judgment. Humans up/down-vote items;
iterations repeat until at least 95% of previously down-voted items are
resolved. Approved items are then applied in a single transaction: validated
PII gets a consistent, never-reused surrogate; mistaken redactions get
context-fitting replacement text and lose their label.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Message, PiiSpan, PiiType, Provenance, Transcript
from .llm.client import GatewayRequest, GatewayRetryError, ResponseLog

EVAL_PII = "PII"
EVAL_NOT_PII = "NOT_PII"
EVAL_UNCERTAIN = "UNCERTAIN"

STATUS_PENDING = "PENDING"
STATUS_APPROVED = "APPROVED"
STATUS_REJECTED = "REJECTED"
STATUS_OVERRIDDEN = "OVERRIDDEN"

VOTE_UP = "UP"
VOTE_DOWN = "DOWN"

RESOLUTION_STOP_RATE = 0.95

AUDIT_PROMPT = """Role: You are a Senior PII (Personally Identifiable Information) Analyst and Data Sanitization Expert specializing in math tutoring transcripts.

Objective: Analyze transcripts to identify unredacted PII, validate existing redactions, and generate high-quality, context-aware "surrogates" (replacement data) to maintain the natural flow of the conversation. Note: a lot of existing redactions are not accurate. They often confuse the math content with PII. Be careful when evaluating them and generating surrogate.

PII Taxonomy (17 Types):

AGE

COURSE: must be a subject or its acronym with a multi-digit number, e.g., algebra 300, geometry 101, CS 503; only a subject name without a course number, e.g., calculus, precal one, geomtry 2 is NOT a COURSE

DATE

EMAIL_ADDRESS

GRADE_LEVEL

IP_ADDRESS

LOCATION: geographic subdivisions smaller than a State

NRP: Nationality, Religous, and Political groups; it should not be non-personal identifiable information, e.g., the "Greek" letter, the "English" word

PERSON: any person's name in any language

PHONE_NUMBER

SCHOOL: common school names, e.g., Jackson High, or public school numbering, e.g. PS 123, 22K014, etc.

SOCIAL_HANDLE

URL

US_BANK_NUMBER

US_DRIVER_LICENSE

US_PASSPORT

US_SSN

Task Instructions:

1. Detection: Scan each message for PII from the taxonomy. Some PII has been redacted. Some has not. For every PII instance, identify which PII type in the taxonomy it belongs to.

2. Evaluation: For every PII instance (pre-redacted or newly found), use at least a window of 3 messages above and 3 messages below to determine if the tag is valid. Label as "PII", "Not PII", or "Uncertain".

3. Redaction: If unredacted PII is found, provide the message with the PII replaced by the tag (e.g., <PERSON>).

4. Surrogation:

4.1. If "PII" or "Uncertain": Generate a specific, realistic surrogate that fit the PII type (e.g., replace <SCHOOL> with "Northview High", not "the school"). Keep the entity name consistent in a transcript. Meanwhile, do not reuse the same names or places across the transcript. If the original PII is know, the generated surrogate should be significantly different in spelling from the original one.

4.2. If "Not PII": If the redaction was a mistake, replace it with the content that fit the context. In particular, if it is actually math content, replace it with mathematically sound values that fit the logic of the statement.

4.3. Format: Return only the surrogate value (e.g., "John"), not the full sentence.

Output Format: Return the analysis in a table with the following columns:

1. pii_type: The identified category from the 17 types of each message containing PII.

2. ai_redacted_content: The message with <PII_TYPE> (only for newly discovered PII; otherwise leave blank).

3. pii_evaluation: "PII", "Not PII", or "Uncertain".

4. surrogate: The specific replacement value for the tag."""


class SurrogationError(ValueError):
    pass


class DuplicateVoteError(ValueError):
    pass


def parse_evaluation(raw: str) -> tuple[str, bool]:
    """Normalize an evaluation string; returns (verdict, recognized)."""
    key = raw.strip().upper().replace(" ", "_")
    if key == EVAL_PII:
        return EVAL_PII, True
    if key in (EVAL_NOT_PII, "NOT-PII", "NOTPII"):
        return EVAL_NOT_PII, True
    if key == EVAL_UNCERTAIN:
        return EVAL_UNCERTAIN, True
    return EVAL_UNCERTAIN, False


@dataclass
class Vote:
    reviewer_id: str
    direction: str  # UP | DOWN
    timestamp: float
    note: str | None = None

    def to_dict(self) -> dict:
        return {
            "reviewer_id": self.reviewer_id,
            "direction": self.direction,
            "timestamp": self.timestamp,
            "note": self.note,
        }


@dataclass
class AnnotationItem:
    id: str
    session_id: str
    message_index: int
    pii_type: PiiType
    evaluation: str
    surrogate: str | None = None
    iteration: int = 1
    status: str = STATUS_PENDING
    ai_redacted_content: str | None = None  # set only for newly discovered PII
    start: int | None = None
    end: int | None = None
    original_text: str | None = None  # text at [start, end) when the item was made
    flags: list[str] = field(default_factory=list)
    votes: list[Vote] = field(default_factory=list)

    @property
    def discovered(self) -> bool:
        return self.ai_redacted_content is not None

    @property
    def downvoted(self) -> bool:
        return any(v.direction == VOTE_DOWN for v in self.votes)

    def record_vote(self, reviewer_id: str, direction: str, note: str | None = None,
                    timestamp: float | None = None) -> Vote:
        if direction not in (VOTE_UP, VOTE_DOWN):
            raise ValueError(f"bad vote direction {direction!r}")
        if any(v.reviewer_id == reviewer_id for v in self.votes):
            raise DuplicateVoteError(
                f"reviewer {reviewer_id!r} already voted on {self.id} in iteration {self.iteration}"
            )
        vote = Vote(reviewer_id, direction, timestamp if timestamp is not None else time.time(), note)
        self.votes.append(vote)
        return vote

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "session_id": self.session_id,
            "message_index": self.message_index,
            "pii_type": self.pii_type.value,
            "evaluation": self.evaluation,
            "surrogate": self.surrogate,
            "iteration": self.iteration,
            "status": self.status,
            "ai_redacted_content": self.ai_redacted_content,
            "start": self.start,
            "end": self.end,
            "original_text": self.original_text,
            "flags": self.flags,
            "votes": [v.to_dict() for v in self.votes],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "AnnotationItem":
        return cls(
            id=raw["id"],
            session_id=raw["session_id"],
            message_index=raw["message_index"],
            pii_type=PiiType.parse(raw["pii_type"]),
            evaluation=raw["evaluation"],
            surrogate=raw.get("surrogate"),
            iteration=raw.get("iteration", 1),
            status=raw.get("status", STATUS_PENDING),
            ai_redacted_content=raw.get("ai_redacted_content"),
            start=raw.get("start"),
            end=raw.get("end"),
            original_text=raw.get("original_text"),
            flags=list(raw.get("flags", [])),
            votes=[
                Vote(v["reviewer_id"], v["direction"], v["timestamp"], v.get("note"))
                for v in raw.get("votes", [])
            ],
        )


def write_items(items: list[AnnotationItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item.to_dict(), ensure_ascii=False))
            fh.write("\n")


def load_items(path: str | Path) -> list[AnnotationItem]:
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                items.append(AnnotationItem.from_dict(json.loads(line)))
    return items


# --- audit pass -------------------------------------------------------------

def _audit_payload(transcript: Transcript, index: int, context_radius: int) -> str:
    message = transcript.messages[index]
    lo = max(0, index - context_radius)
    hi = min(len(transcript.messages), index + context_radius + 1)
    return json.dumps(
        {
            "target_message": {
                "session_id": transcript.session_id,
                "index": message.index,
                "role": message.role,
                "text": message.text,
            },
            "existing_redactions": [
                {"type": s.pii_type.value, "start": s.start, "end": s.end, "surface": s.surface}
                for s in message.labels
            ],
            "context": [
                {"index": m.index, "role": m.role, "text": m.text}
                for m in transcript.messages[lo:hi]
                if m.index != index
            ],
        },
        ensure_ascii=False,
    )


def _parse_audit_rows(raw_text: str) -> list[dict] | None:
    """Accepts a JSON array of row objects, or a markdown pipe table."""
    if not raw_text or not raw_text.strip():
        return []
    decoder = json.JSONDecoder()
    pos = raw_text.find("[")
    while pos != -1:
        try:
            value, _ = decoder.raw_decode(raw_text, pos)
        except json.JSONDecodeError:
            pos = raw_text.find("[", pos + 1)
            continue
        if isinstance(value, list) and all(isinstance(x, dict) for x in value):
            return value
        pos = raw_text.find("[", pos + 1)
    # markdown table fallback
    lines = [l.strip() for l in raw_text.splitlines() if l.strip().startswith("|")]
    if len(lines) >= 2:
        header = [c.strip().lower() for c in lines[0].strip("|").split("|")]
        if "pii_type" in header:
            rows = []
            for line in lines[1:]:
                cells = [c.strip() for c in line.strip("|").split("|")]
                if set(c.replace("-", "").replace(":", "") for c in cells) == {""}:
                    continue  # separator row
                rows.append(dict(zip(header, cells)))
            return rows
    return None


def _locate_discovered(original: str, redacted: str) -> tuple[int, int] | None:
    """Recover the PII span from a message rewritten with a <TYPE> tag."""
    tag_start = redacted.find("<")
    tag_end = redacted.find(">", tag_start + 1)
    if tag_start < 0 or tag_end < 0:
        return None
    prefix, suffix = redacted[:tag_start], redacted[tag_end + 1 :]
    if not original.startswith(prefix) or not original.endswith(suffix):
        return None
    start, end = len(prefix), len(original) - len(suffix)
    return (start, end) if start < end else None


def _flagged_item(item_id: str, transcript: Transcript, message: Message, span: PiiSpan,
                  iteration: int, flag: str) -> AnnotationItem:
    return AnnotationItem(
        id=item_id,
        session_id=transcript.session_id,
        message_index=message.index,
        pii_type=span.pii_type,
        evaluation=EVAL_UNCERTAIN,
        iteration=iteration,
        start=span.start,
        end=span.end,
        original_text=span.surface,
        flags=[flag],
    )


def audit_corpus(
    corpus: list[Transcript],
    client,
    context_radius: int = 3,
    response_log: ResponseLog | None = None,
    iteration: int = 1,
) -> list[AnnotationItem]:
    """Run the audit prompt over every non-empty message.

    Yields one item per existing redaction plus one per newly discovered PII
    mention. Unparsable responses degrade to UNCERTAIN items flagged for
    human review rather than failing the run.
    """
    items: list[AnnotationItem] = []
    model_id = getattr(client, "model_id", "")
    for transcript in corpus:
        for message in transcript.messages:
            if not message.text.strip() and not message.labels:
                continue
            request = GatewayRequest(
                model_id=model_id,
                system_text=AUDIT_PROMPT,
                user_text=_audit_payload(transcript, message.index, context_radius),
            )
            seq = 0

            def next_id() -> str:
                nonlocal seq
                seq += 1
                return f"{transcript.session_id}:{message.index}:{seq}"

            try:
                response = client.complete(request)
            except GatewayRetryError:
                for span in message.labels:
                    items.append(
                        _flagged_item(next_id(), transcript, message, span, iteration, "gateway_failure")
                    )
                continue
            if response_log is not None:
                response_log.append(response.request_hash, response.raw_text)

            rows = _parse_audit_rows(response.raw_text)
            if rows is None:
                for span in message.labels:
                    items.append(
                        _flagged_item(next_id(), transcript, message, span, iteration, "parse_failure")
                    )
                continue

            unassigned = list(message.labels)
            for row in rows:
                try:
                    pii_type = PiiType.parse(str(row.get("pii_type", "")))
                except ValueError:
                    continue
                evaluation, recognized = parse_evaluation(str(row.get("pii_evaluation", "")))
                surrogate = row.get("surrogate") or None
                redacted = (row.get("ai_redacted_content") or "").strip() or None
                flags = [] if recognized else ["unrecognized_evaluation"]
                if redacted is None:
                    # audits an existing redaction: consume spans of this type in order
                    span = next((s for s in unassigned if s.pii_type is pii_type), None)
                    if span is None:
                        continue  # row does not correspond to any remaining redaction
                    unassigned.remove(span)
                    items.append(
                        AnnotationItem(
                            id=next_id(),
                            session_id=transcript.session_id,
                            message_index=message.index,
                            pii_type=pii_type,
                            evaluation=evaluation,
                            surrogate=surrogate,
                            iteration=iteration,
                            start=span.start,
                            end=span.end,
                            original_text=span.surface,
                            flags=flags,
                        )
                    )
                else:
                    located = _locate_discovered(message.text, redacted)
                    item = AnnotationItem(
                        id=next_id(),
                        session_id=transcript.session_id,
                        message_index=message.index,
                        pii_type=pii_type,
                        evaluation=evaluation,
                        surrogate=surrogate,
                        iteration=iteration,
                        ai_redacted_content=redacted,
                        flags=flags,
                    )
                    if located is None:
                        item.flags.append("unlocatable_discovery")
                    else:
                        item.start, item.end = located
                        item.original_text = message.text[located[0] : located[1]]
                    items.append(item)
            for span in unassigned:
                items.append(
                    _flagged_item(next_id(), transcript, message, span, iteration, "no_audit_row")
                )
    return items


# --- surrogate registry and apply -------------------------------------------

def entity_key(session_id: str, pii_type: PiiType, message_text: str, start: int, end: int) -> str:
    """Approximate entity identity from the redaction's neighborhood.

    Originals are unavailable, so consistency is keyed on (type, normalized
    context around the placeholder) within a transcript.
    """
    before = " ".join(message_text[max(0, start - 40) : start].lower().split())
    after = " ".join(message_text[end : end + 40].lower().split())
    digest = hashlib.sha1(f"{before}|{after}".encode("utf-8")).hexdigest()[:16]
    return f"{pii_type.value}:{digest}"


class SurrogateRegistry:
    """Enforces surrogate consistency within, and non-reuse across, transcripts."""

    def __init__(self):
        self.per_transcript: dict[str, dict[str, str]] = {}
        self.used_by: dict[str, str] = {}  # surrogate -> session_id that owns it

    def register(self, session_id: str, key: str, surrogate: str) -> None:
        mapping = self.per_transcript.setdefault(session_id, {})
        existing = mapping.get(key)
        if existing is not None and existing != surrogate:
            raise SurrogationError(
                f"entity {key} in {session_id} already maps to {existing!r}, got {surrogate!r}"
            )
        owner = self.used_by.get(surrogate)
        if owner is not None and owner != session_id:
            raise SurrogationError(
                f"surrogate {surrogate!r} already used in transcript {owner}, "
                f"demanded again by {session_id}"
            )
        mapping[key] = surrogate
        self.used_by[surrogate] = session_id

    def verify(self) -> None:
        owners: dict[str, str] = {}
        for session_id, mapping in self.per_transcript.items():
            for surrogate in mapping.values():
                owner = owners.setdefault(surrogate, session_id)
                if owner != session_id:
                    raise SurrogationError(
                        f"surrogate {surrogate!r} reused across transcripts {owner} and {session_id}"
                    )


@dataclass
class LedgerRow:
    session_id: str
    message_index: int
    pii_type: str
    verdict: str
    action: str


def ledger_to_csv(rows: list[LedgerRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["session_id", "message_index", "type", "verdict", "action"])
    for r in rows:
        writer.writerow([r.session_id, r.message_index, r.pii_type, r.verdict, r.action])
    return buf.getvalue()


def _validate_for_apply(item: AnnotationItem) -> None:
    if item.status not in (STATUS_APPROVED, STATUS_OVERRIDDEN):
        raise SurrogationError(f"item {item.id} is {item.status}; apply needs APPROVED or OVERRIDDEN")
    if item.evaluation not in (EVAL_PII, EVAL_NOT_PII, EVAL_UNCERTAIN):
        raise SurrogationError(f"item {item.id} has no final verdict")
    if item.discovered and item.evaluation == EVAL_NOT_PII:
        return  # dismissed discovery: nothing to rewrite
    if item.start is None or item.end is None:
        raise SurrogationError(f"item {item.id} has no located span")
    if not item.surrogate:
        what = "surrogate" if item.evaluation != EVAL_NOT_PII else "replacement content"
        raise SurrogationError(f"item {item.id} ({item.evaluation}) is missing its {what}")


def apply_surrogates(
    corpus: list[Transcript],
    items: list[AnnotationItem],
    registry: SurrogateRegistry | None = None,
) -> tuple[list[Transcript], list[LedgerRow]]:
    """Build the benchmark corpus by applying approved audit items.

    PII and UNCERTAIN items replace the redaction placeholder (or discovered
    text) with their surrogate and keep a label with SURROGATE provenance;
    NOT_PII items substitute context-fitting text and drop the label. All
    registry checks run before any text is rewritten, and a second apply of
    the same items is rejected because the expected text is no longer there.
    """
    registry = registry or SurrogateRegistry()
    by_message: dict[tuple[str, int], list[AnnotationItem]] = {}
    transcripts = {t.session_id: t for t in corpus}
    for item in items:
        _validate_for_apply(item)
        if item.session_id not in transcripts:
            raise SurrogationError(f"item {item.id} names unknown session {item.session_id}")
        if item.discovered and item.evaluation == EVAL_NOT_PII:
            continue
        message = transcripts[item.session_id].messages[item.message_index]
        expected = item.original_text if item.original_text is not None else message.text[item.start : item.end]
        if message.text[item.start : item.end] != expected:
            raise SurrogationError(
                f"item {item.id}: text at [{item.start}, {item.end}) no longer matches "
                f"{expected!r} (already applied, or the corpus drifted)"
            )
        if item.evaluation in (EVAL_PII, EVAL_UNCERTAIN):
            key = entity_key(item.session_id, item.pii_type, message.text, item.start, item.end)
            registry.register(item.session_id, key, item.surrogate)
        by_message.setdefault((item.session_id, item.message_index), []).append(item)
    registry.verify()

    # Reject overlapping edits before any write.
    for (sid, idx), edits in by_message.items():
        edits.sort(key=lambda i: i.start)
        for a, b in zip(edits, edits[1:]):
            if b.start < a.end:
                raise SurrogationError(
                    f"items {a.id} and {b.id} edit overlapping ranges in {sid}:{idx}"
                )

    input_labels = sum(t.label_count for t in corpus)
    ledger: list[LedgerRow] = []
    retained = removed = discovered_added = 0
    benchmark: list[Transcript] = []

    for t in corpus:
        new_messages = []
        for m in t.messages:
            edits = by_message.get((t.session_id, m.index), [])
            if not edits:
                new_messages.append(Message(m.index, m.role, m.text, [
                    PiiSpan(s.start, s.end, s.surface, s.pii_type, s.provenance) for s in m.labels
                ]))
                retained += len(m.labels)
                continue
            edited_ranges = {(i.start, i.end) for i in edits}
            text = m.text
            new_spans: list[PiiSpan] = []
            # survivors: labels not targeted by any edit
            survivors = [s for s in m.labels if (s.start, s.end) not in edited_ranges]
            for s in survivors:
                for i in edits:
                    if s.start < i.end and i.start < s.end:
                        raise SurrogationError(
                            f"label {s.pii_type.value} at [{s.start},{s.end}) in "
                            f"{t.session_id}:{m.index} overlaps item {i.id}'s edit"
                        )
            shifted = {(s.start, s.end): [s.start, s.end] for s in survivors}
            new_from_edits: list[tuple[int, int, PiiType]] = []
            for item in sorted(edits, key=lambda i: i.start, reverse=True):
                replacement = item.surrogate
                text = text[: item.start] + replacement + text[item.end :]
                delta = len(replacement) - (item.end - item.start)
                for pos in shifted.values():
                    if pos[0] >= item.end:
                        pos[0] += delta
                        pos[1] += delta
                for k, entry in enumerate(new_from_edits):
                    if entry[0] >= item.end:
                        new_from_edits[k] = (entry[0] + delta, entry[1] + delta, entry[2])
                verdict = item.evaluation
                if verdict in (EVAL_PII, EVAL_UNCERTAIN):
                    new_from_edits.append(
                        (item.start, item.start + len(replacement), item.pii_type)
                    )
                    retained += 1
                    if item.discovered:
                        discovered_added += 1
                        action = "discovered_surrogated"
                    else:
                        action = "surrogated"
                else:
                    removed += 1
                    action = "unredacted"
                ledger.append(
                    LedgerRow(t.session_id, m.index, item.pii_type.value, verdict, action)
                )
            for s in survivors:
                ns, ne = shifted[(s.start, s.end)]
                new_spans.append(PiiSpan(ns, ne, text[ns:ne], s.pii_type, s.provenance))
                retained += 1
            for start, end, pii_type in new_from_edits:
                new_spans.append(PiiSpan(start, end, text[start:end], pii_type, Provenance.SURROGATE))
            new_spans.sort(key=lambda s: (s.start, s.end))
            new_messages.append(Message(m.index, m.role, text, new_spans))
        benchmark.append(Transcript(t.session_id, new_messages))

    if retained + removed != input_labels + discovered_added:
        raise SurrogationError(
            f"label conservation violated: retained={retained} removed={removed} "
            f"input={input_labels} discovered={discovered_added}"
        )
    return benchmark, ledger


# --- iteration bookkeeping ---------------------------------------------------

@dataclass(frozen=True)
class ResolutionDecision:
    rate: float
    stop: bool
    resolved: int
    total: int


def resolution_rate(
    previous_downvoted: set[str], current_items: list[AnnotationItem]
) -> ResolutionDecision:
    """Fraction of previously down-voted items that drew no down-vote when reissued.

    An empty previous set counts as fully resolved. Iteration stops once the
    rate reaches 0.95.
    """
    if not previous_downvoted:
        return ResolutionDecision(1.0, True, 0, 0)
    current = {item.id: item for item in current_items}
    resolved = sum(
        1
        for item_id in previous_downvoted
        if item_id in current and not current[item_id].downvoted
    )
    rate = resolved / len(previous_downvoted)
    return ResolutionDecision(rate, rate >= RESOLUTION_STOP_RATE, resolved, len(previous_downvoted))


def close_iteration(items: list[AnnotationItem], iteration: int) -> None:
    """Convert votes into statuses for one iteration's items.

    Any down-vote rejects the item. Discovered items need at least one
    up-vote to be approved (new PII requires a human in the loop); audits of
    existing redactions are approved when unopposed. Overridden items keep
    their override.
    """
    for item in items:
        if item.iteration != iteration or item.status == STATUS_OVERRIDDEN:
            continue
        if item.downvoted:
            item.status = STATUS_REJECTED
        elif item.discovered:
            if any(v.direction == VOTE_UP for v in item.votes):
                item.status = STATUS_APPROVED
        else:
            item.status = STATUS_APPROVED
