"""Parse LLM span outputs and run prompt-driven detection over a corpus."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .client import (
    GatewayAbort,
    GatewayAuthError,
    GatewayRetryError,
    GatewayResponse,
    ResponseLog,
)
from .prompts import PromptVariant, build_prompt
from ..corpus import PiiType, Transcript
from ..results import (
    PARSE_EMPTY,
    PARSE_MALFORMED,
    PARSE_OK,
    UNGROUNDED,
    Detection,
    DetectionResult,
    MessageDetections,
)
from ..segmentation import SegmentLabeling


@dataclass
class LlmDetection:
    """Parsed output for one message; total over any raw text, never raises."""

    message_index: int = -1
    detections: list[Detection] = field(default_factory=list)
    parse_status: str = PARSE_OK


def _first_json_array(raw: str):
    decoder = json.JSONDecoder()
    pos = raw.find("[")
    while pos != -1:
        try:
            value, _end = decoder.raw_decode(raw, pos)
        except json.JSONDecodeError:
            pos = raw.find("[", pos + 1)
            continue
        if isinstance(value, list):
            return value
        pos = raw.find("[", pos + 1)
    return None


def parse_detections(raw_text: str) -> LlmDetection:
    """Extract {"text", "type"} entries from a model response.

    Whitespace-only output is EMPTY (the prompt asks for nothing when no PII
    is found); output without a well-formed JSON array is MALFORMED. Fenced
    code blocks and surrounding prose are tolerated. Entries whose type does
    not parse under the taxonomy (including the COURSE alias) are dropped.
    """
    if raw_text is None or not raw_text.strip():
        return LlmDetection(parse_status=PARSE_EMPTY)
    array = _first_json_array(raw_text)
    if array is None:
        return LlmDetection(parse_status=PARSE_MALFORMED)
    detections = []
    for entry in array:
        if not isinstance(entry, dict):
            continue
        text = entry.get("text")
        type_code = entry.get("type")
        if not isinstance(text, str) or not text or not isinstance(type_code, str):
            continue
        try:
            pii_type = PiiType.parse(type_code)
        except ValueError:
            continue
        detections.append(Detection(text=text, pii_type=pii_type))
    return LlmDetection(detections=detections, parse_status=PARSE_OK)


def ground_detections(detections: list[Detection], message_text: str) -> list[Detection]:
    """Locate each detection's first occurrence; unlocatable texts stay message-level."""
    grounded = []
    for d in detections:
        pos = message_text.find(d.text)
        if pos >= 0:
            grounded.append(Detection(d.text, d.pii_type, pos, pos + len(d.text)))
        else:
            grounded.append(Detection(d.text, d.pii_type, UNGROUNDED, UNGROUNDED))
    return grounded


def detect_llm_corpus(
    corpus: list[Transcript],
    variant: PromptVariant,
    client,
    labeling: SegmentLabeling | None = None,
    concurrency_limit: int = 8,
    context_radius: int = 3,
    response_log: ResponseLog | None = None,
) -> list[DetectionResult]:
    """One gateway request per non-empty message, assembled in message order.

    Transient failures are retried inside the client; a message that still
    fails is recorded as MALFORMED. Authentication/configuration failures
    abort the run, raising GatewayAbort carrying results completed so far.
    """
    if variant is PromptVariant.SEGMENT_AWARE:
        if labeling is None or not labeling.covers(corpus):
            from .prompts import PromptConfigError

            raise PromptConfigError(
                "segment-aware prompting needs a segment labeling covering the corpus"
            )
    engine = f"llm:{variant.value}"
    model_id = getattr(client, "model_id", "")
    results: list[DetectionResult] = []

    def run_message(transcript: Transcript, index: int) -> MessageDetections:
        request = build_prompt(
            variant,
            transcript,
            index,
            labeling=labeling,
            context_radius=context_radius,
            model_id=model_id,
        )
        try:
            response: GatewayResponse = client.complete(request)
        except GatewayRetryError:
            return MessageDetections(
                index=index, parse_status=PARSE_MALFORMED, attempts=request.max_attempts
            )
        if response_log is not None:
            response_log.append(response.request_hash, response.raw_text)
        parsed = parse_detections(response.raw_text)
        text = transcript.messages[index].text
        return MessageDetections(
            index=index,
            detections=ground_detections(parsed.detections, text),
            parse_status=parsed.parse_status,
            attempts=response.attempts,
        )

    with ThreadPoolExecutor(max_workers=max(1, concurrency_limit)) as pool:
        for transcript in corpus:
            result = DetectionResult(transcript.session_id, engine)
            futures = []
            for m in transcript.messages:
                if m.text.strip():
                    futures.append((m.index, pool.submit(run_message, transcript, m.index)))
                else:
                    futures.append((m.index, None))
            for index, fut in futures:
                if fut is None:
                    result.messages.append(MessageDetections(index=index, parse_status=PARSE_EMPTY))
                    continue
                try:
                    result.messages.append(fut.result())
                except GatewayAuthError as exc:
                    done = sum(len(r.messages) for r in results) + len(result.messages)
                    raise GatewayAbort(
                        f"gateway failure after {done} messages across "
                        f"{len(results)} completed transcripts: {exc}",
                        completed=results,
                    ) from None
            results.append(result)
    return results
