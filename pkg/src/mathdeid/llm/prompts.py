"""Prompt templates for LLM-based PII detection.

Three variants share one taxonomy block and output contract. The user payload
carries the target message plus up to three surrounding messages on each side;
the segment-aware variant additionally injects the message's math_label.
"""

from __future__ import annotations

import json
from enum import Enum

from .client import GatewayRequest
from ..corpus import Transcript
from ..segmentation import SegmentLabeling

_TAXONOMY_BLOCK = """PII Types to detect:

AGE

COURSE: must be a subject or its acronym with a multi-digit number, e.g., algebra 300, geometry 101, CS 503; only a subject name without a course number, e.g., calculus, precal one, geomtry 2 is NOT a COURSE

DATE: a specific date; just a year, a month, or a day of the week (i.e., Monday, Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday) is not a specific date

EMAIL_ADDRESS

GRADE_LEVEL: grade level should be related to the speaker's identity rather than a general mention of a grade level

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

US_SSN"""

_OUTPUT_BLOCK = """Output:

- "text": The exact string representing the PII found in the message.

- "type": The PII type from the list above.

If no PII is found, do not return anything."""

BASIC_TEMPLATE = f"""You are a specialist in PII (Personally Identifiable Information) detection.

Your task is to identify ALL PII in the provided message content.

{_TAXONOMY_BLOCK}

{_OUTPUT_BLOCK}"""

MATH_AWARE_TEMPLATE = f"""You are a specialist in PII (Personally Identifiable Information) detection.

Your task is to identify ALL PII in the provided message content that comes from math tutoring sessions. Pay attention that general math content should not be annotated as PII, e.g., math subjects, concepts, symbols, equations, mathematicians' names, etc.

{_TAXONOMY_BLOCK}

{_OUTPUT_BLOCK}"""

SEGMENT_AWARE_TEMPLATE = f"""You are a specialist in PII (Personally Identifiable Information) detection.

Your task is to identify ALL PII in the provided message content.

If the message is likely to be about mathematics, its "math_label" field will have the value "MATH". Otherwise, the "math_label" will be "NON-MATH". Note that math terms, symbols, and expressions can be similar to some PII types below. Be extra careful when detecting PII within math messages.

{_TAXONOMY_BLOCK}

{_OUTPUT_BLOCK}"""


class PromptVariant(Enum):
    BASIC = "basic"
    MATH_AWARE = "math"
    SEGMENT_AWARE = "segment"

    @property
    def template(self) -> str:
        return {
            PromptVariant.BASIC: BASIC_TEMPLATE,
            PromptVariant.MATH_AWARE: MATH_AWARE_TEMPLATE,
            PromptVariant.SEGMENT_AWARE: SEGMENT_AWARE_TEMPLATE,
        }[self]

    @classmethod
    def parse(cls, name: str) -> "PromptVariant":
        for v in cls:
            if v.value == name.lower() or v.name == name.upper():
                return v
        raise ValueError(f"unknown prompt variant {name!r}")


class PromptConfigError(ValueError):
    pass


def build_prompt(
    variant: PromptVariant,
    transcript: Transcript,
    message_index: int,
    labeling: SegmentLabeling | None = None,
    context_radius: int = 3,
    model_id: str = "",
    max_attempts: int = 3,
) -> GatewayRequest:
    """Assemble the gateway request for one target message.

    The segment-aware variant requires a labeling that covers the transcript;
    the target message's MATH / NON-MATH label is embedded in the payload.
    """
    message = transcript.messages[message_index]
    target: dict = {"index": message.index, "role": message.role, "text": message.text}
    if variant is PromptVariant.SEGMENT_AWARE:
        if labeling is None or transcript.session_id not in labeling.labels:
            raise PromptConfigError(
                "segment-aware prompting needs a segment labeling covering the corpus"
            )
        target["math_label"] = labeling.label(transcript.session_id, message_index)
    lo = max(0, message_index - context_radius)
    hi = min(len(transcript.messages), message_index + context_radius + 1)
    context = [
        {"index": m.index, "role": m.role, "text": m.text}
        for m in transcript.messages[lo:hi]
        if m.index != message_index
    ]
    user_text = json.dumps(
        {"target_message": target, "context": context}, ensure_ascii=False
    )
    return GatewayRequest(
        model_id=model_id,
        system_text=variant.template,
        user_text=user_text,
        max_attempts=max_attempts,
    )
