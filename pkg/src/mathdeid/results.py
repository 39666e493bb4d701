"""Detection results shared by the baseline and LLM engines."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import PiiType

PARSE_OK = "OK"
PARSE_MALFORMED = "MALFORMED"
PARSE_EMPTY = "EMPTY"

UNGROUNDED = -1  # offset value for detections without a located span


@dataclass
class Detection:
    text: str
    pii_type: PiiType
    start: int = UNGROUNDED
    end: int = UNGROUNDED

    @property
    def grounded(self) -> bool:
        return self.start >= 0 and self.end > self.start

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "type": self.pii_type.value,
            "start": self.start,
            "end": self.end,
        }


@dataclass
class MessageDetections:
    index: int
    detections: list[Detection] = field(default_factory=list)
    parse_status: str = PARSE_OK
    attempts: int = 1

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "detections": [d.to_dict() for d in self.detections],
            "parse_status": self.parse_status,
            "attempts": self.attempts,
        }


@dataclass
class DetectionResult:
    session_id: str
    engine: str
    messages: list[MessageDetections] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "engine": self.engine,
            "messages": [m.to_dict() for m in self.messages],
            "warnings": self.warnings,
        }


def write_results(results: list[DetectionResult], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in results:
            fh.write(json.dumps(r.to_dict(), ensure_ascii=False))
            fh.write("\n")


def load_results(path: str | Path) -> list[DetectionResult]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            raw = json.loads(line)
            messages = [
                MessageDetections(
                    index=m["index"],
                    detections=[
                        Detection(
                            d["text"],
                            PiiType.parse(d["type"]),
                            d.get("start", UNGROUNDED),
                            d.get("end", UNGROUNDED),
                        )
                        for d in m["detections"]
                    ],
                    parse_status=m.get("parse_status", PARSE_OK),
                    attempts=m.get("attempts", 1),
                )
                for m in raw["messages"]
            ]
            out.append(
                DetectionResult(raw["session_id"], raw["engine"], messages, raw.get("warnings", []))
            )
    return out
