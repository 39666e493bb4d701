from .prompts import PromptVariant, build_prompt
from .client import (
    ChatGatewayClient,
    GatewayAbort,
    GatewayAuthError,
    GatewayRequest,
    GatewayResponse,
    GatewayRetryError,
    MockChatClient,
    ReplayClient,
    ResponseLog,
    request_hash,
)
from .detect import LlmDetection, detect_llm_corpus, parse_detections

__all__ = [
    "PromptVariant",
    "build_prompt",
    "ChatGatewayClient",
    "GatewayAbort",
    "GatewayAuthError",
    "GatewayRequest",
    "GatewayResponse",
    "GatewayRetryError",
    "MockChatClient",
    "ReplayClient",
    "ResponseLog",
    "request_hash",
    "LlmDetection",
    "detect_llm_corpus",
    "parse_detections",
]
