"""
Endpoint stub compatível com chat-completions para rodar o provedor remoto offline.
"""
import time
import uuid
from typing import Any, Dict, List, Optional

from fastapi import APIRouter, Depends
from loguru import logger
from pydantic import BaseModel

from ..dependencies import reply_text

router = APIRouter()


class ChatMessage(BaseModel):
    role: str
    content: str


class ChatCompletionRequest(BaseModel):
    model: str
    messages: List[ChatMessage]
    temperature: Optional[float] = None

    model_config = {"extra": "allow"}


@router.post("/chat/completions", response_model=Dict[str, Any])
async def chat_completions(request: ChatCompletionRequest, content: str = Depends(reply_text)):
    """
    Devolve uma decisão roteirizada no envelope chat-completions.

    Args:
        request: Corpo no formato OpenAI
        content: Texto gerado pelo StubReplier

    Returns:
        Dict[str, Any]: Envelope com uma única escolha
    """
    prompt_chars = sum(len(message.content) for message in request.messages)
    logger.debug(f"Stub: requisição para {request.model} ({prompt_chars} caracteres)")
    return {
        "id": f"chatcmpl-{uuid.uuid4().hex[:12]}",
        "object": "chat.completion",
        "created": int(time.time()),
        "model": request.model,
        "choices": [{
            "index": 0,
            "message": {"role": "assistant", "content": content},
            "finish_reason": "stop",
        }],
        "usage": {"prompt_tokens": prompt_chars // 4, "completion_tokens": len(content) // 4},
    }
