"""
Dependências da API: gerador de respostas do servidor stub.
"""
import itertools
import threading
from functools import lru_cache

from fastapi import Depends, Header, HTTPException, status
from typing import Optional

from ..models.decision import Decision
from ..services.decision_prompt import render_decision
from ..utils.config import get_settings

REPLY_MODES = ("buy", "sell", "alternate", "prose")

PROSE_REPLY = (
    "I would rather wait and see how the market develops before committing "
    "to any position right now."
)


class StubReplier:
    """
    Gera o texto da resposta conforme o modo:
    buy / sell fixos, alternate (compra, venda, compra...) ou prose (ilegível).
    """

    def __init__(self, mode: str = "alternate"):
        if mode not in REPLY_MODES:
            raise ValueError(f"Modo de resposta desconhecido: {mode}")
        self.mode = mode
        self._counter = itertools.count()
        self._lock = threading.Lock()

    def next_is_buy(self, mode: str) -> bool:
        if mode == "buy":
            return True
        if mode == "sell":
            return False
        with self._lock:
            return next(self._counter) % 2 == 0

    def reply(self, mode: Optional[str] = None) -> str:
        mode = mode or self.mode
        if mode == "prose":
            return PROSE_REPLY
        is_buy = self.next_is_buy(mode)
        side = "buy" if is_buy else "sell"
        return render_decision(Decision(market_id="0", is_buy=is_buy, reason=f"Scripted {side} decision."))

    def reset(self) -> None:
        with self._lock:
            self._counter = itertools.count()


@lru_cache()
def get_stub_replier() -> StubReplier:
    return StubReplier(get_settings().STUB_REPLY_MODE)


async def get_reply_mode(x_stub_mode: Optional[str] = Header(None)) -> Optional[str]:
    """Modo pedido por requisição (cabeçalho X-Stub-Mode), sobrepondo o padrão."""
    if x_stub_mode is not None and x_stub_mode not in REPLY_MODES:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"X-Stub-Mode inválido: {x_stub_mode}",
        )
    return x_stub_mode


def reply_text(
    mode: Optional[str] = Depends(get_reply_mode),
    replier: StubReplier = Depends(get_stub_replier),
) -> str:
    return replier.reply(mode)
