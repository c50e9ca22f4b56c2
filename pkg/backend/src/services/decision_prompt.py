"""
Construção do prompt de decisão e leitura da resposta do LLM.

O texto do prompt é fixo (premissa, instruções, informação e formato de
resposta); apenas o bloco de informação depende do contexto. Cada registro
ocupa uma linha. A resposta esperada é um objeto JSON
{"<market id>": {"order_price", "is_buy", "order_volume", "reason"}}.
"""
import json
from typing import Any, Dict, List, Optional

from ..core.errors import ParseFailureError
from ..models.decision import Decision, DecisionContext
from ..utils.formatting import format_cash, format_real

PREMISE = (
    "(Premise) You are a participant of the simulation of stock markets. Behave "
    "as an investor. Answer your order decision after analysing the given "
    "information."
)

INSTRUCTION_LINES = [
    "(Instruction) Your current portfolio is provided as a following format. "
    "Unrealized gain refers to the increase in value of the investment that has "
    "not yet been sold. It represents the potential profit on your stock "
    "position. Negative unrealized gain means  that the investment has decreased "
    "in value.",
    "[Your portfolio]cash: {}",
    "[Your portfolio]market id: {}, volume: {}, unrealized gain: {}, ...",
    "Each market condition is provided as a following format.",
    "[Market condition]market id: {}, current market price: {}, "
    "all time high price: {}, all time low price: {}, ...",
    "[Market condition]market id: {}, remaining time: {}, total time: {}",
    "Your trading history is provided as a following format. Negative volume "
    "means that you sold the stock.",
    "[Your trading history]market id: {}, price: {}, volume: {}, ...",
    "Order flow imbalance is provided as a following format. Order flow imbalance "
    "means the difference between the number of buy and sell orders submitted to "
    "the stock market. Order flow imbalance is calculated as the difference between "
    "the number of buy and sell orders. Order flow imbalance can range from -1 to 1. "
    "Negative order flow imbalance indicates that the number of sell orders exceed "
    "that of buy orders. If the order flow is positive (negative), the fundamental "
    "value tends to be high (low). Higher absolute value of order flow imbalance "
    "indicates that orders are imbalance to one side, and suggests stronger evidence "
    "about the fundamentals value of the stock.",
    "[Order flow imbalance]market id: {}, order flow imbalance: {}, ...",
]

INFORMATION_HEADER = "(Information) Here's the information."

ANSWER_FORMAT_LINES = [
    "(Answer format) Decide your investment in the following JSON format. Do not "
    "deviate from the format, and do not add any additional words to your response "
    "outside of the format. Make sure to enclose each property in double quotes. "
    "Order volume means the number of units you want to trade the stock. Possible "
    "is_buy means whether to buy or sell the stock. is_buy must be True or False. "
    "Short selling is not allowed. If your holding stock volume in the portfolio is "
    "negative, buy them back immediately.  Cash shortage is not allowed. If your "
    "cash amount in the portfolio is negative, sell your holding stocks immediately. "
    "Try to keep your order volume as non-zero and not-extreme as possible. Try to "
    "keep your portfolio balanced. If you feel you are holding a lot of stocks or "
    "your cash amount is insufficient, you should sell them. Order price means the "
    "limit price at which you want to buy or sell the stock. By adjusting order "
    "price, you can trade at a more favorable price or adjust the time it takes to "
    "execute a trade. Here are the answer format.",
    '{"<market id>": {"order_price": "<order price>", "is_buy": "<True or False>", '
    '"order_volume": "<order volume>", "reason": "<reason>"} ...}',
    "Now, decide your order. Please explain the reason and your emotion in "
    "as much detail as possible.",
]

NEGATIVE_CASH_WARNING = (
    " (Caution! Your cash amount is negative! "
    "To avoid this situation, you have to sell the stocks.)"
)
NEGATIVE_POSITION_WARNING = (
    " (Caution! Your holding stock volume is negative! To avoid this "
    "situation, you have to buy this stock.)"
)

def information_lines(ctx: DecisionContext) -> List[str]:
    """Bloco de informação do prompt, uma linha por registro."""
    mid = ctx.market_id
    cash_line = f"[Your portfolio]cash: {format_cash(ctx.cash)}"
    if ctx.cash < 0:
        cash_line += NEGATIVE_CASH_WARNING
    position_line = (
        f"[Your portfolio]market id: {mid}, volume: {ctx.position}, "
        f"unrealized gain: {format_real(ctx.unrealized_gain)}"
    )
    if ctx.position < 0:
        position_line += NEGATIVE_POSITION_WARNING

    lines = [
        cash_line,
        position_line,
        f"[Market condition]market id: {mid}, current market price: {format_real(ctx.market_price)}, "
        f"all time high price: {format_real(ctx.all_time_high)}, "
        f"all time low price: {format_real(ctx.all_time_low)}",
        f"[Market condition]market id: {mid}, remaining time: {ctx.remaining_time}, "
        f"total time: {ctx.total_time}",
    ]
    for entry in ctx.history:
        lines.append(
            f"[Your trading history]market id: {entry.market_id}, "
            f"price: {format_real(entry.price)}, volume: {entry.volume}"
        )
    lines.append(f"[Order flow imbalance]market id: {mid}, order flow imbalance: {format_real(ctx.ofi)}")
    return lines


def build_prompt(ctx: DecisionContext) -> str:
    """
    Monta o prompt completo para o contexto.

    Args:
        ctx: Contexto de decisão

    Returns:
        str: Prompt, terminado em quebra de linha
    """
    lines = [PREMISE, *INSTRUCTION_LINES, INFORMATION_HEADER, *information_lines(ctx), *ANSWER_FORMAT_LINES]
    return "\n".join(lines) + "\n"


def render_decision(decision: Decision) -> str:
    """Serializa uma decisão no formato de resposta esperado."""
    body: Dict[str, Any] = {
        "order_price": "" if decision.order_price is None else format_real(decision.order_price),
        "is_buy": "True" if decision.is_buy else "False",
        "order_volume": "" if decision.order_volume is None else str(decision.order_volume),
        "reason": decision.reason,
    }
    return json.dumps({decision.market_id: body}, ensure_ascii=False)


def _balanced_objects(text: str):
    """Gera os trechos {...} de nível superior com chaves balanceadas, respeitando strings."""
    depth = 0
    start: Optional[int] = None
    in_string = False
    escaped = False
    for index, char in enumerate(text):
        if in_string:
            if escaped:
                escaped = False
            elif char == "\\":
                escaped = True
            elif char == '"':
                in_string = False
            continue
        if char == '"':
            # aspas fora de um objeto não abrem string
            if depth > 0:
                in_string = True
        elif char == "{":
            if depth == 0:
                start = index
            depth += 1
        elif char == "}" and depth > 0:
            depth -= 1
            if depth == 0 and start is not None:
                yield text[start:index + 1]
                start = None


def _parse_bool(value: Any) -> Optional[bool]:
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered == "true":
            return True
        if lowered == "false":
            return False
    return None


def _parse_number(value: Any, cast):
    try:
        return cast(float(value)) if value not in (None, "") else None
    except (TypeError, ValueError):
        return None


def _decision_from_object(candidate: Dict[str, Any]) -> Optional[Decision]:
    for market_id, body in candidate.items():
        if not isinstance(body, dict) or "is_buy" not in body:
            continue
        is_buy = _parse_bool(body["is_buy"])
        if is_buy is None:
            continue
        return Decision(
            market_id=str(market_id),
            is_buy=is_buy,
            order_price=_parse_number(body.get("order_price"), float),
            order_volume=_parse_number(body.get("order_volume"), int),
            reason=str(body.get("reason", "")),
        )
    return None


def parse_response(text: str) -> Decision:
    """
    Extrai a primeira decisão bem formada de uma resposta, ignorando texto ao redor.

    Args:
        text: Resposta do provedor

    Returns:
        Decision: Decisão lida

    Raises:
        ParseFailureError: Nenhum objeto com is_buy legível
    """
    if not text:
        raise ParseFailureError("Resposta vazia", hint="The answer was empty.")

    saw_object = False
    for chunk in _balanced_objects(text):
        try:
            candidate = json.loads(chunk)
        except json.JSONDecodeError:
            continue
        if not isinstance(candidate, dict):
            continue
        saw_object = True
        decision = _decision_from_object(candidate)
        if decision is not None:
            return decision

    if saw_object:
        raise ParseFailureError(
            'Objeto encontrado sem campo "is_buy" válido (True ou False)',
            hint='The JSON object has no valid "is_buy" field. is_buy must be True or False.',
        )
    raise ParseFailureError(
        "Nenhum objeto JSON de decisão encontrado na resposta",
        hint="No JSON object in the answer format was found in your answer.",
    )
