"""
Agente FCL: a intenção (compra/venda) vem de um provedor de decisão,
possivelmente um LLM; preço e volume vêm de regras determinísticas.

    v = +v^j (compra) ou −v^j (venda)
    compra: min(p̂·(1−m^j), melhor oferta de venda)
    venda:  max(p̂·(1+m^j), melhor oferta de compra)
"""
import math
from typing import List, Optional

import numpy as np
from loguru import logger

from ..core.base_agent import BaseAgent
from ..core.errors import InvalidInputError
from ..core.market import MarketSnapshot, OrderRequest
from ..core.order_book import price_to_ticks
from ..models.decision import DecisionContext, HistoryEntry, Intention
from .fcn_agent import Prediction, fcn_predict
from .population import AgentState, FcnParams, PopulationConfig


def unrealized_gain(state: AgentState, p_t: float) -> float:
    """
    Ganho não realizado: v_total·p_t − Σ v·p sobre o histórico (vendas com volume negativo).

    Args:
        state: Portfólio do agente
        p_t: Preço de mercado atual

    Returns:
        float: Ganho não realizado
    """
    total_volume = sum(fill.signed_volume for fill in state.history)
    return math.fsum([total_volume * p_t, -state.spent()])


def fcl_decide_order(
    params: FcnParams,
    state: AgentState,
    snapshot: MarketSnapshot,
    intention: Intention,
    prediction: Prediction,
    price_scale: int,
) -> OrderRequest:
    """
    Converte a intenção em uma ordem limitada.

    Args:
        params: Parâmetros do agente (margem m^j)
        state: Portfólio (volume fixo v^j)
        snapshot: Melhor oferta de compra/venda
        intention: Compra ou venda
        prediction: Previsão p̂ do agente
        price_scale: Ticks por unidade monetária

    Returns:
        OrderRequest: Ordem na grade de ticks, arredondada para o lado passivo

    Raises:
        InvalidInputError: Volume fixo v^j ausente
    """
    if state.fixed_volume is None:
        raise InvalidInputError("Agente FCL sem volume fixo v^j")
    volume = state.fixed_volume
    p_hat = prediction.p_hat
    if intention.is_buy:
        price = p_hat * (1.0 - params.margin_j)
        if snapshot.best_ask is not None:
            price = min(price, snapshot.best_ask)
        return OrderRequest(price_ticks=price_to_ticks(price, price_scale, is_buy=True), signed_volume=volume)

    price = p_hat * (1.0 + params.margin_j)
    if snapshot.best_bid is not None:
        price = max(price, snapshot.best_bid)
    return OrderRequest(price_ticks=price_to_ticks(price, price_scale, is_buy=False), signed_volume=-volume)


def build_context(
    state: AgentState,
    snapshot: MarketSnapshot,
    history_limit: Optional[int] = None,
    market_id: int = 0,
) -> DecisionContext:
    """Monta o contexto de decisão (portfólio, mercado, histórico, OFI) do passo."""
    entries: List[HistoryEntry] = [
        HistoryEntry(market_id=market_id, price=fill.price, volume=fill.signed_volume)
        for fill in state.history
        if fill.signed_volume != 0
    ]
    if history_limit is not None:
        entries = entries[-history_limit:] if history_limit > 0 else []
    return DecisionContext(
        cash=state.cash,
        position=state.position,
        unrealized_gain=unrealized_gain(state, snapshot.market_price),
        market_price=snapshot.market_price,
        all_time_high=snapshot.all_time_high,
        all_time_low=snapshot.all_time_low,
        remaining_time=snapshot.remaining_time,
        total_time=snapshot.total_time,
        history=entries,
        ofi=snapshot.ofi,
        market_id=market_id,
    )


class FCLAgent(BaseAgent):
    """Agente híbrido: intenção do provedor, preço e volume por regra"""

    kind = "fcl"

    def __init__(
        self,
        agent_id: int,
        params: FcnParams,
        state: AgentState,
        population: PopulationConfig,
        provider,
        price_scale: int = 100,
        history_limit: Optional[int] = None,
    ):
        super().__init__(agent_id, params, state)
        self.population = population
        self.provider = provider
        self.price_scale = price_scale
        self.history_limit = history_limit
        self.last_intention: Optional[Intention] = None
        self.description = "Agente FCL com intenção fornecida por provedor de decisão"

    async def decide(self, snapshot: MarketSnapshot, rng: np.random.Generator) -> Optional[OrderRequest]:
        """
        Pede a intenção ao provedor e aplica a regra de preço.

        Raises:
            ProviderUnavailableError: O provedor não respondeu com uma decisão válida
        """
        context = build_context(self.state, snapshot, self.history_limit)
        intention = await self.provider.decide(context, rng)
        self.last_intention = intention

        p_lag = snapshot.lagged_price(self.params.tau_j)
        prediction = fcn_predict(
            self.params,
            snapshot.market_price,
            snapshot.fundamental_price,
            p_lag,
            float(rng.standard_normal()),
            self.population,
        )
        order = fcl_decide_order(self.params, self.state, snapshot, intention, prediction, self.price_scale)
        logger.debug(
            f"FCL {self.agent_id}: {intention.value} {abs(order.signed_volume)} @ {order.price(self.price_scale)} "
            f"(p̂={prediction.p_hat:.2f}, proximidade={snapshot.nearness:.4f})"
        )
        return order
