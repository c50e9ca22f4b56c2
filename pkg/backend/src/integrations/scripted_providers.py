"""
Provedores de decisão determinísticos (sem rede) e fábrica de provedores.

Todos expõem `async decide(ctx, rng) -> Intention`, a mesma interface do
provedor remoto, para que simulação e turno único não distingam a origem.
"""
from typing import Optional, Protocol

import httpx
import numpy as np

from ..models.decision import DecisionContext, Intention, ProviderConfig, ProviderKind
from .llm_client import RemoteDecisionProvider


class DecisionProvider(Protocol):
    label: str

    async def decide(self, ctx: DecisionContext, rng: Optional[np.random.Generator] = None) -> Intention:
        ...


def decide_scripted_loss_averse(
    ctx: DecisionContext,
    rng: np.random.Generator,
    sell_bias_at_ath: float = 0.9,
    buy_bias_at_loss: float = 0.8,
) -> Intention:
    """
    Regra de aversão a perdas usada como oráculo de teste.

    Com ganho >= 0: P(venda) = 0.5 + (sell_bias_at_ath − 0.5)·proximidade da máxima.
    Com ganho < 0: P(compra) = buy_bias_at_loss.

    Args:
        ctx: Contexto de decisão
        rng: Gerador semeado (um sorteio por decisão)
        sell_bias_at_ath: Probabilidade de venda na máxima histórica
        buy_bias_at_loss: Probabilidade de compra com prejuízo

    Returns:
        Intention: Compra ou venda
    """
    draw = float(rng.random())
    if ctx.unrealized_gain >= 0:
        p_sell = 0.5 + (sell_bias_at_ath - 0.5) * ctx.nearness
        return Intention.SELL if draw < p_sell else Intention.BUY
    return Intention.BUY if draw < buy_bias_at_loss else Intention.SELL


class AlwaysBuyProvider:
    label = ProviderKind.ALWAYS_BUY.value

    async def decide(self, ctx: DecisionContext, rng: Optional[np.random.Generator] = None) -> Intention:
        return Intention.BUY


class AlwaysSellProvider:
    label = ProviderKind.ALWAYS_SELL.value

    async def decide(self, ctx: DecisionContext, rng: Optional[np.random.Generator] = None) -> Intention:
        return Intention.SELL


class SellIfGainProvider:
    """Vende sempre que o ganho não realizado é >= 0; caso contrário compra."""

    label = ProviderKind.SELL_IF_GAIN.value

    async def decide(self, ctx: DecisionContext, rng: Optional[np.random.Generator] = None) -> Intention:
        return Intention.SELL if ctx.unrealized_gain >= 0 else Intention.BUY


class LossAverseProvider:
    label = ProviderKind.LOSS_AVERSE.value

    def __init__(self, sell_bias_at_ath: float = 0.9, buy_bias_at_loss: float = 0.8):
        self.sell_bias_at_ath = sell_bias_at_ath
        self.buy_bias_at_loss = buy_bias_at_loss

    async def decide(self, ctx: DecisionContext, rng: Optional[np.random.Generator] = None) -> Intention:
        if rng is None:
            raise ValueError("LossAverseProvider exige um gerador semeado")
        return decide_scripted_loss_averse(ctx, rng, self.sell_bias_at_ath, self.buy_bias_at_loss)


def build_provider(cfg: ProviderConfig, transport: Optional[httpx.AsyncBaseTransport] = None) -> DecisionProvider:
    """
    Instancia o provedor descrito pela configuração.

    Args:
        cfg: Configuração do provedor
        transport: Transporte httpx opcional para o provedor remoto

    Returns:
        DecisionProvider: Provedor pronto para uso
    """
    if cfg.kind == ProviderKind.ALWAYS_BUY:
        provider = AlwaysBuyProvider()
    elif cfg.kind == ProviderKind.ALWAYS_SELL:
        provider = AlwaysSellProvider()
    elif cfg.kind == ProviderKind.SELL_IF_GAIN:
        provider = SellIfGainProvider()
    elif cfg.kind == ProviderKind.LOSS_AVERSE:
        provider = LossAverseProvider(cfg.sell_bias_at_ath, cfg.buy_bias_at_loss)
    else:
        return RemoteDecisionProvider(cfg, transport=transport)
    if cfg.name:
        provider.label = cfg.name
    return provider


async def close_provider(provider: DecisionProvider) -> None:
    """Fecha conexões do provedor, se houver."""
    closer = getattr(provider, "aclose", None)
    if closer is not None:
        await closer()
