"""
Estruturas de mercado observadas pelos agentes: histórico de preços,
instantâneo de mercado e pedido de ordem.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


class PriceHistory:
    """
    Preço de mercado ao fim de cada passo e extremos históricos
    (máxima e mínima sobre preços executados mais p0).
    """

    def __init__(self, initial_price: float, total_steps: int):
        self.initial_price = initial_price
        self.prices = np.full(total_steps, np.nan)
        self.all_time_high = initial_price
        self.all_time_low = initial_price
        self.last_price = initial_price
        self.recorded = 0

    def observe_trade(self, price: float) -> None:
        self.last_price = price
        if price > self.all_time_high:
            self.all_time_high = price
        if price < self.all_time_low:
            self.all_time_low = price

    def close_step(self, step: int) -> None:
        """Fixa o preço de mercado do passo."""
        self.prices[step] = self.last_price
        self.recorded = step + 1

    def lagged(self, step: int, lag: int) -> float:
        """Preço em step - lag; antes do início da série usa p0."""
        index = step - lag
        if index < 0:
            return self.initial_price
        return float(self.prices[index])

    def log_return_variance(self, step: int, window: int) -> float:
        """Variância amostral dos retornos log de um passo nos últimos `window` passos."""
        start = max(0, step - window)
        segment = self.prices[start:step]
        if len(segment) < 3:
            return 0.0
        returns = np.diff(np.log(segment))
        return float(np.var(returns))


@dataclass(frozen=True)
class SimClock:
    """Relógio da simulação: passo global, dia e total de passos."""
    step: int
    day: int
    total_steps: int

    @property
    def remaining(self) -> int:
        return self.total_steps - self.step


@dataclass(frozen=True)
class MarketSnapshot:
    """Tudo o que um agente observa no passo t."""
    step: int
    day: int
    market_price: float
    fundamental_price: float
    best_bid: Optional[float]
    best_ask: Optional[float]
    mid_price: Optional[float]
    ofi: float
    all_time_high: float
    all_time_low: float
    remaining_time: int
    total_time: int
    history: Optional[PriceHistory] = None

    def lagged_price(self, lag: int) -> float:
        if self.history is None:
            return self.market_price
        return self.history.lagged(self.step, lag)

    def return_variance(self, window: int) -> float:
        if self.history is None:
            return 0.0
        return self.history.log_return_variance(self.step, window)

    @property
    def nearness(self) -> float:
        return self.market_price / self.all_time_high


@dataclass(frozen=True)
class OrderRequest:
    """Ordem proposta por um agente, já na grade de ticks."""
    price_ticks: int
    signed_volume: int

    @property
    def is_buy(self) -> bool:
        return self.signed_volume > 0

    def price(self, price_scale: int) -> float:
        return self.price_ticks / price_scale


def is_finite_positive(value: float) -> bool:
    return value is not None and math.isfinite(value) and value > 0
