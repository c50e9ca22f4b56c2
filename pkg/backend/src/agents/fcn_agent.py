"""
Agente FCN (fundamentalista, chartista e ruído).

Previsão de retorno:
    r̂ = [w_f·(1/τ^f)·ln(p_f/p_t) + w_c·(1/τ^j)·ln(p_t/p_lag) + w_n·σ^n·ε] / (w_f + w_c + w_n)
    p̂ = p_t·exp(τ^j·r̂)

Ordem: preço p_o ~ U[p̂(1−Δ), p̂(1+Δ)] e posição desejada pela demanda CARA
    w* = ln(p̂/p_o) / (α^j·V·p_o)
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.base_agent import BaseAgent
from ..core.errors import InvalidInputError
from ..core.market import MarketSnapshot, OrderRequest
from ..core.order_book import price_to_ticks
from .population import AgentState, FcnParams, PopulationConfig

VARIANCE_EMPIRICAL = "empirical"
VARIANCE_NOISE_HORIZON = "noise_horizon"


@dataclass(frozen=True)
class Prediction:
    r_hat: float
    p_hat: float


@dataclass(frozen=True)
class OrderRules:
    """Parâmetros da regra de ordens FCN."""
    price_spread: float = 0.01
    max_order_volume: int = 100
    variance_mode: str = VARIANCE_NOISE_HORIZON
    variance_floor: float = 1e-8
    price_scale: int = 100

    @classmethod
    def from_config(cls, cfg) -> "OrderRules":
        return cls(
            price_spread=cfg.price_spread,
            max_order_volume=cfg.max_order_volume,
            variance_mode=getattr(cfg.variance_mode, "value", cfg.variance_mode),
            variance_floor=cfg.variance_floor,
            price_scale=cfg.price_scale,
        )


def fcn_predict(
    params: FcnParams,
    p_t: float,
    p_f: float,
    p_lag: float,
    eps: float,
    cfg: PopulationConfig,
) -> Prediction:
    """
    Previsão de retorno e preço do agente.

    Args:
        params: Pesos e horizonte do agente
        p_t: Preço de mercado atual
        p_f: Preço fundamental atual
        p_lag: Preço em t − τ^j
        eps: Sorteio normal padrão do componente de ruído
        cfg: Configuração da população (σ^n e τ^f)

    Returns:
        Prediction: r̂ e p̂

    Raises:
        InvalidInputError: Preço não positivo
    """
    if p_t <= 0 or p_f <= 0 or p_lag <= 0:
        raise InvalidInputError(f"Preços devem ser positivos: p_t={p_t}, p_f={p_f}, p_lag={p_lag}")

    fundamental = params.w_f * math.log(p_f / p_t) / cfg.tau_fundamental
    chartist = params.w_c * math.log(p_t / p_lag) / params.tau_j
    noise = params.w_n * cfg.sigma_n * eps
    r_hat = (fundamental + chartist + noise) / params.weight_sum
    return Prediction(r_hat=r_hat, p_hat=p_t * math.exp(params.tau_j * r_hat))


def fcn_demand(alpha_j: float, p_hat: float, p_o: float, variance: float) -> float:
    """Posição desejada w* = ln(p̂/p_o) / (α^j·V·p_o)."""
    return math.log(p_hat / p_o) / (alpha_j * variance * p_o)


def demand_variance(params: FcnParams, snapshot: MarketSnapshot, population: PopulationConfig, rules: OrderRules) -> float:
    """Variância V usada na demanda: empírica na janela τ^j ou (σ^n)²·τ^j."""
    if rules.variance_mode == VARIANCE_NOISE_HORIZON:
        return population.sigma_n ** 2 * params.tau_j
    return max(snapshot.return_variance(params.tau_j), rules.variance_floor)


def fcn_decide_order(
    params: FcnParams,
    state: AgentState,
    snapshot: MarketSnapshot,
    rng: np.random.Generator,
    population: PopulationConfig,
    rules: OrderRules,
) -> Optional[OrderRequest]:
    """
    Escolhe preço e volume de uma ordem limitada.

    Returns:
        Optional[OrderRequest]: Ordem ou None quando o volume resultante é zero
    """
    p_lag = snapshot.lagged_price(params.tau_j)
    prediction = fcn_predict(
        params, snapshot.market_price, snapshot.fundamental_price, p_lag, float(rng.standard_normal()), population
    )
    p_hat = prediction.p_hat

    low, high = p_hat * (1.0 - rules.price_spread), p_hat * (1.0 + rules.price_spread)
    drawn = float(rng.uniform(low, high))
    if drawn <= 0:
        return None

    variance = demand_variance(params, snapshot, population, rules)
    volume = _order_volume(params, state, p_hat, drawn, variance, rules)
    if not volume:
        return None

    # w* decresce com p_o: compra arredondada para baixo e venda para cima mantêm o lado
    price_ticks = price_to_ticks(drawn, rules.price_scale, is_buy=volume > 0)
    volume = _order_volume(params, state, p_hat, price_ticks / rules.price_scale, variance, rules)
    if not volume:
        return None
    return OrderRequest(price_ticks=price_ticks, signed_volume=volume)


def _order_volume(
    params: FcnParams, state: AgentState, p_hat: float, p_o: float, variance: float, rules: OrderRules
) -> Optional[int]:
    """round(w*) − posição, limitado a ±q_max; None quando a demanda não é finita."""
    target = fcn_demand(params.alpha_j, p_hat, p_o, variance)
    if not math.isfinite(target):
        return None
    q_max = rules.max_order_volume
    return max(-q_max, min(q_max, int(round(target)) - state.position))


class FCNAgent(BaseAgent):
    """Agente fundamentalista-chartista-ruído com demanda CARA"""

    kind = "fcn"

    def __init__(
        self,
        agent_id: int,
        params: FcnParams,
        state: AgentState,
        population: PopulationConfig,
        rules: OrderRules,
    ):
        super().__init__(agent_id, params, state)
        self.population = population
        self.rules = rules
        self.description = "Agente FCN com previsão fundamentalista, chartista e de ruído"

    async def decide(self, snapshot: MarketSnapshot, rng: np.random.Generator) -> Optional[OrderRequest]:
        return fcn_decide_order(self.params, self.state, snapshot, rng, self.population, self.rules)
