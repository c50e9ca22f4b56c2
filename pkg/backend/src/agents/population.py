"""
Parâmetros de população e estado de portfólio compartilhados pelos agentes FCN e FCL.

Atributos sorteados por agente:
    w_f, w_c, w_n: pesos fundamentalista, chartista e de ruído (exponenciais)
    tau_j: horizonte de previsão, função de (w_f, w_c)
    alpha_j: aversão a risco, função de (w_f, w_c)
    margin_j: margem de preço das ordens FCL
"""
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from ..core.errors import InvalidInputError


@dataclass(frozen=True)
class PopulationConfig:
    """Níveis de referência e intervalos de sorteio de uma população de agentes."""
    lambda_f: float = 10.0
    lambda_c: float = 1.5
    lambda_n: float = 1.0
    sigma_n: float = 0.01
    alpha_ref: float = 0.1
    tau_ref: float = 100.0
    alpha_diff: float = 20.0
    tau_diff: float = 30.0
    tau_fundamental: int = 200
    cash_range: Tuple[float, float] = (0.0, 30000.0)
    position_range: Tuple[float, float] = (0.0, 100.0)
    margin_range: Tuple[float, float] = (0.0, 0.01)

    def __post_init__(self):
        positives = (
            self.lambda_f, self.lambda_c, self.lambda_n, self.sigma_n,
            self.alpha_ref, self.tau_ref, self.alpha_diff, self.tau_diff,
        )
        if any(value <= 0 for value in positives) or self.tau_fundamental < 1:
            raise InvalidInputError("Parâmetros de população devem ser positivos")
        for low, high in (self.cash_range, self.position_range, self.margin_range):
            if low > high:
                raise InvalidInputError(f"Intervalo vazio: ({low}, {high})")

    def with_overrides(self, **overrides) -> "PopulationConfig":
        """Copia a configuração trocando apenas os valores não nulos."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


@dataclass(frozen=True)
class FcnParams:
    """Pesos e atributos de risco de um agente."""
    w_f: float
    w_c: float
    w_n: float
    tau_j: int
    alpha_j: float
    margin_j: float = 0.0

    def __post_init__(self):
        if min(self.w_f, self.w_c, self.w_n) < 0 or (self.w_f + self.w_c + self.w_n) <= 0:
            raise InvalidInputError("Pesos devem ser não negativos e não todos nulos")
        if self.tau_j < 1:
            raise InvalidInputError("tau_j deve ser >= 1")
        if self.alpha_j <= 0:
            raise InvalidInputError("alpha_j deve ser positivo")

    @property
    def weight_sum(self) -> float:
        return self.w_f + self.w_c + self.w_n


@dataclass(frozen=True)
class Fill:
    """
    Execução registrada no histórico do agente.
    cost é Σ preço·volume das execuções agregadas; price é o preço médio.
    """
    time: int
    price: float
    signed_volume: int
    cost: float

    @classmethod
    def single(cls, time: int, price: float, signed_volume: int) -> "Fill":
        return cls(time, price, signed_volume, price * signed_volume)


@dataclass
class AgentState:
    """
    Portfólio de um agente: caixa, posição e histórico de execuções.
    Execuções do mesmo passo são agregadas em uma entrada (preço médio ponderado).
    """
    cash: float
    position: int
    initial_cash: float = field(init=False)
    initial_position: int = field(init=False)
    fixed_volume: Optional[int] = None
    history: List[Fill] = field(default_factory=list)

    def __post_init__(self):
        if self.fixed_volume is not None and self.fixed_volume < 1:
            raise InvalidInputError(f"Volume fixo deve ser >= 1: {self.fixed_volume}")
        self.initial_cash = self.cash
        self.initial_position = self.position

    def record_fill(self, time: int, price: float, signed_volume: int) -> None:
        """
        Aplica uma execução ao portfólio (compra: volume positivo).

        Args:
            time: Passo da execução
            price: Preço de execução
            signed_volume: Volume com sinal
        """
        if signed_volume == 0:
            return
        if self.history and time < self.history[-1].time:
            raise InvalidInputError("Histórico deve ser registrado em ordem temporal")

        self.cash -= price * signed_volume
        self.position += signed_volume

        last = self.history[-1] if self.history else None
        if last is None or last.time != time:
            self.history.append(Fill.single(time, price, signed_volume))
            return

        # autoexecução zera o volume; o custo residual continua no histórico
        merged_volume = last.signed_volume + signed_volume
        merged_cost = last.cost + price * signed_volume
        merged_price = merged_cost / merged_volume if merged_volume else price
        self.history[-1] = Fill(time, merged_price, merged_volume, merged_cost)

    def spent(self) -> float:
        """Custo líquido total (vendas entram com volume negativo)."""
        return math.fsum(fill.cost for fill in self.history)


def sample_params(cfg: PopulationConfig, rng: np.random.Generator) -> FcnParams:
    """
    Sorteia os parâmetros de um agente.

    w ~ Exp(média λ); α^j = α·(α^diff + w_f)/(α^diff + w_c);
    τ^j = ⌈τ·(τ^diff + w_f)/(τ^diff + w_c)⌉; margem ~ U(m_min, m_max).

    Args:
        cfg: Configuração da população
        rng: Gerador numpy semeado

    Returns:
        FcnParams: Parâmetros do agente
    """
    w_f = float(rng.exponential(cfg.lambda_f))
    w_c = float(rng.exponential(cfg.lambda_c))
    w_n = float(rng.exponential(cfg.lambda_n))
    margin = float(rng.uniform(*cfg.margin_range))
    return derive_params(cfg, w_f, w_c, w_n, margin)


def derive_params(cfg: PopulationConfig, w_f: float, w_c: float, w_n: float, margin: float = 0.0) -> FcnParams:
    """Calcula α^j e τ^j a partir dos pesos sorteados."""
    alpha_j = cfg.alpha_ref * (cfg.alpha_diff + w_f) / (cfg.alpha_diff + w_c)
    # 1e-9 absorve erro de ponto flutuante quando a razão é exatamente inteira
    tau_j = max(1, math.ceil(cfg.tau_ref * (cfg.tau_diff + w_f) / (cfg.tau_diff + w_c) - 1e-9))
    return FcnParams(w_f=w_f, w_c=w_c, w_n=w_n, tau_j=tau_j, alpha_j=alpha_j, margin_j=margin)


def sample_state(cfg: PopulationConfig, rng: np.random.Generator, fixed_volume: Optional[int] = None) -> AgentState:
    """
    Sorteia o portfólio inicial: caixa ~ U(c_min, c_max), posição = ⌈U(w_min, w_max)⌉.
    """
    cash = float(rng.uniform(*cfg.cash_range))
    position = int(math.ceil(rng.uniform(*cfg.position_range)))
    return AgentState(cash=cash, position=position, fixed_volume=fixed_volume)
