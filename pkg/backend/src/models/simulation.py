"""
Configuração plana de um experimento de simulação.

Cada chave do documento JSON corresponde exatamente a um campo de SimConfig;
chaves desconhecidas são rejeitadas. Os objetos aninhados (população FCN,
população FCL e provedor de decisão) são montados a partir das chaves com
prefixo `fcl_` e `provider_`.
"""
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from ..agents.population import PopulationConfig
from .decision import ProviderConfig, ProviderKind


class VarianceMode(str, Enum):
    """Como o agente FCN estima a variância V da regra de demanda."""
    EMPIRICAL = "empirical"
    NOISE_HORIZON = "noise_horizon"


Interval = Tuple[float, float]


class SimConfig(BaseModel):
    """
    Parâmetros de uma simulação. Os padrões reproduzem o preset completo:
    1000 agentes, 500 dias de 1610 passos, p0 = 300.00, tick 0.01.
    """
    # Estrutura do mercado
    n_agents: int = Field(1000, ge=1)
    n_fcl: int = Field(0, ge=0)
    days: int = Field(500, ge=1)
    day_structure: Tuple[int, int, int, int] = (100, 750, 10, 750)
    initial_price: float = Field(300.0, gt=0)
    tick_size: float = Field(0.01, gt=0)
    fundamental_volatility: float = Field(1e-4, ge=0)
    seed: int = Field(0, ge=0)

    # População FCN
    lambda_f: float = Field(10.0, gt=0)
    lambda_c: float = Field(1.5, gt=0)
    lambda_n: float = Field(1.0, gt=0)
    sigma_n: float = Field(0.01, gt=0)
    alpha_ref: float = Field(0.1, gt=0)
    alpha_diff: float = Field(20.0, gt=0)
    tau_ref: float = Field(100.0, gt=0)
    tau_diff: float = Field(30.0, gt=0)
    tau_fundamental: int = Field(200, ge=1)
    cash_range: Interval = (0.0, 30000.0)
    position_range: Interval = (0.0, 100.0)
    margin_range: Interval = (0.0, 0.01)

    # População FCL (None herda o valor FCN)
    fcl_fixed_volume: int = Field(100, ge=1)
    fcl_cash_range: Interval = (0.0, 100000.0)
    fcl_position_range: Interval = (0.0, 300.0)
    fcl_margin_range: Interval = (0.0, 0.01)
    fcl_lambda_f: Optional[float] = Field(None, gt=0)
    fcl_lambda_c: Optional[float] = Field(None, gt=0)
    fcl_lambda_n: Optional[float] = Field(None, gt=0)
    fcl_sigma_n: Optional[float] = Field(None, gt=0)
    fcl_alpha_ref: Optional[float] = Field(None, gt=0)
    fcl_tau_ref: Optional[float] = Field(None, gt=0)

    # Regra de ordens FCN
    price_spread: float = Field(0.01, ge=0, lt=1)
    max_order_volume: int = Field(100, ge=1)
    variance_mode: VarianceMode = VarianceMode.NOISE_HORIZON
    variance_floor: float = Field(1e-8, gt=0)
    order_lifetime: Optional[int] = Field(None, ge=1, description="None usa o τ^j do agente")

    # Registro
    prompt_history_limit: Optional[int] = Field(None, ge=0)
    record_snapshots: bool = True

    # Provedor de decisão dos agentes FCL
    provider_kind: ProviderKind = ProviderKind.ALWAYS_BUY
    provider_endpoint: Optional[str] = None
    provider_model_name: str = "llama-3.1-8b-instruct"
    provider_max_retries: int = Field(2, ge=0, le=10)
    provider_timeout: float = Field(30.0, gt=0)
    provider_temperature: float = Field(1.0, ge=0.0, le=2.0)
    provider_api_key_env: str = "LLM_API_KEY"
    provider_transport_retries: int = Field(3, ge=1)
    provider_sell_bias_at_ath: float = Field(0.9, ge=0.0, le=1.0)
    provider_buy_bias_at_loss: float = Field(0.8, ge=0.0, le=1.0)

    model_config = {"extra": "forbid"}

    @field_validator("day_structure")
    @classmethod
    def check_day_structure(cls, value: Tuple[int, int, int, int]) -> Tuple[int, int, int, int]:
        if any(part < 1 for part in value):
            raise ValueError("todas as fases do dia precisam ter ao menos 1 passo")
        return value

    @field_validator(
        "cash_range", "position_range", "margin_range",
        "fcl_cash_range", "fcl_position_range", "fcl_margin_range",
    )
    @classmethod
    def check_interval(cls, value: Interval) -> Interval:
        low, high = value
        if low > high:
            raise ValueError(f"intervalo vazio: {value}")
        return value

    @model_validator(mode="after")
    def check_population(self) -> "SimConfig":
        if self.n_fcl > self.n_agents:
            raise ValueError("n_fcl não pode exceder n_agents")
        if self.n_fcl > 0 and self.provider_kind == ProviderKind.REMOTE and not self.provider_endpoint:
            raise ValueError("provider_endpoint é obrigatório para provider_kind=remote")
        return self

    @property
    def steps_per_day(self) -> int:
        return sum(self.day_structure)

    @property
    def total_steps(self) -> int:
        return self.steps_per_day * self.days

    @property
    def price_scale(self) -> int:
        """Número de ticks por unidade monetária."""
        return int(round(1.0 / self.tick_size))

    def continuous_steps_per_day(self) -> int:
        return self.day_structure[1] + self.day_structure[3]

    def fcn_population(self) -> PopulationConfig:
        return PopulationConfig(
            lambda_f=self.lambda_f,
            lambda_c=self.lambda_c,
            lambda_n=self.lambda_n,
            sigma_n=self.sigma_n,
            alpha_ref=self.alpha_ref,
            tau_ref=self.tau_ref,
            alpha_diff=self.alpha_diff,
            tau_diff=self.tau_diff,
            tau_fundamental=self.tau_fundamental,
            cash_range=tuple(self.cash_range),
            position_range=tuple(self.position_range),
            margin_range=tuple(self.margin_range),
        )

    def fcl_population(self) -> PopulationConfig:
        base = self.fcn_population()
        return base.with_overrides(
            lambda_f=self.fcl_lambda_f,
            lambda_c=self.fcl_lambda_c,
            lambda_n=self.fcl_lambda_n,
            sigma_n=self.fcl_sigma_n,
            alpha_ref=self.fcl_alpha_ref,
            tau_ref=self.fcl_tau_ref,
            cash_range=tuple(self.fcl_cash_range),
            position_range=tuple(self.fcl_position_range),
            margin_range=tuple(self.fcl_margin_range),
        )

    def provider(self) -> ProviderConfig:
        return ProviderConfig(
            kind=self.provider_kind,
            endpoint=self.provider_endpoint,
            model_name=self.provider_model_name,
            max_retries=self.provider_max_retries,
            timeout=self.provider_timeout,
            temperature=self.provider_temperature,
            api_key_env=self.provider_api_key_env,
            transport_retries=self.provider_transport_retries,
            sell_bias_at_ath=self.provider_sell_bias_at_ath,
            buy_bias_at_loss=self.provider_buy_bias_at_loss,
        )


class SingleTurnSettings(BaseModel):
    """Documento de configuração do experimento de turno único."""
    trials: int = Field(100, ge=1)
    seed: int = Field(0, ge=0)
    p1: float = Field(300.0, gt=0)
    v1: int = Field(10, ge=1)
    cash: float = 30000.0
    t: int = Field(50, ge=0)
    total_time: int = Field(100, ge=1)
    gain_return_range: Interval = (0.0, 0.5)
    loss_return_range: Interval = (-0.5, 0.0)
    max_in_flight: int = Field(4, ge=1)
    providers: List[ProviderConfig] = Field(default_factory=lambda: [ProviderConfig()])

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_clock(self) -> "SingleTurnSettings":
        if self.t > self.total_time:
            raise ValueError("t não pode exceder total_time")
        for low, high in (self.gain_return_range, self.loss_return_range):
            if low > high:
                raise ValueError("r_min deve ser <= r_max")
        return self
