"""
Modelos do módulo de decisão: contexto observado pelo agente FCL,
decisão devolvida pelo provedor e configuração do provedor.
"""
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator


class Intention(str, Enum):
    """Intenção de ordem devolvida por um provedor de decisão."""
    BUY = "buy"
    SELL = "sell"

    @property
    def is_buy(self) -> bool:
        return self is Intention.BUY


class HistoryEntry(BaseModel):
    """Uma linha do histórico de negociação: (market id, preço, volume com sinal)."""
    market_id: int = 0
    price: float
    volume: int


class DecisionContext(BaseModel):
    """
    Tudo o que o agente (ou o prompt) observa no momento da decisão:
    portfólio, condição de mercado, histórico e OFI.
    """
    cash: float
    position: int
    unrealized_gain: float
    market_price: float = Field(..., gt=0)
    all_time_high: float = Field(..., gt=0)
    all_time_low: float = Field(..., gt=0)
    remaining_time: int = Field(..., ge=0)
    total_time: int = Field(..., ge=0)
    history: List[HistoryEntry] = []
    ofi: float = Field(0.0, ge=-1.0, le=1.0)
    market_id: int = 0

    @model_validator(mode="after")
    def check_ranges(self) -> "DecisionContext":
        # tolerância de arredondamento nos extremos
        eps = 1e-9 * max(1.0, self.all_time_high)
        if not (self.all_time_low - eps <= self.market_price <= self.all_time_high + eps):
            raise ValueError("market_price deve estar entre all_time_low e all_time_high")
        if self.remaining_time > self.total_time:
            raise ValueError("remaining_time não pode exceder total_time")
        return self

    @property
    def nearness(self) -> float:
        """Proximidade da máxima histórica: p_t / p^h."""
        return self.market_price / self.all_time_high


class Decision(BaseModel):
    """
    Decisão no formato de resposta do prompt.
    order_price e order_volume são apenas indicativos; o agente FCL
    calcula preço e volume por regras determinísticas.
    """
    market_id: str = "0"
    is_buy: bool
    order_price: Optional[float] = None
    order_volume: Optional[int] = None
    reason: str = ""

    @property
    def intention(self) -> Intention:
        return Intention.BUY if self.is_buy else Intention.SELL


class ProviderKind(str, Enum):
    ALWAYS_BUY = "scripted-always-buy"
    ALWAYS_SELL = "scripted-always-sell"
    LOSS_AVERSE = "scripted-loss-averse"
    SELL_IF_GAIN = "scripted-sell-if-gain"
    REMOTE = "remote"


class ProviderConfig(BaseModel):
    """
    Configuração de um provedor de decisão.
    """
    kind: ProviderKind = ProviderKind.ALWAYS_BUY
    name: Optional[str] = Field(None, description="Rótulo usado nas tabelas de resultado")
    endpoint: Optional[str] = Field(None, description="URL chat-completions (apenas remote)")
    model_name: str = "llama-3.1-8b-instruct"
    max_retries: int = Field(2, ge=0, le=10, description="Novas tentativas após resposta inválida")
    timeout: float = Field(30.0, gt=0, description="Timeout por requisição, em segundos")
    temperature: float = Field(1.0, ge=0.0, le=2.0)
    api_key_env: str = Field("LLM_API_KEY", description="Variável de ambiente com a chave da API")
    transport_retries: int = Field(3, ge=1, description="Tentativas de transporte (tenacity)")
    sell_bias_at_ath: float = Field(0.9, ge=0.0, le=1.0)
    buy_bias_at_loss: float = Field(0.8, ge=0.0, le=1.0)

    model_config = {"extra": "forbid", "protected_namespaces": ()}

    @model_validator(mode="after")
    def check_endpoint(self) -> "ProviderConfig":
        if self.kind == ProviderKind.REMOTE and not self.endpoint:
            raise ValueError("provedor remote exige endpoint")
        return self

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == ProviderKind.REMOTE:
            return f"remote:{self.model_name}"
        return self.kind.value
