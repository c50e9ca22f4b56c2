"""
Experimento de turno único: uma decisão por tentativa em quatro cenários de
ponto de referência.

- G+: ganho, preço atual é a máxima histórica
- G-: ganho, máxima histórica p1·exp(2r) acima do preço atual
- L-: perda, preço atual é a mínima histórica
- L+: perda, mínima histórica p1·exp(2r) abaixo do preço atual
"""
import asyncio
import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

import httpx
import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, model_validator

from ..core.errors import ProviderUnavailableError
from ..integrations.scripted_providers import DecisionProvider, build_provider, close_provider
from ..models.decision import DecisionContext, HistoryEntry, Intention
from ..models.reports import Tally
from ..models.simulation import SingleTurnSettings

FAILURE_WARNING_RATE = 0.5


class ScenarioKind(str, Enum):
    G_PLUS = "G+"
    G_MINUS = "G-"
    L_MINUS = "L-"
    L_PLUS = "L+"

    @property
    def is_gain(self) -> bool:
        return self in (ScenarioKind.G_PLUS, ScenarioKind.G_MINUS)


SCENARIO_ORDER = [ScenarioKind.G_PLUS, ScenarioKind.G_MINUS, ScenarioKind.L_MINUS, ScenarioKind.L_PLUS]


class ScenarioConfig(BaseModel):
    """Parâmetros de um cenário."""
    kind: ScenarioKind
    r_min: float
    r_max: float
    p1: float = Field(300.0, gt=0)
    v1: int = Field(10, ge=1)
    cash: float = 30000.0
    t: int = Field(50, ge=0)
    total_time: int = Field(100, ge=1)
    trials: int = Field(100, ge=1)
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def check_range(self) -> "ScenarioConfig":
        if self.r_min > self.r_max:
            raise ValueError("r_min deve ser <= r_max")
        if self.t > self.total_time:
            raise ValueError("t não pode exceder total_time")
        return self

    @classmethod
    def from_settings(cls, settings: SingleTurnSettings, kind: ScenarioKind) -> "ScenarioConfig":
        r_min, r_max = settings.gain_return_range if kind.is_gain else settings.loss_return_range
        return cls(
            kind=kind,
            r_min=r_min,
            r_max=r_max,
            p1=settings.p1,
            v1=settings.v1,
            cash=settings.cash,
            t=settings.t,
            total_time=settings.total_time,
            trials=settings.trials,
            seed=settings.seed,
        )


def scenario_context(cfg: ScenarioConfig, r_t: float) -> DecisionContext:
    """
    Contexto de decisão para um retorno r_t já sorteado.

    Args:
        cfg: Cenário
        r_t: Retorno log desde a compra

    Returns:
        DecisionContext: Portfólio (caixa, v1, ganho), extremos conforme o cenário,
        histórico com a compra inicial e OFI zero
    """
    p1 = cfg.p1
    p_t = p1 * math.exp(r_t)
    shifted = p1 * math.exp(2.0 * r_t)

    if cfg.kind == ScenarioKind.G_PLUS:
        high, low = p_t, min(p1, p_t)
    elif cfg.kind == ScenarioKind.G_MINUS:
        high, low = shifted, min(p1, p_t)
    elif cfg.kind == ScenarioKind.L_MINUS:
        high, low = max(p1, p_t), p_t
    else:
        high, low = max(p1, p_t), shifted

    return DecisionContext(
        cash=cfg.cash,
        position=cfg.v1,
        unrealized_gain=cfg.v1 * (p_t - p1),
        market_price=p_t,
        all_time_high=high,
        all_time_low=low,
        remaining_time=cfg.total_time - cfg.t,
        total_time=cfg.total_time,
        history=[HistoryEntry(market_id=0, price=p1, volume=cfg.v1)],
        ofi=0.0,
    )


def setup_scenario(cfg: ScenarioConfig, rng: np.random.Generator) -> DecisionContext:
    """Sorteia r_t ~ U[r_min, r_max] e monta o contexto do cenário."""
    r_t = float(rng.uniform(cfg.r_min, cfg.r_max))
    return scenario_context(cfg, r_t)


async def _one_trial(
    cfg: ScenarioConfig,
    provider: DecisionProvider,
    trial: int,
    semaphore: asyncio.Semaphore,
) -> Optional[Intention]:
    rng = np.random.default_rng(cfg.seed + trial)
    ctx = setup_scenario(cfg, rng)
    async with semaphore:
        try:
            return await provider.decide(ctx, rng)
        except ProviderUnavailableError as e:
            logger.warning(f"{cfg.kind.value} tentativa {trial}: provedor indisponível ({e})")
            return None


async def run_scenario(cfg: ScenarioConfig, provider: DecisionProvider, max_in_flight: int = 4) -> Tally:
    """
    Executa as tentativas de um cenário e conta as intenções.

    Args:
        cfg: Cenário (tentativas e semente base)
        provider: Provedor de decisão
        max_in_flight: Limite de decisões simultâneas

    Returns:
        Tally: Compras, vendas e falhas
    """
    semaphore = asyncio.Semaphore(max_in_flight)
    outcomes = await asyncio.gather(*[
        _one_trial(cfg, provider, trial, semaphore) for trial in range(cfg.trials)
    ])
    tally = Tally()
    for outcome in outcomes:
        if outcome is None:
            tally.failures += 1
        elif outcome.is_buy:
            tally.buys += 1
        else:
            tally.sells += 1
    return tally


async def run_scenarios(settings: SingleTurnSettings, provider: DecisionProvider) -> Dict[ScenarioKind, Tally]:
    """Executa os quatro cenários para um provedor."""
    results: Dict[ScenarioKind, Tally] = {}
    for kind in SCENARIO_ORDER:
        cfg = ScenarioConfig.from_settings(settings, kind)
        results[kind] = await run_scenario(cfg, provider, settings.max_in_flight)
        logger.info(f"{provider.label} {kind.value}: {results[kind].cell()} falhas={results[kind].failures}")
    return results


async def run_single_turn(
    settings: SingleTurnSettings,
    transport: Optional[httpx.AsyncBaseTransport] = None,
) -> List[Tuple[str, Dict[ScenarioKind, Tally]]]:
    """
    Executa o experimento para cada provedor configurado.

    Returns:
        List[Tuple[str, Dict[ScenarioKind, Tally]]]: (rótulo do provedor, contagem por cenário)
    """
    rows = []
    for provider_cfg in settings.providers:
        provider = build_provider(provider_cfg, transport=transport)
        try:
            rows.append((provider.label, await run_scenarios(settings, provider)))
        finally:
            await close_provider(provider)
    return rows


def failure_rate(tallies: Dict[ScenarioKind, Tally]) -> float:
    trials = sum(tally.trials for tally in tallies.values())
    failures = sum(tally.failures for tally in tallies.values())
    return failures / trials if trials else 0.0
