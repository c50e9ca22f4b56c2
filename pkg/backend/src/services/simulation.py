"""
Agendador da simulação de mercado.

Cada passo: expira ordens vencidas, avança o preço fundamental, sorteia um
agente, monta o instantâneo de mercado, pede no máximo uma ordem, casa
conforme a fase (contínua ou coleta), dispara o leilão ao fim de cada fase
de coleta e registra eventos (order, trade, skip, snapshot).

Estrutura de um dia (c1, k1, c2, k2): coleta, contínua, coleta, contínua.
"""
import asyncio
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import httpx
import numpy as np
import pandas as pd
from loguru import logger

from ..agents.fcl_agent import FCLAgent
from ..agents.fcn_agent import FCNAgent, OrderRules
from ..agents.population import AgentState, sample_params, sample_state
from ..core.agent_manager import AgentManager
from ..core.errors import ProviderUnavailableError
from ..core.market import MarketSnapshot, OrderRequest, PriceHistory, SimClock
from ..core.order_book import MatchMode, Order, OrderBook, Trade
from ..integrations.scripted_providers import DecisionProvider, build_provider, close_provider
from ..models.simulation import SimConfig

TICK_COLUMNS = [
    "step", "day", "event", "agent_id", "price", "signed_volume",
    "market_price", "mid_price", "ofi", "order_id", "expiry",
]
PORTFOLIO_COLUMNS = ["step", "agent_id", "cash", "position", "market_price"]
NULLABLE_INT_COLUMNS = ("agent_id", "order_id", "expiry")

EVENT_ORDER = "order"
EVENT_TRADE = "trade"
EVENT_SNAPSHOT = "snapshot"
EVENT_SKIP = "skip"


@dataclass(frozen=True)
class FundamentalPath:
    """Caminho do preço fundamental, um valor por passo."""
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, step: int) -> float:
        return float(self.values[step])


def generate_fundamental(cfg: SimConfig, rng: np.random.Generator) -> FundamentalPath:
    """
    Movimento browniano geométrico sem drift: p^f_{t+1} = p^f_t·exp(vol·z_t).

    Args:
        cfg: Configuração (p0, volatilidade e número de passos)
        rng: Gerador semeado

    Returns:
        FundamentalPath: values[0] = p0, comprimento total_steps
    """
    steps = cfg.total_steps
    shocks = cfg.fundamental_volatility * rng.standard_normal(steps - 1)
    log_path = np.concatenate(([0.0], np.cumsum(shocks)))
    return FundamentalPath(values=cfg.initial_price * np.exp(log_path))


def phase_mode(offset: int, day_structure: Tuple[int, int, int, int]) -> MatchMode:
    """Modo de casamento do passo `offset` dentro do dia."""
    collect_1, continuous_1, collect_2, _ = day_structure
    second_start = collect_1 + continuous_1
    if offset < collect_1 or second_start <= offset < second_start + collect_2:
        return MatchMode.COLLECTING
    return MatchMode.CONTINUOUS


def auction_due(offset: int, day_structure: Tuple[int, int, int, int]) -> bool:
    """True no último passo de cada fase de coleta."""
    collect_1, continuous_1, collect_2, _ = day_structure
    return offset == collect_1 - 1 or offset == collect_1 + continuous_1 + collect_2 - 1


def snapshot(
    book: OrderBook,
    fundamentals: FundamentalPath,
    clock: SimClock,
    price_history: PriceHistory,
) -> MarketSnapshot:
    """
    Instantâneo de mercado no passo do relógio.

    Preço de mercado = última execução (ou p0); máxima/mínima sobre execuções ∪ {p0}.
    """
    mid = book.mid_price()
    return MarketSnapshot(
        step=clock.step,
        day=clock.day,
        market_price=price_history.last_price,
        fundamental_price=fundamentals[clock.step],
        best_bid=book.to_price(book.best_bid()),
        best_ask=book.to_price(book.best_ask()),
        mid_price=book.to_price(mid),
        ofi=book.order_flow_imbalance(),
        all_time_high=price_history.all_time_high,
        all_time_low=price_history.all_time_low,
        remaining_time=clock.remaining,
        total_time=clock.total_steps,
        history=price_history,
    )


class TickRecorder:
    """Acumula eventos em colunas e gera o DataFrame de ticks."""

    def __init__(self):
        self.columns: Dict[str, List[Any]] = {name: [] for name in TICK_COLUMNS}

    def record(
        self,
        step: int,
        day: int,
        event: str,
        price: float,
        signed_volume: int,
        market_price: float,
        mid_price: Optional[float],
        ofi: float,
        agent_id: Optional[int] = None,
        order_id: Optional[int] = None,
        expiry: Optional[int] = None,
    ) -> None:
        row = (step, day, event, agent_id, price, signed_volume, market_price,
               np.nan if mid_price is None else mid_price, ofi, order_id, expiry)
        for name, value in zip(TICK_COLUMNS, row):
            self.columns[name].append(value)

    def __len__(self) -> int:
        return len(self.columns["step"])

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.columns, columns=TICK_COLUMNS)
        for name in NULLABLE_INT_COLUMNS:
            frame[name] = frame[name].astype("Int64")
        return frame


@dataclass
class SimulationResult:
    """Saída de uma simulação."""
    ticks: pd.DataFrame
    portfolio_log: pd.DataFrame
    states: Dict[int, AgentState]
    fcl_ids: List[int]
    book: OrderBook
    fundamental: FundamentalPath
    stats: Dict[str, Any] = field(default_factory=dict)


def build_population(
    cfg: SimConfig,
    rng: np.random.Generator,
    provider: Optional[DecisionProvider],
) -> AgentManager:
    """
    Cria os agentes: ids 0..n_fcl−1 são FCL, os demais FCN.

    Args:
        cfg: Configuração da simulação
        rng: Gerador da população
        provider: Provedor de decisão dos agentes FCL

    Returns:
        AgentManager: Gerenciador com todos os agentes registrados
    """
    manager = AgentManager()
    rules = OrderRules.from_config(cfg)
    fcn_population = cfg.fcn_population()
    fcl_population = cfg.fcl_population()

    for agent_id in range(cfg.n_agents):
        if agent_id < cfg.n_fcl:
            params = sample_params(fcl_population, rng)
            state = sample_state(fcl_population, rng, fixed_volume=cfg.fcl_fixed_volume)
            manager.register_agent(FCLAgent(
                agent_id, params, state, fcl_population, provider,
                price_scale=cfg.price_scale, history_limit=cfg.prompt_history_limit,
            ))
        else:
            params = sample_params(fcn_population, rng)
            state = sample_state(fcn_population, rng)
            manager.register_agent(FCNAgent(agent_id, params, state, fcn_population, rules))
    return manager


class MarketSimulation:
    """Estado mutável de uma simulação em andamento."""

    def __init__(self, cfg: SimConfig, provider: Optional[DecisionProvider] = None):
        self.cfg = cfg
        fundamental_seq, population_seq, selection_seq, decision_seq = np.random.SeedSequence(cfg.seed).spawn(4)
        self.selection_rng = np.random.default_rng(selection_seq)
        self.decision_rng = np.random.default_rng(decision_seq)

        self.fundamental = generate_fundamental(cfg, np.random.default_rng(fundamental_seq))
        self.provider = provider
        self.manager = build_population(cfg, np.random.default_rng(population_seq), provider)
        self.book = OrderBook(tick_size=cfg.tick_size)
        self.history = PriceHistory(cfg.initial_price, cfg.total_steps)
        self.recorder = TickRecorder()
        self.portfolio_rows: List[Dict[str, Any]] = []
        self.initial_ticks = int(round(cfg.initial_price * cfg.price_scale))
        self.next_order_id = 0
        self.stats = {"orders": 0, "trades": 0, "skips": 0, "auctions": 0, "expired": 0}

    def _record_market(self, step: int, day: int, event: str, price: float, volume: int, **ids) -> None:
        self.recorder.record(
            step, day, event, price, volume,
            market_price=self.history.last_price,
            mid_price=self.book.to_price(self.book.mid_price()),
            ofi=self.book.order_flow_imbalance(),
            **ids,
        )

    def _settle(self, trades: List[Trade], step: int, day: int) -> None:
        for trade in trades:
            price = trade.price / self.cfg.price_scale
            self.manager.get_agent(trade.buy_agent_id).state.record_fill(step, price, trade.volume)
            self.manager.get_agent(trade.sell_agent_id).state.record_fill(step, price, -trade.volume)
            self.history.observe_trade(price)
            self._record_market(step, day, EVENT_TRADE, price, trade.volume,
                                agent_id=trade.buy_agent_id, order_id=trade.buy_order_id)
        self.stats["trades"] += len(trades)

    def _make_order(self, agent, request: OrderRequest, step: int, day: int) -> Order:
        lifetime = self.cfg.order_lifetime or agent.params.tau_j
        day_end = (day + 1) * self.cfg.steps_per_day - 1
        order = Order(
            order_id=self.next_order_id,
            agent_id=agent.agent_id,
            time=step,
            price=request.price_ticks,
            signed_volume=request.signed_volume,
            expiry=min(step + lifetime, day_end),
        )
        self.next_order_id += 1
        return order

    async def step(self, step: int) -> None:
        cfg = self.cfg
        day, offset = divmod(step, cfg.steps_per_day)
        mode = phase_mode(offset, cfg.day_structure)

        self.stats["expired"] += self.book.expire(step)
        agent = self.manager.select(self.selection_rng)
        clock = SimClock(step=step, day=day, total_steps=cfg.total_steps)
        view = snapshot(self.book, self.fundamental, clock, self.history)

        try:
            request = await agent.decide(view, self.decision_rng)
        except ProviderUnavailableError as e:
            logger.warning(f"Passo {step}: agente {agent.agent_id} pulou a vez ({e})")
            self.stats["skips"] += 1
            self._record_market(step, day, EVENT_SKIP, view.market_price, 0, agent_id=agent.agent_id)
            request = None

        if request is not None:
            order = self._make_order(agent, request, step, day)
            self._record_market(step, day, EVENT_ORDER, request.price(cfg.price_scale), request.signed_volume,
                                agent_id=agent.agent_id, order_id=order.order_id, expiry=order.expiry)
            if agent.kind == FCLAgent.kind:
                self.portfolio_rows.append({
                    "step": step,
                    "agent_id": agent.agent_id,
                    "cash": agent.state.cash,
                    "position": agent.state.position,
                    "market_price": view.market_price,
                })
            self.stats["orders"] += 1
            self._settle(self.book.submit(order, mode), step, day)

        if auction_due(offset, cfg.day_structure):
            reference = self.book.last_price if self.book.last_price is not None else self.initial_ticks
            clearing_price, trades = self.book.call_auction(reference, time=step)
            if clearing_price is not None:
                self.stats["auctions"] += 1
            self._settle(trades, step, day)

        self.history.close_step(step)
        if cfg.record_snapshots:
            self._record_market(step, day, EVENT_SNAPSHOT, self.history.last_price, 0)

    def result(self) -> SimulationResult:
        return SimulationResult(
            ticks=self.recorder.to_frame(),
            portfolio_log=pd.DataFrame(self.portfolio_rows, columns=PORTFOLIO_COLUMNS),
            states={agent_id: agent.state for agent_id, agent in self.manager.agents.items()},
            fcl_ids=self.manager.ids_of_kind(FCLAgent.kind),
            book=self.book,
            fundamental=self.fundamental,
            stats=dict(self.stats),
        )


async def run_simulation(
    cfg: SimConfig,
    provider: Optional[DecisionProvider] = None,
    transport: Optional[httpx.AsyncBaseTransport] = None,
) -> SimulationResult:
    """
    Executa uma simulação completa.

    Args:
        cfg: Configuração validada
        provider: Provedor dos agentes FCL; None constrói a partir de cfg.provider()
        transport: Transporte httpx opcional para o provedor remoto

    Returns:
        SimulationResult: Ticks, log de portfólio FCL e estados finais
    """
    owns_provider = provider is None and cfg.n_fcl > 0
    if owns_provider:
        provider = build_provider(cfg.provider(), transport=transport)

    sim = MarketSimulation(cfg, provider)
    started = time.perf_counter()
    logger.info(f"Simulação iniciada: seed={cfg.seed}, agentes={cfg.n_agents}, FCL={cfg.n_fcl}, passos={cfg.total_steps}")
    try:
        for step in range(cfg.total_steps):
            await sim.step(step)
            if (step + 1) % cfg.steps_per_day == 0:
                logger.debug(
                    f"Dia {step // cfg.steps_per_day + 1}/{cfg.days} concluído: "
                    f"preço {sim.history.last_price:.2f}, ordens no livro {len(sim.book)}"
                )
    finally:
        if owns_provider:
            await close_provider(provider)

    result = sim.result()
    result.stats["elapsed_seconds"] = round(time.perf_counter() - started, 3)
    logger.info(
        f"Simulação concluída (seed={cfg.seed}): {result.stats['orders']} ordens, "
        f"{result.stats['trades']} execuções, {result.stats['skips']} pulos"
    )
    return result


def run(cfg: SimConfig, provider: Optional[DecisionProvider] = None) -> SimulationResult:
    """Versão síncrona de run_simulation."""
    return asyncio.run(run_simulation(cfg, provider))


def replay_book(ticks: pd.DataFrame, cfg: SimConfig) -> OrderBook:
    """
    Reconstrói o livro final a partir dos eventos de ordem registrados,
    reaplicando expiração, modos de fase e leilões.

    Args:
        ticks: DataFrame de ticks de uma simulação
        cfg: Mesma configuração usada na simulação

    Returns:
        OrderBook: Livro reconstruído
    """
    orders = ticks[ticks["event"] == EVENT_ORDER]
    by_step: Dict[int, List[Order]] = {}
    scale = cfg.price_scale
    for row in orders.itertuples(index=False):
        by_step.setdefault(int(row.step), []).append(Order(
            order_id=int(row.order_id),
            agent_id=int(row.agent_id),
            time=int(row.step),
            price=int(round(row.price * scale)),
            signed_volume=int(row.signed_volume),
            expiry=int(row.expiry),
        ))

    book = OrderBook(tick_size=cfg.tick_size)
    initial_ticks = int(round(cfg.initial_price * scale))
    for step in range(cfg.total_steps):
        offset = step % cfg.steps_per_day
        book.expire(step)
        mode = phase_mode(offset, cfg.day_structure)
        for order in by_step.get(step, []):
            book.submit(order, mode)
        if auction_due(offset, cfg.day_structure):
            reference = book.last_price if book.last_price is not None else initial_ticks
            book.call_auction(reference, time=step)
    return book
