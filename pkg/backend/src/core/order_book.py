"""
Livro de ofertas de um único ativo com prioridade preço-tempo.

- Preços em ticks inteiros (preço real = ticks / price_scale).
- Modo contínuo: a ordem agressora executa ao preço da ordem em repouso.
- Modo de coleta: ordens apenas repousam; um leilão de preço único
  (call_auction) limpa o livro ao fim da fase.
- Expiração preguiçosa via heap (expiry, order_id).
"""
import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Dict, Iterator, List, Optional, Set, Tuple

from loguru import logger
from sortedcontainers import SortedDict

from .errors import OrderRejectedError


class MatchMode(str, Enum):
    CONTINUOUS = "continuous"
    COLLECTING = "collecting"


@dataclass
class Order:
    """Ordem limitada com volume com sinal (positivo = compra)."""
    order_id: int
    agent_id: int
    time: int
    price: int
    signed_volume: int
    expiry: int
    remaining: int = field(init=False)

    def __post_init__(self):
        if self.signed_volume == 0:
            raise OrderRejectedError(f"Ordem {self.order_id} com volume zero")
        if self.price <= 0:
            raise OrderRejectedError(f"Ordem {self.order_id} com preço não positivo: {self.price}")
        if self.expiry < self.time:
            raise OrderRejectedError(f"Ordem {self.order_id} expira antes de ser criada")
        self.remaining = abs(self.signed_volume)

    @property
    def is_buy(self) -> bool:
        return self.signed_volume > 0


@dataclass(frozen=True)
class Trade:
    """Execução entre uma ordem de compra e uma de venda."""
    buy_order_id: int
    sell_order_id: int
    price: int
    volume: int
    time: int
    buy_agent_id: int = -1
    sell_agent_id: int = -1


Ladder = SortedDict  # preço (ticks) -> deque de ordens em ordem de chegada


def price_to_ticks(price: float, price_scale: int, is_buy: bool) -> int:
    """
    Arredonda um preço real para a grade de ticks em direção ao lado passivo:
    compras para baixo, vendas para cima. Nunca devolve menos de 1 tick.
    """
    scaled = price * price_scale
    ticks = math.floor(scaled + 1e-9) if is_buy else math.ceil(scaled - 1e-9)
    return max(1, int(ticks))


class OrderBook:
    """
    Livro de ofertas com duas escadas de preço (SortedDict de deques).

    API pública:
        - submit(order, mode) -> trades
        - call_auction(reference_price) -> (preço de equilíbrio, trades)
        - best_bid(), best_ask(), mid_price(), order_flow_imbalance()
        - expire(now) -> quantidade removida
    """

    def __init__(self, tick_size: float = 0.01, last_price: Optional[int] = None):
        self.tick_size = tick_size
        self.price_scale = int(round(1.0 / tick_size))
        self.bids: Ladder = SortedDict()
        self.asks: Ladder = SortedDict()
        self.last_price: Optional[int] = last_price
        self._resting: Dict[int, Order] = {}
        self._seen_ids: Set[int] = set()
        self._expiry_heap: List[Tuple[int, int]] = []
        self._buy_volume = 0
        self._sell_volume = 0

    # ---------------------- consultas ----------------------

    def best_bid(self) -> Optional[int]:
        if not self.bids:
            return None
        return self.bids.peekitem(-1)[0]

    def best_ask(self) -> Optional[int]:
        if not self.asks:
            return None
        return self.asks.peekitem(0)[0]

    def mid_price(self) -> Optional[float]:
        """Preço médio em ticks (pode ser fracionário) ou None se algum lado estiver vazio."""
        bid, ask = self.best_bid(), self.best_ask()
        if bid is None or ask is None:
            return None
        return (bid + ask) / 2.0

    def order_flow_imbalance(self) -> float:
        """
        OFI = (n_buy - n_sell) / (n_buy + n_sell) sobre volumes em repouso.
        Livro vazio devolve 0.
        """
        total = self._buy_volume + self._sell_volume
        if total == 0:
            return 0.0
        return (self._buy_volume - self._sell_volume) / total

    def resting_volume(self) -> Tuple[int, int]:
        return self._buy_volume, self._sell_volume

    def to_price(self, ticks: Optional[float]) -> Optional[float]:
        return None if ticks is None else ticks / self.price_scale

    def __len__(self) -> int:
        return len(self._resting)

    def __contains__(self, order_id: int) -> bool:
        return order_id in self._resting

    def iter_orders(self) -> Iterator[Order]:
        """Ordens em repouso: compras do melhor preço para o pior, depois vendas."""
        for _, queue in reversed(self.bids.items()):
            yield from queue
        for _, queue in self.asks.items():
            yield from queue

    def levels(self) -> Dict[str, List[Tuple[int, List[Tuple[int, int]]]]]:
        """Estado completo do livro: por nível, (order_id, restante) em ordem de prioridade."""
        return {
            "bids": [(px, [(o.order_id, o.remaining) for o in q]) for px, q in reversed(self.bids.items())],
            "asks": [(px, [(o.order_id, o.remaining) for o in q]) for px, q in self.asks.items()],
        }

    def is_crossed(self) -> bool:
        bid, ask = self.best_bid(), self.best_ask()
        return bid is not None and ask is not None and bid >= ask

    # ---------------------- mutações ----------------------

    def submit(self, order: Order, mode: MatchMode = MatchMode.CONTINUOUS) -> List[Trade]:
        """
        Insere uma ordem no livro.

        Args:
            order: Ordem já arredondada para a grade de ticks
            mode: Contínuo (casa imediatamente) ou coleta (apenas repousa)

        Returns:
            List[Trade]: Execuções geradas pela ordem

        Raises:
            OrderRejectedError: order_id repetido
        """
        if order.order_id in self._seen_ids:
            raise OrderRejectedError(f"order_id duplicado: {order.order_id}")
        self._seen_ids.add(order.order_id)

        trades: List[Trade] = []
        if mode == MatchMode.CONTINUOUS:
            trades = self._match_incoming(order)
        if order.remaining > 0:
            self._rest(order)
        return trades

    def call_auction(self, reference_price: int, time: Optional[int] = None) -> Tuple[Optional[int], List[Trade]]:
        """
        Leilão de preço único: escolhe o preço que maximiza o volume executável,
        desempatando pela menor distância ao preço de referência e depois pelo menor preço.

        Args:
            reference_price: Preço de referência em ticks
            time: Passo registrado nas execuções; None usa a chegada mais recente do par

        Returns:
            (preço de equilíbrio ou None, execuções)
        """
        clearing_price, volume = self.clearing_price(reference_price)
        if clearing_price is None:
            return None, []

        trades: List[Trade] = []
        matched = 0
        while matched < volume:
            bid_px, bid_queue = self.bids.peekitem(-1)
            ask_px, ask_queue = self.asks.peekitem(0)
            buy, sell = bid_queue[0], ask_queue[0]
            qty = min(buy.remaining, sell.remaining, volume - matched)
            trade_time = time if time is not None else max(buy.time, sell.time)
            trades.append(self._fill(buy, sell, clearing_price, qty, trade_time))
            matched += qty
            self._drop_if_filled(self.bids, bid_px, bid_queue)
            self._drop_if_filled(self.asks, ask_px, ask_queue)

        self.last_price = clearing_price
        logger.debug(f"Leilão: preço {clearing_price}, volume {volume}, {len(trades)} execuções")
        return clearing_price, trades

    def clearing_price(self, reference_price: int) -> Tuple[Optional[int], int]:
        """Preço de equilíbrio e volume executável, sem alterar o livro."""
        if not self.bids or not self.asks or self.best_bid() < self.best_ask():
            return None, 0

        candidates = sorted(set(self.bids.keys()) | set(self.asks.keys()))
        ask_volume_at = {px: sum(o.remaining for o in q) for px, q in self.asks.items()}
        bid_volume_at = {px: sum(o.remaining for o in q) for px, q in self.bids.items()}

        supply = 0
        cumulative_supply = {}
        for px in candidates:
            supply += ask_volume_at.get(px, 0)
            cumulative_supply[px] = supply
        demand = 0
        cumulative_demand = {}
        for px in reversed(candidates):
            demand += bid_volume_at.get(px, 0)
            cumulative_demand[px] = demand

        best: Optional[Tuple[int, int, int]] = None  # (-volume, distância, preço)
        for px in candidates:
            executable = min(cumulative_demand[px], cumulative_supply[px])
            if executable <= 0:
                continue
            key = (-executable, abs(px - reference_price), px)
            if best is None or key < best:
                best = key
        if best is None:
            return None, 0
        return best[2], -best[0]

    def expire(self, now: int) -> int:
        """
        Remove as ordens com expiry < now.

        Returns:
            int: Quantidade de ordens removidas
        """
        removed = 0
        while self._expiry_heap and self._expiry_heap[0][0] < now:
            _, order_id = heapq.heappop(self._expiry_heap)
            order = self._resting.get(order_id)
            if order is None:
                continue
            self._remove(order)
            removed += 1
        return removed

    # ---------------------- internos ----------------------

    def _match_incoming(self, order: Order) -> List[Trade]:
        trades: List[Trade] = []
        if order.is_buy:
            while order.remaining > 0 and self.asks:
                ask_px, queue = self.asks.peekitem(0)
                if ask_px > order.price:
                    break
                maker = queue[0]
                qty = min(order.remaining, maker.remaining)
                trades.append(self._fill(order, maker, ask_px, qty, order.time))
                self._drop_if_filled(self.asks, ask_px, queue)
        else:
            while order.remaining > 0 and self.bids:
                bid_px, queue = self.bids.peekitem(-1)
                if bid_px < order.price:
                    break
                maker = queue[0]
                qty = min(order.remaining, maker.remaining)
                trades.append(self._fill(maker, order, bid_px, qty, order.time))
                self._drop_if_filled(self.bids, bid_px, queue)
        return trades

    def _fill(self, buy: Order, sell: Order, price: int, qty: int, time: int) -> Trade:
        for order in (buy, sell):
            order.remaining -= qty
            if order.order_id in self._resting:
                if order.is_buy:
                    self._buy_volume -= qty
                else:
                    self._sell_volume -= qty
        self.last_price = price
        return Trade(
            buy_order_id=buy.order_id,
            sell_order_id=sell.order_id,
            price=price,
            volume=qty,
            time=time,
            buy_agent_id=buy.agent_id,
            sell_agent_id=sell.agent_id,
        )

    def _drop_if_filled(self, ladder: Ladder, price: int, queue: Deque[Order]) -> None:
        while queue and queue[0].remaining == 0:
            done = queue.popleft()
            self._resting.pop(done.order_id, None)
        if not queue:
            del ladder[price]

    def _rest(self, order: Order) -> None:
        ladder = self.bids if order.is_buy else self.asks
        queue = ladder.get(order.price)
        if queue is None:
            queue = deque()
            ladder[order.price] = queue
        queue.append(order)
        self._resting[order.order_id] = order
        heapq.heappush(self._expiry_heap, (order.expiry, order.order_id))
        if order.is_buy:
            self._buy_volume += order.remaining
        else:
            self._sell_volume += order.remaining

    def _remove(self, order: Order) -> None:
        ladder = self.bids if order.is_buy else self.asks
        queue = ladder[order.price]
        queue.remove(order)
        if not queue:
            del ladder[order.price]
        del self._resting[order.order_id]
        if order.is_buy:
            self._buy_volume -= order.remaining
        else:
            self._sell_volume -= order.remaining
