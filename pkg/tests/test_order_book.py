"""
Testes do livro de ofertas: casamento contínuo, leilão e estatísticas.
"""
import numpy as np
import pytest

from src.core.errors import OrderRejectedError
from src.core.order_book import MatchMode, Order, OrderBook, price_to_ticks

FAR = 10 ** 6


def order(order_id, price, signed_volume, time=0, expiry=FAR, agent_id=None):
    return Order(
        order_id=order_id,
        agent_id=order_id if agent_id is None else agent_id,
        time=time,
        price=price,
        signed_volume=signed_volume,
        expiry=expiry,
    )


# ---------------------- submit ----------------------

def test_buy_on_empty_book_rests():
    book = OrderBook()
    trades = book.submit(order(1, 30000, 10))
    assert trades == []
    assert book.best_bid() == 30000
    assert book.best_ask() is None
    assert 1 in book


def test_crossing_buy_executes_at_resting_price():
    book = OrderBook()
    book.submit(order(1, 30000, -5, time=1))
    trades = book.submit(order(2, 30050, 10, time=2))

    assert len(trades) == 1
    trade = trades[0]
    assert (trade.buy_order_id, trade.sell_order_id) == (2, 1)
    assert trade.price == 30000
    assert trade.volume == 5
    assert trade.time == 2
    assert book.best_bid() == 30050
    assert book.best_ask() is None
    assert book.levels()["bids"] == [(30050, [(2, 5)])]
    assert book.last_price == 30000


def test_collecting_mode_never_matches():
    book = OrderBook()
    book.submit(order(1, 30000, -5), MatchMode.COLLECTING)
    trades = book.submit(order(2, 30500, 10), MatchMode.COLLECTING)
    assert trades == []
    assert len(book) == 2
    assert book.is_crossed()


def test_time_priority_within_level():
    book = OrderBook()
    book.submit(order(1, 30000, -3, time=1))
    book.submit(order(2, 30000, -3, time=2))
    trades = book.submit(order(3, 30000, 4, time=3))
    assert [(t.sell_order_id, t.volume) for t in trades] == [(1, 3), (2, 1)]
    assert book.levels()["asks"] == [(30000, [(2, 2)])]


def test_sweep_walks_price_levels():
    book = OrderBook()
    book.submit(order(1, 30100, -2))
    book.submit(order(2, 30000, -2))
    trades = book.submit(order(3, 30200, 5))
    assert [t.price for t in trades] == [30000, 30100]
    assert book.best_bid() == 30200
    assert book.resting_volume() == (1, 0)


def test_duplicate_order_id_rejected():
    book = OrderBook()
    book.submit(order(1, 30000, 1))
    with pytest.raises(OrderRejectedError):
        book.submit(order(1, 29000, 1))


@pytest.mark.parametrize("price,volume,expiry", [(30000, 0, FAR), (0, 5, FAR), (30000, 5, -1)])
def test_invalid_orders_rejected(price, volume, expiry):
    with pytest.raises(OrderRejectedError):
        order(1, price, volume, expiry=expiry)


def test_price_to_ticks_rounds_toward_passive_side():
    assert price_to_ticks(300.004, 100, is_buy=True) == 30000
    assert price_to_ticks(300.004, 100, is_buy=False) == 30001
    assert price_to_ticks(293.7, 100, is_buy=True) == 29370
    assert price_to_ticks(293.7, 100, is_buy=False) == 29370
    assert price_to_ticks(0.0001, 100, is_buy=True) == 1


# ---------------------- leilão ----------------------

def test_call_auction_prefers_price_nearest_reference():
    book = OrderBook()
    book.submit(order(1, 30100, 10), MatchMode.COLLECTING)
    book.submit(order(2, 30000, -10), MatchMode.COLLECTING)
    price, trades = book.call_auction(30000)
    assert price == 30000
    assert [(t.price, t.volume) for t in trades] == [(30000, 10)]
    assert len(book) == 0


def test_call_auction_uncrossed_book():
    book = OrderBook()
    book.submit(order(1, 29900, 5), MatchMode.COLLECTING)
    book.submit(order(2, 30200, -5), MatchMode.COLLECTING)
    assert book.call_auction(30000) == (None, [])
    assert len(book) == 2


def test_call_auction_fills_best_bid_first():
    book = OrderBook()
    book.submit(order(1, 30100, 10), MatchMode.COLLECTING)
    book.submit(order(2, 30000, 5), MatchMode.COLLECTING)
    book.submit(order(3, 30000, -8), MatchMode.COLLECTING)
    price, trades = book.call_auction(30000, time=7)
    assert price == 30000
    assert sum(t.volume for t in trades) == 8
    assert [t.buy_order_id for t in trades] == [1]
    assert all(t.time == 7 for t in trades)
    assert book.levels()["bids"] == [(30100, [(1, 2)]), (30000, [(2, 5)])]
    assert not book.is_crossed()


def test_call_auction_empty_book():
    assert OrderBook().call_auction(30000) == (None, [])


def executable_volume(book, price):
    demand = sum(o.remaining for o in book.iter_orders() if o.is_buy and o.price >= price)
    supply = sum(o.remaining for o in book.iter_orders() if not o.is_buy and o.price <= price)
    return min(demand, supply)


def test_call_auction_maximizes_volume_on_random_books():
    rng = np.random.default_rng(11)
    for _ in range(300):
        book = OrderBook()
        for order_id in range(int(rng.integers(1, 9))):
            side = 1 if rng.random() < 0.5 else -1
            book.submit(
                order(order_id, int(rng.integers(95, 106)), side * int(rng.integers(1, 6))),
                MatchMode.COLLECTING,
            )
        levels = {o.price for o in book.iter_orders()}
        best = max((executable_volume(book, px) for px in levels), default=0)
        expected_volume = best if best > 0 else 0

        clearing, volume = book.clearing_price(100)
        price, trades = book.call_auction(100)
        assert price == clearing
        assert sum(t.volume for t in trades) == volume == expected_volume
        assert not book.is_crossed()


# ---------------------- oráculo de casamento ----------------------

def brute_force_match(sequence):
    """Casador ingênuo: reexamina o livro inteiro a cada chegada."""
    resting = []  # [order_id, price, remaining, is_buy, expiry, arrival]
    trades = []
    for arrival, (order_id, price, signed_volume, time, expiry) in enumerate(sequence):
        resting = [r for r in resting if r[4] >= time]
        remaining = abs(signed_volume)
        is_buy = signed_volume > 0
        while remaining > 0:
            if is_buy:
                candidates = [r for r in resting if not r[3] and r[1] <= price]
                if not candidates:
                    break
                maker = min(candidates, key=lambda r: (r[1], r[5]))
            else:
                candidates = [r for r in resting if r[3] and r[1] >= price]
                if not candidates:
                    break
                maker = min(candidates, key=lambda r: (-r[1], r[5]))
            qty = min(remaining, maker[2])
            buy_id, sell_id = (order_id, maker[0]) if is_buy else (maker[0], order_id)
            trades.append((buy_id, sell_id, maker[1], qty))
            remaining -= qty
            maker[2] -= qty
            if maker[2] == 0:
                resting.remove(maker)
        if remaining > 0:
            resting.append([order_id, price, remaining, is_buy, expiry, arrival])
    return trades, sorted((r[0], r[2]) for r in resting)


def test_submit_matches_brute_force_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        sequence = []
        for order_id in range(int(rng.integers(1, 11))):
            side = 1 if rng.random() < 0.5 else -1
            time = order_id
            sequence.append((
                order_id,
                int(rng.integers(97, 104)),
                side * int(rng.integers(1, 8)),
                time,
                time + int(rng.integers(0, 5)),
            ))

        book = OrderBook()
        trades = []
        for order_id, price, signed_volume, time, expiry in sequence:
            book.expire(time)
            trades.extend(book.submit(order(order_id, price, signed_volume, time=time, expiry=expiry)))
            assert not book.is_crossed()

        expected_trades, expected_resting = brute_force_match(sequence)
        assert [(t.buy_order_id, t.sell_order_id, t.price, t.volume) for t in trades] == expected_trades
        assert sorted((o.order_id, o.remaining) for o in book.iter_orders()) == expected_resting


# ---------------------- estatísticas ----------------------

def test_best_quotes():
    book = OrderBook()
    assert (book.best_bid(), book.best_ask(), book.mid_price()) == (None, None, None)
    book.submit(order(1, 300, 1))
    book.submit(order(2, 299, 1))
    book.submit(order(3, 302, -1))
    assert (book.best_bid(), book.best_ask()) == (300, 302)
    assert book.mid_price() == 301.0


def test_order_flow_imbalance():
    book = OrderBook()
    assert book.order_flow_imbalance() == 0.0
    book.submit(order(1, 29000, 101))
    book.submit(order(2, 31000, -99))
    assert book.order_flow_imbalance() == pytest.approx(0.01)

    sells_only = OrderBook()
    sells_only.submit(order(1, 31000, -7))
    assert sells_only.order_flow_imbalance() == -1.0


def test_order_flow_imbalance_antisymmetric():
    rng = np.random.default_rng(5)
    for _ in range(50):
        buys, sells = int(rng.integers(0, 50)), int(rng.integers(1, 50))
        book, mirror = OrderBook(), OrderBook()
        if buys:
            book.submit(order(1, 100, buys))
            mirror.submit(order(1, 200, -buys))
        book.submit(order(2, 200, -sells))
        mirror.submit(order(2, 100, sells))
        assert -1.0 <= book.order_flow_imbalance() <= 1.0
        assert book.order_flow_imbalance() == pytest.approx(-mirror.order_flow_imbalance())


def test_expire():
    book = OrderBook()
    book.submit(order(1, 100, 1, expiry=5))
    book.submit(order(2, 99, 1, expiry=10))
    assert book.expire(0) == 0
    assert book.expire(7) == 1
    assert 1 not in book and 2 in book
    assert book.resting_volume() == (1, 0)


def test_expire_empties_book():
    book = OrderBook()
    for order_id in range(3):
        book.submit(order(order_id, 100 + order_id, -1, expiry=4))
    assert book.expire(5) == 3
    assert len(book) == 0
    assert book.best_ask() is None


def test_expire_skips_filled_orders():
    book = OrderBook()
    book.submit(order(1, 100, -2, expiry=3))
    book.submit(order(2, 100, 2))
    assert book.expire(10) == 0
