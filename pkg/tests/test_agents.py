"""
Testes dos agentes FCN e FCL e da população.
"""
import math

import numpy as np
import pytest

from src.agents.fcl_agent import FCLAgent, build_context, fcl_decide_order, unrealized_gain
from src.agents.fcn_agent import (
    VARIANCE_EMPIRICAL,
    VARIANCE_NOISE_HORIZON,
    OrderRules,
    Prediction,
    demand_variance,
    fcn_decide_order,
    fcn_demand,
    fcn_predict,
)
from src.agents.population import (
    AgentState,
    FcnParams,
    PopulationConfig,
    derive_params,
    sample_params,
    sample_state,
)
from src.core.agent_manager import AgentManager
from src.core.errors import InvalidInputError
from src.core.market import MarketSnapshot
from src.integrations.scripted_providers import AlwaysBuyProvider, AlwaysSellProvider
from src.models.decision import Intention
from src.models.simulation import SimConfig

POPULATION = PopulationConfig()


def snapshot(price=300.0, fundamental=300.0, best_bid=None, best_ask=None, high=None, low=None, step=0):
    return MarketSnapshot(
        step=step,
        day=0,
        market_price=price,
        fundamental_price=fundamental,
        best_bid=best_bid,
        best_ask=best_ask,
        mid_price=None,
        ofi=0.0,
        all_time_high=high or price,
        all_time_low=low or price,
        remaining_time=100 - step,
        total_time=100,
    )


class LowEndRng:
    """Gerador fixo: ruído nulo e preço no limite inferior do intervalo."""

    def standard_normal(self):
        return 0.0

    def uniform(self, low, high):
        return low


class FixedDrawRng:
    """Gerador fixo: ruído nulo e preço sorteado igual a value."""

    def __init__(self, value):
        self.value = value

    def standard_normal(self):
        return 0.0

    def uniform(self, low, high):
        return self.value


class RecordingRng:
    """Gerador semeado que guarda os preços sorteados."""

    def __init__(self, seed):
        self.rng = np.random.default_rng(seed)
        self.draws = []

    def standard_normal(self):
        return float(self.rng.standard_normal())

    def uniform(self, low, high):
        value = float(self.rng.uniform(low, high))
        self.draws.append(value)
        return value


# ---------------------- população ----------------------

def test_equal_weights_give_reference_levels():
    params = derive_params(POPULATION, w_f=3.0, w_c=3.0, w_n=1.0)
    assert params.alpha_j == pytest.approx(POPULATION.alpha_ref)
    assert params.tau_j == math.ceil(POPULATION.tau_ref)


def test_alpha_scales_with_fundamental_weight():
    params = derive_params(POPULATION, w_f=20.0, w_c=0.0, w_n=0.0)
    assert params.alpha_j == pytest.approx(0.2)
    assert params.tau_j == math.ceil(100.0 * 50.0 / 30.0)


def test_sampled_weights_have_expected_means():
    rng = np.random.default_rng(3)
    draws = [sample_params(POPULATION, rng) for _ in range(100_000)]
    assert np.mean([p.w_f for p in draws]) == pytest.approx(10.0, abs=0.2)
    assert all(0.0 <= p.margin_j <= 0.01 for p in draws[:1000])
    assert all(p.tau_j >= 1 and p.alpha_j > 0 for p in draws[:1000])


def test_sample_state_within_ranges():
    rng = np.random.default_rng(1)
    for _ in range(200):
        state = sample_state(POPULATION, rng, fixed_volume=5)
        assert 0.0 <= state.cash <= 30000.0
        assert 0 <= state.position <= 100
        assert state.fixed_volume == 5


def test_invalid_params_rejected():
    with pytest.raises(InvalidInputError):
        FcnParams(w_f=0.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1)
    with pytest.raises(InvalidInputError):
        FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=0, alpha_j=0.1)
    with pytest.raises(InvalidInputError):
        PopulationConfig(cash_range=(10.0, 1.0))


def test_record_fill_merges_same_step():
    state = AgentState(cash=1000.0, position=0)
    state.record_fill(1, 100.0, 2)
    state.record_fill(1, 110.0, 2)
    state.record_fill(2, 120.0, -1)
    assert len(state.history) == 2
    assert state.history[0].price == pytest.approx(105.0)
    assert state.history[0].signed_volume == 4
    assert state.cash == pytest.approx(1000.0 - 420.0 + 120.0)
    assert state.position == 3
    with pytest.raises(InvalidInputError):
        state.record_fill(1, 100.0, 1)


def test_random_fills_conserve_cash_and_position():
    rng = np.random.default_rng(21)
    for _ in range(200):
        state = AgentState(cash=float(rng.uniform(0, 30000)), position=int(rng.integers(0, 100)))
        spent, traded, time = 0.0, 0, 0
        for _ in range(int(rng.integers(1, 30))):
            time += int(rng.integers(0, 3))
            price = round(float(rng.uniform(250, 350)), 2)
            volume = int(rng.integers(-20, 21))
            state.record_fill(time, price, volume)
            spent += price * volume
            traded += volume

        assert state.position == state.initial_position + traded
        assert state.cash == pytest.approx(state.initial_cash - spent, abs=1e-6)
        assert sum(fill.signed_volume for fill in state.history) == traded
        assert state.spent() == pytest.approx(spent, abs=1e-6)
        p_t = float(rng.uniform(250, 350))
        assert unrealized_gain(state, p_t) == pytest.approx(traded * p_t - spent, abs=1e-6)


def test_fixed_volume_must_be_positive():
    with pytest.raises(InvalidInputError):
        AgentState(cash=0.0, position=0, fixed_volume=0)
    with pytest.raises(InvalidInputError):
        sample_state(POPULATION, np.random.default_rng(0), fixed_volume=-3)


# ---------------------- FCN ----------------------

def test_prediction_at_fundamental_is_flat():
    params = FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1)
    prediction = fcn_predict(params, 300.0, 300.0, 300.0, 0.7, POPULATION)
    assert prediction.r_hat == 0.0
    assert prediction.p_hat == pytest.approx(300.0)


def test_chartist_prediction_extrapolates_trend():
    params = FcnParams(w_f=0.0, w_c=1.0, w_n=0.0, tau_j=10, alpha_j=0.1)
    prediction = fcn_predict(params, 330.0, 300.0, 300.0, 0.0, POPULATION)
    assert prediction.r_hat == pytest.approx(math.log(1.1) / 10)
    assert prediction.p_hat == pytest.approx(363.0)


def test_noise_prediction_with_zero_draw():
    params = FcnParams(w_f=0.0, w_c=0.0, w_n=1.0, tau_j=10, alpha_j=0.1)
    assert fcn_predict(params, 300.0, 280.0, 310.0, 0.0, POPULATION).r_hat == 0.0


def test_prediction_rejects_non_positive_prices():
    params = FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1)
    with pytest.raises(InvalidInputError):
        fcn_predict(params, 0.0, 300.0, 300.0, 0.0, POPULATION)


def test_cara_demand():
    assert fcn_demand(0.1, 300.0, 300.0, 0.01) == 0.0
    assert fcn_demand(0.1, 303.0, 300.0, 1e-5) == pytest.approx(33.17, abs=0.01)
    assert fcn_demand(0.1, 303.0, 300.0, 0.01) == pytest.approx(0.03317, abs=1e-4)
    assert fcn_demand(0.1, 297.0, 300.0, 0.01) < 0


def test_demand_variance_modes():
    params = FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1)
    rules = OrderRules()
    assert demand_variance(params, snapshot(), POPULATION, rules) == pytest.approx(0.01 ** 2 * 10)
    empirical = OrderRules(variance_mode=VARIANCE_EMPIRICAL)
    assert demand_variance(params, snapshot(), POPULATION, empirical) == empirical.variance_floor


def test_noise_horizon_variance_is_the_default():
    assert OrderRules.from_config(SimConfig()).variance_mode == VARIANCE_NOISE_HORIZON
    assert OrderRules.from_config(SimConfig(variance_mode="empirical")).variance_mode == VARIANCE_EMPIRICAL


def test_fcn_order_flattens_when_no_edge():
    params = FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1)
    rules = OrderRules(price_spread=0.0)
    rng = np.random.default_rng(0)

    holder = AgentState(cash=0.0, position=5)
    request = fcn_decide_order(params, holder, snapshot(), rng, POPULATION, rules)
    assert request.signed_volume == -5
    assert request.price_ticks == 30000

    flat = AgentState(cash=0.0, position=0)
    assert fcn_decide_order(params, flat, snapshot(), rng, POPULATION, rules) is None


def test_fcn_order_volume_is_capped():
    params = FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1)
    rules = OrderRules(price_spread=0.01, max_order_volume=7, variance_mode=VARIANCE_EMPIRICAL)
    rng = LowEndRng()
    state = AgentState(cash=0.0, position=0)
    request = fcn_decide_order(params, state, snapshot(price=300.0, fundamental=600.0), rng, POPULATION, rules)
    assert request.signed_volume == 7


def test_fcn_buy_draw_rounds_down_to_tick():
    params = FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1)
    rules = OrderRules(variance_mode=VARIANCE_EMPIRICAL)
    state = AgentState(cash=0.0, position=0)
    view = snapshot(price=300.0, fundamental=310.0)
    request = fcn_decide_order(params, state, view, FixedDrawRng(300.006), POPULATION, rules)
    assert request.signed_volume == 100
    assert request.price_ticks == 30000


def test_fcn_sell_draw_rounds_up_to_tick():
    params = FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1)
    rules = OrderRules(variance_mode=VARIANCE_EMPIRICAL)
    state = AgentState(cash=0.0, position=0)
    view = snapshot(price=300.0, fundamental=290.0)
    request = fcn_decide_order(params, state, view, FixedDrawRng(299.994), POPULATION, rules)
    assert request.signed_volume == -100
    assert request.price_ticks == 30000


def test_fcn_orders_never_exceed_drawn_price():
    rng = np.random.default_rng(5)
    rules = OrderRules(variance_mode=VARIANCE_EMPIRICAL, max_order_volume=50)
    orders = 0
    for seed in range(300):
        params = sample_params(POPULATION, rng)
        state = sample_state(POPULATION, rng)
        view = snapshot(price=300.0, fundamental=float(rng.uniform(280, 320)))
        draws = RecordingRng(seed)
        request = fcn_decide_order(params, state, view, draws, POPULATION, rules)
        if request is None:
            continue
        orders += 1
        scaled = draws.draws[-1] * rules.price_scale
        assert abs(request.price_ticks - scaled) < 1.0
        if request.signed_volume > 0:
            assert request.price_ticks <= scaled + 1e-6
        else:
            assert request.price_ticks >= scaled - 1e-6
        assert abs(request.signed_volume) <= rules.max_order_volume
    assert orders > 0


def test_prediction_matches_horizon_return():
    rng = np.random.default_rng(8)
    for _ in range(500):
        params = sample_params(POPULATION, rng)
        p_t, p_f, p_lag = (float(x) for x in rng.uniform(200, 400, size=3))
        prediction = fcn_predict(params, p_t, p_f, p_lag, float(rng.standard_normal()), POPULATION)
        assert prediction.p_hat == pytest.approx(p_t * math.exp(prediction.r_hat * params.tau_j))


def test_prediction_is_invariant_to_weight_scale():
    rng = np.random.default_rng(9)
    for _ in range(500):
        params = sample_params(POPULATION, rng)
        scale = float(rng.uniform(0.1, 10.0))
        scaled = FcnParams(
            w_f=params.w_f * scale, w_c=params.w_c * scale, w_n=params.w_n * scale,
            tau_j=params.tau_j, alpha_j=params.alpha_j,
        )
        p_t, p_f, p_lag = (float(x) for x in rng.uniform(200, 400, size=3))
        eps = float(rng.standard_normal())
        expected = fcn_predict(params, p_t, p_f, p_lag, eps, POPULATION).r_hat
        assert fcn_predict(scaled, p_t, p_f, p_lag, eps, POPULATION).r_hat == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_demand_sign_follows_expected_log_return():
    rng = np.random.default_rng(10)
    for _ in range(1000):
        p_hat, p_o = (float(x) for x in rng.uniform(250, 350, size=2))
        alpha = float(rng.uniform(0.01, 1.0))
        variance = float(rng.uniform(1e-8, 1e-2))
        demand = fcn_demand(alpha, p_hat, p_o, variance)
        assert np.sign(demand) == np.sign(math.log(p_hat / p_o))


# ---------------------- FCL ----------------------

def test_unrealized_gain_from_history():
    state = AgentState(cash=30000.0, position=10)
    assert unrealized_gain(state, 293.7) == 0.0
    state.record_fill(1, 300.0, 10)
    assert unrealized_gain(state, 293.7) == pytest.approx(-63.0)
    state.record_fill(2, 310.0, -10)
    assert unrealized_gain(state, 320.0) == pytest.approx(100.0)


def test_fcl_buy_price_capped_by_best_ask():
    params = FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1, margin_j=0.01)
    state = AgentState(cash=0.0, position=0, fixed_volume=3)
    request = fcl_decide_order(
        params, state, snapshot(best_ask=295.0), Intention.BUY, Prediction(0.0, 300.0), 100
    )
    assert request.price_ticks == 29500
    assert request.signed_volume == 3


def test_fcl_sell_price_floored_by_best_bid():
    params = FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1, margin_j=0.0)
    state = AgentState(cash=0.0, position=0, fixed_volume=2)
    request = fcl_decide_order(
        params, state, snapshot(price=305.0, best_bid=305.0), Intention.SELL, Prediction(0.0, 300.0), 100
    )
    assert request.price_ticks == 30500
    assert request.signed_volume == -2


def test_fcl_buy_without_asks_uses_prediction():
    params = FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1)
    state = AgentState(cash=0.0, position=0, fixed_volume=1)
    request = fcl_decide_order(params, state, snapshot(), Intention.BUY, Prediction(0.0, 300.0), 100)
    assert request.price_ticks == 30000


def test_fcl_order_requires_fixed_volume():
    params = FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1)
    state = AgentState(cash=0.0, position=0)
    with pytest.raises(InvalidInputError):
        fcl_decide_order(params, state, snapshot(), Intention.BUY, Prediction(0.0, 300.0), 100)


def test_build_context_from_state():
    state = AgentState(cash=30000.0, position=10)
    state.record_fill(0, 300.0, 10)
    ctx = build_context(state, snapshot(price=293.7, high=300.0, low=287.5, step=30))
    assert ctx.unrealized_gain == pytest.approx(-63.0)
    assert [(h.price, h.volume) for h in ctx.history] == [(300.0, 10)]
    assert ctx.remaining_time == 70
    assert ctx.nearness == pytest.approx(293.7 / 300.0)
    assert build_context(state, snapshot(), history_limit=0).history == []


@pytest.mark.asyncio
async def test_fcl_agent_follows_provider_intention():
    params = FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1)
    rng = np.random.default_rng(4)

    buyer = FCLAgent(1, params, AgentState(cash=1000.0, position=0, fixed_volume=4), POPULATION, AlwaysBuyProvider())
    order = await buyer.decide(snapshot(best_ask=299.0), rng)
    assert order.signed_volume == 4
    assert order.price_ticks <= 29900
    assert buyer.last_intention is Intention.BUY

    seller = FCLAgent(2, params, AgentState(cash=1000.0, position=5, fixed_volume=4), POPULATION, AlwaysSellProvider())
    order = await seller.decide(snapshot(best_bid=301.0), rng)
    assert order.signed_volume == -4
    assert order.price_ticks >= 30100


def test_agent_manager_registry():
    manager = AgentManager()
    params = FcnParams(w_f=1.0, w_c=0.0, w_n=0.0, tau_j=10, alpha_j=0.1)
    manager.register_agent(FCLAgent(0, params, AgentState(0.0, 0), POPULATION, AlwaysBuyProvider()))
    with pytest.raises(ValueError):
        manager.register_agent(FCLAgent(0, params, AgentState(0.0, 0), POPULATION, AlwaysBuyProvider()))
    assert manager.ids_of_kind("fcl") == [0]
    assert manager.list_agents()[0]["kind"] == "fcl"
    assert manager.select(np.random.default_rng(0)).agent_id == 0
    with pytest.raises(KeyError):
        manager.get_agent(9)
