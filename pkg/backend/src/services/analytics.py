"""
Métricas de avaliação sobre fluxos de ticks.

- Barras de 1 minuto sobre a sessão contínua (fases de coleta excluídas)
- Fatos estilizados: curtose em excesso, autocorrelação de |r|, correlação retorno-volume
- Regressão do retorno futuro sobre a proximidade da máxima histórica
- Estatísticas de comportamento FCL: proporção em ativo, proximidade da máxima
  nas ordens, testes KS e Mann-Whitney U
"""
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from scipy import stats

from ..core.errors import DegenerateInputError
from ..models.reports import MetricSummary, NearnessReport, RegressionResult, StatTest, StylizedFactsReport

DEFAULT_DAY_STRUCTURE = (100, 750, 10, 750)
DEFAULT_LAGS = (1, 5, 10)
DEFAULT_HORIZONS = (10, 15, 30)
PERCENTILES = (1, 50, 99)
FRESH_HIGH_TOLERANCE = 1e-12

BAR_COLUMNS = ["bar", "day", "open", "high", "low", "close", "volume"]


class TestResult(NamedTuple):
    statistic: float
    p_value: float


@dataclass
class BarSeries:
    """Série de barras OHLCV; `frame` segue BAR_COLUMNS."""
    frame: pd.DataFrame
    bars_per_day: int

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def closes(self) -> np.ndarray:
        return self.frame["close"].to_numpy(dtype=float)

    @property
    def volumes(self) -> np.ndarray:
        return self.frame["volume"].to_numpy(dtype=float)

    def log_returns(self) -> np.ndarray:
        """Retornos log entre barras consecutivas, incluindo as viradas de dia."""
        closes = self.closes
        if len(closes) < 2:
            return np.empty(0)
        return np.diff(np.log(closes))


def continuous_index(offsets: np.ndarray, day_structure: Tuple[int, int, int, int]) -> np.ndarray:
    """
    Posição de cada passo dentro da sessão contínua do dia; -1 nas fases de coleta.

    Args:
        offsets: Posição do passo no dia
        day_structure: (c1, k1, c2, k2)

    Returns:
        np.ndarray: Índice contínuo em [0, k1 + k2) ou -1
    """
    collect_1, continuous_1, collect_2, continuous_2 = day_structure
    second_start = collect_1 + continuous_1 + collect_2
    offsets = np.asarray(offsets, dtype=int)
    first = (offsets >= collect_1) & (offsets < collect_1 + continuous_1)
    second = (offsets >= second_start) & (offsets < second_start + continuous_2)
    return np.where(first, offsets - collect_1, np.where(second, continuous_1 + offsets - second_start, -1))


def build_bars(
    ticks: pd.DataFrame,
    steps_per_minute: int = 5,
    day_structure: Tuple[int, int, int, int] = DEFAULT_DAY_STRUCTURE,
    initial_price: Optional[float] = None,
) -> BarSeries:
    """
    Agrega as execuções da sessão contínua em barras de `steps_per_minute` passos.

    Barras sem execução repetem o fechamento anterior com volume zero; barras
    anteriores à primeira execução usam o primeiro preço de mercado do fluxo
    (ou `initial_price`).

    Args:
        ticks: Fluxo de ticks ordenado por passo
        steps_per_minute: Passos contínuos por barra
        day_structure: (c1, k1, c2, k2) usado na simulação
        initial_price: Preço de semeadura quando o fluxo não tem market_price

    Returns:
        BarSeries: Série com dias_completos × barras_por_dia barras
    """
    if steps_per_minute < 1:
        raise ValueError("steps_per_minute deve ser >= 1")
    continuous_steps = day_structure[1] + day_structure[3]
    bars_per_day = math.ceil(continuous_steps / steps_per_minute)
    if ticks is None or ticks.empty:
        return BarSeries(frame=pd.DataFrame(columns=BAR_COLUMNS), bars_per_day=bars_per_day)

    steps_per_day = sum(day_structure)
    n_days = int(ticks["step"].max()) // steps_per_day + 1
    seed_price = float(ticks["market_price"].iloc[0]) if initial_price is None else float(initial_price)

    trades = ticks[ticks["event"] == "trade"]
    steps = trades["step"].to_numpy(dtype=int)
    index = continuous_index(steps % steps_per_day, day_structure)
    inside = index >= 0
    trades = pd.DataFrame({
        "bar": (steps[inside] // steps_per_day) * bars_per_day + index[inside] // steps_per_minute,
        "price": trades["price"].to_numpy(dtype=float)[inside],
        "volume": np.abs(trades["signed_volume"].to_numpy(dtype=float)[inside]),
    })

    grouped = trades.groupby("bar", sort=True).agg(
        open=("price", "first"),
        high=("price", "max"),
        low=("price", "min"),
        close=("price", "last"),
        volume=("volume", "sum"),
    )
    frame = grouped.reindex(pd.RangeIndex(n_days * bars_per_day, name="bar"))
    frame["close"] = frame["close"].ffill().fillna(seed_price)
    # barra vazia: OHLC = fechamento anterior
    previous_close = frame["close"].shift(1).fillna(seed_price)
    empty = frame["open"].isna()
    for column in ("open", "high", "low"):
        frame.loc[empty, column] = previous_close[empty]
    frame["volume"] = frame["volume"].fillna(0).astype(np.int64)
    frame = frame.reset_index()
    frame["day"] = frame["bar"] // bars_per_day
    return BarSeries(frame=frame[BAR_COLUMNS], bars_per_day=bars_per_day)


def daily_closes(bars: BarSeries) -> np.ndarray:
    """Fechamento diário: último fechamento da sessão contínua de cada dia."""
    if len(bars) == 0:
        return np.empty(0)
    return bars.frame.groupby("day", sort=True)["close"].last().to_numpy(dtype=float)


def _pearson(x: np.ndarray, y: np.ndarray, what: str) -> float:
    if np.std(x) == 0 or np.std(y) == 0:
        raise DegenerateInputError(f"{what}: variância zero")
    value = float(np.corrcoef(x, y)[0, 1])
    return min(1.0, max(-1.0, value))


def excess_kurtosis(returns: Sequence[float]) -> float:
    """
    Curtose em excesso (Fisher) com momentos centrais amostrais: m4/m2² − 3.

    Raises:
        DegenerateInputError: Menos de 4 observações ou variância zero
    """
    values = np.asarray(returns, dtype=float)
    if len(values) < 4:
        raise DegenerateInputError(f"Curtose exige >= 4 observações (recebidas {len(values)})")
    if np.var(values) == 0:
        raise DegenerateInputError("Curtose: variância zero")
    return float(stats.kurtosis(values, fisher=True, bias=True))


def acf_abs_returns(returns: Sequence[float], lag: int) -> float:
    """
    Autocorrelação de Pearson de |r_t| na defasagem `lag`.

    Raises:
        DegenerateInputError: Defasagem fora da série ou |r| constante
    """
    values = np.abs(np.asarray(returns, dtype=float))
    if lag < 1 or lag >= len(values) - 1:
        raise DegenerateInputError(f"Defasagem {lag} incompatível com série de {len(values)} pontos")
    return _pearson(values[:-lag], values[lag:], f"Autocorrelação de |r| (lag {lag})")


def return_volume_correlation(bars: BarSeries) -> float:
    """
    Correlação de Pearson entre |log(close_i/close_{i−1})| e volume_i.

    Raises:
        DegenerateInputError: Menos de 3 barras ou variância zero
    """
    if len(bars) < 3:
        raise DegenerateInputError(f"Correlação retorno-volume exige >= 3 barras (recebidas {len(bars)})")
    abs_returns = np.abs(bars.log_returns())
    return _pearson(abs_returns, bars.volumes[1:], "Correlação retorno-volume")


def stylized_facts(bars: BarSeries, lags: Iterable[int] = DEFAULT_LAGS) -> StylizedFactsReport:
    """Calcula os fatos estilizados; métricas degeneradas ficam ausentes (None)."""
    returns = bars.log_returns()
    report = StylizedFactsReport(n_returns=len(returns))
    try:
        report.kurtosis = excess_kurtosis(returns)
    except DegenerateInputError as e:
        logger.warning(f"Curtose indisponível: {e}")
    for lag in lags:
        try:
            report.acf_abs[lag] = acf_abs_returns(returns, lag)
        except DegenerateInputError as e:
            logger.warning(f"Autocorrelação indisponível: {e}")
            report.acf_abs[lag] = None
    try:
        report.ret_vol_corr = return_volume_correlation(bars)
    except DegenerateInputError as e:
        logger.warning(f"Correlação retorno-volume indisponível: {e}")
    return report


def ols_fit(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float, float, Optional[float]]:
    """
    Mínimos quadrados simples pela forma centrada: β = cov(x, y)/var(x).

    Args:
        x: Regressor
        y: Resposta

    Returns:
        Tuple: (slope, intercept, stderr, t); t é None com ajuste perfeito

    Raises:
        DegenerateInputError: Menos de 3 pontos ou var(x) = 0
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 3 or len(y) != n:
        raise DegenerateInputError(f"Regressão exige >= 3 pares (recebidos {n})")
    dx = x - x.mean()
    sxx = math.fsum(dx * dx)
    if sxx == 0:
        raise DegenerateInputError("Regressor degenerado: variância de x igual a zero")

    slope = math.fsum(dx * (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (intercept + slope * x)
    sigma2 = math.fsum(residuals * residuals) / (n - 2)
    stderr = math.sqrt(sigma2 / sxx)
    t_stat = slope / stderr if stderr > 0 else None
    return slope, intercept, stderr, t_stat


def ols_normal_equations(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float]:
    """Solução pelas equações normais [1 x]ᵀ[1 x]b = [1 x]ᵀy, via lstsq."""
    x = np.asarray(x, dtype=float)
    design = np.column_stack([np.ones_like(x), x])
    coefficients, *_ = np.linalg.lstsq(design, np.asarray(y, dtype=float), rcond=None)
    return float(coefficients[1]), float(coefficients[0])


def nearness_series(closes: Sequence[float]) -> np.ndarray:
    """p_t / max(p_1..p_t)."""
    closes = np.asarray(closes, dtype=float)
    return closes / np.maximum.accumulate(closes)


def ath_regression(closes: Sequence[float], horizon_days: int) -> RegressionResult:
    """
    Regride y_t = p_{t+T}/p_t sobre x_t = p_t/max(p_1..p_t), com observações
    diárias sobrepostas.

    Args:
        closes: Fechamentos diários
        horizon_days: Horizonte T em dias

    Returns:
        RegressionResult: β^h, intercepto, erro padrão e estatística t

    Raises:
        DegenerateInputError: Menos de T + 3 fechamentos (n_obs < 3) ou x constante
    """
    closes = np.asarray(closes, dtype=float)
    if horizon_days < 1:
        raise ValueError("horizon_days deve ser >= 1")
    if len(closes) < horizon_days + 3:
        raise DegenerateInputError(
            f"Regressão de {horizon_days} dias exige >= {horizon_days + 3} fechamentos (recebidos {len(closes)})"
        )
    x = nearness_series(closes)[:-horizon_days]
    y = closes[horizon_days:] / closes[:-horizon_days]
    slope, intercept, stderr, t_stat = ols_fit(x, y)
    return RegressionResult(
        beta_h=slope,
        intercept=intercept,
        n_obs=len(x),
        horizon_days=horizon_days,
        stderr=stderr,
        t_stat=t_stat,
    )


def asset_proportion(state, price: float) -> float:
    """
    PA = p·w / (c + p·w).

    Args:
        state: Objeto com `cash` e `position`
        price: Preço de mercado

    Raises:
        DegenerateInputError: Denominador zero
    """
    held = price * state.position
    denominator = state.cash + held
    if denominator == 0:
        raise DegenerateInputError("Proporção em ativo: denominador c + p·w igual a zero")
    return held / denominator


def portfolio_proportions(portfolio_log: pd.DataFrame) -> np.ndarray:
    """PA de cada linha do log de portfólio FCL; linhas com denominador zero são descartadas."""
    if portfolio_log is None or portfolio_log.empty:
        return np.empty(0)
    held = portfolio_log["market_price"].to_numpy(dtype=float) * portfolio_log["position"].to_numpy(dtype=float)
    denominator = portfolio_log["cash"].to_numpy(dtype=float) + held
    valid = denominator != 0
    return held[valid] / denominator[valid]


def percentiles(values: Sequence[float], qs: Iterable[int] = PERCENTILES) -> Dict[str, float]:
    """Percentis nomeados 'p1', 'p50', 'p99'."""
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        raise DegenerateInputError("Percentis de amostra vazia")
    return {f"p{q}": float(np.percentile(values, q)) for q in qs}


def nearness_at_actions(ticks: pd.DataFrame, agent_ids: Iterable[int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Proximidade da máxima no momento de cada ordem dos agentes rastreados.

    A máxima corrente é o máximo acumulado de market_price no fluxo, que
    inclui p0 e todos os preços executados até o evento.

    Returns:
        Tuple[np.ndarray, np.ndarray]: (amostra de compras, amostra de vendas)
    """
    ids = list(agent_ids)
    if ticks is None or ticks.empty or not ids:
        return np.empty(0), np.empty(0)
    running_high = ticks["market_price"].astype(float).cummax()
    nearness = ticks["market_price"].astype(float) / running_high
    mask = (ticks["event"] == "order") & ticks["agent_id"].isin(ids).fillna(False).astype(bool)
    side = ticks.loc[mask, "signed_volume"].to_numpy(dtype=float)
    values = nearness[mask].to_numpy(dtype=float)
    return values[side > 0], values[side < 0]


def new_high_tally(buy_nearness: Sequence[float], sell_nearness: Sequence[float]) -> Tuple[int, int]:
    """Quantas compras e vendas ocorreram exatamente na máxima (proximidade 1)."""
    def count(values):
        values = np.asarray(values, dtype=float)
        return int(np.sum(np.abs(values - 1.0) <= FRESH_HIGH_TOLERANCE))
    return count(buy_nearness), count(sell_nearness)


def _require_samples(a: Sequence[float], b: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise DegenerateInputError("Teste de duas amostras exige amostras não vazias")
    return a, b


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """
    Kolmogorov-Smirnov de duas amostras: D = sup |F_a − F_b|, p assintótico bilateral.

    Raises:
        DegenerateInputError: Amostra vazia
    """
    a, b = _require_samples(a, b)
    data1 = np.sort(a)
    data2 = np.sort(b)
    n1, n2 = len(data1), len(data2)
    data_all = np.concatenate([data1, data2])
    cdf1 = np.searchsorted(data1, data_all, side="right") / n1
    cdf2 = np.searchsorted(data2, data_all, side="right") / n2
    d = float(np.max(np.abs(cdf1 - cdf2)))
    en = math.sqrt(n1 * n2 / (n1 + n2))
    p_value = float(min(1.0, max(0.0, stats.kstwobign.sf(en * d))))
    return TestResult(d, p_value)


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """
    Mann-Whitney U de `a` (soma de postos menos n_a(n_a+1)/2), com aproximação
    normal bilateral, correção de empates e de continuidade.

    Raises:
        DegenerateInputError: Amostra vazia
    """
    a, b = _require_samples(a, b)
    n1, n2 = len(a), len(b)
    n = n1 + n2
    ranks = stats.rankdata(np.concatenate([a, b]))
    u_a = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)

    _, counts = np.unique(np.concatenate([a, b]), return_counts=True)
    tie_term = float(np.sum(counts.astype(float) ** 3 - counts)) / (n * (n - 1)) if n > 1 else 0.0
    sigma = math.sqrt(max(0.0, n1 * n2 / 12.0 * ((n + 1) - tie_term)))
    if sigma == 0:
        return TestResult(u_a, 1.0)
    z = (abs(u_a - n1 * n2 / 2.0) - 0.5) / sigma
    p_value = float(min(1.0, 2.0 * stats.norm.sf(z)))
    return TestResult(u_a, p_value)


def nearness_report(ticks: pd.DataFrame, agent_ids: Iterable[int]) -> NearnessReport:
    """Resumo das proximidades FCL por lado, contagem na máxima e testes KS/MWU."""
    buys, sells = nearness_at_actions(ticks, agent_ids)
    new_buys, new_sells = new_high_tally(buys, sells)
    report = NearnessReport(
        n_buy=len(buys),
        n_sell=len(sells),
        mean_buy=float(buys.mean()) if len(buys) else None,
        mean_sell=float(sells.mean()) if len(sells) else None,
        new_high_buys=new_buys,
        new_high_sells=new_sells,
    )
    if len(buys) and len(sells):
        report.ks = StatTest(**ks_two_sample(buys, sells)._asdict())
        report.mann_whitney = StatTest(**mann_whitney_u(buys, sells)._asdict())
    return report


def summarize(values: Iterable[Optional[float]]) -> MetricSummary:
    """Média e desvio padrão amostral (ddof=1) dos valores presentes."""
    present = [float(v) for v in values if v is not None and not math.isnan(v)]
    if not present:
        return MetricSummary()
    sd = float(np.std(present, ddof=1)) if len(present) > 1 else None
    return MetricSummary(mean=float(np.mean(present)), sd=sd, n=len(present))


def summary_keys(horizons: Iterable[int], lags: Iterable[int] = DEFAULT_LAGS) -> List[str]:
    return ["kurtosis", *[f"acf_abs_{lag}" for lag in lags], "ret_vol_corr",
            *[f"beta_h_{h}" for h in horizons]]
