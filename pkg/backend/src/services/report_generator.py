"""
Geração dos relatórios em texto e das tabelas CSV para gráficos externos.
"""
from typing import Dict, List, Tuple

import pandas as pd

from ..models.reports import AnalysisReport, Tally
from ..utils.formatting import format_mean_sd
from .single_turn import SCENARIO_ORDER, ScenarioKind

SEPARATOR = "=" * 72


def _fmt(value, digits: int = 4) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"


def trial_frame(report: AnalysisReport) -> pd.DataFrame:
    """Uma linha por tentativa com todas as métricas escalares."""
    rows = []
    for trial in report.trials:
        facts = trial.stylized_facts
        row = {"seed": trial.seed, "tick_file": trial.tick_file, "n_days": trial.n_days,
               "kurtosis": facts.kurtosis, "ret_vol_corr": facts.ret_vol_corr}
        for lag, value in facts.acf_abs.items():
            row[f"acf_abs_{lag}"] = value
        for horizon, regression in trial.regressions.items():
            row[f"beta_h_{horizon}"] = regression.beta_h if regression else None
            row[f"beta_h_{horizon}_stderr"] = regression.stderr if regression else None
        if trial.nearness is not None:
            row["mean_buy_nearness"] = trial.nearness.mean_buy
            row["mean_sell_nearness"] = trial.nearness.mean_sell
            row["new_high_buys"] = trial.nearness.new_high_buys
            row["new_high_sells"] = trial.nearness.new_high_sells
        rows.append(row)
    return pd.DataFrame(rows)


def summary_frame(report: AnalysisReport) -> pd.DataFrame:
    """Média e desvio padrão amostral por métrica."""
    return pd.DataFrame([
        {"metric": key, "mean": summary.mean, "sd": summary.sd, "n": summary.n}
        for key, summary in report.summary.items()
    ])


def render_analysis(report: AnalysisReport) -> str:
    """
    Relatório em texto: métricas por tentativa seguidas do resumo entre tentativas.

    Args:
        report: Resultado de analyze_directory

    Returns:
        str: Documento em texto
    """
    lines: List[str] = [SEPARATOR, "RELATÓRIO DE ANÁLISE", SEPARATOR]
    for trial in report.trials:
        facts = trial.stylized_facts
        lines.append(f"Tentativa seed={trial.seed} ({trial.tick_file}): {trial.n_days} dias, {trial.n_bars} barras")
        lines.append(f"  curtose em excesso: {_fmt(facts.kurtosis)}")
        for lag, value in facts.acf_abs.items():
            lines.append(f"  acf |r| lag {lag}: {_fmt(value)}")
        lines.append(f"  correlação |r|-volume: {_fmt(facts.ret_vol_corr)}")
        for horizon, regression in trial.regressions.items():
            if regression is None:
                lines.append(f"  beta_h {horizon}d: n/a")
            else:
                lines.append(
                    f"  beta_h {horizon}d: {regression.beta_h:.6f} (ep {_fmt(regression.stderr, 6)}, "
                    f"t {_fmt(regression.t_stat, 2)}, n={regression.n_obs})"
                )
        if trial.nearness is not None:
            near = trial.nearness
            lines.append(
                f"  proximidade FCL: compras {near.n_buy} (média {_fmt(near.mean_buy)}), "
                f"vendas {near.n_sell} (média {_fmt(near.mean_sell)})"
            )
            lines.append(f"  ordens na máxima: {near.new_high_buys} compras, {near.new_high_sells} vendas")
            if near.ks is not None:
                lines.append(f"  KS: D={near.ks.statistic:.4f} p={near.ks.p_value:.4g}")
                lines.append(f"  Mann-Whitney: U={near.mann_whitney.statistic:.1f} p={near.mann_whitney.p_value:.4g}")
        if trial.asset_proportion_percentiles:
            pct = trial.asset_proportion_percentiles
            lines.append("  proporção em ativo: " + ", ".join(f"{k}={v:.4f}" for k, v in pct.items()))

    lines.extend([SEPARATOR, "RESUMO ENTRE TENTATIVAS (média ± desvio padrão amostral)", SEPARATOR])
    for key, summary in report.summary.items():
        if summary.mean is None:
            lines.append(f"  {key}: n/a")
        else:
            lines.append(f"  {key}: {format_mean_sd(summary.mean, summary.sd)} (n={summary.n})")
    return "\n".join(lines) + "\n"


def single_turn_frame(rows: List[Tuple[str, Dict[ScenarioKind, Tally]]]) -> pd.DataFrame:
    """Uma linha por (provedor, cenário) com net, compras, vendas e falhas."""
    records = []
    for label, tallies in rows:
        for kind in SCENARIO_ORDER:
            tally = tallies[kind]
            records.append({"provider": label, "scenario": kind.value, "net": tally.net,
                            "buys": tally.buys, "sells": tally.sells, "failures": tally.failures})
    return pd.DataFrame(records, columns=["provider", "scenario", "net", "buys", "sells", "failures"])


def render_single_turn(rows: List[Tuple[str, Dict[ScenarioKind, Tally]]]) -> str:
    """Grade provedor × cenário com células "net (compras, vendas)"."""
    grid = pd.DataFrame(
        [[tallies[kind].cell() for kind in SCENARIO_ORDER] for _, tallies in rows],
        index=[label for label, _ in rows],
        columns=[kind.value for kind in SCENARIO_ORDER],
    )
    grid.index.name = "provider"
    return grid.to_string() + "\n"
