"""
Execução de várias tentativas (sementes) e análise dos fluxos gravados.

Cada tentativa é isolada: recebe a configuração com a própria semente e,
com jobs > 1, roda em um processo separado.
"""
import os
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd
from loguru import logger

from ..core.errors import ConfigError, DegenerateInputError
from ..db.tick_store import TickStore, load_portfolio, load_ticks
from ..models.reports import AnalysisReport, RunManifest, TrialArtifact, TrialReport
from ..models.simulation import SimConfig
from ..utils.config import dump_config
from . import analytics
from .simulation import run

TrialOutput = Tuple[int, pd.DataFrame, pd.DataFrame, List[int], Dict[str, Any]]


def trial_seeds(seed: int, trials: int) -> List[int]:
    """Sementes S..S+N−1."""
    if trials < 1:
        raise ConfigError("O número de tentativas deve ser >= 1")
    return list(range(seed, seed + trials))


def run_trial(config_data: Dict[str, Any], seed: int) -> TrialOutput:
    """
    Executa uma tentativa a partir do snapshot da configuração.
    Função de módulo para poder ser enviada a outro processo.
    """
    cfg = SimConfig.model_validate({**config_data, "seed": seed})
    result = run(cfg)
    return seed, result.ticks, result.portfolio_log, result.fcl_ids, result.stats


def _execute(config_data: Dict[str, Any], seeds: Sequence[int], jobs: int) -> Iterable[TrialOutput]:
    if jobs <= 1 or len(seeds) == 1:
        for seed in seeds:
            yield run_trial(config_data, seed)
        return
    with ProcessPoolExecutor(max_workers=min(jobs, len(seeds))) as executor:
        # map preserva a ordem das sementes
        yield from executor.map(run_trial, [config_data] * len(seeds), seeds)


def run_trials(
    cfg: SimConfig,
    trials: int,
    seed: int,
    store: TickStore,
    jobs: int = 1,
    tick_format: str = "csv",
) -> RunManifest:
    """
    Executa N tentativas com sementes consecutivas e grava ticks e manifesto.

    Args:
        cfg: Configuração validada (a semente é substituída por tentativa)
        trials: Número de tentativas
        seed: Primeira semente
        store: Diretório de saída
        jobs: Processos em paralelo
        tick_format: "csv" ou "jsonl"

    Returns:
        RunManifest: Manifesto gravado
    """
    store.ensure_writable()
    seeds = trial_seeds(seed, trials)
    config_data = dump_config(cfg)
    manifest = RunManifest(
        config=config_data,
        seeds=seeds,
        output_dir=store.output_dir,
        tick_format=tick_format,
        started_at=datetime.now(timezone.utc).isoformat(),
    )
    started = time.perf_counter()
    logger.info(f"Iniciando {trials} tentativa(s), sementes {seeds[0]}..{seeds[-1]}, jobs={jobs}")

    for trial_seed, ticks, portfolio, fcl_ids, stats in _execute(config_data, seeds, jobs):
        tick_path = store.save_ticks(ticks, trial_seed, tick_format)
        portfolio_path = store.save_portfolio(portfolio, trial_seed) if cfg.n_fcl > 0 else None
        manifest.trials.append(TrialArtifact(
            seed=trial_seed,
            tick_file=os.path.basename(tick_path),
            portfolio_file=os.path.basename(portfolio_path) if portfolio_path else None,
            fcl_ids=fcl_ids,
            elapsed_seconds=float(stats.get("elapsed_seconds", 0.0)),
            stats={key: float(value) for key, value in stats.items()},
        ))
        store.save_manifest(manifest)

    manifest.finished_at = datetime.now(timezone.utc).isoformat()
    manifest.wall_seconds = round(time.perf_counter() - started, 3)
    store.save_manifest(manifest)
    logger.info(f"Experimento concluído em {manifest.wall_seconds}s: {store.path('manifest.json')}")
    return manifest


def analyze_trial(
    ticks: pd.DataFrame,
    day_structure: Tuple[int, int, int, int],
    horizons: Sequence[int],
    tick_file: str,
    seed: Optional[int] = None,
    fcl_ids: Sequence[int] = (),
    portfolio: Optional[pd.DataFrame] = None,
    steps_per_minute: int = 5,
    initial_price: Optional[float] = None,
) -> TrialReport:
    """
    Métricas de uma tentativa: fatos estilizados, β^h por horizonte e, com
    agentes FCL, proximidade da máxima nas ordens e proporção em ativo.
    """
    bars = analytics.build_bars(ticks, steps_per_minute, day_structure, initial_price)
    closes = analytics.daily_closes(bars)
    report = TrialReport(
        seed=seed,
        tick_file=tick_file,
        n_bars=len(bars),
        n_days=len(closes),
        stylized_facts=analytics.stylized_facts(bars),
    )
    for horizon in horizons:
        try:
            report.regressions[horizon] = analytics.ath_regression(closes, horizon)
        except DegenerateInputError as e:
            logger.warning(f"β^h de {horizon} dias indisponível ({tick_file}): {e}")
            report.regressions[horizon] = None

    if fcl_ids:
        report.nearness = analytics.nearness_report(ticks, fcl_ids)
        proportions = analytics.portfolio_proportions(portfolio)
        if len(proportions):
            report.asset_proportion_percentiles = analytics.percentiles(proportions)
    return report


def trial_metrics(report: TrialReport) -> Dict[str, Optional[float]]:
    """Valores planos de uma tentativa, na ordem das chaves de resumo."""
    facts = report.stylized_facts
    values: Dict[str, Optional[float]] = {"kurtosis": facts.kurtosis}
    for lag, value in facts.acf_abs.items():
        values[f"acf_abs_{lag}"] = value
    values["ret_vol_corr"] = facts.ret_vol_corr
    for horizon, regression in report.regressions.items():
        values[f"beta_h_{horizon}"] = regression.beta_h if regression else None
    return values


def summarize_trials(reports: Sequence[TrialReport], horizons: Sequence[int]) -> AnalysisReport:
    """Média ± desvio padrão amostral entre tentativas para cada métrica."""
    rows = [trial_metrics(report) for report in reports]
    summary = {
        key: analytics.summarize(row.get(key) for row in rows)
        for key in analytics.summary_keys(horizons)
    }
    return AnalysisReport(trials=list(reports), summary=summary)


def analyze_directory(tick_dir: str, horizons: Sequence[int], steps_per_minute: int = 5) -> AnalysisReport:
    """
    Analisa todos os arquivos de ticks de um diretório.

    A estrutura do dia e os ids FCL vêm do manifesto; sem manifesto usa-se a
    estrutura padrão e nenhum agente FCL.

    Raises:
        ConfigError: Diretório ausente, sem arquivos de ticks ou arquivo corrompido
    """
    if not os.path.isdir(tick_dir):
        raise ConfigError(f"Diretório de ticks não encontrado: {tick_dir}")
    store = TickStore(tick_dir)
    manifest = store.load_manifest()
    files = store.list_tick_files()
    if not files:
        raise ConfigError(f"Nenhum arquivo de ticks em {tick_dir}")

    day_structure = analytics.DEFAULT_DAY_STRUCTURE
    initial_price = None
    artifacts: Dict[str, TrialArtifact] = {}
    if manifest is not None:
        day_structure = tuple(manifest.config.get("day_structure", day_structure))
        initial_price = manifest.config.get("initial_price")
        artifacts = {artifact.tick_file: artifact for artifact in manifest.trials}
        seed_of = {name: artifact.seed for name, artifact in artifacts.items()}
        files.sort(key=lambda path: (seed_of.get(os.path.basename(path), float("inf")), path))

    reports = []
    for path in files:
        name = os.path.basename(path)
        artifact = artifacts.get(name)
        ticks = load_ticks(path)
        portfolio = None
        if artifact is not None and artifact.portfolio_file:
            portfolio = load_portfolio(store.path(artifact.portfolio_file))
        reports.append(analyze_trial(
            ticks,
            day_structure=day_structure,
            horizons=horizons,
            tick_file=name,
            seed=artifact.seed if artifact else None,
            fcl_ids=artifact.fcl_ids if artifact else (),
            portfolio=portfolio,
            steps_per_minute=steps_per_minute,
            initial_price=initial_price,
        ))
        logger.info(f"Tentativa analisada: {name}")
    return summarize_trials(reports, horizons)
