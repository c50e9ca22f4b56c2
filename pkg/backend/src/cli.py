#!/usr/bin/env python
"""
Linha de comando do Market Insight Sim.

    python -m src.cli run config/desk.json --trials 5 --seed 7 --out output/desk
    python -m src.cli analyze output/desk --horizons 10,15,30
    python -m src.cli single-turn config/single_turn.json --out output/single_turn
"""
import argparse
import asyncio
import os
import sys
from typing import List, Optional

import httpx
from colorama import Fore, Style, init
from dotenv import load_dotenv
from loguru import logger

from .core.errors import MarketSimError
from .db.tick_store import TickStore
from .models.simulation import SingleTurnSettings
from .services.experiment import analyze_directory, run_trials
from .services.report_generator import (
    render_analysis,
    render_single_turn,
    single_turn_frame,
    summary_frame,
    trial_frame,
)
from .services.single_turn import FAILURE_WARNING_RATE, failure_rate, run_single_turn
from .utils.config import get_settings, load_sim_config, read_json_document, split_csv_ints, validate_document
from .utils.logger import setup_logging

init()

ANALYSIS_FILES = ("report.txt", "trials.csv", "summary.csv")
SINGLE_TURN_FILE = "single_turn.csv"


def build_parser() -> argparse.ArgumentParser:
    """Analisa os argumentos da linha de comando"""
    parser = argparse.ArgumentParser(prog="market-sim", description="Simulador de mercado com agentes FCN e FCL")
    parser.add_argument("--log-level", default=None, help="Nível de log (padrão: LOG_LEVEL do .env)")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Executa N simulações e grava ticks + manifesto")
    run.add_argument("config", help="Documento JSON de configuração")
    run.add_argument("--trials", type=int, default=1, help="Número de tentativas")
    run.add_argument("--seed", type=int, default=None, help="Primeira semente (padrão: seed da configuração)")
    run.add_argument("--out", default=None, help="Diretório de saída")
    run.add_argument("--jobs", type=int, default=1, help="Tentativas em paralelo (processos)")
    run.add_argument("--format", choices=["csv", "jsonl"], default="csv", help="Formato dos ticks")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="CHAVE=VALOR",
                     help="Sobrepõe uma chave da configuração (repetível)")
    run.add_argument("--overwrite", action="store_true", help="Permite sobrescrever saídas existentes")

    analyze = commands.add_parser("analyze", help="Calcula fatos estilizados e β^h dos ticks gravados")
    analyze.add_argument("tick_dir", help="Diretório com arquivos de ticks")
    analyze.add_argument("--horizons", default="10,15,30", help="Horizontes T em dias, separados por vírgula")
    analyze.add_argument("--steps-per-minute", type=int, default=5, help="Passos contínuos por barra")
    analyze.add_argument("--out", default=None, help="Diretório do relatório (padrão: tick_dir)")
    analyze.add_argument("--overwrite", action="store_true", help="Permite sobrescrever relatórios existentes")

    single = commands.add_parser("single-turn", help="Experimento de turno único nos cenários G+/G-/L-/L+")
    single.add_argument("config", help="Documento JSON do experimento")
    single.add_argument("--out", default=None, help="Diretório para o CSV de resultados")
    single.add_argument("--overwrite", action="store_true", help="Permite sobrescrever saídas existentes")
    return parser


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_sim_config(args.config, args.overrides)
    seed = cfg.seed if args.seed is None else args.seed
    out = args.out or os.path.join(get_settings().OUTPUT_DIR, "run")
    store = TickStore(out, overwrite=args.overwrite)

    print(f"\n{Fore.CYAN}🚀 Executando {args.trials} simulação(ões) a partir de {args.config}{Style.RESET_ALL}")
    manifest = run_trials(cfg, args.trials, seed, store, jobs=args.jobs, tick_format=args.format)
    for trial in manifest.trials:
        print(f"  {Fore.GREEN}✓{Style.RESET_ALL} seed {trial.seed}: {trial.tick_file} ({trial.elapsed_seconds:.1f}s)")
    print(f"💾 Manifesto salvo em {store.path('manifest.json')}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    horizons = split_csv_ints(args.horizons)
    store = TickStore(args.out or args.tick_dir, overwrite=args.overwrite)
    store.check_free(*ANALYSIS_FILES)
    report = analyze_directory(args.tick_dir, horizons, steps_per_minute=args.steps_per_minute)

    text = render_analysis(report)
    report_file, trials_file, summary_file = ANALYSIS_FILES
    store.save_text(text, report_file)
    store.save_table(trial_frame(report), trials_file)
    store.save_table(summary_frame(report), summary_file)
    print(text, end="")
    print(f"💾 Relatório salvo em {store.path(report_file)}")
    return 0


def cmd_single_turn(args: argparse.Namespace, transport: Optional[httpx.AsyncBaseTransport] = None) -> int:
    settings = validate_document(SingleTurnSettings, read_json_document(args.config))
    store = TickStore(args.out, overwrite=args.overwrite) if args.out else None
    if store is not None:
        store.check_free(SINGLE_TURN_FILE)

    rows = asyncio.run(run_single_turn(settings, transport=transport))
    print(render_single_turn(rows), end="")

    for label, tallies in rows:
        rate = failure_rate(tallies)
        if rate > FAILURE_WARNING_RATE:
            banner = f"⚠️ ATENÇÃO: {label} falhou em {rate:.0%} das decisões (provedor indisponível)"
            print(f"{Fore.YELLOW}{banner}{Style.RESET_ALL}")
            logger.warning(banner)

    if store is not None:
        path = store.save_table(single_turn_frame(rows), SINGLE_TURN_FILE)
        print(f"💾 Resultados salvos em {path}")
    return 0


def main(argv: Optional[List[str]] = None, transport: Optional[httpx.AsyncBaseTransport] = None) -> int:
    """
    Ponto de entrada. Devolve 0 em sucesso e 1 quando um erro de domínio ocorre.

    Args:
        argv: Argumentos (padrão: sys.argv[1:])
        transport: Transporte httpx para provedores remotos no turno único (testes)
    """
    args = build_parser().parse_args(argv)
    # a chave do provedor remoto é lida de os.environ
    load_dotenv()
    settings = get_settings()
    setup_logging(args.log_level or settings.LOG_LEVEL, settings.LOGS_DIR)

    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        return cmd_single_turn(args, transport=transport)
    except MarketSimError as e:
        logger.error(f"Comando {args.command} falhou: {e}")
        print(f"{Fore.RED}❌ {e}{Style.RESET_ALL}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
