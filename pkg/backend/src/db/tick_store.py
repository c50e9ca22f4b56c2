"""
Armazenamento em arquivos dos artefatos de simulação: ticks, log de portfólio
FCL e manifesto de execução.

Arquivos nunca são sobrescritos sem `overwrite=True`.
"""
import glob
import json
import os
from typing import List, Optional

import pandas as pd
from loguru import logger

from ..core.errors import ConfigError
from ..models.reports import RunManifest
from ..utils.formatting import to_json

TICK_FORMATS = ("csv", "jsonl")
MANIFEST_FILE = "manifest.json"
REQUIRED_TICK_COLUMNS = {"step", "day", "event", "agent_id", "price", "signed_volume", "market_price"}
NULLABLE_INT_COLUMNS = ("agent_id", "order_id", "expiry")


def tick_file_name(seed: int, fmt: str = "csv") -> str:
    return f"ticks_seed{seed}.{fmt}"


def portfolio_file_name(seed: int) -> str:
    return f"portfolio_seed{seed}.csv"


class TickStore:
    """
    Diretório de saída de um experimento.
    """

    def __init__(self, output_dir: str, overwrite: bool = False):
        """
        Inicializa o armazenamento.

        Args:
            output_dir: Diretório de saída (criado se não existir)
            overwrite: Permite substituir arquivos existentes
        """
        self.output_dir = output_dir
        self.overwrite = overwrite

    def path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)

    def _prepare(self, name: str) -> str:
        os.makedirs(self.output_dir, exist_ok=True)
        target = self.path(name)
        if os.path.exists(target) and not self.overwrite:
            raise ConfigError(f"Arquivo já existe (use --overwrite para substituir): {target}")
        return target

    def check_free(self, *names: str) -> None:
        """Falha cedo se algum dos arquivos já existir e overwrite não foi pedido."""
        for name in names:
            if os.path.exists(self.path(name)) and not self.overwrite:
                raise ConfigError(f"Arquivo já existe (use --overwrite para substituir): {self.path(name)}")

    def save_ticks(self, frame: pd.DataFrame, seed: int, fmt: str = "csv") -> str:
        """
        Grava o fluxo de ticks de uma tentativa.

        Args:
            frame: DataFrame de ticks
            seed: Semente da tentativa (compõe o nome do arquivo)
            fmt: "csv" ou "jsonl"

        Returns:
            str: Caminho gravado
        """
        if fmt not in TICK_FORMATS:
            raise ConfigError(f"Formato de ticks desconhecido: {fmt}")
        target = self._prepare(tick_file_name(seed, fmt))
        if fmt == "csv":
            frame.to_csv(target, index=False, float_format="%.10g")
        else:
            frame.to_json(target, orient="records", lines=True, double_precision=10)
        logger.info(f"Ticks gravados: {target} ({len(frame)} eventos)")
        return target

    def save_portfolio(self, frame: pd.DataFrame, seed: int) -> str:
        target = self._prepare(portfolio_file_name(seed))
        frame.to_csv(target, index=False, float_format="%.10g")
        return target

    def save_table(self, frame: pd.DataFrame, name: str) -> str:
        """Grava uma tabela CSV auxiliar de relatório."""
        target = self._prepare(name)
        frame.to_csv(target, index=False)
        logger.info(f"Tabela gravada: {target}")
        return target

    def save_text(self, text: str, name: str) -> str:
        target = self._prepare(name)
        with open(target, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"Relatório gravado: {target}")
        return target

    def save_manifest(self, manifest: RunManifest) -> str:
        # o manifesto é reescrito ao longo da execução
        os.makedirs(self.output_dir, exist_ok=True)
        target = self.path(MANIFEST_FILE)
        with open(target, "w", encoding="utf-8") as f:
            f.write(to_json(manifest.model_dump(mode="json")))
            f.write("\n")
        return target

    def ensure_writable(self) -> None:
        """Falha cedo se já houver um manifesto e overwrite não foi pedido."""
        if os.path.exists(self.path(MANIFEST_FILE)) and not self.overwrite:
            raise ConfigError(
                f"Diretório já contém um experimento (use --overwrite): {self.output_dir}"
            )

    def load_manifest(self) -> Optional[RunManifest]:
        target = self.path(MANIFEST_FILE)
        if not os.path.exists(target):
            return None
        try:
            with open(target, "r", encoding="utf-8") as f:
                return RunManifest.model_validate(json.load(f))
        except (json.JSONDecodeError, ValueError) as e:
            raise ConfigError(f"Manifesto corrompido: {target}") from e

    def list_tick_files(self) -> List[str]:
        """Arquivos de ticks do diretório, em ordem de nome."""
        files: List[str] = []
        for fmt in TICK_FORMATS:
            files.extend(glob.glob(self.path(f"ticks_*.{fmt}")))
        return sorted(files)


def load_ticks(path: str) -> pd.DataFrame:
    """
    Lê um arquivo de ticks (CSV ou JSONL).

    Raises:
        ConfigError: Arquivo ausente, ilegível ou sem as colunas obrigatórias
    """
    if not os.path.exists(path):
        raise ConfigError(f"Arquivo de ticks não encontrado: {path}")
    try:
        if path.endswith(".jsonl"):
            frame = pd.read_json(path, orient="records", lines=True)
        else:
            frame = pd.read_csv(path)
    except (ValueError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise ConfigError(f"Arquivo de ticks corrompido: {path} ({e})") from e

    missing = REQUIRED_TICK_COLUMNS - set(frame.columns)
    if missing:
        raise ConfigError(f"Arquivo de ticks sem colunas {sorted(missing)}: {path}")
    for name in NULLABLE_INT_COLUMNS:
        if name in frame.columns:
            frame[name] = frame[name].astype("Int64")
    return frame.sort_values("step", kind="stable").reset_index(drop=True)


def load_portfolio(path: str) -> Optional[pd.DataFrame]:
    if not os.path.exists(path):
        return None
    return pd.read_csv(path)

