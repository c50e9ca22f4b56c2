"""
Configuração centralizada do loguru.
"""
import os
import sys
from typing import Optional

from loguru import logger

LOG_FILE_NAME = "market_sim.log"


def setup_logging(level: str = "INFO", logs_dir: Optional[str] = None) -> None:
    """
    Substitui o sink padrão do loguru por stderr no nível pedido e,
    opcionalmente, um arquivo rotativo em logs_dir.

    Args:
        level: Nível mínimo de log (DEBUG, INFO, WARNING...)
        logs_dir: Diretório do arquivo de log; None desativa o arquivo
    """
    logger.remove()
    logger.add(
        sys.stderr,
        level=level.upper(),
        format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {name}:{line} - {message}",
    )

    if logs_dir:
        os.makedirs(logs_dir, exist_ok=True)
        logger.add(
            os.path.join(logs_dir, LOG_FILE_NAME),
            level="DEBUG",
            rotation="10 MB",
            retention=5,
            encoding="utf-8",
        )
