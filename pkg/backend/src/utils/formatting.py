"""
Utilitários de formatação numérica e serialização JSON.
"""
import json
import math
from datetime import datetime
from typing import Any, Optional

import numpy as np
import pandas as pd


def format_real(value: float) -> str:
    """
    Formata um número real com a menor representação decimal que o identifica,
    sempre em notação posicional e com ponto.
    Exemplos: -63.0, 293.7, 0.01, 300.0, 0.00001.

    Valores distintos produzem textos distintos; apenas -0.0 vira "0.0".

    Args:
        value: Valor a ser formatado

    Returns:
        String formatada
    """
    number = float(value)
    if number == 0.0:
        number = 0.0  # evita "-0.0"
    return np.format_float_positional(number, unique=True, trim="0")


def format_cash(value: float) -> str:
    """
    Formata o caixa: valores inteiros sem ponto decimal (30000), demais como real.

    Args:
        value: Caixa do agente

    Returns:
        String formatada
    """
    number = float(value)
    if math.isfinite(number) and number == int(number):
        return str(int(number))
    return format_real(number)


def format_mean_sd(mean: float, sd: Optional[float] = None, digits: int = 4) -> str:
    """Formata "média ± desvio"; desvio ausente vira "n/a"."""
    if sd is None or (isinstance(sd, float) and math.isnan(sd)):
        return f"{mean:.{digits}f} ± n/a"
    return f"{mean:.{digits}f} ± {sd:.{digits}f}"


class CustomEncoder(json.JSONEncoder):
    """Encoder que entende tipos numpy, pandas e datetime."""

    def default(self, obj):
        if isinstance(obj, (datetime, pd.Timestamp)):
            return obj.isoformat()
        elif isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return float(obj)
        elif isinstance(obj, np.ndarray):
            return obj.tolist()
        elif obj is pd.NA:
            return None
        return super().default(obj)


def to_json(data: Any) -> str:
    """
    Converte dados para JSON com formato amigável.

    Args:
        data: Dados a serem convertidos

    Returns:
        String JSON formatada
    """
    return json.dumps(data, indent=2, cls=CustomEncoder, ensure_ascii=False, sort_keys=True)
