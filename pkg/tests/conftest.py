"""
Configuração compartilhada dos testes.
"""
import os
import sys

import pytest
from loguru import logger

# Sem arquivo de log durante os testes
os.environ["LOGS_DIR"] = ""
os.environ.setdefault("STUB_REPLY_MODE", "alternate")

# Adiciona o diretório backend ao path para importar "src."
BACKEND_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "backend")
if BACKEND_DIR not in sys.path:
    sys.path.insert(0, BACKEND_DIR)

CONFIG_DIR = os.path.join(BACKEND_DIR, "config")
GOLDEN_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: simulações completas (rodar com RUN_SLOW=1)")


def pytest_collection_modifyitems(config, items):
    if os.getenv("RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="defina RUN_SLOW=1 para rodar")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def config_dir():
    return CONFIG_DIR


@pytest.fixture
def golden_dir():
    return GOLDEN_DIR


@pytest.fixture(autouse=True)
def reset_log_sinks():
    """Remove os sinks do loguru criados durante o teste (a CLI os recria a cada chamada)."""
    yield
    logger.remove()
