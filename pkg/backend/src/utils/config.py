"""
Gerenciador de configurações da aplicação.

Duas camadas:
- Settings: variáveis de ambiente (.env) do servidor stub, provedor remoto e diretórios.
- load_sim_config: documento JSON plano de experimento validado por SimConfig.
"""
import json
import os
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Type, TypeVar

from loguru import logger
from pydantic import BaseModel, Field, ValidationError
from pydantic_settings import BaseSettings

from ..core.errors import ConfigError
from ..models.simulation import SimConfig

ModelT = TypeVar("ModelT", bound=BaseModel)


class Settings(BaseSettings):
    """
    Configurações da aplicação.
    Carrega variáveis de ambiente e fornece valores padrão.
    """
    # Servidor stub de decisão
    API_HOST: str = Field("0.0.0.0", description="Host do servidor stub")
    API_PORT: int = Field(8000, description="Porta do servidor stub")
    DEBUG: bool = False
    ENVIRONMENT: str = "development"
    STUB_REPLY_MODE: str = Field("alternate", description="buy, sell, alternate ou prose")

    # Diretórios e logs
    LOG_LEVEL: str = "INFO"
    LOGS_DIR: str = "logs"
    OUTPUT_DIR: str = "output"

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": True,
        "extra": "ignore",
    }


@lru_cache()
def get_settings() -> Settings:
    """
    Retorna as configurações da aplicação.
    Cacheado para evitar recarregar configurações desnecessariamente.

    Returns:
        Settings: Configurações da aplicação
    """
    return Settings()


def parse_override(item: str) -> Dict[str, Any]:
    """
    Converte um override "chave=valor" da linha de comando.
    O valor é lido como JSON quando possível (números, listas, null),
    senão como texto.

    Args:
        item: Texto no formato chave=valor

    Returns:
        Dict[str, Any]: {chave: valor}
    """
    if "=" not in item:
        raise ConfigError(f"Override inválido (esperado chave=valor): {item}")
    key, raw = item.split("=", 1)
    key = key.strip()
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return {key: value}


def _format_validation_error(exc: ValidationError) -> str:
    messages = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error.get("loc", ())) or "<raiz>"
        if error.get("type") == "extra_forbidden":
            messages.append(f"Chave de configuração desconhecida: {location}")
        else:
            messages.append(f"Valor inválido para {location}: {error.get('msg')}")
    return "; ".join(messages)


def read_json_document(path: str) -> Dict[str, Any]:
    """
    Lê um documento JSON de configuração.

    Args:
        path: Caminho do arquivo

    Returns:
        Dict[str, Any]: Conteúdo do documento

    Raises:
        ConfigError: Se o arquivo não existir ou não for um objeto JSON
    """
    if not os.path.exists(path):
        raise ConfigError(f"Arquivo de configuração não encontrado: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Arquivo de configuração com JSON inválido ({path}): {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Configuração deve ser um objeto chave-valor: {path}")
    return data


def validate_document(model: Type[ModelT], data: Dict[str, Any]) -> ModelT:
    """
    Valida um documento contra um modelo pydantic, traduzindo erros para ConfigError.
    """
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format_validation_error(e)) from e


def load_sim_config(path: Optional[str] = None, overrides: Optional[Sequence[str]] = None) -> SimConfig:
    """
    Carrega a configuração de simulação a partir de um JSON plano.

    Args:
        path: Caminho do documento; None usa os padrões do preset completo
        overrides: Lista de "chave=valor" aplicados sobre o documento

    Returns:
        SimConfig: Configuração validada

    Raises:
        ConfigError: Chave desconhecida ou valor inválido
    """
    data: Dict[str, Any] = read_json_document(path) if path else {}
    for item in overrides or []:
        data.update(parse_override(item))

    config = validate_document(SimConfig, data)
    logger.debug(f"Configuração carregada ({path or 'padrão'}): {len(data)} chaves explícitas")
    return config


def dump_config(config: BaseModel) -> Dict[str, Any]:
    """Snapshot serializável de uma configuração, usado no manifesto."""
    return config.model_dump(mode="json")


def split_csv_ints(text: str) -> List[int]:
    """Converte "10,15,30" em [10, 15, 30]."""
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"Lista de inteiros inválida: {text}") from e
