"""
Cliente para endpoints chat-completions (formato OpenAI) usado como provedor de decisão.

Fluxo de uma decisão:
1. build_prompt(contexto) é enviado como uma única mensagem de usuário.
2. O texto da primeira escolha é lido por parse_response.
3. Resposta ilegível: nova tentativa com o erro anexado ao prompt, até max_retries.
4. Falha de transporte ou tentativas esgotadas: ProviderUnavailableError.
"""
import os
from typing import Any, Dict, Optional

import httpx
import numpy as np
from loguru import logger
from tenacity import AsyncRetrying, RetryError, retry_if_exception, stop_after_attempt, wait_exponential

from ..core.errors import ParseFailureError, ProviderUnavailableError
from ..models.decision import DecisionContext, Intention, ProviderConfig
from ..services.decision_prompt import build_prompt, parse_response

RETRY_NOTE = (
    "(Caution) Your previous answer could not be used: {hint} "
    "Answer again strictly in the JSON answer format."
)


def is_transient(error: BaseException) -> bool:
    """Falhas de transporte, 429 e 5xx valem nova tentativa; demais respostas HTTP são definitivas."""
    if isinstance(error, httpx.HTTPStatusError):
        status = error.response.status_code
        return status == 429 or status >= 500
    return isinstance(error, httpx.TransportError)


class ChatCompletionsClient:
    """Cliente assíncrono mínimo para POST /v1/chat/completions."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: Optional[str] = None,
        timeout: float = 30.0,
        temperature: float = 1.0,
        transport_retries: int = 3,
        backoff: float = 1.0,
        transport: Optional[httpx.AsyncBaseTransport] = None,
    ):
        """
        Inicializa o cliente.

        Args:
            endpoint: URL completa do endpoint chat-completions
            model: Nome do modelo enviado no corpo da requisição
            api_key: Chave enviada como Bearer (opcional)
            timeout: Timeout por requisição, em segundos
            temperature: Temperatura de amostragem
            transport_retries: Tentativas em falhas de transporte/HTTP
            backoff: Multiplicador da espera exponencial entre tentativas
            transport: Transporte httpx alternativo (ex.: ASGITransport nos testes)
        """
        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.transport_retries = transport_retries
        self.backoff = backoff

        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.AsyncClient(timeout=timeout, headers=headers, transport=transport)

    def build_payload(self, content: str) -> Dict[str, Any]:
        return {
            "model": self.model,
            "messages": [{"role": "user", "content": content}],
            "temperature": self.temperature,
        }

    async def complete(self, content: str) -> str:
        """
        Envia uma mensagem e devolve o texto da primeira escolha.

        Raises:
            ProviderUnavailableError: Transporte falhou após as tentativas ou envelope inválido
        """
        try:
            async for attempt in AsyncRetrying(
                stop=stop_after_attempt(self.transport_retries),
                wait=wait_exponential(multiplier=self.backoff, max=10),
                retry=retry_if_exception(is_transient),
                reraise=True,
            ):
                with attempt:
                    response = await self._client.post(self.endpoint, json=self.build_payload(content))
                    response.raise_for_status()
        except httpx.HTTPStatusError as e:
            logger.error(f"Erro HTTP do provedor: {e.response.status_code} - {e.response.text[:200]}")
            raise ProviderUnavailableError(f"Endpoint respondeu {e.response.status_code}") from e
        except (httpx.TransportError, RetryError) as e:
            logger.error(f"Erro de transporte ao chamar o provedor: {str(e)}")
            raise ProviderUnavailableError(f"Falha de transporte: {type(e).__name__}") from e

        try:
            return response.json()["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise ProviderUnavailableError("Envelope chat-completions inválido") from e

    async def aclose(self) -> None:
        await self._client.aclose()


def client_from_config(
    cfg: ProviderConfig,
    transport: Optional[httpx.AsyncBaseTransport] = None,
    backoff: float = 1.0,
) -> ChatCompletionsClient:
    """Cria o cliente a partir da configuração; a chave vem da variável de ambiente configurada."""
    api_key = os.getenv(cfg.api_key_env)
    if not api_key:
        logger.debug(f"Variável {cfg.api_key_env} não definida - requisições sem Authorization")
    return ChatCompletionsClient(
        endpoint=cfg.endpoint,
        model=cfg.model_name,
        api_key=api_key,
        timeout=cfg.timeout,
        temperature=cfg.temperature,
        transport_retries=cfg.transport_retries,
        backoff=backoff,
        transport=transport,
    )


async def decide_remote(cfg: ProviderConfig, ctx: DecisionContext, client: ChatCompletionsClient) -> Intention:
    """
    Pede uma decisão ao endpoint remoto.

    Args:
        cfg: Configuração do provedor (max_retries)
        ctx: Contexto de decisão
        client: Cliente chat-completions

    Returns:
        Intention: Compra ou venda

    Raises:
        ProviderUnavailableError: Transporte falhou ou respostas ilegíveis esgotaram as tentativas
    """
    prompt = build_prompt(ctx)
    content = prompt
    for attempt in range(cfg.max_retries + 1):
        reply = await client.complete(content)
        try:
            return parse_response(reply).intention
        except ParseFailureError as e:
            logger.warning(f"Resposta ilegível do provedor (tentativa {attempt + 1}/{cfg.max_retries + 1}): {e}")
            content = f"{prompt}{RETRY_NOTE.format(hint=e.hint)}\n"

    raise ProviderUnavailableError(f"Respostas ilegíveis após {cfg.max_retries + 1} tentativas")


class RemoteDecisionProvider:
    """Provedor de decisão remoto (LLM via chat-completions)."""

    def __init__(
        self,
        cfg: ProviderConfig,
        client: Optional[ChatCompletionsClient] = None,
        transport: Optional[httpx.AsyncBaseTransport] = None,
    ):
        self.cfg = cfg
        self.client = client or client_from_config(cfg, transport=transport)
        self.label = cfg.label
        self.stats = {"decisions": 0, "unavailable": 0}

    async def decide(self, ctx: DecisionContext, rng: Optional[np.random.Generator] = None) -> Intention:
        try:
            intention = await decide_remote(self.cfg, ctx, self.client)
        except ProviderUnavailableError:
            self.stats["unavailable"] += 1
            raise
        self.stats["decisions"] += 1
        return intention

    async def aclose(self) -> None:
        await self.client.aclose()
