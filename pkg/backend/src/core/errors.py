"""
Hierarquia de exceções do simulador.

Todo erro de domínio herda de MarketSimError, para que a CLI possa
convertê-lo em mensagem legível e status de saída diferente de zero.
"""


class MarketSimError(Exception):
    """Erro base do simulador de mercado."""


class OrderRejectedError(MarketSimError):
    """Ordem inválida ou duplicada recusada pelo livro de ofertas."""


class InvalidInputError(MarketSimError):
    """Entrada numérica fora do domínio (preços não positivos, parâmetros inválidos)."""


class DegenerateInputError(MarketSimError):
    """Amostra insuficiente ou sem variância para a estatística pedida."""


class ParseFailureError(MarketSimError):
    """
    Resposta do provedor de decisão sem objeto de decisão utilizável.
    hint é a explicação em inglês reenviada ao modelo na nova tentativa.
    """

    def __init__(self, message: str, hint: str = ""):
        super().__init__(message)
        self.hint = hint or message


class ProviderUnavailableError(MarketSimError):
    """Provedor de decisão indisponível (transporte, timeout ou tentativas esgotadas)."""


class ConfigError(MarketSimError):
    """Configuração inválida, arquivo ilegível ou saída que não pode ser sobrescrita."""
