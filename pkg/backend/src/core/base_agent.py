from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np

from ..agents.population import AgentState, FcnParams
from .market import MarketSnapshot, OrderRequest


class BaseAgent(ABC):
    """Classe base para todos os agentes de negociação"""

    kind = "base"

    def __init__(self, agent_id: int, params: FcnParams, state: AgentState):
        self.agent_id = agent_id
        self.params = params
        self.state = state
        self.name = f"{self.__class__.__name__}-{agent_id}"
        self.description = "Agente base de negociação"

    @abstractmethod
    async def decide(self, snapshot: MarketSnapshot, rng: np.random.Generator) -> Optional[OrderRequest]:
        """
        Decide a ordem do passo.

        Args:
            snapshot: Condição de mercado observada
            rng: Gerador do agente selecionado

        Returns:
            Optional[OrderRequest]: Ordem proposta ou None para não negociar
        """
        pass

    def get_agent_info(self) -> Dict[str, Any]:
        """
        Retorna informações sobre o agente.

        Returns:
            Dict[str, Any]: Informações do agente
        """
        return {
            "agent_id": self.agent_id,
            "name": self.name,
            "kind": self.kind,
            "description": self.description,
            "tau_j": self.params.tau_j,
            "alpha_j": self.params.alpha_j,
            "cash": self.state.cash,
            "position": self.state.position,
        }
