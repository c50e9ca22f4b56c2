from typing import Any, Dict, List

import numpy as np

from .base_agent import BaseAgent


class AgentManager:
    """Gerenciador da população de agentes de uma simulação"""

    def __init__(self):
        self.agents: Dict[int, BaseAgent] = {}
        self._order: List[int] = []

    def register_agent(self, agent: BaseAgent) -> None:
        """
        Registra um novo agente no gerenciador.

        Args:
            agent: Instância do agente a ser registrado

        Raises:
            ValueError: Se o agent_id já estiver registrado
        """
        if agent.agent_id in self.agents:
            raise ValueError(f"Agente {agent.agent_id} já registrado")
        self.agents[agent.agent_id] = agent
        self._order.append(agent.agent_id)

    def get_agent(self, agent_id: int) -> BaseAgent:
        """
        Obtém um agente pelo id.

        Raises:
            KeyError: Se o agente não for encontrado
        """
        if agent_id not in self.agents:
            raise KeyError(f"Agente {agent_id} não encontrado")
        return self.agents[agent_id]

    def list_agents(self) -> List[Dict[str, Any]]:
        """
        Lista todos os agentes registrados.

        Returns:
            List[Dict[str, Any]]: Lista de informações dos agentes
        """
        return [self.agents[agent_id].get_agent_info() for agent_id in self._order]

    def ids_of_kind(self, kind: str) -> List[int]:
        return [agent_id for agent_id in self._order if self.agents[agent_id].kind == kind]

    def select(self, rng: np.random.Generator) -> BaseAgent:
        """Sorteia uniformemente o agente que age neste passo."""
        index = int(rng.integers(len(self._order)))
        return self.agents[self._order[index]]

    def __len__(self) -> int:
        return len(self._order)
