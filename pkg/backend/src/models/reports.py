"""
Modelos dos relatórios: métricas por tentativa, tabelas de turno único e manifesto de execução.
"""
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class RegressionResult(BaseModel):
    """Regressão do retorno futuro sobre a proximidade da máxima histórica."""
    beta_h: float
    intercept: float
    n_obs: int = Field(..., ge=3)
    horizon_days: int
    stderr: Optional[float] = None
    t_stat: Optional[float] = None


class StylizedFactsReport(BaseModel):
    """Curtose em excesso, autocorrelação de |r| por defasagem e correlação retorno-volume."""
    kurtosis: Optional[float] = None
    acf_abs: Dict[int, Optional[float]] = {}
    ret_vol_corr: Optional[float] = None
    n_returns: int = 0


class StatTest(BaseModel):
    statistic: float
    p_value: float


class NearnessReport(BaseModel):
    """Proximidade da máxima no momento das ordens FCL, por lado."""
    n_buy: int = 0
    n_sell: int = 0
    mean_buy: Optional[float] = None
    mean_sell: Optional[float] = None
    new_high_buys: int = 0
    new_high_sells: int = 0
    ks: Optional[StatTest] = None
    mann_whitney: Optional[StatTest] = None


class TrialReport(BaseModel):
    """Métricas de uma tentativa (uma semente)."""
    seed: Optional[int] = None
    tick_file: str
    n_bars: int = 0
    n_days: int = 0
    stylized_facts: StylizedFactsReport = StylizedFactsReport()
    regressions: Dict[int, Optional[RegressionResult]] = {}
    nearness: Optional[NearnessReport] = None
    asset_proportion_percentiles: Optional[Dict[str, float]] = None


class MetricSummary(BaseModel):
    """Média e desvio padrão amostral entre tentativas; sd ausente com uma tentativa."""
    mean: Optional[float] = None
    sd: Optional[float] = None
    n: int = 0


class AnalysisReport(BaseModel):
    trials: List[TrialReport]
    summary: Dict[str, MetricSummary]


class Tally(BaseModel):
    """Contagem de intenções de um cenário de turno único."""
    buys: int = 0
    sells: int = 0
    failures: int = 0

    @property
    def net(self) -> int:
        return self.buys - self.sells

    @property
    def trials(self) -> int:
        return self.buys + self.sells + self.failures

    def cell(self) -> str:
        return f"{self.net:+d} ({self.buys}, {self.sells})" if self.net else f"0 ({self.buys}, {self.sells})"


class TrialArtifact(BaseModel):
    seed: int
    tick_file: str
    portfolio_file: Optional[str] = None
    fcl_ids: List[int] = []
    elapsed_seconds: float = 0.0
    stats: Dict[str, float] = {}


class RunManifest(BaseModel):
    """Manifesto de um comando run: configuração, sementes, artefatos e tempos."""
    config: Dict
    seeds: List[int]
    output_dir: str
    tick_format: str = "csv"
    trials: List[TrialArtifact] = []
    started_at: str
    finished_at: Optional[str] = None
    wall_seconds: Optional[float] = None
