# schema for run configurations

from typing import List, Optional

from pydantic import BaseModel, Field

from app.services.pseudodiff import DecompositionReport, Prop22Table

COMMANDS = ("check-rank", "envelope", "relax", "verify-prop22", "decompose", "oracle-compare")


class OperatorSection(BaseModel):
    label: str = "div2d"
    params: List[float] = Field(default_factory=list)


class DensitySection(BaseModel):
    label: str = "dwell"
    params: List[float] = Field(default_factory=list)


class GridSection(BaseModel):
    ladder: List[int] = Field(default_factory=lambda: [8, 16, 32])


class RankSection(BaseModel):
    sample_count: int = 512
    gap_threshold: float = 1e3
    x_samples: int = 16


class EnvelopeSection(BaseModel):
    random_starts: int = 4
    laminate_seeds: int = 4
    max_iterations: int = 2000
    tolerance: float = 1e-8
    random_scale: float = 0.5
    direction_count: int = 64
    biconjugate_points: int = 41
    biconjugate_radius: float = 2.0
    workers: int = 1


class SweepSection(BaseModel):
    """xi = center + t * direction for t on a uniform grid."""
    x0: List[float] = Field(default_factory=lambda: [0.0, 0.0])
    u0: List[float] = Field(default_factory=lambda: [0.0])
    center: List[float] = Field(default_factory=list)
    direction: List[float] = Field(default_factory=list)
    t_min: float = -2.0
    t_max: float = 2.0
    points: int = 9


class OracleSection(BaseModel):
    x0: List[float] = Field(default_factory=lambda: [0.0, 0.0])
    u0: List[float] = Field(default_factory=lambda: [0.0])
    xi_min: float = -2.0
    xi_max: float = 2.0
    xi_points: int = 3
    oracle_min: float = -3.0
    oracle_max: float = 3.0
    oracle_points: int = 61
    tolerance_oracle: float = 1e-3
    tolerance_upper: float = 1e-8


class RelaxSection(BaseModel):
    u: str = "zero"
    v: str = "zero"
    r_ladder: List[float] = Field(default_factory=lambda: [0.5, 0.25])
    m_ladder: List[int] = Field(default_factory=lambda: [2, 4, 8])
    cell_points: int = 64
    phi: str = "full"
    mu: float = 0.05
    quadrature_points: int = 4
    defect_r_ladder: List[float] = Field(default_factory=lambda: [0.5, 0.25, 0.125])
    tolerance_lower: float = 1e-3
    tolerance_relative: float = 0.05
    tolerance_absolute: float = 5e-3
    workers: int = 1


class Prop22Section(BaseModel):
    etas: List[str] = Field(default_factory=lambda: ["one", "bump"])
    qs: List[float] = Field(default_factory=lambda: [1.5, 2.0, 3.0])
    ensemble_size: int = 4
    grids: List[int] = Field(default_factory=lambda: [8, 16, 32])


class DecomposeSection(BaseModel):
    ensemble: str = "concentration"
    q: float = 1.5
    G: int = 64
    ns: List[int] = Field(default_factory=lambda: [4, 8, 16, 32])
    eta: str = "one"
    quantile: float = 0.5
    scale: float = 1.5
    growth: float = 0.1
    m_factors: List[float] = Field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0, 32.0])
    tail_factor: float = 8.0
    tail_shrink: float = 10.0
    residual_factor: float = 2.0


class RunConfig(BaseModel):
    command: Optional[str] = None
    seed: int
    output_dir: str = "aqrelax-out"
    operator: OperatorSection = Field(default_factory=OperatorSection)
    density: DensitySection = Field(default_factory=DensitySection)
    grid: GridSection = Field(default_factory=GridSection)
    rank: RankSection = Field(default_factory=RankSection)
    envelope: EnvelopeSection = Field(default_factory=EnvelopeSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    oracle: OracleSection = Field(default_factory=OracleSection)
    relax: RelaxSection = Field(default_factory=RelaxSection)
    prop22: Prop22Section = Field(default_factory=Prop22Section)
    decompose: DecomposeSection = Field(default_factory=DecomposeSection)


SECTIONS = {
    "operator": OperatorSection,
    "density": DensitySection,
    "grid": GridSection,
    "rank": RankSection,
    "envelope": EnvelopeSection,
    "sweep": SweepSection,
    "oracle": OracleSection,
    "relax": RelaxSection,
    "prop22": Prop22Section,
    "decompose": DecomposeSection,
}


class CommandOutcome(BaseModel):
    command: str
    verdict: str
    artifacts: List[str]
    message: str

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


class Prop22Summary(BaseModel):
    operator: str
    tables: List[Prop22Table]
    verdict: str


class DecompositionSummary(BaseModel):
    ensemble: str
    report: DecompositionReport
    tail_ratio: float
    residuals_bounded: bool
    verdict: str


class SweepRow(BaseModel):
    t: float
    xi: List[float]
    value: float
    f_value: float
    laminate_bound: Optional[float] = None
    biconjugate_bound: Optional[float] = None
    converged: bool
