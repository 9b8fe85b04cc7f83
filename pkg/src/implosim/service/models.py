"""Pydantic request/response models for the solver service."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .. import eos as eos_mod
from ..eigensolver import SolverSettings
from ..reconstruct import SolutionProfile


class EosBlock(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    family: str
    gamma: float | None = None
    model: str | None = None
    s: float | None = None
    q: float | None = None
    rho_ref: float | None = None
    lam: float | None = Field(None, alias="lambda")
    p0: float = 0.0
    f_table: str | None = None

    def to_model(self) -> eos_mod.EosModel:
        block = {"family": self.family, "p0": self.p0}
        for key, val in (("gamma", self.gamma), ("model", self.model),
                         ("s", self.s), ("q", self.q),
                         ("rho_ref", self.rho_ref), ("lambda", self.lam),
                         ("f_table", self.f_table)):
            if val is not None:
                block[key] = val
        return eos_mod.from_dict(block)


class ProblemBlock(BaseModel):
    kind: str
    k: int = 2
    rho0: float = 1.0
    xi_s: float | None = None


class ExponentsBlock(BaseModel):
    alpha: float | None = None
    beta: float | None = None


class SolverBlock(BaseModel):
    bracket: tuple[float, float] = (-0.99, -0.05)
    tol_alpha: float = 1e-10
    tol_numerator: float = 1e-6
    delta_stop: float = 1e-8
    surface_eps: float = 1e-6
    h_jump: float = 1e-5
    xi_max_factor: float = 1e4
    rtol: float = 1e-10
    atol: float = 1e-14
    scan_points: int = 20
    max_iterations: int = 200
    secant: bool = True
    crossing_tol: float = 1e-3

    def to_settings(self) -> SolverSettings:
        return SolverSettings(
            tol_alpha=self.tol_alpha, tol_numerator=self.tol_numerator,
            delta_stop=self.delta_stop, surface_eps=self.surface_eps,
            h_jump=self.h_jump, xi_max_factor=self.xi_max_factor,
            rtol=self.rtol, atol=self.atol, scan_points=self.scan_points,
            max_iterations=self.max_iterations, secant=self.secant,
            crossing_tol=self.crossing_tol)


class ClassifyRequest(BaseModel):
    eos: EosBlock
    kind: str


class ClassifyResponse(BaseModel):
    family: str
    kind: str
    relations: list[str]
    free_dims: int
    solvable: bool


class ProfileModel(BaseModel):
    alpha: float
    beta: float
    kind: str
    k: int
    rho0: float
    p0: float = 0.0
    xi: list[float]
    R: list[float]
    V: list[float]
    Pi: list[float]
    sonic_xi: float | None = None
    crossed: bool = True
    residual: float | None = None

    @model_validator(mode="after")
    def _lengths(self):
        n = len(self.xi)
        if not (len(self.R) == len(self.V) == len(self.Pi) == n):
            raise ValueError("profile columns must have equal length")
        return self

    @classmethod
    def from_profile(cls, p: SolutionProfile) -> "ProfileModel":
        return cls(alpha=p.alpha, beta=p.beta, kind=p.kind, k=p.k,
                   rho0=p.rho0, p0=p.p0, xi=p.xi.tolist(), R=p.R.tolist(),
                   V=p.V.tolist(), Pi=p.Pi.tolist(), sonic_xi=p.sonic_xi,
                   crossed=p.crossed, residual=p.eigen_residual)

    def to_profile(self) -> SolutionProfile:
        return SolutionProfile(
            alpha=self.alpha, beta=self.beta, kind=self.kind, k=self.k,
            rho0=self.rho0, xi=self.xi, R=self.R, V=self.V, Pi=self.Pi,
            sonic_xi=self.sonic_xi, p0=self.p0, crossed=self.crossed,
            eigen_residual=self.residual)


class EigenInfo(BaseModel):
    free_name: str
    free_value: float
    alpha: float
    beta: float
    bracket: tuple[float, float]
    iterations: int
    sonic_xi: float
    residual: float
    crossed: bool
    notes: str = ""


class SolveRequest(BaseModel):
    problem: ProblemBlock
    eos: EosBlock
    exponents: ExponentsBlock = ExponentsBlock()
    solver: SolverBlock = SolverBlock()


class SolveResponse(BaseModel):
    eigen: EigenInfo
    profile: ProfileModel


class ScanEntry(BaseModel):
    value: float
    stop_reason: str
    numerator_sign: int
    stop_xi: float
    numerator_end: float


class ScanRequest(BaseModel):
    problem: ProblemBlock
    eos: EosBlock
    exponents: ExponentsBlock = ExponentsBlock()
    solver: SolverBlock = SolverBlock()


class ScanResponse(BaseModel):
    entries: list[ScanEntry]
    brackets: list[tuple[float, float]]


class GridSpec(BaseModel):
    lo: float
    hi: float
    n: int
    spacing: str = "lin"


class ReconstructRequest(BaseModel):
    profile: ProfileModel
    r: GridSpec | list[float]
    t: list[float]


class SampleModel(BaseModel):
    r: float
    t: float
    rho: float
    u: float
    p: float
    region: str
    extrapolated: bool = False


class ReconstructResponse(BaseModel):
    samples: list[SampleModel]


class VerifyOptions(BaseModel):
    t_probe: float = -1.0
    n_points: int = 50
    r_window: tuple[float, float] = (1.5, 5.0)
    h_t_rel: float = 3e-3
    h_r_rel: float = 3e-3
    eps: float = 1e-6
    pde_tol: float = 1e-5


class VerifyRequest(BaseModel):
    profile: ProfileModel
    eos: EosBlock
    options: VerifyOptions = VerifyOptions()


class VerifyResponse(BaseModel):
    passed: bool
    pde_residual_norms: dict
    entropy_ok: bool
    entropy_margin: float
    ivt_ok: bool
    ivt_delta_neg_xi: float
    ivt_delta_pos_xi: float
    conservation_norms: dict
    notes: list[str]
