"""Mapping converged similarity profiles back to physical space-time fields.

A profile provides (R, V, Pi)(xi) for xi >= xi_s.  Physical fields at
(r, t), t < 0, follow from

    xi = r*|t|^-(1+alpha),  rho = |t|^beta R,  u = |t|^alpha V,
    p - p0 = |t|^(2*alpha+beta) Pi,

and the jump sits at r_s(t) = xi_s*|t|^(1+alpha) with speed
u_s = -(1+alpha)*xi_s*|t|^alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError

VACUUM = "vacuum"
UPSTREAM = "upstream"
DISTURBED = "disturbed"

CAVITY = "cavity"
SHOCK = "shock"


@dataclass(frozen=True)
class PhysicalSample:
    r: float
    t: float
    rho: float
    u: float
    p: float
    region: str
    extrapolated: bool = False


@dataclass
class SolutionProfile:
    """Sampled eigen-solution with a monotone-cubic interpolant on log(xi).

    Samples start at xi_s; fields beyond the last sample are extended by
    constants fitted over the final decade and tagged as extrapolated.
    """

    alpha: float
    beta: float
    kind: str
    k: int
    rho0: float
    xi: np.ndarray
    R: np.ndarray
    V: np.ndarray
    Pi: np.ndarray
    sonic_xi: float | None = None
    p0: float = 0.0
    crossed: bool = True
    eigen_residual: float | None = None
    _interp: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float)
        self.R = np.asarray(self.R, dtype=float)
        self.V = np.asarray(self.V, dtype=float)
        self.Pi = np.asarray(self.Pi, dtype=float)
        if self.xi.ndim != 1 or len(self.xi) < 2:
            raise ConfigError("profile needs at least two xi samples")
        if not np.all(np.diff(self.xi) > 0):
            raise ConfigError("profile xi samples must be strictly increasing")
        if self.kind not in (CAVITY, SHOCK):
            raise ConfigError(f"unknown problem kind {self.kind!r}")

    @property
    def xi_s(self) -> float:
        return float(self.xi[0])

    @property
    def xi_end(self) -> float:
        return float(self.xi[-1])

    def _interpolants(self):
        if not self._interp:
            lx = np.log(self.xi)
            self._interp["R"] = PchipInterpolator(lx, self.R)
            self._interp["V"] = PchipInterpolator(lx, self.V)
            self._interp["Pi"] = PchipInterpolator(lx, self.Pi)
            sel = self.xi >= self.xi_end / 10.0
            self._interp["far"] = (float(np.mean(self.R[sel])),
                                   float(np.mean(self.V[sel])),
                                   float(np.mean(self.Pi[sel])))
        return self._interp

    def fields_at(self, xi: float) -> tuple[float, float, float, bool]:
        """(R, V, Pi, extrapolated) at one similarity coordinate >= xi_s."""
        interp = self._interpolants()
        if xi > self.xi_end:
            Rf, Vf, Pf = interp["far"]
            return Rf, Vf, Pf, True
        lx = math.log(max(xi, self.xi_s))
        return (float(interp["R"](lx)), float(interp["V"](lx)),
                float(interp["Pi"](lx)), False)


def to_physical(profile: SolutionProfile, r: float, t: float) -> PhysicalSample:
    """Physical fields at one point; upstream/vacuum outside the jump."""
    if t == 0:
        raise ConfigError("similarity map undefined at t = 0")
    at = abs(t)
    a, b = profile.alpha, profile.beta
    xi = r * at ** (-(1.0 + a))
    if xi < profile.xi_s:
        if profile.kind == CAVITY:
            return PhysicalSample(r, t, 0.0, 0.0, 0.0, VACUUM)
        return PhysicalSample(r, t, profile.rho0, 0.0, 0.0, UPSTREAM)
    R, V, Pi, extr = profile.fields_at(xi)
    return PhysicalSample(
        r, t,
        rho=at ** b * R,
        u=at ** a * V,
        p=profile.p0 + at ** (2 * a + b) * Pi,
        region=DISTURBED,
        extrapolated=extr)


def jump_trajectory(profile: SolutionProfile, t: float) -> float:
    """Jump radius r_s(t) = xi_s * |t|^(1+alpha)."""
    if t == 0:
        raise ConfigError("similarity map undefined at t = 0")
    return profile.xi_s * abs(t) ** (1.0 + profile.alpha)


def jump_speed(profile: SolutionProfile, t: float) -> float:
    """Jump velocity u_s(t) = -(1+alpha)*xi_s*|t|^alpha for t < 0."""
    if t >= 0:
        raise ConfigError("jump speed defined for t < 0 only")
    return -(1.0 + profile.alpha) * profile.xi_s * abs(t) ** profile.alpha


def sample_grid(profile: SolutionProfile, r_grid, t_list) -> list[PhysicalSample]:
    """Dense tabulation, row-major over (t, r); never aborts mid-table."""
    out = []
    for t in t_list:
        if t == 0:
            raise ConfigError("t values must be nonzero")
        for r in r_grid:
            out.append(to_physical(profile, float(r), float(t)))
    return out
