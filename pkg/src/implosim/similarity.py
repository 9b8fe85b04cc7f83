"""Similarity-space phase state, reduced ODEs, and jump conditions.

With scaling exponents (alpha, beta) the flow fields collapse onto
profiles of xi = r*|t|^-(1+alpha):

    rho = |t|^beta R(xi),  u = |t|^alpha V(xi),  p - p0 = |t|^(2a+b) Pi(xi)

and the PDEs reduce to an ODE system whose right-hand side shares the
factor N / (R*X*(X^2 - C^2)) where X = (1+alpha)*xi + V is the group
velocity, R*C^2 = Pi*f is the scaled sound speed, and

    N = (beta + 2*alpha)*Pi - R*V*(alpha*X + k*C^2/xi).

The system is singular where X = 0 or X^2 = C^2; the latter locus is the
sonic line whose regular crossing defines the nonlinear eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.optimize import brentq

from .eos import EosModel, CAVITY, SHOCK
from .errors import (ConfigError, EntropyViolation, InvalidExponent, NoRoot,
                     SingularPoint)


@dataclass(frozen=True)
class Exponents:
    """Scaling pair; either entry may be None while still undetermined."""

    alpha: float | None
    beta: float | None

    def resolved(self) -> bool:
        return self.alpha is not None and self.beta is not None


@dataclass(frozen=True)
class SimilarityState:
    xi: float
    R: float
    V: float
    Pi: float


@dataclass(frozen=True)
class JumpState:
    pre: tuple[float, float, float]
    post: tuple[float, float, float]
    Vs: float
    xi_s: float

    def post_state(self) -> SimilarityState:
        R1, V1, Pi1 = self.post
        return SimilarityState(self.xi_s, R1, V1, Pi1)


@dataclass(frozen=True)
class ProblemSpec:
    """Fully specified similarity problem (exponents may have one free slot)."""

    kind: str
    k: int
    eos: EosModel
    exponents: Exponents
    rho0: float = 1.0
    xi_s: float | None = None

    def __post_init__(self):
        if self.kind not in (CAVITY, SHOCK):
            raise ConfigError(f"kind must be cavity or shock, got {self.kind!r}")
        if self.k not in (1, 2):
            raise ConfigError(f"geometry index k must be 1 or 2, got {self.k!r}")
        if self.kind == SHOCK:
            if self.rho0 <= 0:
                raise ConfigError("shock problem needs upstream density rho0 > 0")
            b = self.exponents.beta
            if b is not None and b != 0.0:
                raise ConfigError("shock problem requires beta = 0")

    @property
    def alpha(self) -> float:
        a = self.exponents.alpha
        if a is None:
            raise ConfigError("alpha is not resolved")
        return a

    @property
    def beta(self) -> float:
        b = self.exponents.beta
        if b is None:
            raise ConfigError("beta is not resolved")
        return b

    def with_exponents(self, alpha: float, beta: float) -> "ProblemSpec":
        return replace(self, exponents=Exponents(alpha, beta))

    def jump_xi(self) -> float:
        """Jump coordinate: explicit, or the V1 = -1 cavity normalization."""
        if self.xi_s is not None:
            return self.xi_s
        if self.kind == CAVITY:
            a = self.alpha
            if a <= -1.0:
                raise InvalidExponent(f"cavity jump undefined for alpha = {a} <= -1")
            return 1.0 / (1.0 + a)
        return 1.0


def group_velocity(spec: ProblemSpec, state: SimilarityState) -> float:
    return (1.0 + spec.alpha) * state.xi + state.V


def sound_speed_sq_sim(spec: ProblemSpec, state: SimilarityState) -> float:
    """C^2 = Pi*f/R at a similarity state."""
    return state.Pi * spec.eos.f_sim(state.Pi, state.R) / state.R


def _core(alpha, beta, k, xi, R, V, Pi, F):
    """X, C2, Delta, N from raw fields with f supplied by the caller."""
    X = (1.0 + alpha) * xi + V
    C2 = Pi * F / R
    Delta = X * X - C2
    N = (beta + 2.0 * alpha) * Pi - R * V * (alpha * X + k * C2 / xi)
    return X, C2, Delta, N


def _rhs_raw(alpha, beta, k, xi, R, V, Pi, F, floor=0.0):
    X, C2, Delta, N = _core(alpha, beta, k, xi, R, V, Pi, F)
    denom = R * X * Delta
    if denom == 0.0 or abs(X * Delta) <= floor * (X * X + C2) ** 1.5:
        raise SingularPoint(
            f"rhs at xi={xi}: |X*(X^2-C^2)| = {abs(X * Delta):.3e} below floor")
    common = N / denom
    dR = common * R + (beta - k * V / xi) * R / X
    dV = -common * X
    dPi = common * R * X * X + alpha * R * V
    return dR, dV, dPi


def rhs(spec: ProblemSpec, state: SimilarityState,
        singular_floor: float = 1e-14) -> tuple[float, float, float]:
    """Similarity-ODE derivatives (dR/dxi, dV/dxi, dPi/dxi).

    Raises SingularPoint when |X*(X^2 - C^2)| falls below singular_floor
    relative to the local velocity-squared scale.
    """
    if state.R <= 0 or state.xi <= 0:
        raise SingularPoint(f"rhs needs R > 0 and xi > 0, got {state}")
    F = spec.eos.f_sim(state.Pi, state.R)
    return _rhs_raw(spec.alpha, spec.beta, spec.k, state.xi, state.R,
                    state.V, state.Pi, F, floor=singular_floor)


def numerator(spec: ProblemSpec, state: SimilarityState) -> float:
    """Shared ODE numerator N; its zero on the sonic line is the eigenvalue
    condition."""
    F = spec.eos.f_sim(state.Pi, state.R)
    _, _, _, N = _core(spec.alpha, spec.beta, spec.k, state.xi, state.R,
                       state.V, state.Pi, F)
    return N


def sonic_discriminant(spec: ProblemSpec, state: SimilarityState) -> float:
    """Delta = X^2 - C^2; negative in subsonic pockets, positive far out."""
    F = spec.eos.f_sim(state.Pi, state.R)
    X, C2, Delta, _ = _core(spec.alpha, spec.beta, spec.k, state.xi, state.R,
                            state.V, state.Pi, F)
    return Delta


def grad_numerator(spec: ProblemSpec, state: SimilarityState):
    """Analytic (dN/dxi, dN/dR, dN/dV, dN/dPi)."""
    a, b, k = spec.alpha, spec.beta, spec.k
    xi, R, V, Pi = state.xi, state.R, state.V, state.Pi
    F = spec.eos.f_sim(Pi, R)
    dFdPi, dFdR = spec.eos.f_sim_grad(Pi, R)
    X = (1.0 + a) * xi + V
    C2 = Pi * F / R
    dC2_dR = Pi * dFdR / R - C2 / R
    dC2_dPi = F / R + Pi * dFdPi / R
    dN_dxi = -R * V * (a * (1.0 + a) - k * C2 / xi ** 2)
    dN_dR = -V * (a * X + k * C2 / xi) - R * V * k * dC2_dR / xi
    dN_dV = -R * (a * X + k * C2 / xi) - R * V * a
    dN_dPi = (b + 2.0 * a) - R * V * k * dC2_dPi / xi
    return dN_dxi, dN_dR, dN_dV, dN_dPi


def grad_discriminant(spec: ProblemSpec, state: SimilarityState):
    """Analytic (dDelta/dxi, dDelta/dR, dDelta/dV, dDelta/dPi)."""
    a = spec.alpha
    xi, R, V, Pi = state.xi, state.R, state.V, state.Pi
    F = spec.eos.f_sim(Pi, R)
    dFdPi, dFdR = spec.eos.f_sim_grad(Pi, R)
    X = (1.0 + a) * xi + V
    C2 = Pi * F / R
    dC2_dR = Pi * dFdR / R - C2 / R
    dC2_dPi = F / R + Pi * dFdPi / R
    return (2 * X * (1.0 + a), -dC2_dR, 2 * X, -dC2_dPi)


def jump_init_cavity(spec: ProblemSpec) -> JumpState:
    """Cavity free-surface state: fluid rides the surface, zero pressure.

    With the V1 = -1 normalization the jump coordinate is 1/(1+alpha);
    an explicit xi_s instead gives V1 = -(1+alpha)*xi_s.  Surface density
    is unconstrained and reported in reference units (R1 = 1).
    """
    if spec.kind != CAVITY:
        raise ConfigError("jump_init_cavity needs a cavity problem")
    a = spec.alpha
    if a <= -1.0:
        raise InvalidExponent(f"cavity jump undefined for alpha = {a} <= -1")
    xi_s = spec.jump_xi()
    V1 = -(1.0 + a) * xi_s
    return JumpState(pre=(0.0, 0.0, 0.0), post=(1.0, V1, 0.0),
                     Vs=V1, xi_s=xi_s)


def jump_init_shock(spec: ProblemSpec) -> JumpState:
    """Infinitely strong shock into quiescent fluid at density rho0.

    Solves the reduced jump relations

        R1*(Vs - V1) = R0*Vs,   R0*Vs*V1 = Pi1,
        R0*Vs*(E1 + V1^2/2) = Pi1*V1,   E = Pi*phi(R),

    by one-dimensional root finding on the compression ratio mu = R1/R0:
    the relations collapse to rho0*phi(mu*rho0) = (mu - 1)/(2*mu).
    """
    if spec.kind != SHOCK:
        raise ConfigError("jump_init_shock needs a shock problem")
    a = spec.alpha
    if a <= -1.0:
        raise InvalidExponent(f"shock jump undefined for alpha = {a} <= -1")
    eos = spec.eos
    rho0 = spec.rho0
    xi_s = spec.jump_xi()
    Vs = -(1.0 + a) * xi_s

    def g(mu):
        return rho0 * eos.energy_phi(mu * rho0) - (mu - 1.0) / (2.0 * mu)

    mu_lo = 1.0 + 1e-11
    if math.isfinite(eos.rho_max):
        mu_hi = eos.rho_max / rho0 * (1.0 - 1e-10)
        if mu_hi <= mu_lo:
            raise NoRoot("upstream density leaves no room for compression")
    else:
        mu_hi = 1e9
    g_lo, g_hi = g(mu_lo), g(mu_hi)
    if g_lo * g_hi > 0:
        raise NoRoot(
            f"no compression ratio in ({mu_lo:.3g}, {mu_hi:.3g}) satisfies "
            f"the jump relations (g: {g_lo:.3e} .. {g_hi:.3e})")
    mu = brentq(g, mu_lo, mu_hi, xtol=1e-15, rtol=8.9e-16)

    R1 = mu * rho0
    V1 = Vs * (1.0 - 1.0 / mu)
    Pi1 = rho0 * Vs * Vs * (1.0 - 1.0 / mu)
    post = SimilarityState(xi_s, R1, V1, Pi1)
    tmp = replace(spec, xi_s=xi_s)
    X1 = group_velocity(tmp, post)
    C1sq = sound_speed_sq_sim(tmp, post)
    if X1 * X1 >= C1sq:
        raise EntropyViolation(
            f"post-jump state is not subsonic: |X1| = {abs(X1):.6g} "
            f">= C1 = {math.sqrt(max(C1sq, 0.0)):.6g}")
    return JumpState(pre=(rho0, 0.0, 0.0), post=(R1, V1, Pi1),
                     Vs=Vs, xi_s=xi_s)


def jump_init(spec: ProblemSpec) -> JumpState:
    if spec.kind == CAVITY:
        return jump_init_cavity(spec)
    return jump_init_shock(spec)


def conservation_residuals(spec: ProblemSpec, state: SimilarityState,
                           derivs: tuple[float, float, float]):
    """Defects of the mass-flux, momentum-flux and entropy identities.

    Given derivatives from rhs at a regular point, all three vanish to
    roundoff; they are reformulations of the same reduced system:

        (R*X)'        = ((1+a)(1+k) + b - k*X/xi) * R
        (R*X^2 + Pi)' = (2 + k + (3+k)a + b - k*X/xi - a(1+a)xi/X) * R*X
        R'*C^2 - Pi'  = b*R*C^2/X - (b+2a)*Pi/X
    """
    a, b, k = spec.alpha, spec.beta, spec.k
    xi, R, V, Pi = state.xi, state.R, state.V, state.Pi
    dR, dV, dPi = derivs
    F = spec.eos.f_sim(Pi, R)
    X = (1.0 + a) * xi + V
    C2 = Pi * F / R
    dX = (1.0 + a) + dV

    r_mass = (dR * X + R * dX) - ((1 + a) * (1 + k) + b - k * X / xi) * R
    r_mom = (dR * X * X + 2 * R * X * dX + dPi) - (
        2 + k + (3 + k) * a + b - k * X / xi - a * (1 + a) * xi / X) * R * X
    r_ent = (dR * C2 - dPi) - (b * R * C2 / X - (b + 2 * a) * Pi / X)
    return r_mass, r_mom, r_ent
