"""Bulk-modulus families admitting scale-invariant flow.

The material enters the flow equations only through the adiabatic bulk
modulus K_S = rho*c^2, written as K_S = (p - p0)*f where the form of f
decides which scaling exponents (alpha, beta) survive:

    general_f         f(p, rho)                 cavity: a=b=0   shock: a=b=0
    power_law_scaled  f((p-p0)*rho^-lambda)     cavity: b+2a=lb shock: a=b=0
    density_scaled    f(rho)                    cavity: b=0     shock: b=0
    ideal_gamma       gamma                     cavity: free    shock: b=0

The pseudo-Mie-Gruneisen model is a density_scaled instance with

    f(eta) = c1*(c2 + (eta - c3)^2/(eta_max - eta)),   eta = rho/rho_ref

valid on eta in (0, eta_max), eta_max = s/(s-1).  f diverges at the
compression limit eta_max, which the solver must respect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, UnsupportedFamily, ConfigError

GENERAL_F = "general_f"
POWER_LAW_SCALED = "power_law_scaled"
DENSITY_SCALED = "density_scaled"
IDEAL_GAMMA = "ideal_gamma"

FAMILIES = (GENERAL_F, POWER_LAW_SCALED, DENSITY_SCALED, IDEAL_GAMMA)

CAVITY = "cavity"
SHOCK = "shock"


@dataclass(frozen=True)
class Relation:
    """Linear relation ca*alpha + cb*beta = 0 on the scaling exponents."""

    ca: float
    cb: float
    text: str

    def residual(self, alpha: float, beta: float) -> float:
        return self.ca * alpha + self.cb * beta


@dataclass(frozen=True)
class ConstraintSet:
    """Admissibility cell of the family/problem classification table."""

    problem_kind: str
    relations: tuple[Relation, ...]

    @property
    def free_dims(self) -> int:
        if not self.relations:
            return 2
        m = np.array([[r.ca, r.cb] for r in self.relations], dtype=float)
        return 2 - np.linalg.matrix_rank(m)

    def admissible(self, alpha: float, beta: float, tol: float = 1e-12) -> bool:
        scale = max(1.0, abs(alpha), abs(beta))
        return all(abs(r.residual(alpha, beta)) <= tol * scale for r in self.relations)

    def describe(self) -> list[str]:
        if not self.relations:
            return ["no constraints on alpha or beta"]
        return [r.text for r in self.relations]


class EosModel:
    """Base bulk-modulus model: K_S = (p - p0) * f.

    Instances are immutable after construction and all evaluation methods
    are pure, so models may be shared freely across threads.
    """

    family = None  # set by subclasses

    def __init__(self, p0: float = 0.0, rho_min: float = 0.0,
                 rho_max: float = math.inf):
        self.p0 = float(p0)
        self.rho_min = float(rho_min)
        self.rho_max = float(rho_max)

    def check_rho(self, rho: float) -> None:
        if not (self.rho_min < rho < self.rho_max):
            raise DomainError(
                f"density {rho!r} outside validity domain "
                f"({self.rho_min}, {self.rho_max}) of {self.family} model")

    # -- evaluation ------------------------------------------------------

    def _f_impl(self, p, rho):
        raise NotImplementedError

    def f(self, p: float, rho: float) -> float:
        """Dimensionless ratio f = K_S/(p - p0)."""
        self.check_rho(rho)
        val = self._f_impl(p, rho)
        if not np.isfinite(val) or val <= 0:
            raise DomainError(f"f({p}, {rho}) = {val} is not finite positive")
        return val

    def ks(self, p: float, rho: float) -> float:
        """Adiabatic bulk modulus K_S = (p - p0)*f(p, rho)."""
        return (p - self.p0) * self.f(p, rho)

    def sound_speed_sq(self, p: float, rho: float) -> float:
        """c^2 = K_S/rho; zero at the reference pressure."""
        return self.ks(p, rho) / rho

    def f_sim(self, Pi: float, R: float) -> float:
        """f evaluated at a similarity state (p - p0 = Pi, rho = R)."""
        return self.f(self.p0 + Pi, R)

    def f_sim_grad(self, Pi: float, R: float, h: float = 1e-7):
        """(df/dPi, df/dR) at a similarity state, central differences."""
        dPi = h * max(abs(Pi), 1e-3)
        dR = h * max(abs(R), 1e-3)
        dfdPi = (self.f_sim(Pi + dPi, R) - self.f_sim(Pi - dPi, R)) / (2 * dPi)
        dfdR = (self.f_sim(Pi, R + dR) - self.f_sim(Pi, R - dR)) / (2 * dR)
        return dfdPi, dfdR

    # -- wall-gap coordinates -------------------------------------------

    @property
    def has_density_wall(self) -> bool:
        return math.isfinite(self.rho_max)

    def f_gap(self, gap: float) -> float:
        """f as a function of the distance rho_max - rho.

        Subclasses with a pole at rho_max override this with a form that is
        exact in the gap, avoiding cancellation when the solver tracks
        states close to the compression limit.
        """
        return self.f(self.p0, self.rho_max - gap)

    # -- energy closure --------------------------------------------------

    def _f_rho(self, rho):
        """Pressure-independent f(rho); only for density-scaled behaviour."""
        raise UnsupportedFamily(
            f"energy closure is not available for family {self.family}")

    def energy_phi(self, rho: float) -> float:
        """Energy-closure factor phi with e(p, rho) = p*phi(rho).

        phi solves phi' + (f/rho)*phi = 1/rho^2 with the homogeneous
        constant set to zero; equivalently, with u the log-compression,

            phi(rho) = (1/rho) * int_0^inf exp(u - J(u)) du,
            J(u) = int_0^u f(rho*e^-v) dv,

        which reduces to the ideal-gas closure phi = 1/((gamma-1)*rho)
        when f is constant.  Requires f > 1 near vacuum to converge.
        """
        self.check_rho(rho)
        lo = self.rho_min if self.rho_min > 0 else 0.0

        def f_q(r):
            # constant extension below any positive lower validity bound
            return self._f_rho(max(r, lo * (1 + 1e-12), 1e-290))

        def rhs(u, y):
            return [f_q(rho * math.exp(-u)), math.exp(u - y[0])]

        def done(u, y):
            phi_acc = max(y[1], 1e-290)
            return (u - y[0]) - (math.log(phi_acc) + math.log(1e-16))
        done.terminal = True
        done.direction = -1

        u_cap = 400.0
        sol = solve_ivp(rhs, (0.0, u_cap), [0.0, 0.0], method="RK45",
                        rtol=1e-12, atol=1e-16, events=[done])
        J_end, phi_acc = sol.y[:, -1]
        u_end = sol.t[-1]
        if sol.status == 0:  # hit u_cap without the integrand dying
            f_far = f_q(rho * math.exp(-u_end))
            if f_far <= 1.0 + 1e-9:
                raise DomainError(
                    "energy closure integral does not converge: f <= 1 near vacuum")
        f_tail = f_q(rho * math.exp(-u_end))
        if f_tail > 1.0:
            phi_acc += math.exp(u_end - J_end) / (f_tail - 1.0)
        return phi_acc / rho

    # -- classification ---------------------------------------------------

    def constraints(self, kind: str) -> ConstraintSet:
        if kind not in (CAVITY, SHOCK):
            raise ConfigError(f"unknown problem kind {kind!r}")
        return self._constraints(kind)

    def _constraints(self, kind):
        raise NotImplementedError


class GeneralFEos(EosModel):
    """K_S = (p - p0)*f(p, rho) with arbitrary smooth f: no scale freedom."""

    family = GENERAL_F

    def __init__(self, f, p0=0.0, rho_min=0.0, rho_max=math.inf):
        super().__init__(p0, rho_min, rho_max)
        self._f = f

    def _f_impl(self, p, rho):
        return self._f(p, rho)

    def _constraints(self, kind):
        rels = (Relation(1.0, 0.0, "alpha = 0"), Relation(0.0, 1.0, "beta = 0"))
        return ConstraintSet(kind, rels)


class PowerLawScaledEos(EosModel):
    """K_S = (p - p0)*f((p - p0)*rho^-lambda)."""

    family = POWER_LAW_SCALED

    def __init__(self, f, lam, p0=0.0, rho_min=0.0, rho_max=math.inf):
        super().__init__(p0, rho_min, rho_max)
        self._f = f
        self.lam = float(lam)

    def _f_impl(self, p, rho):
        return self._f((p - self.p0) * rho ** (-self.lam))

    def _constraints(self, kind):
        if kind == SHOCK:
            rels = (Relation(1.0, 0.0, "alpha = 0"), Relation(0.0, 1.0, "beta = 0"))
        else:
            rels = (Relation(2.0, 1.0 - self.lam,
                             f"beta + 2*alpha = lambda*beta (lambda = {self.lam})"),)
        return ConstraintSet(kind, rels)


class DensityScaledEos(EosModel):
    """K_S = (p - p0)*f(rho); f given as a callable, optionally with f'."""

    family = DENSITY_SCALED

    def __init__(self, f, f_prime=None, p0=0.0, rho_min=0.0, rho_max=math.inf):
        super().__init__(p0, rho_min, rho_max)
        self._f = f
        self._fp = f_prime

    def _f_impl(self, p, rho):
        return self._f(rho)

    def _f_rho(self, rho):
        return self._f(rho)

    def f_sim_grad(self, Pi, R, h=1e-7):
        if self._fp is not None:
            return 0.0, self._fp(R)
        dR = h * max(abs(R), 1e-3)
        return 0.0, (self._f(R + dR) - self._f(R - dR)) / (2 * dR)

    def _constraints(self, kind):
        return ConstraintSet(kind, (Relation(0.0, 1.0, "beta = 0"),))


class TabulatedEos(DensityScaledEos):
    """density_scaled model defined by a two-column (rho, f) table.

    Monotone-cubic interpolation inside the table hull; the hull is the
    validity domain.
    """

    def __init__(self, rho_pts, f_pts, p0=0.0):
        rho_pts = np.asarray(rho_pts, dtype=float)
        f_pts = np.asarray(f_pts, dtype=float)
        if rho_pts.ndim != 1 or rho_pts.shape != f_pts.shape or len(rho_pts) < 2:
            raise ConfigError("f table needs two equal-length columns, >= 2 rows")
        if not np.all(np.diff(rho_pts) > 0):
            raise ConfigError("f table densities must be strictly increasing")
        if not np.all(f_pts > 0):
            raise ConfigError("tabulated f must be positive")
        interp = PchipInterpolator(rho_pts, f_pts)
        dinterp = interp.derivative()
        super().__init__(lambda r: float(interp(r)),
                         f_prime=lambda r: float(dinterp(r)),
                         p0=p0, rho_min=rho_pts[0], rho_max=rho_pts[-1])
        self.rho_pts = rho_pts
        self.f_pts = f_pts

    def _f_rho(self, rho):
        # constant extension outside the hull, used only by the quadrature
        return self._f(min(max(rho, self.rho_min), self.rho_max))


class IdealGammaEos(EosModel):
    """Ideal-gas closure K_S = gamma*(p - p0)."""

    family = IDEAL_GAMMA

    def __init__(self, gamma, p0=0.0):
        if gamma <= 1.0:
            raise ConfigError(f"ideal_gamma requires gamma > 1, got {gamma}")
        super().__init__(p0)
        self.gamma = float(gamma)

    def _f_impl(self, p, rho):
        return self.gamma

    def _f_rho(self, rho):
        return self.gamma

    def f_sim_grad(self, Pi, R, h=1e-7):
        return 0.0, 0.0

    def _constraints(self, kind):
        if kind == SHOCK:
            return ConstraintSet(kind, (Relation(0.0, 1.0, "beta = 0"),))
        return ConstraintSet(kind, ())


class PseudoMieGruneisenEos(DensityScaledEos):
    """Pseudo-Mie-Gruneisen bulk modulus (linear-Hugoniot slope s, tuner q).

    c1 = (1-4s)/(4q(q-2)(s-1)), c2 = q(4(s-1) - q(2s-1)),
    c3 = (q+s-1)/(s-1), eta_max = s/(s-1).  Valid for s > 1, q in (0, 1].
    """

    def __init__(self, s, q, rho_ref=1.0, p0=0.0):
        if s <= 1.0:
            raise ConfigError(f"pseudo-Mie-Gruneisen needs s > 1, got {s}")
        if not (0.0 < q <= 1.0):
            raise ConfigError(f"pseudo-Mie-Gruneisen needs q in (0, 1], got {q}")
        if rho_ref <= 0:
            raise ConfigError(f"rho_ref must be positive, got {rho_ref}")
        self.s = float(s)
        self.q = float(q)
        self.rho_ref = float(rho_ref)
        self.c1 = (1 - 4 * s) / (4 * q * (q - 2) * (s - 1))
        self.c2 = q * (4 * (s - 1) - q * (2 * s - 1))
        self.c3 = (q + s - 1) / (s - 1)
        self.eta_max = s / (s - 1)

        def f_eta(rho):
            eta = rho / self.rho_ref
            return self.c1 * (self.c2 + (eta - self.c3) ** 2 / (self.eta_max - eta))

        def f_eta_prime(rho):
            eta = rho / self.rho_ref
            d = self.eta_max - eta
            return self.c1 * (2 * (eta - self.c3) / d
                              + (eta - self.c3) ** 2 / d ** 2) / self.rho_ref

        super().__init__(f_eta, f_prime=f_eta_prime, p0=p0,
                         rho_min=0.0, rho_max=self.eta_max * rho_ref)

    def f_gap(self, gap):
        # exact in the wall distance: no eta_max - eta cancellation
        g = gap / self.rho_ref
        eta = self.eta_max - g
        return self.c1 * (self.c2 + (eta - self.c3) ** 2 / g)


def invariance_residual(model: EosModel, alpha: float, beta: float,
                        p: float, rho: float, h_fd: float = 1e-6) -> float:
    """Scaling-invariance defect of K_S at one state.

    Returns beta*rho*dK/drho + (2a+b)*(p-p0)*dK/dp - (2a+b)*K, the amount
    by which K_S fails the invariance PDE for exponents (alpha, beta).
    Partials by central differences with relative step h_fd; raises
    DomainError if the density stencil leaves the validity domain.
    """
    dp = h_fd * max(abs(p - model.p0), abs(model.p0), 1.0)
    drho = h_fd * abs(rho)
    for r in (rho - drho, rho + drho):
        model.check_rho(r)
    ks = model.ks(p, rho)
    dks_dp = (model.ks(p + dp, rho) - model.ks(p - dp, rho)) / (2 * dp)
    dks_drho = (model.ks(p, rho + drho) - model.ks(p, rho - drho)) / (2 * drho)
    c = 2 * alpha + beta
    return beta * rho * dks_drho + c * (p - model.p0) * dks_dp - c * ks


def classify_constraints(model: EosModel, kind: str) -> ConstraintSet:
    """Admissibility cell for (family, problem kind)."""
    return model.constraints(kind)


def from_dict(block: dict) -> EosModel:
    """Build a model from a flat config block.

    Recognised keys: family, gamma, s, q, rho_ref, lambda, p0, f_table
    (inline rows "rho f" separated by newlines).  Unknown keys rejected.
    """
    known = {"family", "gamma", "s", "q", "rho_ref", "lambda", "p0",
             "f_table", "model"}
    unknown = set(block) - known
    if unknown:
        raise ConfigError(f"unknown eos keys: {sorted(unknown)}")
    family = block.get("family")
    if family not in FAMILIES:
        raise ConfigError(f"eos family must be one of {FAMILIES}, got {family!r}")
    p0 = float(block.get("p0", 0.0))

    if family == IDEAL_GAMMA:
        if "gamma" not in block:
            raise ConfigError("ideal_gamma needs gamma")
        return IdealGammaEos(float(block["gamma"]), p0=p0)

    if family == DENSITY_SCALED:
        preset = block.get("model")
        if preset == "pseudo_mie_gruneisen" or ("s" in block and "q" in block):
            return PseudoMieGruneisenEos(float(block["s"]), float(block["q"]),
                                         rho_ref=float(block.get("rho_ref", 1.0)),
                                         p0=p0)
        if "f_table" in block:
            rows = [ln.split() for ln in str(block["f_table"]).strip().splitlines()
                    if ln.strip()]
            try:
                rho_pts = [float(r[0]) for r in rows]
                f_pts = [float(r[1]) for r in rows]
            except (IndexError, ValueError) as exc:
                raise ConfigError(f"malformed f_table row: {exc}") from exc
            return TabulatedEos(rho_pts, f_pts, p0=p0)
        raise ConfigError(
            "density_scaled needs either pseudo-Mie-Gruneisen parameters "
            "(s, q, rho_ref) or an f_table")

    raise ConfigError(
        f"family {family!r} has no config-file form: general_f and "
        "power_law_scaled models require a Python callable")
