"""Shooting solver for the nonlinear scaling-exponent eigenvalue problem.

A trial exponent is scored by integrating the reduced ODEs outward from
the jump state and classifying how the trajectory leaves the subsonic
region: regular approaches to the sonic line carry the sign of the shared
numerator N there, while exits through the EOS validity boundary (pressure
collapsing to zero, or density running into a compression limit) are
classified by the failure channel.  Bisection on that sign converges to
the exponent separating the two behaviours; where the numerator vanishes
together with the sonic discriminant the trajectory is continued through
the sonic point by a local linearization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import similarity as sim
from .eos import CAVITY
from .errors import (ConstraintError, CrossingFailure, MaxIterations,
                     NoSignChange)
from .reconstruct import SolutionProfile
from .similarity import Exponents, ProblemSpec, SimilarityState

SONIC_APPROACH = "sonic_approach"
STEP_UNDERFLOW = "step_underflow"
DOMAIN_ERROR = "domain_error"
REACHED_XI_MAX = "reached_xi_max"


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances and knobs for shooting and crossing."""

    delta_stop: float = 1e-8       # sonic stop on |Delta| / (X^2 + C^2)
    surface_eps: float = 1e-6      # cavity start offset xi_s*(1+eps)
    h_jump: float = 1e-5           # restart offset past the sonic point
    xi_max_factor: float = 1e4     # integrate to xi_max_factor * xi_s
    rtol: float = 1e-10
    atol: float = 1e-14
    tol_alpha: float = 1e-10
    tol_numerator: float = 1e-6    # |N|/scale accepted at the sonic point
    crossing_tol: float = 1e-3     # |N|/scale required to attempt a crossing
    pressure_floor: float = 1e-12  # relative Pi floor (domain exit)
    wall_floor: float = 1e-12      # relative compression-gap floor
    max_iterations: int = 200
    scan_points: int = 20
    secant: bool = True
    max_samples: int = 20000


@dataclass
class ShootReport:
    stop_xi: float
    stop_reason: str
    numerator_sign: int
    trajectory: list
    free_name: str
    free_value: float
    alpha: float
    beta: float
    xi_s: float
    numerator_end: float
    numerator_scale: float
    delta_norm_end: float
    state_end: SimilarityState


@dataclass
class ScanResult:
    values: np.ndarray
    reports: list
    brackets: list  # (lo, hi) pairs with opposite numerator signs


@dataclass
class EigenResult:
    alpha: float
    beta: float
    free_name: str
    bracket: tuple[float, float]
    iterations: int
    sonic_xi: float
    residual: float
    crossed: bool
    profile: SolutionProfile
    approach: ShootReport
    notes: str = ""


def resolve_free_parameter(spec: ProblemSpec):
    """Designate the free exponent and its closure under the constraints.

    Returns (name, to_exponents) where to_exponents(value) yields the full
    (alpha, beta) pair with every constraint relation substituted.  Raises
    ConstraintError when the admissibility cell leaves nothing free or the
    requested exponents contradict it.
    """
    cset = spec.eos.constraints(spec.kind)
    ua, ub = spec.exponents.alpha, spec.exponents.beta
    if cset.free_dims == 0:
        raise ConstraintError(
            f"{spec.eos.family}/{spec.kind}: no free scaling exponent "
            f"({'; '.join(cset.describe())}); no smooth bounded solution exists")

    rels = cset.relations
    if len(rels) == 1:
        ca, cb = rels[0].ca, rels[0].cb
        if cb != 0.0:
            # relation expresses beta through alpha
            if ub is not None and ua is not None:
                raise ConstraintError("both exponents fixed; nothing to shoot on")
            if ua is None:
                def to_exp(v, _ca=ca, _cb=cb):
                    return Exponents(v, -_ca * v / _cb)
                if ub not in (None, 0.0) and ca == 0.0:
                    raise ConstraintError(
                        f"beta = {ub} violates the constraint {rels[0].text}")
                return "alpha", to_exp
            # alpha fixed by the user: beta free only when the relation allows
            if ca == 0.0:
                raise ConstraintError(
                    f"constraint {rels[0].text} pins beta; alpha already fixed")

            def to_exp(v, _ca=ca, _cb=cb):
                return Exponents(-_cb * v / _ca, v)
            return "beta", to_exp
        # cb == 0: relation pins alpha = 0, beta free
        if ub is not None:
            raise ConstraintError("both exponents pinned; nothing to shoot on")

        def to_exp(v):
            return Exponents(0.0, v)
        return "beta", to_exp

    # no relations (ideal-gamma cavity): one exponent must be chosen
    if ua is None and ub is None:
        def to_exp(v):
            return Exponents(v, 0.0)
        return "alpha", to_exp
    if ua is None:
        def to_exp(v, _b=ub):
            return Exponents(v, _b)
        return "alpha", to_exp
    if ub is None:
        def to_exp(v, _a=ua):
            return Exponents(_a, v)
        return "beta", to_exp
    raise ConstraintError("both exponents fixed; nothing to shoot on")


def launch_state(spec: ProblemSpec, settings: SolverSettings):
    """Jump state plus the first regular integration point.

    Shocks start at xi_s itself (regular).  The cavity surface is a
    degenerate point (X = C = 0), so integration starts at xi_s*(1+eps)
    with the first-order expansion: the momentum balance pins the pressure
    slope Pi' = alpha*V1*R1 and the mass balance pins the velocity slope
    V' = beta + k*(1+alpha); the density slope is left at zero (the local
    density layer is steeper than any finite slope).
    """
    jump = sim.jump_init(spec)
    R1, V1, Pi1 = jump.post
    if spec.kind != CAVITY:
        return jump, SimilarityState(jump.xi_s, R1, V1, Pi1)
    a, b, k = spec.alpha, spec.beta, spec.k
    d0 = jump.xi_s * settings.surface_eps
    P = a * V1 * R1
    W = b + k * (1.0 + a)
    Pi_start = Pi1 + P * d0
    if Pi_start <= 0.0:
        # alpha = 0 corner (constant-speed jump): seed a tiny pressure
        Pi_start = 1e-10 * R1 * jump.Vs ** 2 * settings.surface_eps
    return jump, SimilarityState(jump.xi_s + d0, R1, V1 + W * d0, Pi_start)


class _Integrator:
    """Wraps the reduced ODEs for one concrete spec.

    When the EOS has a finite compression limit the integration state is
    (gap, V, Pi) with gap = rho_max - R, and f comes from the EOS in exact
    gap form; otherwise the state is (R, V, Pi).
    """

    def __init__(self, spec: ProblemSpec, settings: SolverSettings,
                 pi_ref: float, gap_ref: float):
        self.spec = spec
        self.settings = settings
        self.wall = spec.eos.has_density_wall
        self.rho_max = spec.eos.rho_max
        self.a, self.b, self.k = spec.alpha, spec.beta, spec.k
        self.pi_floor = settings.pressure_floor * pi_ref
        self.gap_floor = settings.wall_floor * gap_ref if self.wall else 0.0
        self.last_good = None

    def pack(self, state: SimilarityState):
        first = self.rho_max - state.R if self.wall else state.R
        return [first, state.V, state.Pi]

    def unpack(self, xi, y) -> SimilarityState:
        R = self.rho_max - y[0] if self.wall else y[0]
        return SimilarityState(xi, R, y[1], y[2])

    def _f_of(self, y):
        if self.wall:
            return self.spec.eos.f_gap(y[0])
        return self.spec.eos.f_sim(y[2], y[0])

    def _fields(self, y):
        R = self.rho_max - y[0] if self.wall else y[0]
        return R, y[1], y[2]

    def rhs(self, xi, y):
        R, V, Pi = self._fields(y)
        if not (R > 0 and Pi > 0 and np.isfinite(R) and np.isfinite(V)
                and np.isfinite(Pi)) or (self.wall and y[0] <= 0):
            return [math.nan] * 3
        self.last_good = (xi, R, V, Pi)
        F = self._f_of(y)
        X, C2, Delta, N = sim._core(self.a, self.b, self.k, xi, R, V, Pi, F)
        denom = R * X * Delta
        if denom == 0.0:
            return [math.nan] * 3
        common = N / denom
        dR = common * R + (self.b - self.k * V / xi) * R / X
        dV = -common * X
        dPi = common * R * X * X + self.a * R * V
        first = -dR if self.wall else dR
        return [first, dV, dPi]

    def sonic_metric(self, xi, y):
        """Delta + delta_stop*(X^2 + C^2): crosses zero on sonic approach."""
        R, V, Pi = self._fields(y)
        if not (R > 0 and Pi > 0):
            return 1.0
        F = self._f_of(y)
        X, C2, Delta, _ = sim._core(self.a, self.b, self.k, xi, R, V, Pi, F)
        return Delta + self.settings.delta_stop * (X * X + C2)

    def eval_at(self, xi, y):
        R, V, Pi = self._fields(y)
        F = self._f_of(y)
        return sim._core(self.a, self.b, self.k, xi, R, V, Pi, F)

    def events(self, post_crossing=False):
        evs = []

        def ev_sonic(xi, y):
            return self.sonic_metric(xi, y)
        ev_sonic.terminal = True
        ev_sonic.direction = -1 if post_crossing else 1
        evs.append(("sonic", ev_sonic))

        def ev_pi(xi, y):
            return y[2] - self.pi_floor
        ev_pi.terminal = True
        ev_pi.direction = -1
        evs.append(("pressure", ev_pi))

        if self.wall:
            def ev_gap(xi, y):
                return y[0] - self.gap_floor
            ev_gap.terminal = True
            ev_gap.direction = -1
            evs.append(("wall", ev_gap))
        return evs

    def run(self, state0: SimilarityState, xi_end: float, post_crossing=False,
            dense=False):
        named = self.events(post_crossing=post_crossing)
        sol = solve_ivp(self.rhs, (state0.xi, xi_end), self.pack(state0),
                        method="RK45", rtol=self.settings.rtol,
                        atol=self.settings.atol,
                        events=[e for _, e in named], dense_output=dense)
        which = None
        if sol.status == 1:
            for (name, _), te in zip(named, sol.t_events):
                if len(te):
                    which = name
                    break
        return sol, which


def _pi_reference(spec: ProblemSpec, jump) -> float:
    R1 = jump.post[0] if jump.post[0] > 0 else 1.0
    return max(jump.post[2], R1 * jump.Vs ** 2, 1e-30)


def _gap_reference(spec: ProblemSpec, jump) -> float:
    if not spec.eos.has_density_wall:
        return 0.0
    return max(spec.eos.rho_max - jump.post[0], 1e-30)


def _traj_from_sol(integ, sol, cap):
    ts = sol.t
    if len(ts) > cap:
        idx = np.unique(np.linspace(0, len(ts) - 1, cap).astype(int))
    else:
        idx = np.arange(len(ts))
    return [integ.unpack(sol.t[i], sol.y[:, i]) for i in idx]


def shoot_from_state(spec: ProblemSpec, state0: SimilarityState, jump,
                     settings: SolverSettings) -> ShootReport:
    """Integrate outward from a given start state and classify the stop."""
    integ = _Integrator(spec, settings, _pi_reference(spec, jump),
                        _gap_reference(spec, jump))
    xi_end = settings.xi_max_factor * jump.xi_s
    sol, which = integ.run(state0, xi_end)

    if sol.y.shape[1]:
        y_end = sol.y[:, -1]
        xi_stop = sol.t[-1]
        R, V, Pi = integ._fields(y_end)
        if not (np.isfinite(R) and np.isfinite(Pi) and R > 0 and Pi > 0):
            xi_stop, R, V, Pi = integ.last_good
    else:
        xi_stop, R, V, Pi = integ.last_good
    end_state = SimilarityState(xi_stop, R, V, Pi)
    X, C2, Delta, N = integ.eval_at(xi_stop, integ.pack(end_state))
    dn = Delta / (X * X + C2) if (X * X + C2) > 0 else math.nan

    if sol.status == 1 and which == "sonic":
        reason = SONIC_APPROACH
        sign = int(math.copysign(1.0, N)) if N != 0 else 0
    elif sol.status == 1 and which in ("pressure", "wall"):
        reason = DOMAIN_ERROR
        # failure-channel classification: the pressure branch has
        # N -> -R*V*alpha*X < 0, the compression-wall branch N > 0
        sign = 1 if which == "wall" else -1
    elif sol.status == 0:
        reason = REACHED_XI_MAX
        sign = int(math.copysign(1.0, N)) if N != 0 else 0
    else:
        reason = STEP_UNDERFLOW
        sign = int(math.copysign(1.0, N)) if N != 0 else 0

    # numerator scale along the trajectory for relative residuals
    n_scale = abs(N)
    for st in _traj_from_sol(integ, sol, 200):
        try:
            n_scale = max(n_scale, abs(sim.numerator(spec, st)))
        except Exception:
            continue
    traj = _traj_from_sol(integ, sol, settings.max_samples)
    return ShootReport(
        stop_xi=xi_stop, stop_reason=reason, numerator_sign=sign,
        trajectory=traj, free_name="", free_value=math.nan,
        alpha=spec.alpha, beta=spec.beta, xi_s=jump.xi_s,
        numerator_end=N, numerator_scale=max(n_scale, 1e-300),
        delta_norm_end=dn, state_end=end_state)


def shoot(spec: ProblemSpec, free_value: float,
          settings: SolverSettings | None = None) -> ShootReport:
    """Integrate from the jump state at one trial exponent and classify."""
    settings = settings or SolverSettings()
    name, to_exp = resolve_free_parameter(spec)
    exps = to_exp(free_value)
    cspec = spec.with_exponents(exps.alpha, exps.beta)
    jump, state0 = launch_state(cspec, settings)
    rep = shoot_from_state(cspec, state0, jump, settings)
    rep.free_name = name
    rep.free_value = free_value
    return rep


def scan(spec: ProblemSpec, lo: float, hi: float,
         n: int | None = None,
         settings: SolverSettings | None = None) -> ScanResult:
    """Sample the shooting sign over [lo, hi] and list sign-change brackets."""
    settings = settings or SolverSettings()
    n = n or settings.scan_points
    values = np.linspace(lo, hi, n)
    reports = []
    for v in values:
        try:
            reports.append(shoot(spec, float(v), settings))
        except Exception as exc:  # keep scanning; record the failure
            reports.append(exc)
    brackets = []
    prev_v = prev_s = None
    for v, rep in zip(values, reports):
        if isinstance(rep, Exception) or rep.numerator_sign == 0:
            continue
        s = rep.numerator_sign
        if prev_s is not None and s != prev_s:
            brackets.append((prev_v, float(v)))
        prev_v, prev_s = float(v), s
    return ScanResult(values=values, reports=reports, brackets=brackets)


def _assemble_profile(spec, jump, approach: ShootReport, sonic_xi,
                      crossed, post_states, residual):
    states = list(approach.trajectory)
    R1, V1, Pi1 = jump.post
    rows = [(jump.xi_s, R1, V1, Pi1)]
    for st in states:
        rows.append((st.xi, st.R, st.V, st.Pi))
    for st in post_states:
        rows.append((st.xi, st.R, st.V, st.Pi))
    rows.sort(key=lambda r: r[0])
    xi, R, V, Pi = [], [], [], []
    for row in rows:
        if xi and row[0] <= xi[-1]:
            continue
        xi.append(row[0])
        R.append(row[1])
        V.append(row[2])
        Pi.append(row[3])
    return SolutionProfile(
        alpha=spec.alpha, beta=spec.beta, kind=spec.kind, k=spec.k,
        rho0=spec.rho0, xi=np.array(xi), R=np.array(R), V=np.array(V),
        Pi=np.array(Pi), sonic_xi=sonic_xi, p0=spec.eos.p0,
        crossed=crossed, eigen_residual=residual)


def cross_sonic(spec: ProblemSpec, eigen_value: float,
                approach: ShootReport,
                settings: SolverSettings | None = None) -> SolutionProfile:
    """Continue a converged approach through the sonic point.

    At the stop state the crossing slope L = lim N/Delta solves the
    quadratic a1*L^2 + (a0 - b1)*L - b0 = 0 built from the analytic
    gradients of N and Delta along the solution; the root with Delta
    increasing outward and closest to the incoming N/Delta ratio is used
    to polish the sonic location and restart at xi*(1 + h_jump).
    """
    settings = settings or SolverSettings()
    name, to_exp = resolve_free_parameter(spec)
    exps = to_exp(eigen_value)
    cspec = spec.with_exponents(exps.alpha, exps.beta)
    jump = sim.jump_init(cspec)

    s0 = approach.state_end
    if approach.stop_reason != SONIC_APPROACH:
        raise CrossingFailure(
            f"approach stopped with {approach.stop_reason}, not a sonic approach")
    n_rel = abs(approach.numerator_end) / approach.numerator_scale
    if n_rel > settings.crossing_tol:
        raise CrossingFailure(
            f"numerator not vanishing at the sonic approach "
            f"(|N|/scale = {n_rel:.3e}); no regular crossing exists here")

    a, b, k = cspec.alpha, cspec.beta, cspec.k
    xi0 = s0.xi
    F = cspec.eos.f_sim(s0.Pi, s0.R)
    X, C2, Delta, N = sim._core(a, b, k, xi0, s0.R, s0.V, s0.Pi, F)
    gN = sim.grad_numerator(cspec, s0)
    gD = sim.grad_discriminant(cspec, s0)
    g = np.array([(b - k * s0.V / xi0) * s0.R / X, 0.0, a * s0.R * s0.V])
    h = np.array([1.0 / X, -1.0 / s0.R, X])
    a0 = gD[0] + gD[1] * g[0] + gD[2] * g[1] + gD[3] * g[2]
    a1 = gD[1] * h[0] + gD[2] * h[1] + gD[3] * h[2]
    b0 = gN[0] + gN[1] * g[0] + gN[2] * g[1] + gN[3] * g[2]
    b1 = gN[1] * h[0] + gN[2] * h[1] + gN[3] * h[2]
    disc = (a0 - b1) ** 2 + 4 * a1 * b0
    if disc < 0 or a1 == 0.0:
        raise CrossingFailure(
            f"no real crossing slope at xi = {xi0:.6g} (disc = {disc:.3e})")
    roots = [(-(a0 - b1) + s * math.sqrt(disc)) / (2 * a1) for s in (1, -1)]
    L_in = N / Delta if Delta != 0 else roots[0]
    valid = [L for L in roots if a0 + a1 * L > 0]
    if not valid:
        raise CrossingFailure("sonic discriminant not increasing on either branch")
    L = min(valid, key=lambda r: abs(r - L_in))
    dY = g + L * h
    A = a0 + a1 * L

    dxi = -Delta / A
    xi_star = xi0 + dxi
    y_star = np.array([s0.R, s0.V, s0.Pi]) + dxi * dY
    xi_r = xi_star * (1.0 + settings.h_jump)
    y_r = y_star + (xi_r - xi_star) * dY
    star_state = SimilarityState(xi_star, *y_star)
    restart = SimilarityState(xi_r, *y_r)

    integ = _Integrator(cspec, settings, _pi_reference(cspec, jump),
                        _gap_reference(cspec, jump))
    xi_end = settings.xi_max_factor * jump.xi_s
    sol, which = integ.run(restart, xi_end, post_crossing=True)
    if sol.status == 1 and which == "sonic":
        raise CrossingFailure(
            f"post-crossing trajectory re-encountered the sonic locus at "
            f"xi = {sol.t[-1]:.6g}; spurious root")
    post = _traj_from_sol(integ, sol, settings.max_samples)
    residual = abs(sim.numerator(cspec, star_state)) / approach.numerator_scale
    return _assemble_profile(cspec, jump, approach, xi_star, True,
                             [star_state] + post, residual)


def find_eigenvalue(spec: ProblemSpec, bracket: tuple[float, float],
                    tol_alpha: float | None = None,
                    settings: SolverSettings | None = None) -> EigenResult:
    """Bisect the free exponent on the shooting sign until bracket < tol.

    The endpoints must classify with opposite numerator signs; otherwise
    NoSignChange is raised and the caller should rescan.  Optional secant
    refinement is applied only when both bracket ends stopped with honest
    sonic approaches (continuous residuals).
    """
    settings = settings or SolverSettings()
    tol = settings.tol_alpha if tol_alpha is None else tol_alpha
    if tol < 1e-12:
        raise ConstraintError("tol_alpha must be >= 1e-12")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ConstraintError(f"bracket must be ordered, got ({lo}, {hi})")

    rep_lo = shoot(spec, lo, settings)
    rep_hi = shoot(spec, hi, settings)
    if rep_lo.numerator_sign == 0 or rep_hi.numerator_sign == 0 \
            or rep_lo.numerator_sign == rep_hi.numerator_sign:
        raise NoSignChange(
            f"no sign change over ({lo}, {hi}): "
            f"{rep_lo.numerator_sign} vs {rep_hi.numerator_sign}",
            scan=[rep_lo, rep_hi])

    iters = 0
    best_sonic = None
    while hi - lo > tol:
        if iters >= settings.max_iterations:
            raise MaxIterations(
                f"bracket still {hi - lo:.3e} wide after {iters} iterations")
        mid = 0.5 * (lo + hi)
        rep = shoot(spec, mid, settings)
        iters += 1
        if rep.stop_reason == SONIC_APPROACH:
            if best_sonic is None or (abs(rep.numerator_end)
                                      / rep.numerator_scale
                                      < abs(best_sonic.numerator_end)
                                      / best_sonic.numerator_scale):
                best_sonic = rep
        if rep.numerator_sign == rep_lo.numerator_sign:
            lo, rep_lo = mid, rep
        else:
            hi, rep_hi = mid, rep

        if (settings.secant
                and rep_lo.stop_reason == SONIC_APPROACH
                and rep_hi.stop_reason == SONIC_APPROACH
                and hi - lo > tol):
            nlo, nhi = rep_lo.numerator_end, rep_hi.numerator_end
            if nlo != nhi:
                cand = lo - nlo * (hi - lo) / (nhi - nlo)
                if lo + 0.01 * (hi - lo) < cand < hi - 0.01 * (hi - lo):
                    rep_c = shoot(spec, cand, settings)
                    iters += 1
                    if rep_c.stop_reason == SONIC_APPROACH:
                        if best_sonic is None or (
                                abs(rep_c.numerator_end) / rep_c.numerator_scale
                                < abs(best_sonic.numerator_end)
                                / best_sonic.numerator_scale):
                            best_sonic = rep_c
                    if rep_c.numerator_sign == rep_lo.numerator_sign:
                        lo, rep_lo = cand, rep_c
                    else:
                        hi, rep_hi = cand, rep_c

    value = 0.5 * (lo + hi)
    final = shoot(spec, value, settings)
    if final.stop_reason != SONIC_APPROACH and best_sonic is not None:
        final = best_sonic
        value = final.free_value

    name, to_exp = resolve_free_parameter(spec)
    exps = to_exp(value)
    cspec = spec.with_exponents(exps.alpha, exps.beta)
    jump = sim.jump_init(cspec)
    residual = abs(final.numerator_end) / final.numerator_scale
    notes = ""
    try:
        profile = cross_sonic(spec, value, final, settings)
        crossed = True
        sonic_xi = profile.sonic_xi
        residual = profile.eigen_residual
    except CrossingFailure as exc:
        notes = (f"sonic crossing not regular: {exc}; profile covers the "
                 f"approach side only")
        crossed = False
        sonic_xi = final.stop_xi
        profile = _assemble_profile(cspec, jump, final, sonic_xi, False, [],
                                    residual)
    return EigenResult(
        alpha=cspec.alpha, beta=cspec.beta, free_name=name,
        bracket=(lo, hi), iterations=iters, sonic_xi=sonic_xi,
        residual=residual, crossed=crossed, profile=profile,
        approach=final, notes=notes)
