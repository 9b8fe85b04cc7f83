"""Independent checks of a converged profile against the flow equations.

All checks are read-only.  The PDE residual check reconstructs physical
fields from the profile and differences them in (r, t); the similarity
checks evaluate the reduced system directly on profile samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import similarity as sim
from .eos import EosModel, CAVITY, SHOCK
from .errors import GridError, SingularPoint
from .reconstruct import (DISTURBED, SolutionProfile, jump_trajectory,
                          to_physical)


@dataclass
class VerificationReport:
    pde_residual_norms: tuple[float, float, float]
    entropy_ok: bool
    entropy_margin: float
    ivt_ok: bool
    ivt_delta_neg_xi: float
    ivt_delta_pos_xi: float
    conservation_norms: tuple[float, float, float]
    notes: list = field(default_factory=list)

    def passed(self, pde_tol: float) -> bool:
        return (max(self.pde_residual_norms) < pde_tol and self.entropy_ok
                and self.ivt_ok)

    def to_dict(self) -> dict:
        return {
            "pde_residual_norms": {
                "mass": self.pde_residual_norms[0],
                "momentum": self.pde_residual_norms[1],
                "energy": self.pde_residual_norms[2],
            },
            "entropy_ok": self.entropy_ok,
            "entropy_margin": self.entropy_margin,
            "ivt_ok": self.ivt_ok,
            "ivt_delta_neg_xi": self.ivt_delta_neg_xi,
            "ivt_delta_pos_xi": self.ivt_delta_pos_xi,
            "conservation_norms": {
                "c1": self.conservation_norms[0],
                "c2": self.conservation_norms[1],
                "c3": self.conservation_norms[2],
            },
            "notes": list(self.notes),
        }


def _spec_of(profile: SolutionProfile, eos: EosModel) -> sim.ProblemSpec:
    return sim.ProblemSpec(
        kind=profile.kind, k=profile.k, eos=eos,
        exponents=sim.Exponents(profile.alpha, profile.beta),
        rho0=profile.rho0 if profile.kind == SHOCK else 1.0,
        xi_s=profile.xi_s)


def pde_residual(profile: SolutionProfile, eos: EosModel, t_probe: float,
                 r_grid, h_t_rel: float = 3e-3, h_r_rel: float = 3e-3):
    """Max relative residuals of the mass/momentum/energy PDEs.

    Fields come from the similarity map; time and space derivatives by
    central differences with relative steps h_t_rel and h_r_rel.  The
    whole stencil must sit in one region; a stencil that straddles the
    jump raises GridError.  A uniform quiescent stencil gives zeros.
    """
    if t_probe == 0:
        raise GridError("t_probe must be nonzero")
    k = profile.k
    t1, t2 = t_probe * (1 + h_t_rel), t_probe * (1 - h_t_rel)
    worst = [0.0, 0.0, 0.0]
    for r in np.asarray(r_grid, dtype=float):
        dr = h_r_rel * r
        pts = {}
        regions = set()
        extrap = False
        for tag, (rr, tt) in {
            "c": (r, t_probe), "rp": (r + dr, t_probe), "rm": (r - dr, t_probe),
            "tp": (r, t1), "tm": (r, t2),
        }.items():
            s = to_physical(profile, rr, tt)
            pts[tag] = s
            regions.add(s.region)
            extrap = extrap or s.extrapolated
        if len(regions) > 1:
            raise GridError(
                f"finite-difference stencil at r = {r} crosses the jump "
                f"(regions {sorted(regions)})")
        if extrap:
            raise GridError(
                f"stencil at r = {r} leaves the computed profile range")
        c = pts["c"]
        if c.region != DISTURBED:
            continue  # uniform state: residuals identically zero
        dtt = t1 - t2
        rho_t = (pts["tp"].rho - pts["tm"].rho) / dtt
        u_t = (pts["tp"].u - pts["tm"].u) / dtt
        p_t = (pts["tp"].p - pts["tm"].p) / dtt
        rho_r = (pts["rp"].rho - pts["rm"].rho) / (2 * dr)
        u_r = (pts["rp"].u - pts["rm"].u) / (2 * dr)
        p_r = (pts["rp"].p - pts["rm"].p) / (2 * dr)
        div_u = u_r + k * c.u / r
        ks = eos.ks(c.p, c.rho)

        res_mass = rho_t + c.u * rho_r + c.rho * div_u
        scl_mass = abs(rho_t) + abs(c.u * rho_r) + abs(c.rho * div_u) + 1e-300
        res_mom = u_t + c.u * u_r + p_r / c.rho
        scl_mom = abs(u_t) + abs(c.u * u_r) + abs(p_r / c.rho) + 1e-300
        res_en = p_t + c.u * p_r + ks * div_u
        scl_en = abs(p_t) + abs(c.u * p_r) + abs(ks * div_u) + 1e-300

        worst[0] = max(worst[0], abs(res_mass) / scl_mass)
        worst[1] = max(worst[1], abs(res_mom) / scl_mom)
        worst[2] = max(worst[2], abs(res_en) / scl_en)
    return tuple(worst)


def entropy_condition(profile: SolutionProfile, eos: EosModel,
                      eps: float = 1e-6):
    """Subsonic post-jump check |X| < C; returns (ok, minimum margin).

    Shocks are checked at xi_s itself; cavities on (xi_s*(1+eps), xi*),
    excluding the degenerate surface point.  The supersonic-approach side
    holds trivially (upstream sound speed is zero for both problems).
    """
    spec = _spec_of(profile, eos)
    xi_hi = profile.sonic_xi if profile.sonic_xi else profile.xi_end
    if profile.kind == SHOCK:
        xis = [profile.xi_s]
    else:
        lo = profile.xi_s * (1 + eps)
        xis = []
    sel = (profile.xi > (profile.xi_s * (1 + eps))) & (profile.xi < xi_hi)
    xis = list(xis) + [float(x) for x in profile.xi[sel]]
    margin = math.inf
    ok = True
    for x in xis:
        Rv, Vv, Pv, extr = profile.fields_at(x)
        st = sim.SimilarityState(x, Rv, Vv, Pv)
        try:
            c = math.sqrt(max(sim.sound_speed_sq_sim(spec, st), 0.0))
        except Exception:
            continue
        m = c - abs(sim.group_velocity(spec, st))
        if m < margin:
            margin = m
        if m <= 0:
            ok = False
    if not xis:
        return False, 0.0
    return ok, margin


def ivt_check(profile: SolutionProfile, eos: EosModel):
    """Sonic-discriminant sign change: Delta < 0 near the jump, Delta > 0
    far out, with the recorded sonic coordinate in between."""
    spec = _spec_of(profile, eos)

    def delta_at(x):
        Rv, Vv, Pv, _ = profile.fields_at(x)
        return sim.sonic_discriminant(spec, sim.SimilarityState(x, Rv, Vv, Pv))

    near = profile.xi_s * (1 + 10 * 1e-6) if profile.kind == CAVITY \
        else profile.xi_s
    if profile.kind == CAVITY and len(profile.xi) > 2:
        near = float(profile.xi[1])
    far = 100.0 * profile.xi_s
    d_near = delta_at(near)
    d_far = delta_at(far)
    ok = d_near < 0 < d_far
    if profile.sonic_xi is not None:
        ok = ok and (near <= profile.sonic_xi <= far)
    return ok, near, far


def entropy_indicator(profile: SolutionProfile, eos: EosModel):
    """Samples of R'*C^2 - Pi' along the profile (ODE derivatives).

    Proportional to the negative entropy gradient; single-signed profiles
    indicate monotone entropy stratification.  Points too close to the
    singular loci are skipped.
    """
    spec = _spec_of(profile, eos)
    xs, vals = [], []
    xi_hi = profile.sonic_xi if profile.sonic_xi else profile.xi_end
    for i in range(1, len(profile.xi) - 1):
        x = float(profile.xi[i])
        if profile.sonic_xi and abs(x - profile.sonic_xi) < 1e-3 * xi_hi:
            continue
        st = sim.SimilarityState(x, float(profile.R[i]), float(profile.V[i]),
                                 float(profile.Pi[i]))
        try:
            dR, dV, dPi = sim.rhs(spec, st, singular_floor=1e-10)
        except SingularPoint:
            continue
        c2 = sim.sound_speed_sq_sim(spec, st)
        xs.append(x)
        vals.append(dR * c2 - dPi)
    return np.array(xs), np.array(vals)


def conservation_norms(profile: SolutionProfile, eos: EosModel):
    """Max relative defects of the mass/momentum/entropy identities."""
    spec = _spec_of(profile, eos)
    worst = [0.0, 0.0, 0.0]
    for i in range(1, len(profile.xi) - 1):
        x = float(profile.xi[i])
        if profile.sonic_xi and abs(x - profile.sonic_xi) < 1e-4 * x:
            continue
        st = sim.SimilarityState(x, float(profile.R[i]), float(profile.V[i]),
                                 float(profile.Pi[i]))
        try:
            derivs = sim.rhs(spec, st, singular_floor=1e-12)
        except SingularPoint:
            continue
        res = sim.conservation_residuals(spec, st, derivs)
        scales = _conservation_scales(spec, st, derivs)
        for j in range(3):
            worst[j] = max(worst[j], abs(res[j]) / scales[j])
    return tuple(worst)


def _conservation_scales(spec, st, derivs):
    a, b, k = spec.alpha, spec.beta, spec.k
    xi, R, V, Pi = st.xi, st.R, st.V, st.Pi
    dR, dV, dPi = derivs
    F = spec.eos.f_sim(Pi, R)
    X = (1.0 + a) * xi + V
    C2 = Pi * F / R
    dX = (1.0 + a) + dV
    s1 = abs(dR * X) + abs(R * dX) + abs(((1 + a) * (1 + k) + b) * R) \
        + abs(k * X / xi * R) + 1e-300
    s2 = abs(dR * X * X) + abs(2 * R * X * dX) + abs(dPi) \
        + abs((2 + k + (3 + k) * a + b) * R * X) + abs(k * X / xi * R * X) \
        + abs(a * (1 + a) * xi / X * R * X) + 1e-300
    s3 = abs(dR * C2) + abs(dPi) + abs(b * R * C2 / X) \
        + abs((b + 2 * a) * Pi / X) + 1e-300
    return s1, s2, s3


def verify_profile(profile: SolutionProfile, eos: EosModel,
                   t_probe: float = -1.0, n_points: int = 50,
                   r_window: tuple[float, float] = (1.5, 5.0),
                   h_t_rel: float = 3e-3, h_r_rel: float = 3e-3,
                   eps: float = 1e-6) -> VerificationReport:
    """Run the full battery on one profile and collect a report."""
    notes = []
    r_s = jump_trajectory(profile, t_probe)
    xi_hi = profile.sonic_xi if profile.sonic_xi else profile.xi_end
    # keep the FD window inside the computed profile range
    hi = min(r_window[1], 0.9 * xi_hi / profile.xi_s
             if xi_hi / profile.xi_s > r_window[0] * 1.2 else r_window[1])
    if hi <= r_window[0]:
        hi = r_window[0] * 1.05
    r_grid = np.linspace(r_window[0] * r_s, hi * r_s, n_points)
    try:
        pde = pde_residual(profile, eos, t_probe, r_grid, h_t_rel, h_r_rel)
    except GridError as exc:
        pde = (math.inf, math.inf, math.inf)
        notes.append(f"pde_residual grid error: {exc}")
    ent_ok, margin = entropy_condition(profile, eos, eps)
    ivt_ok, xneg, xpos = ivt_check(profile, eos)
    cons = conservation_norms(profile, eos)
    if not profile.crossed:
        notes.append("profile did not cross the sonic locus; far field "
                     "beyond the closest approach is extrapolated")
    return VerificationReport(
        pde_residual_norms=pde, entropy_ok=ent_ok, entropy_margin=margin,
        ivt_ok=ivt_ok, ivt_delta_neg_xi=xneg, ivt_delta_pos_xi=xpos,
        conservation_norms=cons, notes=notes)
