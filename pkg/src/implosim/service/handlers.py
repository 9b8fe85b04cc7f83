"""Service-layer operations: pure functions from request to response models.

Both the HTTP routes and the command-line client call these directly, so
there is exactly one implementation of each operation.
"""

from __future__ import annotations

import numpy as np

from .. import eigensolver as eig
from .. import reconstruct as rec
from .. import verify as ver
from ..eos import classify_constraints
from ..similarity import Exponents, ProblemSpec
from . import models as m


def _problem_spec(problem: m.ProblemBlock, eos_block: m.EosBlock,
                  exponents: m.ExponentsBlock) -> ProblemSpec:
    return ProblemSpec(kind=problem.kind, k=problem.k,
                       eos=eos_block.to_model(),
                       exponents=Exponents(exponents.alpha, exponents.beta),
                       rho0=problem.rho0, xi_s=problem.xi_s)


def run_classify(req: m.ClassifyRequest) -> m.ClassifyResponse:
    model = req.eos.to_model()
    cset = classify_constraints(model, req.kind)
    return m.ClassifyResponse(
        family=model.family, kind=req.kind, relations=cset.describe(),
        free_dims=cset.free_dims, solvable=cset.free_dims >= 1)


def run_solve(req: m.SolveRequest) -> m.SolveResponse:
    spec = _problem_spec(req.problem, req.eos, req.exponents)
    settings = req.solver.to_settings()
    result = eig.find_eigenvalue(spec, req.solver.bracket,
                                 settings.tol_alpha, settings)
    free_value = result.alpha if result.free_name == "alpha" else result.beta
    eigen = m.EigenInfo(
        free_name=result.free_name, free_value=free_value,
        alpha=result.alpha, beta=result.beta, bracket=result.bracket,
        iterations=result.iterations, sonic_xi=result.sonic_xi,
        residual=result.residual, crossed=result.crossed, notes=result.notes)
    return m.SolveResponse(eigen=eigen,
                           profile=m.ProfileModel.from_profile(result.profile))


def run_scan(req: m.ScanRequest) -> m.ScanResponse:
    spec = _problem_spec(req.problem, req.eos, req.exponents)
    settings = req.solver.to_settings()
    lo, hi = req.solver.bracket
    res = eig.scan(spec, lo, hi, settings.scan_points, settings)
    entries = []
    for v, rep in zip(res.values, res.reports):
        if isinstance(rep, Exception):
            entries.append(m.ScanEntry(value=float(v), stop_reason="error",
                                       numerator_sign=0, stop_xi=float("nan"),
                                       numerator_end=float("nan")))
        else:
            entries.append(m.ScanEntry(
                value=float(v), stop_reason=rep.stop_reason,
                numerator_sign=rep.numerator_sign, stop_xi=rep.stop_xi,
                numerator_end=rep.numerator_end))
    return m.ScanResponse(entries=entries,
                          brackets=[(a, b) for a, b in res.brackets])


def run_reconstruct(req: m.ReconstructRequest) -> m.ReconstructResponse:
    profile = req.profile.to_profile()
    if isinstance(req.r, m.GridSpec):
        g = req.r
        if g.n <= 0:
            r_vals = []
        elif g.spacing == "log":
            r_vals = np.geomspace(g.lo, g.hi, g.n).tolist()
        else:
            r_vals = np.linspace(g.lo, g.hi, g.n).tolist()
    else:
        r_vals = list(req.r)
    samples = rec.sample_grid(profile, r_vals, req.t)
    return m.ReconstructResponse(samples=[
        m.SampleModel(r=s.r, t=s.t, rho=s.rho, u=s.u, p=s.p, region=s.region,
                      extrapolated=s.extrapolated) for s in samples])


def run_verify(req: m.VerifyRequest) -> m.VerifyResponse:
    profile = req.profile.to_profile()
    eos = req.eos.to_model()
    o = req.options
    report = ver.verify_profile(profile, eos, t_probe=o.t_probe,
                                n_points=o.n_points, r_window=o.r_window,
                                h_t_rel=o.h_t_rel, h_r_rel=o.h_r_rel,
                                eps=o.eps)
    d = report.to_dict()
    return m.VerifyResponse(
        passed=report.passed(o.pde_tol),
        pde_residual_norms=d["pde_residual_norms"],
        entropy_ok=report.entropy_ok, entropy_margin=report.entropy_margin,
        ivt_ok=report.ivt_ok, ivt_delta_neg_xi=report.ivt_delta_neg_xi,
        ivt_delta_pos_xi=report.ivt_delta_pos_xi,
        conservation_norms=d["conservation_norms"], notes=d["notes"])
