"""Command-line client for the solver service.

Commands parse one INI config, build the same request models the HTTP API
uses, execute them in process (or against a remote server via --server),
and write deterministic result files.

Exit codes: 0 ok, 2 config error, 3 unsolvable by scaling, 4 no eigenvalue
in bracket, 5 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import serialize
from .config import RunConfig, load_config
from .errors import ConfigError, ConstraintError, NoSignChange, SolverError
from .service import handlers
from .service import models as m

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSOLVABLE = 3
EXIT_NO_EIGENVALUE = 4
EXIT_VERIFY_FAILED = 5


class Client:
    """Dispatches operations in-process or to a remote service."""

    def __init__(self, server: str | None = None):
        self.server = server.rstrip("/") if server else None

    def call(self, op: str, request):
        if self.server is None:
            return getattr(handlers, f"run_{op}")(request)
        import httpx
        resp = httpx.post(f"{self.server}/api/{op}",
                          json=request.model_dump(mode="json"),
                          timeout=600.0)
        if resp.status_code == 422:
            raise ConfigError(resp.json().get("error", "invalid request"))
        if resp.status_code == 409:
            body = resp.json()
            if body.get("reason") == "no_sign_change":
                raise NoSignChange(body.get("error", "no sign change"))
            raise ConstraintError(body.get("error", "unsolvable"))
        if resp.status_code != 200:
            raise SolverError(f"server error {resp.status_code}: {resp.text}")
        response_types = {
            "classify": m.ClassifyResponse, "solve": m.SolveResponse,
            "scan": m.ScanResponse, "reconstruct": m.ReconstructResponse,
            "verify": m.VerifyResponse,
        }
        return response_types[op].model_validate(resp.json())


def _eos_block(cfg: RunConfig) -> m.EosBlock:
    raw = dict(cfg.eos_block)
    parsed = {"family": raw.pop("family", None)}
    for key in ("gamma", "s", "q", "rho_ref", "lambda", "p0"):
        if key in raw:
            parsed[key] = float(raw.pop(key))
    for key in ("model", "f_table"):
        if key in raw:
            parsed[key] = raw.pop(key)
    if raw:
        raise ConfigError(f"unknown eos keys: {sorted(raw)}")
    return m.EosBlock.model_validate(parsed)


def _solver_block(cfg: RunConfig) -> m.SolverBlock:
    s = cfg.settings
    return m.SolverBlock(
        bracket=cfg.bracket, tol_alpha=s.tol_alpha,
        tol_numerator=s.tol_numerator, delta_stop=s.delta_stop,
        surface_eps=s.surface_eps, h_jump=s.h_jump,
        xi_max_factor=s.xi_max_factor, rtol=s.rtol, atol=s.atol,
        scan_points=s.scan_points, max_iterations=s.max_iterations,
        secant=s.secant, crossing_tol=s.crossing_tol)


def _config_echo(cfg: RunConfig) -> dict:
    return {
        "problem": {"kind": cfg.kind, "k": cfg.k, "rho0": cfg.rho0,
                    "xi_s": cfg.xi_s},
        "eos": dict(cfg.eos_block),
        "exponents": {"alpha": cfg.alpha, "beta": cfg.beta},
        "solver": _solver_block(cfg).model_dump(mode="json"),
        "output": {"format": cfg.out_format, "plot": cfg.plot},
    }


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if getattr(args, "k", None):
        cfg.kind, cfg.k = cfg.kind, int(args.k)
    if getattr(args, "bracket", None):
        parts = [float(x) for x in args.bracket.split(",")]
        if len(parts) != 2 or parts[0] >= parts[1]:
            raise ConfigError(f"--bracket needs LO,HI ordered, got {args.bracket}")
        cfg.bracket = (parts[0], parts[1])
    if getattr(args, "tol_alpha", None):
        val = float(args.tol_alpha)
        if val <= 0:
            raise ConfigError("--tol-alpha must be positive")
        object.__setattr__(cfg, "settings",
                           cfg.settings.__class__(
                               **{**cfg.settings.__dict__, "tol_alpha": val}))
    if getattr(args, "format", None):
        if args.format not in ("csv", "json"):
            raise ConfigError("--format must be csv or json")
        cfg.out_format = args.format
    if getattr(args, "plot", False):
        cfg.plot = True
    return cfg


def _outdir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_classify(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    client = Client(args.server)
    req = m.ClassifyRequest(eos=_eos_block(cfg), kind=cfg.kind)
    resp = client.call("classify", req)
    print(f"family: {resp.family}")
    print(f"problem: {resp.kind}")
    for rel in resp.relations:
        print(f"constraint: {rel}")
    print(f"free scaling exponents: {resp.free_dims}")
    if not resp.solvable:
        print("no free exponent remains: not solvable by scaling")
        return EXIT_UNSOLVABLE
    return EXIT_OK


def _write_profile_files(cfg: RunConfig, resp: m.SolveResponse,
                         out: Path) -> list[str]:
    profile = resp.profile.to_profile()
    eos = cfg.eos_model()
    written = []
    if cfg.out_format == "json":
        ppath = out / "profile.json"
        ppath.write_text(serialize.profile_json(profile, eos))
    else:
        ppath = out / "profile.csv"
        ppath.write_text(serialize.profile_csv(profile, eos))
    written.append(str(ppath))
    eigen = resp.eigen.model_dump(mode="json")
    meta = serialize.metadata_json(profile, eigen, _config_echo(cfg),
                                   cfg.sha256)
    mpath = out / "solution.json"
    mpath.write_text(meta)
    written.append(str(mpath))
    if cfg.plot:
        for fld in ("R", "V", "Pi"):
            spath = out / f"profile_{fld}.svg"
            serialize.plot_profile_svg(profile, fld, str(spath))
            written.append(str(spath))
    return written


def cmd_solve(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    client = Client(args.server)
    out = _outdir(args)
    req = m.SolveRequest(problem=m.ProblemBlock(kind=cfg.kind, k=cfg.k,
                                                rho0=cfg.rho0, xi_s=cfg.xi_s),
                         eos=_eos_block(cfg),
                         exponents=m.ExponentsBlock(alpha=cfg.alpha,
                                                    beta=cfg.beta),
                         solver=_solver_block(cfg))
    try:
        resp = client.call("solve", req)
    except NoSignChange:
        scan_req = m.ScanRequest(problem=req.problem, eos=req.eos,
                                 exponents=req.exponents, solver=req.solver)
        scan_resp = client.call("scan", scan_req)
        spath = out / "scan.csv"
        lines = [",".join(serialize.SCAN_COLUMNS)]
        for e in scan_resp.entries:
            lines.append(",".join([
                format(e.value, ".17g"), e.stop_reason,
                str(e.numerator_sign), format(e.stop_xi, ".17g"),
                format(e.numerator_end, ".17g")]))
        spath.write_text("\n".join(lines) + "\n")
        print(f"no sign change in bracket {cfg.bracket}; scan written to {spath}")
        if scan_resp.brackets:
            print("candidate brackets: "
                  + "; ".join(f"({a:.6g}, {b:.6g})" for a, b in scan_resp.brackets))
        return EXIT_NO_EIGENVALUE
    written = _write_profile_files(cfg, resp, out)
    e = resp.eigen
    print(f"{e.free_name} = {e.free_value:.12g} "
          f"(alpha = {e.alpha:.12g}, beta = {e.beta:.12g})")
    print(f"sonic_xi = {e.sonic_xi:.12g}  residual = {e.residual:.3e}  "
          f"crossed = {e.crossed}  iterations = {e.iterations}")
    if e.notes:
        print(f"note: {e.notes}")
    for w in written:
        print(f"wrote {w}")
    return EXIT_OK


def cmd_scan(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    client = Client(args.server)
    out = _outdir(args)
    req = m.ScanRequest(problem=m.ProblemBlock(kind=cfg.kind, k=cfg.k,
                                               rho0=cfg.rho0, xi_s=cfg.xi_s),
                        eos=_eos_block(cfg),
                        exponents=m.ExponentsBlock(alpha=cfg.alpha,
                                                   beta=cfg.beta),
                        solver=_solver_block(cfg))
    resp = client.call("scan", req)
    spath = out / "scan.csv"
    lines = [",".join(serialize.SCAN_COLUMNS)]
    for e in resp.entries:
        lines.append(",".join([
            format(e.value, ".17g"), e.stop_reason, str(e.numerator_sign),
            format(e.stop_xi, ".17g"), format(e.numerator_end, ".17g")]))
    spath.write_text("\n".join(lines) + "\n")
    print(f"wrote {spath}")
    if resp.brackets:
        print("sign-change brackets: "
              + "; ".join(f"({a:.6g}, {b:.6g})" for a, b in resp.brackets))
    else:
        print("no sign-change brackets found")
    return EXIT_OK


def _load_profile_arg(args) -> m.ProfileModel:
    ppath = Path(args.profile)
    if not ppath.exists():
        raise ConfigError(f"profile file not found: {ppath}")
    meta = Path(args.meta) if getattr(args, "meta", None) \
        else ppath.parent / "solution.json"
    if not meta.exists():
        raise ConfigError(f"metadata file not found: {meta}")
    profile = serialize.load_profile(str(ppath), str(meta))
    return m.ProfileModel.from_profile(profile)


def cmd_reconstruct(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    client = Client(args.server)
    out = _outdir(args)
    pm = _load_profile_arg(args)
    if args.r:
        parts = [p.strip() for p in args.r.split(",")]
        spacing = parts[3] if len(parts) == 4 else "lin"
        grid = m.GridSpec(lo=float(parts[0]), hi=float(parts[1]),
                          n=int(parts[2]), spacing=spacing)
    elif cfg.grid_r:
        lo, hi, n, spacing = cfg.grid_r
        grid = m.GridSpec(lo=lo, hi=hi, n=n, spacing=spacing)
    else:
        raise ConfigError("no r grid: set [grid] r = lo,hi,n[,log] or pass --r")
    t_list = [float(x) for x in args.t.split(",")] if args.t else list(cfg.grid_t)
    req = m.ReconstructRequest(profile=pm, r=grid, t=t_list)
    resp = client.call("reconstruct", req)

    class _S:  # adapt models to the serializer
        def __init__(self, s):
            self.r, self.t, self.rho, self.u, self.p, self.region = (
                s.r, s.t, s.rho, s.u, s.p, s.region)
    samples = [_S(s) for s in resp.samples]
    if cfg.out_format == "json":
        fpath = out / "fields.json"
        fpath.write_text(serialize.samples_json(samples))
    else:
        fpath = out / "fields.csv"
        fpath.write_text(serialize.samples_csv(samples))
    print(f"wrote {fpath} ({len(samples)} samples)")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    client = Client(args.server)
    out = _outdir(args)
    pm = _load_profile_arg(args)
    opts = m.VerifyOptions(**cfg.verify_opts) if cfg.verify_opts \
        else m.VerifyOptions()
    req = m.VerifyRequest(profile=pm, eos=_eos_block(cfg), options=opts)
    resp = client.call("verify", req)
    vpath = out / "verification.json"
    import json
    vpath.write_text(json.dumps(resp.model_dump(mode="json"), sort_keys=True,
                                indent=1) + "\n")
    print(f"wrote {vpath}")
    worst = max(resp.pde_residual_norms.values())
    print(f"pde residual max = {worst:.3e}  entropy_ok = {resp.entropy_ok} "
          f"(margin {resp.entropy_margin:.3e})  ivt_ok = {resp.ivt_ok}")
    if not resp.passed:
        print("verification FAILED")
        return EXIT_VERIFY_FAILED
    print("verification passed")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn
    uvicorn.run("implosim.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="implosim",
        description="Self-similar collapsing-cavity / converging-shock solver")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="INI run configuration")
        p.add_argument("--out", help="output directory (default: cwd)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--plot", action="store_true")
        p.add_argument("--k", choices=("1", "2"))
        p.add_argument("--bracket", help="LO,HI free-exponent bracket")
        p.add_argument("--tol-alpha", dest="tol_alpha")
        p.add_argument("--server", help="remote service URL (default: in-process)")

    common(sub.add_parser("classify", help="print the admissibility cell"))
    common(sub.add_parser("solve", help="find the eigenvalue and write the profile"))
    common(sub.add_parser("scan", help="tabulate shooting signs over the bracket"))

    pr = sub.add_parser("reconstruct", help="physical fields from a profile")
    common(pr)
    pr.add_argument("--profile", required=True, help="profile.csv or profile.json")
    pr.add_argument("--meta", help="solution.json (default: sibling of profile)")
    pr.add_argument("--r", help="grid lo,hi,n[,log]")
    pr.add_argument("--t", help="comma-separated t values")

    pv = sub.add_parser("verify", help="verification report for a profile")
    common(pv)
    pv.add_argument("--profile", required=True)
    pv.add_argument("--meta")

    ps = sub.add_parser("serve", help="run the HTTP service")
    ps.add_argument("--host", default="127.0.0.1")
    ps.add_argument("--port", type=int, default=8000)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cmds = {"classify": cmd_classify, "solve": cmd_solve, "scan": cmd_scan,
            "reconstruct": cmd_reconstruct, "verify": cmd_verify,
            "serve": cmd_serve}
    try:
        return cmds[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConstraintError as exc:
        print(f"unsolvable by scaling: {exc}", file=sys.stderr)
        return EXIT_UNSOLVABLE
    except NoSignChange as exc:
        print(f"no eigenvalue in bracket: {exc}", file=sys.stderr)
        return EXIT_NO_EIGENVALUE
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
