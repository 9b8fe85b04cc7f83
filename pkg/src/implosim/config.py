"""Run configuration: flat INI-style text with strictly validated keys."""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field

from . import eos as eos_mod
from .eigensolver import SolverSettings
from .errors import ConfigError
from .similarity import Exponents, ProblemSpec

_KNOWN = {
    "problem": {"kind", "k", "rho0", "xi_s"},
    "eos": {"family", "gamma", "model", "s", "q", "rho_ref", "lambda", "p0",
            "f_table"},
    "exponents": {"alpha", "beta"},
    "solver": {"bracket", "tol_alpha", "tol_numerator", "delta_stop",
               "surface_eps", "h_jump", "xi_max_factor", "rtol", "atol",
               "scan_points", "max_iterations", "secant", "crossing_tol",
               "pressure_floor", "wall_floor"},
    "output": {"format", "plot"},
    "grid": {"r", "t"},
    "verify": {"t_probe", "r_window", "n_points", "h_t_rel", "h_r_rel",
               "pde_tol", "eps"},
}

_POSITIVE_SOLVER_KEYS = {"tol_alpha", "tol_numerator", "delta_stop",
                         "surface_eps", "h_jump", "xi_max_factor", "rtol",
                         "atol", "crossing_tol", "pressure_floor",
                         "wall_floor"}


@dataclass
class RunConfig:
    kind: str
    k: int
    rho0: float
    xi_s: float | None
    eos_block: dict
    alpha: float | None
    beta: float | None
    bracket: tuple[float, float]
    settings: SolverSettings
    out_format: str = "csv"
    plot: bool = False
    grid_r: tuple[float, float, int, str] | None = None
    grid_t: tuple = (-1.0,)
    verify_opts: dict = field(default_factory=dict)
    sha256: str = ""
    raw_text: str = ""

    def eos_model(self):
        return eos_mod.from_dict(self.eos_block)

    def problem_spec(self) -> ProblemSpec:
        return ProblemSpec(kind=self.kind, k=self.k, eos=self.eos_model(),
                           exponents=Exponents(self.alpha, self.beta),
                           rho0=self.rho0, xi_s=self.xi_s)


def _float_or_free(raw: str):
    v = raw.strip().lower()
    if v in ("free", "none", ""):
        return None
    return float(raw)


def _parse_bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected boolean, got {raw!r}")


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    for section in cp.sections():
        if section not in _KNOWN:
            raise ConfigError(f"unknown config section [{section}]")
        unknown = set(cp[section]) - _KNOWN[section]
        if unknown:
            raise ConfigError(
                f"unknown keys in [{section}]: {sorted(unknown)}")

    if "problem" not in cp or "eos" not in cp:
        raise ConfigError("config needs [problem] and [eos] sections")
    prob = cp["problem"]
    kind = prob.get("kind", "").strip()
    if kind not in ("cavity", "shock"):
        raise ConfigError(f"problem kind must be cavity or shock, got {kind!r}")
    try:
        k = int(prob.get("k", "2"))
        rho0 = float(prob.get("rho0", "1.0"))
        xi_s = prob.get("xi_s", "").strip()
        xi_s = float(xi_s) if xi_s else None
    except ValueError as exc:
        raise ConfigError(f"bad [problem] value: {exc}") from exc
    if k not in (1, 2):
        raise ConfigError(f"k must be 1 or 2, got {k}")
    if rho0 <= 0:
        raise ConfigError("rho0 must be positive")
    if xi_s is not None and xi_s <= 0:
        raise ConfigError("xi_s must be positive")

    eos_block = dict(cp["eos"])

    alpha = beta = None
    if "exponents" in cp:
        try:
            alpha = _float_or_free(cp["exponents"].get("alpha", "free"))
            beta = _float_or_free(cp["exponents"].get("beta", "free"))
        except ValueError as exc:
            raise ConfigError(f"bad [exponents] value: {exc}") from exc

    kwargs = {}
    bracket = (-0.99, -0.05)
    if "solver" in cp:
        sv = cp["solver"]
        try:
            if "bracket" in sv:
                parts = [float(x) for x in sv["bracket"].split(",")]
                if len(parts) != 2:
                    raise ConfigError("bracket needs two comma-separated values")
                bracket = (parts[0], parts[1])
            for key in _POSITIVE_SOLVER_KEYS:
                if key in sv:
                    val = float(sv[key])
                    if val <= 0:
                        raise ConfigError(f"solver {key} must be positive")
                    kwargs[key] = val
            if "scan_points" in sv:
                kwargs["scan_points"] = int(sv["scan_points"])
            if "max_iterations" in sv:
                kwargs["max_iterations"] = int(sv["max_iterations"])
            if "secant" in sv:
                kwargs["secant"] = _parse_bool(sv["secant"])
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad [solver] value: {exc}") from exc
    if bracket[0] >= bracket[1]:
        raise ConfigError(f"bracket must be ordered, got {bracket}")
    settings = SolverSettings(**kwargs)

    out_format, plot = "csv", False
    if "output" in cp:
        out_format = cp["output"].get("format", "csv").strip().lower()
        if out_format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {out_format!r}")
        if "plot" in cp["output"]:
            plot = _parse_bool(cp["output"]["plot"])

    grid_r, grid_t = None, (-1.0,)
    if "grid" in cp:
        g = cp["grid"]
        try:
            if "r" in g:
                parts = [p.strip() for p in g["r"].split(",")]
                if len(parts) not in (3, 4):
                    raise ConfigError("grid r needs lo,hi,n[,log]")
                spacing = parts[3] if len(parts) == 4 else "lin"
                if spacing not in ("lin", "log"):
                    raise ConfigError("grid r spacing must be lin or log")
                grid_r = (float(parts[0]), float(parts[1]), int(parts[2]),
                          spacing)
            if "t" in g:
                grid_t = tuple(float(x) for x in g["t"].split(","))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad [grid] value: {exc}") from exc
        if any(t == 0 for t in grid_t):
            raise ConfigError("grid t values must be nonzero")

    verify_opts = {}
    if "verify" in cp:
        vv = cp["verify"]
        try:
            if "t_probe" in vv:
                verify_opts["t_probe"] = float(vv["t_probe"])
            if "r_window" in vv:
                lohi = [float(x) for x in vv["r_window"].split(",")]
                if len(lohi) != 2 or lohi[0] >= lohi[1] or lohi[0] <= 0:
                    raise ConfigError("verify r_window needs 0 < lo < hi")
                verify_opts["r_window"] = (lohi[0], lohi[1])
            if "n_points" in vv:
                verify_opts["n_points"] = int(vv["n_points"])
            for key in ("h_t_rel", "h_r_rel", "pde_tol", "eps"):
                if key in vv:
                    val = float(vv[key])
                    if val <= 0:
                        raise ConfigError(f"verify {key} must be positive")
                    verify_opts[key] = val
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad [verify] value: {exc}") from exc

    sha = hashlib.sha256(text.encode()).hexdigest()
    return RunConfig(kind=kind, k=k, rho0=rho0, xi_s=xi_s,
                     eos_block=eos_block, alpha=alpha, beta=beta,
                     bracket=bracket, settings=settings,
                     out_format=out_format, plot=plot, grid_r=grid_r,
                     grid_t=grid_t, verify_opts=verify_opts, sha256=sha,
                     raw_text=text)


def load_config(path: str) -> RunConfig:
    try:
        with io.open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
