"""Deterministic serialization of profiles, metadata, samples and reports.

All numeric output uses 17 significant digits so float64 values survive a
round trip exactly; data files carry no timestamps.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import similarity as sim
from .eos import EosModel
from .errors import ConfigError
from .reconstruct import SolutionProfile
from .similarity import Exponents, ProblemSpec, SimilarityState

__version__ = "0.1.0"

PROFILE_COLUMNS = ("xi", "R", "V", "Pi", "X", "C2", "delta", "numerator")
SAMPLE_COLUMNS = ("r", "t", "rho", "u", "p", "region")
SCAN_COLUMNS = ("value", "stop_reason", "numerator_sign", "stop_xi",
                "numerator_end")


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def profile_rows(profile: SolutionProfile, eos: EosModel):
    """Profile samples with the derived sonic quantities per row."""
    spec = ProblemSpec(kind=profile.kind, k=profile.k, eos=eos,
                       exponents=Exponents(profile.alpha, profile.beta),
                       rho0=profile.rho0 if profile.kind == "shock" else 1.0,
                       xi_s=profile.xi_s)
    rows = []
    for i in range(len(profile.xi)):
        st = SimilarityState(float(profile.xi[i]), float(profile.R[i]),
                             float(profile.V[i]), float(profile.Pi[i]))
        X = sim.group_velocity(spec, st)
        try:
            C2 = sim.sound_speed_sq_sim(spec, st)
            N = sim.numerator(spec, st)
        except Exception:
            C2, N = math.nan, math.nan
        rows.append((st.xi, st.R, st.V, st.Pi, X, C2, X * X - C2, N))
    return rows


def profile_csv(profile: SolutionProfile, eos: EosModel) -> str:
    lines = [",".join(PROFILE_COLUMNS)]
    for row in profile_rows(profile, eos):
        lines.append(",".join(_g17(v) for v in row))
    return "\n".join(lines) + "\n"


def profile_json(profile: SolutionProfile, eos: EosModel) -> str:
    rows = profile_rows(profile, eos)
    data = {col: [row[i] for row in rows]
            for i, col in enumerate(PROFILE_COLUMNS)}
    return json.dumps(data, sort_keys=True, indent=1) + "\n"


def metadata_json(profile: SolutionProfile, eigen: dict, config_echo: dict,
                  config_sha256: str) -> str:
    meta = {
        "tool": "implosim",
        "version": __version__,
        "config_sha256": config_sha256,
        "config": config_echo,
        "problem": {"kind": profile.kind, "k": profile.k,
                    "rho0": profile.rho0, "p0": profile.p0},
        "exponents": {"alpha": profile.alpha, "beta": profile.beta},
        "jump": {"xi_s": profile.xi_s},
        "eigenvalue": eigen,
        "profile": {"n_samples": int(len(profile.xi)),
                    "xi_end": profile.xi_end,
                    "sonic_xi": profile.sonic_xi,
                    "crossed": profile.crossed},
    }
    return json.dumps(meta, sort_keys=True, indent=1) + "\n"


def samples_csv(samples) -> str:
    lines = [",".join(SAMPLE_COLUMNS)]
    for s in samples:
        lines.append(",".join([_g17(s.r), _g17(s.t), _g17(s.rho), _g17(s.u),
                               _g17(s.p), s.region]))
    return "\n".join(lines) + "\n"


def samples_json(samples) -> str:
    data = [{"r": s.r, "t": s.t, "rho": s.rho, "u": s.u, "p": s.p,
             "region": s.region} for s in samples]
    return json.dumps(data, sort_keys=True, indent=1) + "\n"


def scan_csv(values, reports) -> str:
    lines = [",".join(SCAN_COLUMNS)]
    for v, rep in zip(values, reports):
        if isinstance(rep, Exception):
            lines.append(",".join([_g17(v), "error", "0", "nan", "nan"]))
        else:
            lines.append(",".join([
                _g17(v), rep.stop_reason, str(rep.numerator_sign),
                _g17(rep.stop_xi), _g17(rep.numerator_end)]))
    return "\n".join(lines) + "\n"


def report_json(report, extra: dict | None = None) -> str:
    data = report.to_dict()
    if extra:
        data.update(extra)
    return json.dumps(data, sort_keys=True, indent=1) + "\n"


def load_profile(profile_path: str, metadata_path: str) -> SolutionProfile:
    """Rebuild a profile from an emitted table plus its metadata file."""
    meta = json.loads(Path(metadata_path).read_text())
    text = Path(profile_path).read_text()
    if profile_path.endswith(".json"):
        data = json.loads(text)
        cols = {c: np.asarray(data[c], dtype=float)
                for c in ("xi", "R", "V", "Pi")}
    else:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = lines[0].split(",")
        if tuple(header) != PROFILE_COLUMNS:
            raise ConfigError(f"unexpected profile columns {header}")
        arr = np.array([[float(v) for v in ln.split(",")]
                        for ln in lines[1:]])
        cols = {c: arr[:, i] for i, c in enumerate(PROFILE_COLUMNS)
                if c in ("xi", "R", "V", "Pi")}
    prob = meta["problem"]
    eig = meta.get("eigenvalue", {})
    return SolutionProfile(
        alpha=meta["exponents"]["alpha"], beta=meta["exponents"]["beta"],
        kind=prob["kind"], k=prob["k"], rho0=prob["rho0"],
        xi=cols["xi"], R=cols["R"], V=cols["V"], Pi=cols["Pi"],
        sonic_xi=meta["profile"].get("sonic_xi"), p0=prob.get("p0", 0.0),
        crossed=meta["profile"].get("crossed", True),
        eigen_residual=eig.get("residual"))


def load_samples_csv(path: str):
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if tuple(lines[0].split(",")) != SAMPLE_COLUMNS:
        raise ConfigError(f"unexpected sample columns {lines[0]}")
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        out.append({"r": float(parts[0]), "t": float(parts[1]),
                    "rho": float(parts[2]), "u": float(parts[3]),
                    "p": float(parts[4]), "region": parts[5]})
    return out


def plot_profile_svg(profile: SolutionProfile, field: str, path: str):
    """Single-field line plot of the profile; requires matplotlib."""
    import matplotlib
    matplotlib.use("svg")
    matplotlib.rcParams["svg.hashsalt"] = "implosim"
    import matplotlib.pyplot as plt

    data = {"R": profile.R, "V": profile.V, "Pi": profile.Pi}[field]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(profile.xi, data, lw=1.2)
    ax.set_xscale("log")
    ax.set_xlabel("xi")
    ax.set_ylabel(field)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
