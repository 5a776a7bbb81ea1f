"""Command-line entry point ``curvmass``.

Settings come from an optional key/value file (``--config``) and from
flags; flags win. Every invalid field is reported at once with exit code 2.
Failures during computation exit with code 3.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .geometry import ModelParams, ProfileError, make_profile, model_profile, sds_horizon_radii
from .mass import (
    MASS_CSV_COLUMNS,
    mass_profile,
    one_harmonic_mass,
    polarized_mass,
)
from .structural import coefficients, coefficients_closed_form, coefficients_ode, p_limit_profiles
from .svg import line_chart
from .verify import CHECK_IDS, UnknownCheckError, run_suite

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_COMPUTE = 3

PROFILE_KINDS = ("de-sitter", "model", "sds", "constant-curvature", "perturbed", "tabulated")
COEFF_CSV_COLUMNS = ("t", "alpha", "mu", "lambda", "exp_lambda")
POLARIZED_COLUMNS = ("Lambda", "p", "bulk", "boundary_H_term", "boundary_grad_term", "total", "K_p")

ONE_HARMONIC_DERIVATION = (
    "areas of the sublevel sets grow as 4 pi e^tau; integrating "
    "e^(tau/2)/(16 pi) (4 pi - Lambda 4 pi e^tau) from -inf to T = min(T_Lambda, T_star) "
    "gives (e^(T/2)/2)(1 - e^(T - T_Lambda))")


class ConfigError(ValueError):
    """One or more invalid settings; ``problems`` lists every one of them."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


def fmt(x: float) -> str:
    return f"{x:.17e}"


# --------------------------------------------------------------------- config

# key -> parser; list-valued keys accept comma separated values
def _float_list(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


_KEYS = {
    "profile": str,
    "profile_path": str,
    "lambda": _float_list,
    "p": _float_list,
    "m": float,
    "a": float,
    "epsilon": float,
    "shape": str,
    "cap": float,
    "t_min": float,
    "t_max": float,
    "samples": int,
    "t": float,
    "t_star": float,
    "route": str,
    "quantity": str,
    "kind": str,
    "out": str,
    "format": str,
}


def read_config_file(path: str) -> tuple[dict, list[str]]:
    """Parse ``key = value`` lines; ``#`` starts a comment. Returns values and problems."""
    values: dict = {}
    problems: list[str] = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        return values, [f"{path}: cannot read config ({exc.strerror})"]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_").lower()
        if key.startswith("tol."):
            values.setdefault("tol", {})[key[4:].replace("_", "-")] = (value, f"{path}:{lineno}")
            continue
        if key not in _KEYS:
            problems.append(f"{path}:{lineno}: unknown key {key!r}")
            continue
        values[key] = (value, f"{path}:{lineno}")
    return values, problems


@dataclass
class RunConfig:
    profile: str = "de-sitter"
    profile_path: str | None = None
    lambdas: list[float] = field(default_factory=lambda: [3.0])
    ps: list[float] = field(default_factory=lambda: [2.0])
    m: float | None = None
    a: float | None = None
    epsilon: float | None = None
    shape: str = "quadratic"
    cap: float | None = None
    t_min: float = -12.0
    t_max: float = 12.0
    samples: int = 25
    t: float | None = None
    t_star: float | None = None
    route: str = "auto"
    quantity: str = "polarized"
    kind: str = "mass"
    out: str | None = None
    format: str | None = None
    tolerances: dict = field(default_factory=dict)

    @property
    def Lambda(self) -> float:
        return self.lambdas[0]

    def t_grid(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.samples)

    def profile_for(self, Lambda: float):
        kind = self.profile
        if kind == "de-sitter":
            return make_profile({"kind": "de_sitter", "Lambda": Lambda})
        if kind == "model":
            return model_profile(Lambda)
        if kind == "sds":
            return make_profile({"kind": "schwarzschild_de_sitter_capped", "Lambda": Lambda, "m": self.m})
        if kind == "constant-curvature":
            return make_profile({"kind": "constant_curvature", "a": self.a, "cap": self.cap})
        if kind == "perturbed":
            return make_profile({"kind": "perturbed", "Lambda": Lambda, "epsilon": self.epsilon,
                                 "shape": self.shape, "cap": self.cap})
        return make_profile({"kind": "tabulated", "path": self.profile_path})


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge config file and flags, then validate; raises ConfigError listing every problem."""
    raw: dict = {}
    problems: list[str] = []
    if getattr(args, "config", None):
        raw, problems = read_config_file(args.config)
    for key in _KEYS:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = (value, f"--{key.replace('_', '-')}")
    for item in getattr(args, "tol", None) or []:
        if "=" not in item:
            problems.append(f"--tol: expected id=value, got {item!r}")
            continue
        cid, value = item.split("=", 1)
        raw.setdefault("tol", {})[cid.strip()] = (value.strip(), "--tol")

    cfg = RunConfig()
    for key, parse in _KEYS.items():
        if key not in raw:
            continue
        value, origin = raw[key]
        try:
            parsed = parse(value) if isinstance(value, str) else value
        except (TypeError, ValueError):
            problems.append(f"{origin}: invalid value {value!r} for {key}")
            continue
        target = {"lambda": "lambdas", "p": "ps"}.get(key, key)
        setattr(cfg, target, parsed)
    for cid, (value, origin) in raw.get("tol", {}).items():
        if cid not in CHECK_IDS:
            problems.append(f"{origin}: unknown check id {cid!r}")
            continue
        try:
            cfg.tolerances[cid] = float(value)
        except ValueError:
            problems.append(f"{origin}: invalid tolerance {value!r} for {cid}")

    problems.extend(_validate(cfg, args.command))
    if problems:
        raise ConfigError(problems)
    return cfg


def _validate(cfg: RunConfig, command: str) -> list[str]:
    problems = []
    if cfg.profile not in PROFILE_KINDS:
        problems.append(f"profile: unknown kind {cfg.profile!r}; choose from {', '.join(PROFILE_KINDS)}")
    if not cfg.ps:
        problems.append("p: at least one value is required")
    for p in cfg.ps:
        if not 1.0 < p < 3.0:
            problems.append(f"p: {p!r} is outside (1, 3)")
    if not cfg.lambdas:
        problems.append("lambda: at least one value is required")
    uses_profile = not (command == "coeffs" or (command == "sweep" and cfg.quantity == "coefficients")
                        or (command == "plot" and cfg.kind != "mass"))
    needs_positive = (command in ("polarized", "one-harmonic")
                      or (command == "sweep" and cfg.quantity in ("polarized", "one-harmonic"))
                      or (command == "plot" and cfg.kind == "p-trend")
                      or (uses_profile and cfg.profile in ("de-sitter", "sds", "perturbed")))
    for L in cfg.lambdas:
        if not math.isfinite(L):
            problems.append(f"lambda: {L!r} is not finite")
        elif needs_positive and not L > 0.0:
            problems.append(f"lambda: {L!r} must be positive for {command} with profile {cfg.profile}")
    if uses_profile and cfg.profile == "sds" and cfg.m is None:
        problems.append("m: required for the sds profile")
    if uses_profile and cfg.profile == "constant-curvature" and cfg.a is None:
        problems.append("a: required for the constant-curvature profile")
    if uses_profile and cfg.profile == "perturbed" and cfg.epsilon is None:
        problems.append("epsilon: required for the perturbed profile")
    if uses_profile and cfg.profile == "tabulated" and not cfg.profile_path:
        problems.append("profile-path: required for the tabulated profile")
    if uses_profile and cfg.profile == "sds" and not (
            command == "one-harmonic" or (command == "sweep" and cfg.quantity == "one-harmonic")):
        problems.append("profile: sds has no smooth pole and is only accepted by one-harmonic")
    if not cfg.t_min < cfg.t_max:
        problems.append(f"t-min/t-max: need t-min < t-max, got {cfg.t_min} and {cfg.t_max}")
    if cfg.samples < 1:
        problems.append(f"samples: must be positive, got {cfg.samples}")
    if cfg.route not in ("auto", "closed-form", "ode"):
        problems.append(f"route: unknown route {cfg.route!r}")
    if cfg.quantity not in ("polarized", "coefficients", "one-harmonic"):
        problems.append(f"quantity: unknown quantity {cfg.quantity!r}")
    if cfg.kind not in ("mass", "coefficients", "p-trend"):
        problems.append(f"kind: unknown plot kind {cfg.kind!r}")
    if command == "plot" and cfg.kind == "p-trend" and cfg.t is None:
        problems.append("t: required for the p-trend plot")
    if cfg.format is not None and cfg.format not in ("csv", "json"):
        problems.append(f"format: unknown format {cfg.format!r}")
    return problems


# -------------------------------------------------------------------- output

class Emitter:
    """Writes named outputs to a directory, or to stdout when none is set."""

    def __init__(self, out: str | None, stream=None):
        self.out = Path(out) if out else None
        self.stream = stream or sys.stdout
        if self.out:
            self.out.mkdir(parents=True, exist_ok=True)

    def emit(self, name: str, text: str):
        if self.out:
            (self.out / name).write_text(text)
        else:
            self.stream.write(text)
            if not text.endswith("\n"):
                self.stream.write("\n")


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _tag(value: float) -> str:
    return repr(float(value)).replace(".", "_").replace("-", "m")


def _threads(n_tasks: int) -> int:
    cap = os.environ.get("CURVMASS_THREADS")
    try:
        limit = int(cap) if cap else os.cpu_count() or 1
    except ValueError:
        limit = 1
    return max(1, min(limit, n_tasks))


# ------------------------------------------------------------------ commands

def _coefficient_source(cfg: RunConfig, params: ModelParams):
    if cfg.route == "ode":
        return coefficients_ode(params, -20.0, cfg.t_max + 1.0)
    if cfg.route == "closed-form":
        return coefficients_closed_form(params)
    return coefficients(params, t_end=cfg.t_max + 1.0)


def cmd_coeffs(cfg: RunConfig, em: Emitter) -> int:
    for L in cfg.lambdas:
        for p in cfg.ps:
            sc = _coefficient_source(cfg, ModelParams(L, p))
            rows = []
            for t in cfg.t_grid():
                st = sc.state(float(t))
                rows.append((st.t, st.alpha, st.mu, st.lam, st.exp_lambda))
            em.emit(f"coeffs_L{_tag(L)}_p{_tag(p)}.csv", _csv_text(COEFF_CSV_COLUMNS, rows))
    return EXIT_OK


def cmd_mass(cfg: RunConfig, em: Emitter) -> int:
    for L in cfg.lambdas:
        profile = cfg.profile_for(L)
        for p in cfg.ps:
            mp = mass_profile(profile, ModelParams(L, p), cfg.t_grid())
            em.emit(f"mass_L{_tag(L)}_p{_tag(p)}.csv", mp.to_csv())
    return EXIT_OK


def _polarized_record(cfg: RunConfig, L: float, p: float) -> dict:
    br = polarized_mass(cfg.profile_for(L), ModelParams(L, p))
    return {"Lambda": L, "p": p, "profile": cfg.profile, **br.as_dict()}


def cmd_polarized(cfg: RunConfig, em: Emitter) -> int:
    records = [_polarized_record(cfg, L, p) for L in cfg.lambdas for p in cfg.ps]
    em.emit("polarized.json", _json_text(records[0] if len(records) == 1 else records))
    return EXIT_OK


def _t_star(cfg: RunConfig, L: float) -> float:
    """Level at which the outer boundary is reached: ``2 log`` of its radius."""
    if cfg.t_star is not None:
        return cfg.t_star
    if cfg.profile == "sds":
        return 2.0 * math.log(sds_horizon_radii(L, cfg.m)[1])
    profile = cfg.profile_for(L)
    return 2.0 * math.log(profile.r_max) if math.isfinite(profile.r_max) else math.inf


def cmd_one_harmonic(cfg: RunConfig, em: Emitter) -> int:
    records = []
    for L in cfg.lambdas:
        t_star = _t_star(cfg, L)
        res = one_harmonic_mass(L, t_star)
        records.append({"Lambda": L, "profile": cfg.profile, "T_star": t_star, "T": res.T,
                        "T_Lambda": res.T_Lambda, "value": res.value, "quadrature": res.quadrature,
                        "derivation": ONE_HARMONIC_DERIVATION})
    em.emit("one_harmonic.json", _json_text(records[0] if len(records) == 1 else records))
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, em: Emitter) -> int:
    tasks = [(L, p) for L in cfg.lambdas for p in cfg.ps]

    def work(task):
        L, p = task
        if cfg.quantity == "polarized":
            rec = _polarized_record(cfg, L, p)
            return [rec[c] for c in POLARIZED_COLUMNS]
        if cfg.quantity == "one-harmonic":
            res = one_harmonic_mass(L, _t_star(cfg, L))
            return [L, p, res.value, res.quadrature]
        t = cfg.t if cfg.t is not None else 0.0
        st = _coefficient_source(cfg, ModelParams(L, p)).state(t)
        return [L, p, t, st.alpha, st.mu, st.lam, st.exp_lambda]

    with ThreadPoolExecutor(max_workers=_threads(len(tasks))) as pool:
        rows = list(pool.map(work, tasks))
    columns = {
        "polarized": POLARIZED_COLUMNS,
        "one-harmonic": ("Lambda", "p", "value", "quadrature"),
        "coefficients": ("Lambda", "p", "t", "alpha", "mu", "lambda", "exp_lambda"),
    }[cfg.quantity]
    if cfg.format == "json":
        em.emit("sweep.json", _json_text([dict(zip(columns, r)) for r in rows]))
    else:
        em.emit("sweep.csv", _csv_text(columns, rows))
    return EXIT_OK


def cmd_verify(cfg: RunConfig, em: Emitter, selection) -> int:
    report = run_suite(selection, cfg.tolerances)
    em.emit("verify.json", report.to_json() + "\n")
    return EXIT_OK if report.all_passed else EXIT_CHECK_FAILED


def cmd_plot(cfg: RunConfig, em: Emitter) -> int:
    L = cfg.Lambda
    if cfg.kind == "mass":
        profile = cfg.profile_for(L)
        series = []
        for p in cfg.ps:
            mp = mass_profile(profile, ModelParams(L, p), cfg.t_grid())
            series.append((f"p = {p:g}", list(mp.t_grid), list(mp.masses)))
        svg = line_chart(series, f"m(t), {cfg.profile}, Lambda = {L:g}", "t", "m(t)")
        em.emit("mass.svg", svg)
    elif cfg.kind == "coefficients":
        series = []
        for p in cfg.ps:
            sc = _coefficient_source(cfg, ModelParams(L, p))
            ts = list(cfg.t_grid())
            states = [sc.state(float(t)) for t in ts]
            series.append((f"alpha, p = {p:g}", ts, [s.alpha for s in states]))
            series.append((f"mu, p = {p:g}", ts, [s.mu for s in states]))
        em.emit("coefficients.svg", line_chart(series, f"structural coefficients, Lambda = {L:g}", "t", "value"))
    else:
        ps = sorted(cfg.ps, reverse=True)
        rows = p_limit_profiles(L, cfg.t, ps)
        series = [
            ("e^lambda", ps, [r.exp_lambda for r in rows]),
            ("limit e^lambda", ps, [r.exp_lambda_target for r in rows]),
            ("mu e^lambda", ps, [r.mu_exp_lambda for r in rows]),
            ("limit mu e^lambda", ps, [r.mu_exp_lambda_target for r in rows]),
        ]
        em.emit("p_trend.svg", line_chart(series, f"p -> 1 at t = {cfg.t:g}, Lambda = {L:g}", "p", "value"))
    return EXIT_OK


# ------------------------------------------------------------------- parser

def _add_common(sp: argparse.ArgumentParser):
    sp.add_argument("--config", help="key = value settings file; flags override it")
    sp.add_argument("--profile", help=f"one of {', '.join(PROFILE_KINDS)}")
    sp.add_argument("--profile-path", dest="profile_path", help="CSV with header r,phi for --profile tabulated")
    sp.add_argument("--lambda", dest="lambda", help="cosmological constant(s), comma separated")
    sp.add_argument("--p", dest="p", help="exponent(s) in (1, 3), comma separated")
    sp.add_argument("--m", type=str, help="Schwarzschild-de Sitter mass parameter")
    sp.add_argument("--a", type=str, help="constant-curvature coefficient: phi = 1 - a r^2")
    sp.add_argument("--epsilon", type=str, help="perturbation amplitude")
    sp.add_argument("--shape", help="perturbation shape: quadratic or bump")
    sp.add_argument("--cap", type=str, help="wall radius cutting the profile short")
    sp.add_argument("--t-min", dest="t_min", type=str)
    sp.add_argument("--t-max", dest="t_max", type=str)
    sp.add_argument("--samples", type=str, help="number of t samples")
    sp.add_argument("--out", help="output directory (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvmass", description="Masses with a cosmological constant on radial profiles.")
    parser.add_argument("--version", action="version", version=f"curvmass {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("coeffs", help="structural coefficient tables (CSV)")
    _add_common(sp)
    sp.add_argument("--route", help="auto, closed-form or ode")

    sp = sub.add_parser("mass", help="monotone quantity along the level sets (CSV)")
    _add_common(sp)

    sp = sub.add_parser("polarized", help="polarized mass breakdown (JSON)")
    _add_common(sp)

    sp = sub.add_parser("one-harmonic", help="1-harmonic mass (JSON)")
    _add_common(sp)
    sp.add_argument("--t-star", dest="t_star", type=str, help="level at which the boundary is reached")

    sp = sub.add_parser("sweep", help="cartesian sweep over p and Lambda")
    _add_common(sp)
    sp.add_argument("--quantity", help="polarized, coefficients or one-harmonic")
    sp.add_argument("--t", type=str, help="level for --quantity coefficients")
    sp.add_argument("--route", help="auto, closed-form or ode")
    sp.add_argument("--format", help="csv or json")
    sp.add_argument("--t-star", dest="t_star", type=str, help="boundary level for --quantity one-harmonic")

    sp = sub.add_parser("verify", help="run the acceptance checks (JSON report)")
    sp.add_argument("--config", help="key = value settings file with tol.<check-id> entries")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--all", action="store_true", help="run every check (default)")
    group.add_argument("--check", action="append", help=f"check id, repeatable: {', '.join(CHECK_IDS)}")
    sp.add_argument("--tol", action="append", help="override a tolerance: id=value")
    sp.add_argument("--out", help="output directory (default: stdout)")

    sp = sub.add_parser("plot", help="SVG line charts")
    _add_common(sp)
    sp.add_argument("--kind", help="mass, coefficients or p-trend")
    sp.add_argument("--t", type=str, help="level for the p-trend plot")
    sp.add_argument("--route", help="auto, closed-form or ode")
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=stderr)
        return EXIT_CONFIG
    em = Emitter(cfg.out, stdout)
    try:
        if args.command == "coeffs":
            return cmd_coeffs(cfg, em)
        if args.command == "mass":
            return cmd_mass(cfg, em)
        if args.command == "polarized":
            return cmd_polarized(cfg, em)
        if args.command == "one-harmonic":
            return cmd_one_harmonic(cfg, em)
        if args.command == "sweep":
            return cmd_sweep(cfg, em)
        if args.command == "verify":
            return cmd_verify(cfg, em, args.check if args.check else "all")
        return cmd_plot(cfg, em)
    except UnknownCheckError as exc:
        print(f"config error: {exc.args[0]}", file=stderr)
        return EXIT_CONFIG
    except (ProfileError, ArithmeticError, ValueError, RuntimeError, OSError) as exc:
        print(f"computation error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_COMPUTE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
