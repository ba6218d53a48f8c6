"""henonlab command line.

    henonlab exponents --N 11
    henonlab solve --config ref.json --kappa 1e-3 --out run1
    henonlab sweep --config ref.json --kappas 1,2,4,8 --jobs 2

Exit codes: 0 ok, 1 bad config or arguments, 2 numerical failure,
3 the solve diverged (``solve`` only).
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .errors import (
    BracketError,
    DegenerateLinearizationError,
    DomainError,
    EigenConvergenceError,
    NotContractiveError,
    PotentialDivergenceError,
)
from .exponents import check_admissible, check_uniqueness_range, exponent_summary, nu_window, dual_window
from .io import dumps, write_json, write_radial_csv, write_trace_csv, read_radial_csv
from .kelvin import duality_residual, intertwining_mismatch, kelvin_transform, kelvin_transform_raw
from .picard import SolverOptions, Status, schedule_for, solve_minimal
from .potential import potential_of_measure
from .radial import (
    PowerEnvelope,
    ProblemSpec,
    SourceNormParams,
    SphereShell,
    UniformBall,
    WeightParams,
    make_grid,
    weighted_norm,
)
from .spectrum import linearized_eigenvalue, stability_quotient
from .threshold import ThresholdOptions, bisect_threshold, classify_many, trace_row

OK, CONFIG_ERROR, NUMERICAL_FAILURE, DIVERGED = 0, 1, 2, 3


class ConfigError(Exception):
    pass


DEFAULTS = {
    "problem": {
        "N": 3,
        "p": 5.0,
        "alpha": {"A0": 1.0, "a": 0.0, "Ainf": 1.0, "b": 0.0},
        "mu": {"kind": "ball", "radius": 1.0, "mass": 1.0},
    },
    # null means the natural parameters r=inf, c=0, d=-(N-2)
    "norms": None,
    "grid": {"r_max": 1.0e4, "n": 1025, "kelvin_symmetric": True},
    "solver": {"tol": 1e-10, "max_iter": 10000, "blowup_cap": 1e8},
    "threshold": {"rel_tol": 1e-3, "budget": 64},
    "output": {"directory": "henonlab-out", "formats": ["json", "csv"]},
}

# flag dest -> (section path, key)
OVERRIDES = {
    "N": (("problem",), "N"),
    "p": (("problem",), "p"),
    "A0": (("problem", "alpha"), "A0"),
    "a": (("problem", "alpha"), "a"),
    "Ainf": (("problem", "alpha"), "Ainf"),
    "b": (("problem", "alpha"), "b"),
    "mu_kind": (("problem", "mu"), "kind"),
    "mu_radius": (("problem", "mu"), "radius"),
    "mu_mass": (("problem", "mu"), "mass"),
    "r": (("norms",), "r"),
    "c": (("norms",), "c"),
    "d": (("norms",), "d"),
    "r_max": (("grid",), "r_max"),
    "n": (("grid",), "n"),
    "tol": (("solver",), "tol"),
    "max_iter": (("solver",), "max_iter"),
    "blowup_cap": (("solver",), "blowup_cap"),
    "rel_tol": (("threshold",), "rel_tol"),
    "budget": (("threshold",), "budget"),
    "out": (("output",), "directory"),
}


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _num(text):
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _kappa_list(text):
    try:
        out = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad kappa list: {text!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty kappa list")
    return out


def build_parser():
    ap = Parser(prog="henonlab", description="radial lab for -Delta u = alpha u^p + kappa mu")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=Parser)

    def common(sp, kappa=False):
        sp.add_argument("--config", help="JSON run config")
        g = sp.add_argument_group("problem")
        g.add_argument("--N", type=int)
        g.add_argument("--p", type=_num)
        g.add_argument("--A0", type=_num)
        g.add_argument("--a", type=_num)
        g.add_argument("--Ainf", type=_num)
        g.add_argument("--b", type=_num)
        g.add_argument("--mu-kind", choices=["ball", "shell"])
        g.add_argument("--mu-radius", type=_num)
        g.add_argument("--mu-mass", type=_num)
        g.add_argument("--r", type=_num)
        g.add_argument("--c", type=_num)
        g.add_argument("--d", type=_num)
        g = sp.add_argument_group("numerics")
        g.add_argument("--r-max", type=_num)
        g.add_argument("--n", type=int)
        g.add_argument("--tol", type=_num)
        g.add_argument("--max-iter", type=int)
        g.add_argument("--blowup-cap", type=_num)
        g.add_argument("--rel-tol", type=_num)
        g.add_argument("--budget", type=int)
        sp.add_argument("--out", help="output directory")
        if kappa:
            sp.add_argument("--kappa", type=_num, required=True)

    sp = sub.add_parser("exponents", help="critical exponents for N (and a, b)")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--a", type=_num, default=0.0)
    sp.add_argument("--b", type=_num, default=0.0)
    sp.add_argument("--p", type=_num, help="also report the nu windows at this p")

    common(sub.add_parser("admissible", help="check the exponent conditions"))
    common(sub.add_parser("solve", help="minimal solution at one kappa"), kappa=True)
    common(sub.add_parser("threshold", help="bisect for the threshold kappa"))
    common(sub.add_parser("spectrum", help="linearized eigenvalue at one kappa"), kappa=True)
    common(sub.add_parser("kelvin-check", help="involution, intertwining and duality residual"), kappa=True)
    sp = sub.add_parser("norm", help="weighted dyadic norm of Gamma*mu or of a saved profile")
    common(sp)
    sp.add_argument("--input", help="profile CSV (r,value) with its JSON sidecar")
    sp.add_argument("--q", type=_num, default=math.inf)
    sp.add_argument("--beta", type=_num, default=0.0)
    sp.add_argument("--gamma", type=_num)
    sp = sub.add_parser("sweep", help="classify a list of kappas")
    common(sp)
    sp.add_argument("--kappas", type=_kappa_list, required=True)
    sp.add_argument("--jobs", type=int, default=1)
    return ap


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


def _merge(base, extra, where=""):
    for k, v in extra.items():
        if k not in base:
            raise ConfigError(f"unknown config field {where}{k}")
        if isinstance(base[k], dict) and isinstance(v, dict):
            _merge(base[k], v, f"{where}{k}.")
        else:
            base[k] = v


def resolve_config(args):
    cfg = copy.deepcopy(DEFAULTS)
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text())
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}")
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if raw.get("norms") is not None and cfg["norms"] is None:
            cfg["norms"] = {"r": None, "c": None, "d": None}
        _merge(cfg, raw)
    for dest, (path, key) in OVERRIDES.items():
        val = getattr(args, dest, None)
        if val is None:
            continue
        node = cfg
        for part in path:
            if node.get(part) is None:
                node[part] = {"r": None, "c": None, "d": None} if part == "norms" else {}
            node = node[part]
        node[key] = val
    return cfg


def _field(d, key, where, cast=float):
    if key not in d or d[key] is None:
        raise ConfigError(f"missing field {where}.{key}")
    v = d[key]
    if isinstance(v, str) and cast is float:
        v = v.strip().lower()
        v = {"inf": math.inf, "+inf": math.inf, "-inf": -math.inf}.get(v, v)
    try:
        return cast(v)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {where}.{key}: {d[key]!r}")


def build_problem(cfg):
    pr = cfg["problem"]
    al = pr["alpha"]
    mu = pr["mu"]
    try:
        alpha = PowerEnvelope(
            _field(al, "A0", "problem.alpha"),
            _field(al, "a", "problem.alpha"),
            _field(al, "Ainf", "problem.alpha"),
            _field(al, "b", "problem.alpha"),
        )
        kind = mu.get("kind")
        R = _field(mu, "radius", "problem.mu")
        m = _field(mu, "mass", "problem.mu")
        if kind == "ball":
            measure = UniformBall(R, m)
        elif kind == "shell":
            measure = SphereShell(R, m)
        else:
            raise ConfigError(f"bad value for problem.mu.kind: {kind!r} (ball or shell)")
        spec = ProblemSpec(_field(pr, "N", "problem", int), _field(pr, "p", "problem"), alpha, measure)
    except DomainError as e:
        raise ConfigError(f"problem: {e}")
    nm = cfg["norms"]
    if nm is None:
        norms = SourceNormParams(math.inf, 0.0, -(spec.N - 2.0))
    else:
        norms = SourceNormParams(_field(nm, "r", "norms"), _field(nm, "c", "norms"), _field(nm, "d", "norms"))
    return spec, norms


def build_grid(cfg):
    g = cfg["grid"]
    try:
        r_max = _field(g, "r_max", "grid")
        n = _field(g, "n", "grid", int)
        if g.get("kelvin_symmetric", True):
            return make_grid(None, r_max, n, kelvin_symmetric=True)
        return make_grid(1.0 / r_max, r_max, n)
    except DomainError as e:
        raise ConfigError(f"grid: {e}")


def solver_options(cfg):
    s = cfg["solver"]
    return SolverOptions(_field(s, "tol", "solver"), _field(s, "max_iter", "solver", int),
                         _field(s, "blowup_cap", "solver"))


def validated(cfg):
    spec, norms = build_problem(cfg)
    try:
        rep = check_admissible(spec, norms)
    except DomainError as e:
        raise ConfigError(str(e))
    if not rep.admissible:
        raise ConfigError("inadmissible exponents: " + "; ".join(c.text for c in rep.failed()))
    return spec, norms, rep


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _outdir(cfg):
    d = Path(cfg["output"]["directory"])
    d.mkdir(parents=True, exist_ok=True)
    return d


def _manifest(d, argv, command):
    write_json(d / "manifest.json", {
        "command": command,
        "argv": list(argv),
        "version": __version__,
        "backend": _kernels.BACKEND,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    })


def _emit(cfg, argv, command, report, write=True):
    sys.stdout.write(dumps(report))
    if write:
        d = _outdir(cfg)
        if "json" in cfg["output"]["formats"]:
            write_json(d / "report.json", report)
        _manifest(d, argv, command)
        return d
    return None


def cmd_exponents(args, argv):
    try:
        out = exponent_summary(args.N, args.a, args.b)
        if args.p is not None:
            out["p"] = args.p
            out["nu_window(a_-)"] = nu_window(args.N, min(args.a, 0.0), args.p)
            out["nu_window(b)"] = nu_window(args.N, args.b, args.p)
            out["dual_nu_window"] = dual_window(args.N, args.b, args.p)
    except DomainError as e:
        raise ConfigError(str(e))
    sys.stdout.write(dumps(out))
    return OK


def cmd_admissible(args, argv, cfg):
    spec, norms = build_problem(cfg)
    try:
        rep = check_admissible(spec, norms)
    except DomainError as e:
        raise ConfigError(str(e))
    out = {"config": cfg, "admissibility": rep.as_dict(), "uniqueness_range": check_uniqueness_range(spec)}
    if rep.admissible:
        s = schedule_for(spec, norms)
        out["bootstrap"] = {"q": s.q, "r_star": s.r_star, "c_hat": s.c_hat, "d_hat": s.d_hat, "j_star": s.j_star}
    _emit(cfg, argv, "admissible", out, write=args.out is not None)
    return OK if rep.admissible else CONFIG_ERROR


def cmd_solve(args, argv, cfg):
    spec, norms, _ = validated(cfg)
    grid = build_grid(cfg)
    rep = solve_minimal(spec, args.kappa, grid, solver_options(cfg), norms=norms)
    out = {"config": cfg, "kappa": args.kappa, "solve": rep.summary()}
    d = _emit(cfg, argv, "solve", out)
    if rep.status is Status.CONVERGED and "csv" in cfg["output"]["formats"]:
        write_radial_csv(d / "u.csv", rep.u, spec.N)
        write_radial_csv(d / "w.csv", rep.w, spec.N)
    if rep.status is Status.DIVERGED:
        return DIVERGED
    if rep.status is Status.INDETERMINATE:
        return NUMERICAL_FAILURE
    return OK


def cmd_threshold(args, argv, cfg):
    spec, norms, _ = validated(cfg)
    grid = build_grid(cfg)
    t = cfg["threshold"]
    opts = ThresholdOptions(_field(t, "rel_tol", "threshold"), _field(t, "budget", "threshold", int),
                            solver_options(cfg))
    rep = bisect_threshold(spec, grid, opts)
    out = {"config": cfg, "threshold": rep.as_dict()}
    d = _emit(cfg, argv, "threshold", out)
    if "csv" in cfg["output"]["formats"]:
        write_trace_csv(d / "trace.csv", [trace_row(k, c) for k, c in rep.trace])
    return OK if rep.converged else NUMERICAL_FAILURE


def cmd_spectrum(args, argv, cfg):
    spec, norms, _ = validated(cfg)
    grid = build_grid(cfg)
    rep = solve_minimal(spec, args.kappa, grid, solver_options(cfg), norms=norms)
    if rep.status is not Status.CONVERGED:
        _emit(cfg, argv, "spectrum", {"config": cfg, "kappa": args.kappa, "solve": rep.summary()})
        return NUMERICAL_FAILURE
    eig = linearized_eigenvalue(spec, rep.u)
    pot, grad = stability_quotient(spec, rep.u, eig.phi)
    out = {"config": cfg, "kappa": args.kappa, "solve": rep.summary(), "eigen": eig.summary(),
           "stability": {"potential_term": pot, "dirichlet_term": grad}}
    d = _emit(cfg, argv, "spectrum", out)
    if "csv" in cfg["output"]["formats"]:
        write_radial_csv(d / "phi.csv", eig.phi, spec.N)
    return OK


def cmd_kelvin(args, argv, cfg):
    spec, norms, _ = validated(cfg)
    grid = build_grid(cfg)
    if not grid.kelvin_symmetric:
        raise ConfigError("kelvin-check needs grid.kelvin_symmetric = true")
    N = spec.N
    G = potential_of_measure(spec.mu, N, grid)
    twice = kelvin_transform_raw(kelvin_transform_raw(G, N), N)
    out = {
        "config": cfg,
        "kappa": args.kappa,
        "involution_exact": kelvin_transform(kelvin_transform(G, N), N) is G,
        "involution_arith_max_rel": float(np.max(np.abs(twice.values - G.values) / G.values)),
    }
    ind = grid.nodes <= 1.0
    from .radial import RadialFunction

    out["intertwining_ball"] = intertwining_mismatch(RadialFunction(grid, ind.astype(float), 0.0, 0.0), N)
    rep = solve_minimal(spec, args.kappa, grid, solver_options(cfg), norms=norms)
    out["solve"] = rep.summary()
    if rep.status is Status.CONVERGED:
        out["duality_residual"] = duality_residual(spec, args.kappa, rep.u)
        _emit(cfg, argv, "kelvin-check", out)
        return OK
    _emit(cfg, argv, "kelvin-check", out)
    return NUMERICAL_FAILURE


def cmd_norm(args, argv, cfg):
    if args.input:
        try:
            f = read_radial_csv(args.input)
        except (OSError, ValueError, KeyError) as e:
            raise ConfigError(f"cannot read profile: {e}")
        spec, _ = build_problem(cfg)
        N = spec.N
        what = args.input
    else:
        spec, _ = build_problem(cfg)
        N = spec.N
        f = potential_of_measure(spec.mu, N, build_grid(cfg))
        what = "Gamma*mu"
    gamma = -(N - 2.0) if args.gamma is None else args.gamma
    try:
        val = weighted_norm(f, args.q, WeightParams(args.beta, gamma), N)
    except DomainError as e:
        raise ConfigError(str(e))
    out = {"config": cfg, "function": what, "q": args.q, "beta": args.beta, "gamma": gamma, "norm": val}
    _emit(cfg, argv, "norm", out, write=args.out is not None)
    return OK


def cmd_sweep(args, argv, cfg):
    spec, norms, _ = validated(cfg)
    grid = build_grid(cfg)
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    res = classify_many(spec, args.kappas, grid, solver_options(cfg), jobs=args.jobs)
    rows = [trace_row(k, c) for k, c in zip(args.kappas, res)]
    d = _emit(cfg, argv, "sweep", {"config": cfg, "trace": rows})
    write_trace_csv(d / "trace.csv", rows)
    return OK


COMMANDS = {
    "admissible": cmd_admissible,
    "solve": cmd_solve,
    "threshold": cmd_threshold,
    "spectrum": cmd_spectrum,
    "kelvin-check": cmd_kelvin,
    "norm": cmd_norm,
    "sweep": cmd_sweep,
}


def run(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        if args.command == "exponents":
            return cmd_exponents(args, argv)
        cfg = resolve_config(args)
        return COMMANDS[args.command](args, argv, cfg)
    except ConfigError as e:
        print(f"henonlab: error: {e}", file=sys.stderr)
        return CONFIG_ERROR
    except (PotentialDivergenceError, NotContractiveError, DegenerateLinearizationError,
            EigenConvergenceError, BracketError, FloatingPointError) as e:
        print(f"henonlab: numerical failure: {e}", file=sys.stderr)
        return NUMERICAL_FAILURE
    except DomainError as e:
        print(f"henonlab: error: {e}", file=sys.stderr)
        return CONFIG_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
