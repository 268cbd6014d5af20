"""Command-line driver and sweep runner.

Every subcommand builds a config dictionary that goes through
``parse_config`` and ``run``; ``sweep --config`` reads the same dictionary
from a JSON file.  Any parameter given as a list is swept: cells are the
Cartesian product of the list-valued parameters in key order, and cell
``i`` runs with seed ``derive_seed(seed, i)`` (SplitMix64 fold, see
``netvuln._rng``).
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from ._rng import derive_seed
from .errors import ConfigError, NetvulnError, NumericalError

OPS = ("spectral", "pc", "giant", "ibp", "degrees", "distances", "cm", "irg", "generate")

FIELD_RULES = {
    "eps": (lambda v: 0 < v < 1, "eps must lie in (0,1)"),
    "gamma": (lambda v: 0 <= v < 1, "gamma must lie in [0,1)"),
    "beta": (lambda v: v > 0, "beta must be positive"),
    "p": (lambda v: 0 <= v <= 1, "p must lie in [0,1]"),
    "n": (lambda v: v >= 1, "n must be >= 1"),
    "replicas": (lambda v: v >= 1, "replicas must be >= 1"),
    "grid": (lambda v: 8 <= v <= 4096, "grid must lie in [8, 4096]"),
    "k_max": (lambda v: v >= 1, "k_max must be >= 1"),
    "pairs": (lambda v: v >= 1, "pairs must be >= 1"),
    "delta": (lambda v: 0 < v < 1, "delta must lie in (0,1)"),
    "tau_g": (lambda v: 0 < v < 0.5, "tau_g must lie in (0,0.5)"),
    "pop_cap": (lambda v: v >= 1, "pop_cap must be >= 1"),
    "gen_cap": (lambda v: v >= 0, "gen_cap must be >= 0"),
}
INT_FIELDS = {"n", "replicas", "grid", "k_max", "pairs", "pop_cap", "gen_cap"}

REQUIRED = {
    "spectral": ["eps", "gamma", "beta"],
    "pc": ["method", "eps", "gamma", "beta"],
    "giant": ["gamma", "beta", "n", "eps", "p"],
    "ibp": ["eps", "gamma", "beta", "p"],
    "degrees": ["eps", "gamma", "beta"],
    "distances": ["gamma", "beta", "n", "eps"],
    "cm": ["degree_law", "eps"],
    "irg": ["kernel", "gamma", "eps"],
    "generate": ["gamma", "beta", "n"],
}

DEFAULTS = {
    "spectral": {"grid": 1024, "simple_operator": False},
    "pc": {},
    "giant": {"replicas": 4},
    "ibp": {"replicas": 10**4, "pop_cap": 1000, "gen_cap": 200},
    "degrees": {"k_max": 100},
    "distances": {"pairs": 1000, "delta": 0.2, "p": 1.0},
    "cm": {},
    "irg": {"grid": 1024},
    "generate": {},
}

PC_DEFAULTS = {
    "spectral": {"grid": 1024},
    "mc": {"n_schedule": [10**4, 10**5], "replicas": 4, "tau_g": 0.01},
    "ibp": {"replicas": 2000, "tau_g": 0.01, "pop_cap": 1000, "gen_cap": 200},
}

SWEEPABLE_LISTS = {"n_schedule"}  # list-valued parameters that are not sweep axes


@dataclass
class ExperimentConfig:
    op: str
    params: dict
    seed: int = 0
    out: str | None = None
    format: str = "jsonl"
    timing: bool = False
    axes: list = field(default_factory=list)

    def cells(self):
        """Parameter dictionaries of the Cartesian sweep, in cell order."""
        if not self.axes:
            yield dict(self.params)
            return
        values = [self.params[a] for a in self.axes]
        for combo in itertools.product(*values):
            cell = dict(self.params)
            cell.update(zip(self.axes, combo))
            yield cell


def _check_value(name, value, path):
    if name in INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(path, f"{name} must be an integer, got {value!r}")
        value = int(value)
    elif name in FIELD_RULES:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"{name} must be a number, got {value!r}")
        value = float(value)
    if name in FIELD_RULES:
        ok, msg = FIELD_RULES[name]
        if not ok(value):
            raise ConfigError(path, f"{msg}, got {value!r}")
    return value


def parse_config(source) -> ExperimentConfig:
    """Validate a config given as a dict, a JSON string or a path to a JSON file."""
    if isinstance(source, str):
        text = source
        if not source.lstrip().startswith("{"):
            try:
                with open(source) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError("config", f"cannot read {source}: {exc}") from None
        try:
            source = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
    if not isinstance(source, dict):
        raise ConfigError("config", "config must be a JSON object")
    raw = dict(source)
    op = raw.pop("op", None)
    if op not in OPS:
        raise ConfigError("op", f"op must be one of {', '.join(OPS)}, got {op!r}")
    seed = raw.pop("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed", f"seed must be a non-negative integer, got {seed!r}")
    out = raw.pop("out", None)
    fmt = raw.pop("format", "jsonl")
    if fmt not in ("jsonl", "csv"):
        raise ConfigError("format", f"format must be jsonl or csv, got {fmt!r}")
    timing = bool(raw.pop("timing", False))
    params = dict(DEFAULTS[op])
    if op == "pc":
        methods = raw.get("method")
        for m in methods if isinstance(methods, list) else [methods]:
            params.update(PC_DEFAULTS.get(m, {}))
    params.update(raw)
    if "rule" in params and isinstance(params["rule"], dict):
        rule = params.pop("rule")
        for k in ("gamma", "beta"):
            if k in rule:
                params.setdefault(k, rule[k])
        if rule.get("kind", "affine") == "affine" and "beta" not in rule and "beta" not in params:
            raise ConfigError("rule.beta", "missing beta for affine rule")
    for name in REQUIRED[op]:
        if name not in params or params[name] is None:
            raise ConfigError(name, f"missing required field {name}")
    axes = []
    for name, value in params.items():
        if isinstance(value, list) and name not in SWEEPABLE_LISTS:
            if not value:
                raise ConfigError(name, "sweep list must not be empty")
            params[name] = [_check_value(name, v, f"{name}[{i}]") for i, v in enumerate(value)]
            axes.append(name)
        elif name in FIELD_RULES and value is not None:
            params[name] = _check_value(name, value, name)
    if op == "pc":
        methods = params["method"] if isinstance(params["method"], list) else [params["method"]]
        for m in methods:
            if m not in ("spectral", "mc", "ibp"):
                raise ConfigError("method", f"method must be spectral, mc or ibp, got {m!r}")
        sched = params.get("n_schedule", [1])
        if not isinstance(sched, list) or not sched or any(not isinstance(x, int) or x < 1 for x in sched):
            raise ConfigError("n_schedule", "n_schedule must be a list of positive integers")
        if any(b <= a for a, b in zip(sched, sched[1:])):
            raise ConfigError("n_schedule", "n_schedule must be strictly increasing")
    if op == "irg":
        kernels = params["kernel"] if isinstance(params["kernel"], list) else [params["kernel"]]
        for k in kernels:
            if k not in ("cl", "pa"):
                raise ConfigError("kernel", f"kernel must be cl or pa, got {k!r}")
    if op == "cm":
        from .alt_models import DegreeLaw
        law = params["degree_law"]
        if isinstance(law, str):
            try:
                law = json.loads(law)
            except json.JSONDecodeError as exc:
                raise ConfigError("degree_law", f"invalid JSON: {exc}") from None
        try:
            DegreeLaw.from_dict(law)
        except (NetvulnError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError("degree_law", str(exc)) from None
        params["degree_law"] = law
    return ExperimentConfig(op, params, seed, out, fmt, timing, axes)


# -- dispatch ---------------------------------------------------------------

def _rule(c):
    from .rules import AttachmentRule
    return AttachmentRule.affine(c["gamma"], c["beta"])


def _op_spectral(c, seed):
    from .operator import assemble, assemble_companion, spectral_radius
    if c.get("simple_operator"):
        grid = assemble_companion(c["eps"], c["grid"])
    else:
        grid = assemble(c["eps"], c["gamma"], c["beta"], c["grid"])
    res = spectral_radius(grid)
    vals = res.to_dict()
    vals["pc_spectral"] = min(1.0 / res.rho, 1.0)
    return vals, None


def _op_pc(c, seed):
    method = c["method"]
    if method == "spectral":
        from .operator import pc_spectral
        return {"pc": pc_spectral(c["eps"], c["gamma"], c["beta"], c["grid"])}, None
    if method == "mc":
        from .components import pc_bisect
        est = pc_bisect(_rule(c), c["n_schedule"], c["eps"], c["replicas"], c["tau_g"], seed)
        return {"p_lo": est.p_lo, "p_hi": est.p_hi, "pc": 0.5 * (est.p_lo + est.p_hi), "note": est.note}, None
    from .ibp import survival_probability
    lo, hi = 0.0, 1.0
    rule = _rule(c)
    caps = (c["pop_cap"], c["gen_cap"])
    # smallest p with a positive survival estimate at the tau_g level
    if survival_probability(c["eps"], rule, 1.0, c["replicas"], caps, seed).zeta_lower <= c["tau_g"]:
        return {"p_lo": 1.0, "p_hi": 1.0, "pc": 1.0, "note": "no survival at p=1"}, None
    while hi - lo > 2.0**-10:
        mid = 0.5 * (lo + hi)
        if survival_probability(c["eps"], rule, mid, c["replicas"], caps, seed).zeta_lower > c["tau_g"]:
            hi = mid
        else:
            lo = mid
    return {"p_lo": lo, "p_hi": hi, "pc": 0.5 * (lo + hi), "note": ""}, None


def _op_giant(c, seed):
    from .components import giant_fraction
    mean, se = giant_fraction(_rule(c), c["n"], c["eps"], c["p"], c["replicas"], seed)
    return {"mean": mean}, se


def _op_ibp(c, seed):
    from .ibp import survival_probability
    est = survival_probability(c["eps"], _rule(c), c["p"], c["replicas"], (c["pop_cap"], c["gen_cap"]), seed)
    return est.to_dict(), est.se


def _op_degrees(c, seed):
    from .degrees import empirical_indegree, max_indegree_constant, mu_damaged, total_variation
    dist = mu_damaged(c["eps"], c["gamma"], c["beta"], c["k_max"])
    vals = {"mu_tail": dist.tail.tolist(), "max_indegree_constant": max_indegree_constant(c["eps"], c["gamma"])}
    if c.get("n"):
        from .pa_graph import damage, generate
        g = generate(_rule(c), c["n"], seed)
        x = empirical_indegree(g, damage(g, c["eps"]))
        vals["x_empirical"] = x.tolist()
        vals["tv_distance"] = total_variation(dist, x)
    return vals, None


def _op_distances(c, seed):
    from .components import UNREACHABLE, distance_bound_violation, sample_distances
    from .operator import pc_spectral
    from .pa_graph import damage, generate, percolate
    g = generate(_rule(c), c["n"], seed)
    mask = damage(g, c["eps"])
    if c["p"] < 1:
        mask = percolate(mask, c["p"], derive_seed(seed, 1))
    ds = sample_distances(g, mask, c["pairs"], seed)
    pc = pc_spectral(c["eps"], c["gamma"], c["beta"])
    reach = [d for u, v, d in ds if d is not UNREACHABLE and u != v]
    vals = {"pc_spectral": pc, "reachable_pairs": len(reach),
            "mean_distance": (sum(reach) / len(reach)) if reach else None,
            "violation_fraction": distance_bound_violation(ds, c["n"], pc, c["delta"]) if pc < 1 else None}
    return vals, None


def _op_cm(c, seed):
    from .alt_models import DegreeLaw, cm_pc
    return {"pc": cm_pc(DegreeLaw.from_dict(c["degree_law"]), c["eps"])}, None


def _op_irg(c, seed):
    from .alt_models import Kernel, cl_pc_closed, irg_pc
    vals = {"pc": irg_pc(Kernel(c["kernel"], c["gamma"]), c["eps"], c["grid"])}
    if c["kernel"] == "cl":
        vals["pc_closed"] = cl_pc_closed(c["eps"], c["gamma"])
    return vals, None


def _op_generate(c, seed):
    from .pa_graph import generate
    g = generate(_rule(c), c["n"], seed)
    return {"edges": g.num_edges, "max_indegree": int(g.indegree.max())}, None


DISPATCH = {"spectral": _op_spectral, "pc": _op_pc, "giant": _op_giant, "ibp": _op_ibp,
            "degrees": _op_degrees, "distances": _op_distances, "cm": _op_cm, "irg": _op_irg,
            "generate": _op_generate}


def run(config: ExperimentConfig) -> list:
    """Execute every cell; a failing cell yields a record carrying the error."""
    from .records import ResultRecord
    records = []
    for i, cell in enumerate(config.cells()):
        seed = derive_seed(config.seed, i)
        params = {k: v for k, v in cell.items()}
        t0 = time.perf_counter()
        try:
            values, se = DISPATCH[config.op](cell, seed)
            err = None
        except (NetvulnError, ValueError, ArithmeticError) as exc:
            values, se = {}, None
            err = {"type": type(exc).__name__, "message": str(exc),
                   "numerical": isinstance(exc, NumericalError)}
        wall = time.perf_counter() - t0 if config.timing else None
        records.append(ResultRecord(config.op, params, values, seed, se, err, wall,
                                    extra={"master_seed": config.seed, "cell": i}))
    return records


# -- argparse front end -----------------------------------------------------

def _add_common(p):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["jsonl", "csv"], default=None)
    p.add_argument("--timing", action="store_true", default=None)


def _add_model(p, beta=True):
    p.add_argument("--gamma", type=float)
    if beta:
        p.add_argument("--beta", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netvuln", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    _add_common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a preferential-attachment edge list")
    _add_model(p)
    p.add_argument("--rule-json", help="rule as JSON (overrides --gamma/--beta)")
    p.add_argument("--n", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("damage", help="mask removing the oldest floor(eps n) vertices")
    p.add_argument("--edges", required=True)
    p.add_argument("--eps", type=float, required=True)
    _add_common(p)

    p = sub.add_parser("percolate", help="vertex percolation mask")
    p.add_argument("--edges", required=True)
    p.add_argument("--mask", default=None)
    p.add_argument("--p", type=float, required=True)
    _add_common(p)

    p = sub.add_parser("giant", help="normalised largest component")
    _add_model(p)
    for name, typ in (("--n", int), ("--eps", float), ("--p", float), ("--replicas", int)):
        p.add_argument(name, type=typ)
    _add_common(p)

    p = sub.add_parser("pc", help="critical retention probability")
    p.add_argument("--method", choices=["spectral", "mc", "ibp"], default="spectral")
    _add_model(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--n-schedule", type=int, nargs="+")
    p.add_argument("--replicas", type=int)
    p.add_argument("--tau-g", type=float)
    _add_common(p)

    p = sub.add_parser("spectral", help="spectral radius of the mean-offspring operator")
    _add_model(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--simple-operator", action="store_true", default=None)
    _add_common(p)

    p = sub.add_parser("degrees", help="limiting indegree law, optionally against a simulation")
    _add_model(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--k-max", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--csv", default=None, help="write k, mu_theory, x_empirical, abs_diff here (needs --n)")
    _add_common(p)

    p = sub.add_parser("distances", help="sampled distances against the logarithmic lower bound")
    _add_model(p)
    for name, typ in (("--n", int), ("--eps", float), ("--p", float), ("--pairs", int), ("--delta", float)):
        p.add_argument(name, type=typ)
    _add_common(p)

    p = sub.add_parser("ibp", help="survival probability of the branching process")
    _add_model(p)
    for name, typ in (("--eps", float), ("--p", float), ("--replicas", int), ("--pop-cap", int),
                      ("--gen-cap", int)):
        p.add_argument(name, type=typ)
    _add_common(p)

    p = sub.add_parser("cm", help="configuration-model threshold")
    p.add_argument("--degree-law", required=True, help="JSON object or path to one")
    p.add_argument("--eps", type=float)
    _add_common(p)

    p = sub.add_parser("irg", help="inhomogeneous random graph threshold")
    p.add_argument("--kernel", choices=["cl", "pa"], required=True)
    p.add_argument("--gamma", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--grid", type=int)
    _add_common(p)

    p = sub.add_parser("sweep", help="run a JSON experiment config")
    p.add_argument("--config", required=True)
    _add_common(p)
    return parser


_NON_PARAMS = {"command", "seed", "out", "format", "timing", "edges", "mask", "csv", "rule_json", "config"}


def _args_to_config(args) -> dict:
    d = {"op": args.command}
    for k, v in vars(args).items():
        if k in _NON_PARAMS or v is None:
            continue
        d[k] = v
    for k in ("seed", "format", "timing"):
        if getattr(args, k, None) is not None:
            d[k] = getattr(args, k)
    if "degree_law" in d:
        law = d["degree_law"]
        if not law.lstrip().startswith("{"):
            with open(law) as fh:
                law = fh.read()
        d["degree_law"] = law
    return d


def _write(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _file_commands(args) -> int:
    from .pa_graph import damage, percolate, read_edges, read_mask, write_edges, write_mask
    from .rules import AttachmentRule
    seed = args.seed or 0
    if args.command == "generate":
        from .pa_graph import generate
        if args.rule_json:
            rule = AttachmentRule.from_json(args.rule_json)
        else:
            if args.gamma is None or args.beta is None:
                raise ConfigError("beta" if args.gamma is not None else "gamma", "missing rule parameter")
            parse_config({"op": "generate", "gamma": args.gamma, "beta": args.beta, "n": args.n})
            rule = AttachmentRule.affine(args.gamma, args.beta)
        g = generate(rule, args.n, seed)
        write_edges(g, args.out or "/dev/stdout")
        return 0
    graph = read_edges(args.edges)
    if args.command == "damage":
        mask = damage(graph, args.eps)
    else:
        base = read_mask(args.mask) if args.mask else graph
        mask = percolate(base, args.p, seed)
    write_mask(mask, args.out or "/dev/stdout")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("generate", "damage", "percolate"):
            return _file_commands(args)
        if args.command == "sweep":
            cfg = parse_config(args.config)
            if args.seed is not None:
                cfg.seed = args.seed
            if args.format:
                cfg.format = args.format
            if args.timing:
                cfg.timing = True
        else:
            cfg = parse_config(_args_to_config(args))
        out = args.out or cfg.out
        records = run(cfg)
        if args.command == "degrees" and getattr(args, "csv", None) and records and records[0].ok:
            _degree_csv(cfg, records[0], args.csv)
    except ConfigError as exc:
        print(f"config error: {exc.field}: {exc.message}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    from .records import emit
    _write(emit(records, cfg.format), out)
    if any(r.error and r.error.get("numerical") for r in records):
        return 3
    return 0


def _degree_csv(cfg, record, path):
    import numpy as np
    from .degrees import DegreeDistribution, write_degree_csv
    c = record.params
    dist = DegreeDistribution(np.asarray(record.values["mu_tail"]), c["gamma"], c["beta"], c["eps"])
    write_degree_csv(path, dist, np.asarray(record.values.get("x_empirical", [])))


if __name__ == "__main__":
    sys.exit(main())
