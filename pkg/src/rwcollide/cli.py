"""``rwcollide`` command line: build chains, analyze them, estimate collisions, run check suites.

Exit status is 0 on success, 1 when a verification check fails and 2 on
usage or runtime errors.
"""
from __future__ import annotations

import argparse
import inspect
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__, verify
from ._io import envelope, write_csv, write_json
from .chain import ChainSpec, SpeedTriple, check_reversible
from .chainio import read_chain, write_chain
from .collision import CAPACITY_ENV, TIE_RULES, collision_exact, collision_from, default_capacity, meeting_cdf
from .errors import RwCollideError
from .families import FAMILY_NAMES, build_family, chain_label, parse_families
from .montecarlo import estimate_collision
from .montecarlo.sim import DEFAULT_T_MAX_MULT

COMMANDS = ("gen", "analyze", "collide", "mc", "verify")
SUITE_NAMES = tuple(verify.SUITES)
DEFAULT_SAMPLES = 10_000

# verify flags each suite accepts, mapped to keyword names
_SUITE_ARGS = {
    "families": "families",
    "samples": "samples",
    "seed": "seed",
    "workers": "workers",
    "n_list": "n_list",
    "thetas": "thetas",
    "tie_rule": "tie_rule",
    "d": "d",
    "eps": "eps",
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    chain: str | None = None  # chain file path, or None when built from a family
    family: str | None = None
    n: int | None = None
    d: int | None = None
    eps: float | None = None
    c: float | None = None
    speeds: tuple = (1.0, 1.0, 0.0)
    tie_rule: str = "strict"
    method: str = "exact"
    start: tuple | None = None
    seed: int = 0
    samples: int | None = None
    t_max_mult: float = DEFAULT_T_MAX_MULT
    workers: int = 1
    tolerances: dict = field(default_factory=lambda: {"uniformization": 1e-10})
    output: str | None = None
    json_path: str | None = None
    csv_path: str | None = None
    capacity: int | None = None
    suite: str | None = None
    families: str | None = None
    n_list: tuple | None = None
    thetas: tuple | None = None
    analyses: tuple = ()
    cdf: tuple | None = None
    t_end: float | None = None
    points: int = 101

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("speeds", "start", "n_list", "thetas", "analyses", "cdf"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(data)
        for k in ("speeds", "start", "n_list", "thetas", "analyses", "cdf"):
            if kw.get(k) is not None:
                kw[k] = tuple(kw[k])
        return cls(**kw)

    @property
    def effective_samples(self) -> int:
        return DEFAULT_SAMPLES if self.samples is None else self.samples

    def effective_capacity(self) -> tuple[int, str]:
        if self.capacity is not None:
            return self.capacity, "flag"
        if os.environ.get(CAPACITY_ENV):
            return default_capacity(), f"env {CAPACITY_ENV}"
        return default_capacity(), "default"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_chain_args(p, positional=True):
    if positional:
        p.add_argument("chain", help="chain file, or a family name: " + ", ".join(FAMILY_NAMES))
    p.add_argument("--n", type=int, help="size for complete, cycle, directed-cycle, path, trap")
    p.add_argument("--d", type=int, help="hypercube dimension")
    p.add_argument("--eps", type=float, help="hypercube rate parameter (coordinate j flips at rate ~ eps^(j-1))")
    p.add_argument("--c", type=float, help="trap-graph constant C")


def _add_speed_args(p):
    p.add_argument("--lx", type=float, default=1.0, help="speed of X (default 1)")
    p.add_argument("--ly", type=float, default=1.0, help="speed of Y (default 1)")
    p.add_argument("--lz", type=float, default=0.0, help="speed of Z (default 0)")
    p.add_argument("--tie-rule", choices=TIE_RULES, default="strict")


def _add_mc_args(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=None, help=f"Monte Carlo runs (default {DEFAULT_SAMPLES})")
    p.add_argument("--t-max-mult", type=float, default=DEFAULT_T_MAX_MULT, help="run cap as a multiple of t*_hit")
    p.add_argument("--workers", type=int, default=1, help="threads for the compiled kernels")


def _add_out_args(p):
    p.add_argument("--json", dest="json_path", help="write the JSON report here")
    p.add_argument("--capacity", type=int, help=f"max product states for exact solves (env {CAPACITY_ENV})")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rwcollide", description="Collision of three random walks: exact solves and simulation.")
    ap.add_argument("--version", action="version", version=f"rwcollide {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen", help="build a chain and write it in the chain-spec format")
    g.add_argument("--family", required=True, choices=FAMILY_NAMES)
    _add_chain_args(g, positional=False)
    g.add_argument("-o", "--output", required=True)

    a = sub.add_parser("analyze", help="spectral and hitting-time summaries, CDF curves")
    _add_chain_args(a)
    a.add_argument("--spectral", action="store_true")
    a.add_argument("--hitting", action="store_true")
    a.add_argument("--structure", action="store_true", help="reversibility and transitivity verdicts")
    a.add_argument("--cdf", nargs=2, type=int, metavar=("X", "Z"), help="hitting CDF of Z from X")
    a.add_argument("--meeting", nargs=2, type=int, metavar=("A", "B"),
                   help="meeting-time CDF of walkers started at A (speed --ly) and B (speed --lz)")
    a.add_argument("--ly", type=float, default=1.0)
    a.add_argument("--lz", type=float, default=1.0)
    a.add_argument("--speed", type=float, default=1.0, help="walker speed for --cdf")
    a.add_argument("--t-end", type=float, help="last grid time (default 4 t_hit)")
    a.add_argument("--points", type=int, default=101)
    a.add_argument("--csv", dest="csv_path", help="write the curve here")
    _add_out_args(a)

    for name, hlp in (("collide", "good-before-bad probability, exact or simulated"),
                      ("mc", "Monte Carlo estimate of the good-before-bad probability")):
        c = sub.add_parser(name, help=hlp)
        _add_chain_args(c)
        _add_speed_args(c)
        if name == "collide":
            c.add_argument("--method", choices=("exact", "mc", "both"), default="exact")
            c.add_argument("--start", type=_int_list, help="start state x,y,z (default: pi x pi x pi)")
        else:
            c.add_argument("--csv", dest="csv_path", help="write one CSV row per estimate")
        _add_mc_args(c)
        _add_out_args(c)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITE_NAMES)
    v.add_argument("--families", help="e.g. cycle:3..10,complete:2..8,hypercube:2..4:eps=0.3")
    v.add_argument("--n-list", type=_int_list, help="sizes for counterexample / nonreversible")
    v.add_argument("--thetas", type=_float_list, help="theta grid for the small-time profiles")
    v.add_argument("--tie-rule", choices=TIE_RULES, default=None)
    v.add_argument("--d", type=int, help="dimension for sharpness")
    v.add_argument("--eps", type=float, help="eps for sharpness / counterexample")
    _add_mc_args(v)
    _add_out_args(v)
    return ap


def _suite_params(suite: str) -> set:
    fn = verify.SUITES[suite]
    return set(inspect.signature(fn).parameters)


def parse_args(argv) -> RunConfig:
    """Parse and validate a command line; raises :class:`UsageError` naming the offending flag."""
    ns = build_parser().parse_args(argv)
    if ns.command is None:
        raise UsageError("missing command; choose from " + ", ".join(COMMANDS))
    cfg = RunConfig(command=ns.command)
    if ns.command == "gen":
        cfg.family, cfg.output = ns.family, ns.output
    elif ns.command in ("analyze", "collide", "mc"):
        if Path(ns.chain).is_file():
            cfg.chain = ns.chain
        elif ns.chain in FAMILY_NAMES:
            cfg.family = ns.chain
        else:
            raise UsageError(f"argument chain: {ns.chain!r} is neither a file nor a family ({', '.join(FAMILY_NAMES)})")
    if hasattr(ns, "n"):
        cfg.n, cfg.d, cfg.eps, cfg.c = ns.n, ns.d, ns.eps, ns.c
    if cfg.family is not None:
        _check_family_args(cfg)
    elif cfg.chain is not None and any(v is not None for v in (ns.n, ns.d, ns.eps, ns.c)):
        raise UsageError("argument --n/--d/--eps/--c: size flags only apply to family names, not chain files")

    if ns.command in ("collide", "mc"):
        for flag in ("lx", "ly", "lz"):
            if getattr(ns, flag) < 0:
                raise UsageError(f"argument --{flag}: speed must be nonnegative, got {getattr(ns, flag)}")
        if ns.lx + ns.ly + ns.lz <= 0:
            raise UsageError("argument --lx/--ly/--lz: at least one speed must be positive")
        cfg.speeds = (ns.lx, ns.ly, ns.lz)
        cfg.tie_rule = ns.tie_rule
        cfg.method = getattr(ns, "method", "mc")
        if getattr(ns, "start", None) is not None:
            if len(ns.start) != 3:
                raise UsageError("argument --start: expected three states x,y,z")
            cfg.start = ns.start
    if ns.command == "analyze":
        cfg.analyses = tuple(k for k in ("spectral", "hitting", "structure") if getattr(ns, k))
        if ns.cdf is not None:
            cfg.cdf = ("hitting", *ns.cdf, ns.speed)
        elif ns.meeting is not None:
            cfg.cdf = ("meeting", *ns.meeting, ns.ly, ns.lz)
        if ns.cdf is not None and ns.meeting is not None:
            raise UsageError("argument --cdf: not allowed with --meeting")
        if not cfg.analyses and cfg.cdf is None:
            cfg.analyses = ("spectral", "hitting")
        if ns.speed <= 0:
            raise UsageError("argument --speed: must be positive")
        if ns.ly < 0 or ns.lz < 0:
            raise UsageError("argument --ly/--lz: speeds must be nonnegative")
        if ns.points < 2:
            raise UsageError("argument --points: need at least 2")
        if ns.t_end is not None and ns.t_end <= 0:
            raise UsageError("argument --t-end: must be positive")
        cfg.t_end, cfg.points = ns.t_end, ns.points
    if hasattr(ns, "seed"):
        if ns.seed < 0:
            raise UsageError("argument --seed: must be nonnegative")
        if ns.samples is not None and ns.samples < 1:
            raise UsageError("argument --samples: must be at least 1")
        if ns.t_max_mult <= 0:
            raise UsageError("argument --t-max-mult: must be positive")
        if ns.workers < 1:
            raise UsageError("argument --workers: must be at least 1")
        cfg.seed, cfg.samples, cfg.t_max_mult, cfg.workers = ns.seed, ns.samples, ns.t_max_mult, ns.workers
    if hasattr(ns, "json_path"):
        cfg.json_path = ns.json_path
        if ns.capacity is not None and ns.capacity < 1:
            raise UsageError("argument --capacity: must be positive")
        cfg.capacity = ns.capacity
    if hasattr(ns, "csv_path"):
        cfg.csv_path = ns.csv_path
    if ns.command == "verify":
        _parse_verify(ns, cfg)
    return cfg


def _check_family_args(cfg: RunConfig):
    fam = cfg.family
    if fam == "hypercube":
        if cfg.d is None:
            raise UsageError("argument --d: required for the hypercube family")
        if cfg.d < 1:
            raise UsageError("argument --d: must be at least 1")
        if cfg.eps is not None and not 0 < cfg.eps < 1:
            raise UsageError("argument --eps: must lie in (0, 1)")
        if cfg.n is not None or cfg.c is not None:
            raise UsageError("argument --n/--c: not used by the hypercube family")
    else:
        if cfg.n is None:
            raise UsageError(f"argument --n: required for the {fam} family")
        if cfg.n < 2:
            raise UsageError("argument --n: must be at least 2")
        if cfg.d is not None or cfg.eps is not None:
            raise UsageError(f"argument --d/--eps: not used by the {fam} family")
        if cfg.c is not None and fam != "trap":
            raise UsageError(f"argument --c: only used by the trap family")
        if fam == "trap" and cfg.c is not None and cfg.c <= 0:
            raise UsageError("argument --c: must be positive")


def _parse_verify(ns, cfg: RunConfig):
    cfg.suite = ns.suite
    given = {
        "families": ns.families,
        "n_list": ns.n_list,
        "thetas": ns.thetas,
        "tie_rule": ns.tie_rule,
        "d": ns.d,
        "eps": ns.eps,
        "samples": ns.samples,
    }
    accepted = _suite_params(ns.suite)
    for key, value in given.items():
        if value is not None and _SUITE_ARGS[key] not in accepted:
            raise UsageError(f"argument --{key.replace('_', '-')}: not used by suite {ns.suite!r}")
    if ns.families is not None:
        try:
            parse_families(ns.families)
        except RwCollideError as e:
            raise UsageError(f"argument --families: {e}") from None
    if ns.thetas is not None and any(t <= 0 for t in ns.thetas):
        raise UsageError("argument --thetas: values must be positive")
    if ns.eps is not None and not 0 < ns.eps < 1:
        raise UsageError("argument --eps: must lie in (0, 1)")
    cfg.families, cfg.n_list, cfg.thetas = ns.families, ns.n_list, ns.thetas
    cfg.d, cfg.eps = ns.d, ns.eps
    if ns.tie_rule is not None:
        cfg.tie_rule = ns.tie_rule


# ------------------------------------------------------------------ run


def load_chain(cfg: RunConfig) -> ChainSpec:
    if cfg.chain is not None:
        return read_chain(cfg.chain)
    if cfg.family == "hypercube":
        return build_family("hypercube", cfg.d, eps=cfg.eps)
    params = {"c": cfg.c} if cfg.c is not None else {}
    return build_family(cfg.family, cfg.n, **params)


def _config_dict(cfg: RunConfig) -> dict:
    d = cfg.to_dict()
    cap, source = cfg.effective_capacity()
    d["effective_capacity"] = cap
    d["capacity_source"] = source
    return d


def _finish(cfg: RunConfig, checks=(), artifacts=(), out=sys.stdout):
    if cfg.json_path:
        write_json(cfg.json_path, envelope(_config_dict(cfg), checks, [*artifacts, {"kind": "report", "path": cfg.json_path}]))
        print(f"report: {cfg.json_path}", file=out)


def _cmd_gen(cfg: RunConfig, out) -> int:
    chain = load_chain(cfg)
    write_chain(chain, cfg.output)
    print(f"wrote {chain_label(chain)} with {chain.n} states to {cfg.output}", file=out)
    return 0


def _cmd_analyze(cfg: RunConfig, out) -> int:
    from .automorphism import check_transitive
    from .hitting import hitting_cdf, hitting_moments
    from .spectral import spectral_summary

    chain = load_chain(cfg)
    print(f"chain: {chain_label(chain)}, {chain.n} states", file=out)
    arts = []
    if "structure" in cfg.analyses:
        rev = check_reversible(chain)
        tr = check_transitive(chain)
        data = {"reversible": rev.reversible, "detailed_balance_residual": rev.residual, "transitivity": tr.verdict}
        print(f"reversible: {rev.reversible} (residual {rev.residual:.2e}); transitivity: {tr.verdict}", file=out)
        arts.append({"kind": "structure", "data": data})
    if "spectral" in cfg.analyses:
        s = spectral_summary(chain)
        print(f"lambda_2 = {s.lambda_2:.10g}, lambda* = {s.lambda_star:.10g}, "
              f"t_rel(lambda_2) = {s.t_rel_cont:.10g}, t_rel(|lambda|) = {s.t_rel_abs:.10g}", file=out)
        arts.append({"kind": "spectral", "data": s.to_dict()})
    hs = None
    if "hitting" in cfg.analyses:
        hs = hitting_moments(chain)
        print(f"t_hit = {hs.t_hit:.10g}, t*_hit = {hs.t_star_hit:.10g}", file=out)
        arts.append({"kind": "hitting", "data": hs.to_dict()})
    if cfg.cdf is not None:
        kind, a, b = cfg.cdf[0], int(cfg.cdf[1]), int(cfg.cdf[2])
        for v in (a, b):
            if not 0 <= v < chain.n:
                raise UsageError(f"argument --{'cdf' if kind == 'hitting' else 'meeting'}: state {v} out of range")
        if cfg.t_end is None:
            hs = hs or hitting_moments(chain)
            rate = cfg.cdf[3] if kind == "hitting" else max(cfg.cdf[3] + cfg.cdf[4], 1e-12)
            t_end = 4.0 * hs.t_hit / rate
        else:
            t_end = cfg.t_end
        grid = np.linspace(0.0, t_end, cfg.points)
        tol = cfg.tolerances["uniformization"]
        if kind == "hitting":
            curve = hitting_cdf(chain, a, b, cfg.cdf[3], grid, tol=tol)
        else:
            curve = meeting_cdf(chain, cfg.cdf[3], cfg.cdf[4], a, b, grid, tol=tol)
        print(f"{kind} CDF at t={t_end:.6g}: {curve.values[-1]:.10g} (err <= {curve.err_bound:.1e})", file=out)
        if cfg.csv_path:
            curve.write_csv(cfg.csv_path)
            arts.append({"kind": "csv", "path": cfg.csv_path})
            print(f"curve: {cfg.csv_path}", file=out)
        else:
            arts.append({"kind": f"{kind}-cdf", "data": curve.to_dict()})
    _finish(cfg, artifacts=arts, out=out)
    return 0


_MC_HEADER = ("chain", "lx", "ly", "lz", "tie_rule", "mean", "std_err", "n_samples", "seed", "censored_fraction")


def _mc_row(chain, cfg, est):
    return (chain_label(chain), *cfg.speeds, cfg.tie_rule, est.mean, est.std_err, est.n_samples, est.seed,
            est.censored_fraction)


def _cmd_collide(cfg: RunConfig, out) -> int:
    chain = load_chain(cfg)
    sp = SpeedTriple(*cfg.speeds)
    cap, source = cfg.effective_capacity()
    print(f"chain: {chain_label(chain)}, {chain.n} states; speeds {cfg.speeds}; tie rule {cfg.tie_rule}", file=out)
    arts, checks = [], []
    exact = None
    if cfg.method in ("exact", "both"):
        print(f"capacity: {cap} product states ({source})", file=out)
        if cfg.start is not None:
            p = collision_from(chain, sp, cfg.start, cfg.tie_rule, cap)
            exact = p
            print(f"exact P from {tuple(cfg.start)}: {p:.12g}", file=out)
            arts.append({"kind": "collision-exact", "data": {"probability": p, "start": list(cfg.start)}})
        else:
            rep = collision_exact(chain, sp, cfg.tie_rule, cap)
            exact = rep.probability
            print(f"exact P = {rep.probability:.12g} (residual {rep.residual:.1e})", file=out)
            arts.append({"kind": "collision-exact", "data": rep.to_dict()})
    est = None
    if cfg.method in ("mc", "both"):
        est = estimate_collision(chain, sp, cfg.tie_rule, cfg.effective_samples, cfg.seed,
                                 t_max_mult=cfg.t_max_mult, start=cfg.start, workers=cfg.workers)
        print(f"seed: {cfg.seed}", file=out)
        print(f"Monte Carlo P = {est.mean:.6f} +- {est.std_err:.6f} (N={est.n_samples}, "
              f"censored {est.censored_fraction:.2%})", file=out)
        arts.append({"kind": "collision-mc", "data": est.to_dict()})
        if cfg.csv_path:
            write_csv(cfg.csv_path, _MC_HEADER, [_mc_row(chain, cfg, est)])
            arts.append({"kind": "csv", "path": cfg.csv_path})
            print(f"csv: {cfg.csv_path}", file=out)
    status = 0
    if exact is not None and est is not None:
        c = verify.make_check("exact-vs-mc", "plumbing", est.mean, "~=", exact, verify.SE_MULT * est.std_err,
                              f"Monte Carlo N={est.n_samples}")
        checks.append(c.to_dict())
        print(f"agreement within {verify.SE_MULT} SE: {c.passed}", file=out)
        status = 0 if c.passed else 1
    _finish(cfg, checks, arts, out)
    return status


def _cmd_verify(cfg: RunConfig, out) -> int:
    fn = verify.SUITES[cfg.suite]
    accepted = _suite_params(cfg.suite)
    kw = {}
    values = {"families": cfg.families, "n_list": cfg.n_list, "thetas": cfg.thetas, "d": cfg.d, "eps": cfg.eps,
              "samples": cfg.samples}
    for key, value in values.items():
        if value is not None:
            kw[_SUITE_ARGS[key]] = value
    if "tie_rule" in accepted and cfg.tie_rule != "strict":
        kw["tie_rule"] = cfg.tie_rule
    for key in ("seed", "workers"):
        if key in accepted:
            kw[key] = getattr(cfg, key)
    if "capacity" in accepted:
        kw["capacity"] = cfg.effective_capacity()[0]
    t0 = time.perf_counter()
    rep = fn(**kw)
    print(rep.table(), file=out)
    if "seed" in accepted:
        print(f"seed: {cfg.seed}", file=out)
    print(f"elapsed: {time.perf_counter() - t0:.1f}s", file=out)
    arts = [{"kind": "suite", "data": {k: v for k, v in rep.to_dict().items() if k != "checks"}}]
    _finish(cfg, [c.to_dict() for c in rep.checks], arts, out)
    return 0 if rep.passed else 1


_DISPATCH = {"gen": _cmd_gen, "analyze": _cmd_analyze, "collide": _cmd_collide, "mc": _cmd_collide,
             "verify": _cmd_verify}


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        return _DISPATCH[cfg.command](cfg, out)
    except UsageError as e:
        print(f"rwcollide: error: {e}", file=sys.stderr)
        return 2
    except (RwCollideError, OSError) as e:
        print(f"rwcollide: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as e:
        print(f"rwcollide: usage error: {e}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
