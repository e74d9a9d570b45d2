"""Command-line entry point: ``nilprob <command> [options]``.

Reports are JSON (sorted keys, exact rationals as strings) or CSV.  Errors are
printed as ``{"error": {"code": ..., "message": ...}}`` with exit status 2; a
failing acceptance run exits with status 1.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from . import acceptance as acc
from . import corpus as cp
from . import gallagher as gal
from . import genericity as gen
from . import malcev as mc
from . import nildegree as nd
from . import pgroups as pg
from . import sampling as smp
from .errors import ConfigError, NilprobError, UnknownGroup
from .group import DEFAULT_ORDER_CAP, FiniteGroup, nilpotency_class, parse_word, quotient
from .groupfile import load_group_file

STOCHASTIC = {"estimate", "generic"}


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)
    seed: int | None = None
    trials: int | None = None
    cap_order: int = DEFAULT_ORDER_CAP
    cap_evals: int = nd.DEFAULT_EVAL_CAP
    format: str = "json"
    out: str | None = None
    timing: bool = False

    def validate(self):
        if self.cap_order <= 0 or self.cap_evals <= 0:
            raise ConfigError("caps must be positive")
        if self.trials is not None and self.trials <= 0:
            raise ConfigError("--trials must be positive")
        if self.command in STOCHASTIC and self.seed is None:
            raise ConfigError(f"'{self.command}' is stochastic and needs an explicit --seed")


# serialization ------------------------------------------------------------

def rational(q: Fraction) -> dict:
    with localcontext() as ctx:
        ctx.prec = 20
        dec = Decimal(q.numerator) / Decimal(q.denominator)
    return {"num": str(q.numerator), "den": str(q.denominator), "decimal": str(dec)}


def to_jsonable(obj):
    if isinstance(obj, Fraction):
        return rational(obj)
    if isinstance(obj, smp.EstimateResult):
        return {"point": obj.point, "trials": obj.trials, "successes": obj.successes,
                "ci_low": obj.ci_low, "ci_high": obj.ci_high, "seed": obj.seed,
                "fraction": rational(obj.fraction)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    return obj


def _flat(prefix, obj, out):
    if isinstance(obj, dict) and not set(obj) == {"num", "den", "decimal"}:
        for k, v in obj.items():
            _flat(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(obj, list) and obj and isinstance(obj[0], dict):
        for i, v in enumerate(obj):
            _flat(f"{prefix}[{i}]", v, out)
    elif isinstance(obj, dict):
        out.append((prefix, f"{obj['num']}/{obj['den']}"))
    else:
        out.append((prefix, json.dumps(obj) if isinstance(obj, list) else obj))


def render_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = report.get("rows")
    if rows:
        flat_rows = []
        for r in rows:
            acc_rows: list = []
            _flat("", r, acc_rows)
            flat_rows.append(dict(acc_rows))
        cols = list(flat_rows[0])
        w.writerow(cols)
        for r in flat_rows:
            w.writerow([r.get(c, "") for c in cols])
    else:
        pairs: list = []
        _flat("", {k: v for k, v in report.items() if k != "rows"}, pairs)
        w.writerow(["key", "value"])
        w.writerows(pairs)
    return buf.getvalue()


def render(report: dict, fmt: str) -> str:
    report = to_jsonable(report)
    if fmt == "csv":
        return render_csv(report)
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


# group sources ------------------------------------------------------------

def load_finite(source: str, cap: int) -> FiniteGroup:
    if source.startswith("builtin:"):
        return cp.builtin(source[len("builtin:"):], cap)
    path = Path(source)
    if path.is_file():
        return load_group_file(path, cap)
    try:
        return cp.builtin(source, cap)
    except UnknownGroup:
        raise UnknownGroup(f"{source!r} is neither a file nor a builtin group name") from None


def load_malcev(source: str) -> mc.MalcevGroup:
    if source.startswith("builtin:"):
        return mc.builtin_group(source[len("builtin:"):])
    path = Path(source)
    if path.is_file():
        return mc.load_malcev_file(path)
    return mc.builtin_group(source)


def read_text_arg(value: str) -> str:
    """A file's contents if ``value`` names a file, else ``value`` itself."""
    path = Path(value)
    return path.read_text() if path.is_file() else value


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


# commands -----------------------------------------------------------------

def cmd_dc(cfg: RunConfig) -> dict:
    G = load_finite(cfg.options["group"], cfg.cap_order)
    k = cfg.options["k"]
    return {"group": G.name, "order": G.order, "k": k, "dc": nd.dc_k_exact(G, k)}


def cmd_pofg(cfg: RunConfig) -> dict:
    G = load_finite(cfg.options["group"], cfg.cap_order)
    k = cfg.options["k"]
    g = G.lookup(cfg.options["element"])
    return {"group": G.name, "k": k, "element": G.render(g), "P": nd.P_k_exact(G, g, k)}


def cmd_dphi(cfg: RunConfig) -> dict:
    G = load_finite(cfg.options["group"], cfg.cap_order)
    w = parse_word(read_text_arg(cfg.options["word"]), G.lookup)
    return {"group": G.name, "arity": w.arity, "dphi": nd.dphi_exact(G, w, cfg.cap_evals)}


def _pick(G, label, default):
    return default if label is None else G.lookup(label)


def cmd_gallagher(cfg: RunConfig) -> dict:
    o = cfg.options
    G = load_finite(o["group"], cfg.cap_order)
    N = cp.resolve_subgroup(G, o["normal"])
    k = o["k"]
    sub = gal.verify_submultiplicativity(G, N, k)
    out = {
        "group": G.name, "normal_order": N.order, "k": k,
        "submultiplicativity": {"ok": sub.ok, "dc_G": sub.lhs, "dc_N": sub.dc_N,
                                "dc_quotient": sub.dc_Q, "product": sub.rhs},
    }
    if o.get("full_audit"):
        audit = gal.full_audit(G, N, k)
        out["audit"] = {"ok": audit.ok, "instances": audit.instances,
                        "failures": [list(f) for f in audit.failures]}
        return out
    reps = quotient(G, N).section
    g = _pick(G, o.get("g"), G.gens[0] if G.gens else 0)
    x = _pick(G, o.get("x"), int(reps[1]) if len(reps) > 1 else 0)
    gam = gal.build_gamma(G, N, g, x, k)
    F = gal.coset_counts(gam)
    hist = gal.level_histograms(gam, F)
    out["instance"] = {
        "g": G.render(g), "x": G.render(x), "coset_order": gam.o,
        "vertices": gam.vertex_count, "edges": gam.edge_count,
        "components": [{"base": c.base, "period": c.period, "size": len(c.vertices),
                        "edges": c.edge_count, "r": r, "h": h}
                       for c, (r, h) in zip(gam.components, hist)],
        "checks": {
            "period": gal.check_period_property(gam, F).ok,
            "adjacent": gal.check_adjacent_property(gam, F).ok,
            "gallagher": gal.gallagher_inequality(gam, F).ok,
            "theta": gal.check_theta_bijection(gam).ok,
            "edges": gal.check_edges(gam).ok,
            "levels_bfs_dfs": gal.levels_agree(gam),
        },
    }
    return out


def cmd_pgroup(cfg: RunConfig) -> dict:
    o = cfg.options
    spec = pg.GkSpec(o["p"], o["k"], o["n"], o["r"], o["s"])
    G = pg.build_gk(spec, cap=cfg.cap_order)
    rep = pg.verify_gk_series(G)
    out = {"spec": str(spec), "order": G.order,
           "series": {"ok": rep.ok, "lower": rep.lower_orders, "upper": rep.upper_orders,
                      "class": rep.nil_class, "centre_order": rep.centre_order,
                      "witness": rep.witness}}
    if o.get("verify_all"):
        if spec.r == 1 and spec.s == 1 and spec.k >= 1:
            H = pg.sharp_subgroup(G)
            out["sharp"] = {"index": H.index, "class": nilpotency_class(G, H),
                            "quasi_corank": pg.quasi_corank(G, H)}
        else:
            out["sharp"] = {"skipped": "sharp subgroup needs r = s = 1 and k >= 1"}
        if spec.n <= 2:
            audit = pg.no_small_nilpotent_subgroups(G)
            out["maximal_audit"] = {"ok": audit.ok, "checked": audit.checked,
                                    "offenders": audit.offenders}
        else:
            out["maximal_audit"] = {"skipped": "only n <= 2 is supported"}
    return out


def cmd_malcev(cfg: RunConfig) -> dict:
    o = cfg.options
    G = load_malcev(o["group"])
    axioms = mc.check_malcev_axioms(G)
    out = {"group": G.name, "m": G.m, "n0": G.n0, "axioms_ok": axioms.ok}
    if o.get("quotient"):
        Q = mc.finite_quotient(G, o["quotient"], cfg.cap_order)
        chief = mc.verify_chief_factors(Q)
        out["quotient"] = {"n": o["quotient"], "order": Q.order, "chief_ok": chief.ok,
                           "chief_factor_orders": chief.factor_orders}
        if o.get("dc") is not None:
            out["quotient"]["dc"] = nd.dc_k_exact(Q, o["dc"])
            out["quotient"]["k"] = o["dc"]
    return out


def cmd_rootdensity(cfg: RunConfig) -> dict:
    o = cfg.options
    # literal form: "vars X1 X2; X1*X2 - X2"
    text = read_text_arg(o["poly"])
    if not Path(o["poly"]).is_file():
        text = text.replace(";", "\n")
    poly, names = mc.load_polynomial_text(text)
    G = load_malcev(o["group"]) if o.get("group") else mc.zn(poly.nvars)
    primes = parse_int_list(o["primes"])
    rows = [{"n": n, "density": mc.root_density(G, poly, n, cfg.cap_evals)} for n in primes]
    return {"polynomial": poly.format(names), "group": G.name, "rows": rows}


# samplers from spec strings ------------------------------------------------

def _parse_sampler_part(text: str):
    parts = text.split(":")
    kind = parts[0]
    target = parts[1] if len(parts) > 1 else ""
    params = {}
    for p in parts[2:]:
        if "=" not in p:
            raise ConfigError(f"sampler parameter {p!r} must look like key=value")
        key, val = p.split("=", 1)
        params[key] = val
    return kind, target, params


def _grid(params: dict) -> list[dict]:
    keys = sorted(params)
    values = [params[k].split(",") for k in keys]
    out = [{}]
    for k, vs in zip(keys, values):
        out = [dict(d, **{k: v}) for d in out for v in vs]
    return out


def build_sampler(kind: str, target: str, params: dict, cap: int) -> smp.Sampler:
    def ival(key, default=None):
        if key not in params:
            if default is None:
                raise ConfigError(f"sampler {kind} needs {key}=<int>")
            return default
        return int(params[key])

    if kind == "ball":
        if not target.startswith("free"):
            raise ConfigError("ball sampler is only available on free groups (free<r>)")
        return smp.FreeBall(int(target[4:] or 2), ival("radius"))
    if kind in ("walk", "box"):
        try:
            G = load_malcev(target)
        except (UnknownGroup, OSError):
            G = None
        if kind == "box":
            if G is None:
                raise UnknownGroup(f"box sampler needs a Mal'cev group, got {target!r}")
            weights = [int(t) for t in params["weights"].split("/")] if "weights" in params else None
            return smp.FolnerBox(G, ival("n"), weights)
        if G is not None:
            return smp.heisenberg_walk(G, ival("steps"))
        return smp.finite_walk(load_finite(target, cap), ival("steps"))
    if kind == "uniform":
        return smp.UniformFinite(load_finite(target, cap))
    raise ConfigError(f"unknown sampler kind {kind!r} (walk, box, ball, uniform)")


def sampler_grid(spec: str, cap: int):
    """Expand ``a+b`` products and comma-separated parameter grids."""
    factors = [_parse_sampler_part(t) for t in spec.split("+")]
    grids = [_grid(p) for _, _, p in factors]
    combos = [[]]
    for g in grids:
        combos = [c + [p] for c in combos for p in g]
    out = []
    for combo in combos:
        samplers = [build_sampler(k, t, p, cap) for (k, t, _), p in zip(factors, combo)]
        s = samplers[0]
        for other in samplers[1:]:
            s = smp.ProductSampler(s, other)
        label = "+".join(":".join([k, t] + [f"{a}={b}" for a, b in sorted(p.items())])
                         for (k, t, _), p in zip(factors, combo))
        out.append((label, s))
    return out


def _element_parser(s: smp.Sampler):
    ops = s.ops
    if isinstance(ops, smp.FiniteOps):
        return ops.group.lookup
    if isinstance(ops, smp.MalcevOps):
        return lambda t: tuple(int(x) for x in t.strip("()").split(","))
    if isinstance(ops, smp.ProductOps):
        left = _element_parser(smp._Fake(ops.left))
        right = _element_parser(smp._Fake(ops.right))

        def parse(t):
            a, b = t.split("|", 1)
            return (left(a), right(b))
        return parse

    def free(t):
        return tuple(int(x) for x in t.strip("()").split(",") if x.strip())
    return free


def cmd_estimate(cfg: RunConfig) -> dict:
    o = cfg.options
    trials = cfg.trials or 10_000
    rows = []
    for label, s in sampler_grid(o["sampler"], cfg.cap_order):
        if o.get("word"):
            w = parse_word(read_text_arg(o["word"]), _element_parser(s))
            est = smp.estimate_dphi(s, w, trials, cfg.seed)
            what = {"quantity": "dphi"}
        elif o.get("element") is not None:
            g = _element_parser(s)(o["element"])
            est = smp.estimate_P_k(s, g, o["dc"] or 1, trials, cfg.seed)
            what = {"quantity": "P", "k": o["dc"] or 1, "element": o["element"]}
        else:
            k = 1 if o.get("dc") is None else o["dc"]
            est = smp.estimate_dc_k(s, k, trials, cfg.seed)
            what = {"quantity": "dc", "k": k}
        rows.append({"sampler": label, **what, "estimate": est})
    if len(rows) == 1:
        return {**rows[0], "rows": rows}
    return {"rows": rows}


def cmd_generic(cfg: RunConfig) -> dict:
    o = cfg.options
    trials = cfg.trials or 10_000
    rows = []
    for n in parse_int_list(str(o["radius"])):
        res = gen.genericity_experiment(o["rank"], n, trials, cfg.seed, o["D0"])
        rows.append({"rank": o["rank"], "radius": n, "trials": trials, "seed": cfg.seed,
                     "delzant_frac": res.delzant_frac, "basis_frac": res.basis_frac,
                     "counts": res.counts})
    return {"rows": rows}


def cmd_acceptance(cfg: RunConfig) -> dict:
    only = []
    for item in cfg.options.get("only") or []:
        only.extend(t for t in item.split(",") if t)
    results = acc.run_suite(only or None)
    out = {"criteria": [], "passed": all(r.status != "fail" for r in results)}
    for r in results:
        entry = {"id": r.id, "name": r.name, "status": r.status, "checks": r.checks,
                 "witness": r.witness}
        if r.reason:
            entry["reason"] = r.reason
        if cfg.timing:
            entry["seconds"] = round(r.seconds, 3)
        out["criteria"].append(entry)
    return out


COMMANDS = {
    "dc": cmd_dc, "pofg": cmd_pofg, "dphi": cmd_dphi, "gallagher": cmd_gallagher,
    "pgroup": cmd_pgroup, "malcev": cmd_malcev, "rootdensity": cmd_rootdensity,
    "estimate": cmd_estimate, "generic": cmd_generic, "acceptance": cmd_acceptance,
}


def run(cfg: RunConfig) -> dict:
    cfg.validate()
    t0 = time.perf_counter()
    results = COMMANDS[cfg.command](cfg)
    report = {
        "command": cfg.command,
        "inputs": {k: v for k, v in sorted(cfg.options.items()) if v is not None},
        "seed": cfg.seed,
        "results": results,
        "version": __version__,
    }
    if cfg.trials is not None:
        report["trials"] = cfg.trials
    if "rows" in results:
        report["rows"] = results.pop("rows")
    if cfg.timing:
        report["seconds"] = round(time.perf_counter() - t0, 3)
    return report


# argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--cap-order", type=int, default=DEFAULT_ORDER_CAP)
    common.add_argument("--cap-evals", type=int, default=nd.DEFAULT_EVAL_CAP)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out")
    common.add_argument("--timing", action="store_true", help="include wall-clock seconds")

    ap = argparse.ArgumentParser(prog="nilprob", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dc", parents=[common], help="exact dc^k(G)")
    p.add_argument("--group", required=True)
    p.add_argument("-k", type=int, default=1)

    p = sub.add_parser("pofg", parents=[common], help="exact P^k(G, g)")
    p.add_argument("--group", required=True)
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--element", required=True, help="element label or #index")

    p = sub.add_parser("dphi", parents=[common], help="exact density of solutions of w = 1")
    p.add_argument("--group", required=True)
    p.add_argument("--word", required=True, help="word file or literal word")

    p = sub.add_parser("gallagher", parents=[common], help="Gamma-graph checks")
    p.add_argument("--group", required=True)
    p.add_argument("--normal", required=True, help="subgroup name, gen:<l1>;<l2> or ncl:...")
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--g", help="element g for a single instance")
    p.add_argument("--x", help="coset representative x for a single instance")
    p.add_argument("--full-audit", action="store_true")

    p = sub.add_parser("pgroup", parents=[common], help="G_k(n, r, s) constructions")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-k", type=int, default=1)
    p.add_argument("-n", type=int, default=1)
    p.add_argument("-r", type=int, default=1)
    p.add_argument("-s", type=int, default=1)
    p.add_argument("--verify-all", action="store_true")

    p = sub.add_parser("malcev", parents=[common], help="Mal'cev groups and quotients")
    p.add_argument("--group", required=True)
    p.add_argument("--quotient", type=int)
    p.add_argument("--dc", type=int)

    p = sub.add_parser("rootdensity", parents=[common], help="mod-n root densities")
    p.add_argument("--poly", required=True, help='polynomial file or literal "vars X1 X2; X1*X2"')
    p.add_argument("--primes", default="3,5,7,11,13")
    p.add_argument("--group", help="Mal'cev group fixing the coordinates (default Z^m)")

    p = sub.add_parser("estimate", parents=[common], help="Monte Carlo estimates")
    p.add_argument("--sampler", required=True,
                   help="e.g. walk:heisenberg:steps=200, ball:free2:radius=15, a+b for products")
    p.add_argument("--dc", type=int)
    p.add_argument("--word")
    p.add_argument("--element")

    p = sub.add_parser("generic", parents=[common], help="free-group genericity experiment")
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--radius", default="20", help="radius or comma-separated radii")
    p.add_argument("--D0", type=int, default=1)

    p = sub.add_parser("acceptance", parents=[common], help="run the acceptance suite")
    p.add_argument("--only", action="append", help="criterion id or name; repeatable")
    return ap


_COMMON = {"seed", "trials", "cap_order", "cap_evals", "format", "out", "timing", "command"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    opts = {k: v for k, v in vars(ns).items() if k not in _COMMON}
    return RunConfig(ns.command, opts, ns.seed, ns.trials, ns.cap_order, ns.cap_evals,
                     ns.format, ns.out, ns.timing)


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = config_from_args(ns)
    try:
        report = run(cfg)
    except NilprobError as exc:
        err = {"error": {"code": exc.code, "message": str(exc), "command": cfg.command}}
        if getattr(exc, "line", None) is not None:
            err["error"]["line"] = exc.line
        sys.stdout.write(json.dumps(err, indent=2, sort_keys=True) + "\n")
        return 2
    except OSError as exc:
        err = {"error": {"code": "IOError", "message": str(exc), "command": cfg.command}}
        sys.stdout.write(json.dumps(err, indent=2, sort_keys=True) + "\n")
        return 2
    text = render(report, cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if cfg.command == "acceptance" and not report["results"]["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
