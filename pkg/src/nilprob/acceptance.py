"""Acceptance suite: ten fixed checks with pinned tolerances and seeds.

Each criterion returns a :class:`CriterionResult`; the CLI and the test suite
share these functions.
"""
from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable

import numpy as np

from . import corpus as cp
from . import genericity as gen
from . import malcev as mc
from . import sampling as smp
from .errors import NotCoprime
from .gallagher import check_main_identity, full_audit, verify_submultiplicativity
from .group import (FiniteGroup, Subgroup, is_k_step_nilpotent, nilpotency_class,
                    normal_subgroups)
from .nildegree import converse_bound, dc_k_exact, gap_bound
from .polynomial import parse_polynomial
from .pgroups import (GkSpec, build_gk, no_small_nilpotent_subgroups, sharp_subgroup,
                      verify_gk_series)

# pinned parameters
DC_TARGETS = {"sym3": Fraction(1, 2), "dih8": Fraction(25, 64), "sym4": Fraction(5, 24)}
GAP_MAX_ORDER, GAP_KS = 729, (1, 2, 3)
SUBMULT_MAX_ORDER, SUBMULT_KS = 243, (1, 2)
GAMMA_CASES = (("sym4", "v4"), ("dih8", "center"))
GAMMA_K, GAMMA_RANDOM_TUPLES, GAMMA_SEED = 2, 1000, 2024
PGROUP_CASES = ((3, 1, 1), (5, 1, 1), (3, 1, 2), (3, 2, 1))
HEIS_MODULI = (3, 5, 7)
ROOT_PRIMES = (3, 5, 7, 11, 13)
WALK_STEPS, WALK_TRIALS, WALK_SEED, WALK_MODULUS = 200, 100_000, 42, 9
GEN_RANK, GEN_RADII, GEN_TRIALS, GEN_SEED = 2, (5, 10, 15, 20), 10_000, 7

TIME_LIMITS = {  # seconds
    "dc-values": 1, "gap": 120, "submult": 300, "gallagher": 300, "pgroups": 300,
    "malcev": 120, "rootdensity": 120, "convergence": 180, "genericity": 120, "converse": 120,
}


@dataclass
class CriterionResult:
    id: int
    name: str
    status: str  # "pass", "fail" or "skip"
    seconds: float = 0.0
    checks: dict = field(default_factory=dict)
    witness: list = field(default_factory=list)
    reason: str | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def line(self) -> str:
        extra = f" ({self.reason})" if self.reason else ""
        wit = f" witness: {self.witness[0]}" if self.witness else ""
        return f"[{self.status.upper()}] {self.id:2d} {self.name}: {self.seconds:.2f}s{extra}{wit}"


def load_golden() -> dict:
    text = resources.files("nilprob").joinpath("data/golden.json").read_text()
    return json.loads(text)


def _frac(obj) -> Fraction:
    return Fraction(int(obj["num"]), int(obj["den"]))


class _Checks:
    """Collects named boolean checks and the first witness of each failure."""

    def __init__(self):
        self.checks: dict = {}
        self.witness: list = []

    def add(self, name, ok, witness=None):
        ok = bool(ok)
        self.checks[name] = self.checks.get(name, True) and ok
        if not ok:
            self.witness.append(f"{name}: {witness}" if witness else name)
        return ok


# brute force (independent of the commutator table and the DP) -------------

def brute_force_dc1(G: FiniteGroup) -> Fraction:
    hits = 0
    for x, y in itertools.product(range(G.order), repeat=2):
        hits += G.mul(x, y) == G.mul(y, x)
    return Fraction(hits, G.order ** 2)


# criteria -----------------------------------------------------------------

def crit_dc_values(c: _Checks):
    for name, target in DC_TARGETS.items():
        G = cp.builtin(name)
        dp, bf = dc_k_exact(G, 1), brute_force_dc1(G)
        c.add(f"{name}: dp == brute force", dp == bf, f"{dp} != {bf}")
        c.add(f"{name}: dc1 == {target}", dp == target, f"computed {dp}")


def crit_gap(c: _Checks):
    checked = 0
    for G in cp.corpus(GAP_MAX_ORDER):
        for k in GAP_KS:
            if is_k_step_nilpotent(G, k):
                continue
            val = dc_k_exact(G, k)
            checked += 1
            c.add("gap bound", val <= gap_bound(k), f"{G.name}, k={k}: {val} > {gap_bound(k)}")
    c.checks["instances"] = checked


def crit_submult(c: _Checks):
    checked = 0
    for G in cp.corpus(SUBMULT_MAX_ORDER):
        for N in normal_subgroups(G):
            for k in SUBMULT_KS:
                rep = verify_submultiplicativity(G, N, k)
                checked += 1
                c.add("submultiplicativity", rep.ok,
                      f"{G.name}, |N|={N.order}, k={k}: {rep.lhs} > {rep.rhs}")
    c.checks["instances"] = checked


def crit_gallagher(c: _Checks):
    rng = np.random.default_rng(GAMMA_SEED)
    for gname, nname in GAMMA_CASES:
        G = cp.builtin(gname)
        N = cp.named_subgroup(G, nname)
        bad = 0
        for _ in range(GAMMA_RANDOM_TUPLES):
            z, y, g = (int(v) for v in rng.integers(0, G.order, size=3))
            ns = [int(N.members[i]) for i in rng.integers(0, N.order, size=GAMMA_K - 1)]
            bad += not check_main_identity(G, z, y, g, ns)
        c.add(f"{gname}/{nname}: main identity", bad == 0, f"{bad} failures")
        audit = full_audit(G, N, GAMMA_K)
        c.add(f"{gname}/{nname}: period, adjacent, gallagher, theta, edges",
              audit.ok, audit.failures[:1])


def crit_pgroups(c: _Checks):
    for p, k, n in PGROUP_CASES:
        tag = f"G_{k}({n},1,1) p={p}"
        G = build_gk(GkSpec(p, k, n))
        rep = verify_gk_series(G)
        c.add(f"{tag}: central series", rep.ok, rep.witness)
        c.add(f"{tag}: centre order p", rep.centre_order == p, rep.centre_order)
        c.add(f"{tag}: class k+1", rep.nil_class == k + 1, rep.nil_class)
        H = sharp_subgroup(G)
        c.add(f"{tag}: sharp index p^n", H.index == p ** n, H.index)
        cls = nilpotency_class(G, H)
        c.add(f"{tag}: sharp class <= k", cls is not None and cls <= k, cls)
        if n == 2:
            audit = no_small_nilpotent_subgroups(G)
            c.add(f"{tag}: no k-step nilpotent maximal subgroup", audit.ok, audit.offenders)


def crit_malcev(c: _Checks):
    H = mc.heisenberg()
    c.add("n0 == 2", H.n0 == 2, H.n0)
    try:
        mc.finite_quotient(H, 2)
        c.add("G(2) raises NotCoprime", False, "no error")
    except NotCoprime:
        c.add("G(2) raises NotCoprime", True)
    for n in HEIS_MODULI:
        Q = mc.finite_quotient(H, n)
        c.add(f"|G({n})| == n^3", Q.order == n ** 3, Q.order)
        rep = mc.verify_chief_factors(Q)
        c.add(f"G({n}) chief factors C_n", rep.ok and rep.factor_orders == [n] * 3, rep.witness)
    Q3 = mc.finite_quotient(H, 3)
    dp, bf = dc_k_exact(Q3, 1), brute_force_dc1(Q3)
    c.add("dc1(G(3)) == 11/27", dp == bf == Fraction(11, 27), f"dp {dp}, pairs {bf}")


def root_density_table(primes=ROOT_PRIMES) -> dict:
    H = mc.heisenberg()
    H2 = mc.builtin_group("heisenbergxheisenberg")
    x1 = parse_polynomial("X1", ["X1", "X2", "X3"])
    comm = mc.commutation_polynomial()
    return {
        "x1": {str(n): mc.root_density(H, x1, n) for n in primes},
        "commutation": {str(n): mc.root_density(H2, comm, n) for n in primes},
    }


def crit_rootdensity(c: _Checks):
    golden = load_golden()["root_density"]
    got = root_density_table()
    for n in ROOT_PRIMES:
        x1 = got["x1"][str(n)]
        c.add(f"X1 density 1/{n}", x1 == Fraction(1, n), x1)
        c.add(f"X1 golden n={n}", x1 == _frac(golden["x1"][str(n)]), x1)
        cm = got["commutation"][str(n)]
        c.add(f"commutation golden n={n}", cm == _frac(golden["commutation"][str(n)]), cm)
    seq = [got["commutation"][str(n)] for n in ROOT_PRIMES]
    c.add("commutation strictly decreasing", all(a > b for a, b in zip(seq, seq[1:])), seq)
    c.add("commutation < 1/2 at 13", seq[-1] < Fraction(1, 2), seq[-1])


def walk_pilot(trials=WALK_TRIALS, seed=WALK_SEED, steps=WALK_STEPS, modulus=WALK_MODULUS) -> dict:
    """Lazy generator walk on the Heisenberg group: dc1 estimate, plus the
    commuting frequency of the mod-``modulus`` images of the same samples."""
    H = mc.heisenberg()
    Q = mc.finite_quotient(H, modulus)
    walk = smp.heisenberg_walk(H, steps)
    C = Q.commutator_table
    ops = walk.ops

    def project(xs):
        return int(np.count_nonzero(C[ops.reduce_mod(xs[0], modulus), ops.reduce_mod(xs[1], modulus)] == 0))

    est = smp.estimate_dc_k(walk, 1, trials, seed, project=project)
    proj_hits = sum(est.extra["projected"])
    step = smp.lazy_generator_steps(H.identity, H.generators, H.inverse)
    support = [mc.reduce_element(Q, g) for g in step.support]
    law = smp.walk_distribution(Q, support, step.weights, steps)
    return {
        "estimate": est,
        "projected": smp.EstimateResult(proj_hits, trials, seed),
        "projected_exact": smp.commuting_probability(Q, law),
        "bracket": {m: dc_k_exact(mc.finite_quotient(H, 3 ** m), 1) for m in (1, 2)},
    }


def crit_convergence(c: _Checks):
    golden = load_golden()["walk"]
    res = walk_pilot()
    est, proj = res["estimate"], res["projected"]
    lo, hi = res["bracket"][2], res["bracket"][1]
    c.add("bracket dc1(G(9)) < dc1(G(3))", lo < hi, (lo, hi))
    c.add("Wilson CI inside [0, dc1(G(9))]", 0 <= est.ci_low and est.ci_high <= lo,
          (est.ci_low, est.ci_high, float(lo)))
    c.add("mod-9 projection matches exact walk law", proj.contains(res["projected_exact"]),
          (proj.ci_low, proj.ci_high, res["projected_exact"]))
    c.add("pilot successes reproduced", est.successes == golden["successes"]
          and proj.successes == golden["projected_successes"], (est.successes, proj.successes))
    c.checks["point"] = est.point


def genericity_sweep(radii=GEN_RADII, trials=GEN_TRIALS, seed=GEN_SEED, r=GEN_RANK) -> list:
    return [gen.genericity_experiment(r, n, trials, seed) for n in radii]


def crit_genericity(c: _Checks):
    golden = load_golden()["genericity"]
    res = genericity_sweep()
    for g in res:
        c.add(f"n={g.radius}: delzant <= basis", g.counts["delzant"] <= g.counts["basis"]
              and g.counts["unsound"] == 0, g.counts)
    fr = [g.basis_frac for g in res]
    c.add("basis_frac non-decreasing", all(a <= b for a, b in zip(fr, fr[1:])), fr)
    c.add(f"basis_frac(20) >= {golden['threshold']}", fr[-1] >= golden["threshold"], fr[-1])
    c.checks["basis_frac"] = fr


def crit_converse(c: _Checks):
    for case in cp.CONVERSE_CASES:
        G = cp.builtin(case.group)
        Gamma = cp.resolve_subgroup(G, case.gamma)
        Hs = cp.resolve_subgroup(G, case.h)
        bound = converse_bound(G, Gamma, Hs, case.k)
        val = dc_k_exact(G, case.k)
        c.add("converse bound", val >= bound,
              f"{case.group} {case.gamma}/{case.h} k={case.k}: {val} < {bound}")


CRITERIA: list[tuple[int, str, Callable]] = [
    (1, "dc-values", crit_dc_values),
    (2, "gap", crit_gap),
    (3, "submult", crit_submult),
    (4, "gallagher", crit_gallagher),
    (5, "pgroups", crit_pgroups),
    (6, "malcev", crit_malcev),
    (7, "rootdensity", crit_rootdensity),
    (8, "convergence", crit_convergence),
    (9, "genericity", crit_genericity),
    (10, "converse", crit_converse),
]


def run_criterion(key) -> CriterionResult:
    for cid, name, fn in CRITERIA:
        if key in (cid, str(cid), name):
            c = _Checks()
            t0 = time.perf_counter()
            fn(c)
            dt = time.perf_counter() - t0
            ok = all(v for v in c.checks.values() if isinstance(v, bool))
            if dt >= TIME_LIMITS[name]:
                ok = False
                c.witness.append(f"runtime {dt:.1f}s exceeds {TIME_LIMITS[name]}s")
            return CriterionResult(cid, name, "pass" if ok else "fail", dt, c.checks, c.witness)
    raise KeyError(f"unknown criterion {key!r}")


def run_suite(only=None) -> list[CriterionResult]:
    """Run all criteria, or those whose id or name is in ``only``; the others
    are reported as skipped."""
    wanted = None if not only else {str(o) for o in only}
    out = []
    for cid, name, _ in CRITERIA:
        if wanted is not None and str(cid) not in wanted and name not in wanted:
            out.append(CriterionResult(cid, name, "skip", reason="not selected by --only"))
            continue
        out.append(run_criterion(cid))
    return out
