"""Named, reproducible checks of the collision bounds and the identities behind them.

Each suite returns a :class:`VerificationReport` whose checks record both
sides of an inequality, the tolerance and how each side was computed.
Checks of kind ``"evidence"`` are recorded but never fail a report;
``"control"`` checks assert that a test *can* fail on a chain violating
the hypotheses. Chains that miss a hypothesis are skipped, not failed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .automorphism import check_transitive
from .chain import ChainSpec, SpeedTriple, build_hypercube, build_trap_graph, check_reversible, hypercube_rates, stationary
from .collision import absorption_vector, collision_exact, identity_gap, meeting_small_time_profile
from .errors import CapacityExceeded, InconclusiveEstimate
from .families import build_families, build_family, chain_label
from .hitting import aldous_brown_curve, hitting_cdf, hitting_moments, hitting_survival_all, small_time_profile
from .montecarlo import estimate_collision, moving_target_check, occupation_check
from .spectral import negative_set, spectral_summary

QUARTER = 0.25
SPEED_BOUND_C = 1.0 / 4752.0
THIRD = 1.0 / 3.0
MOVING_TARGET_FACTOR = 11.0
OCCUPATION_FACTOR = 22.0
SE_MULT = 3.5
TREND_SE_MULT = 5.0

THM1_FAMILIES = "cycle:3..10,complete:2..8,hypercube:2..4"
STRUCTURAL_FAMILIES = (
    "cycle:3..16,cycle:32,cycle:64,complete:2..16,complete:32,complete:64,"
    "hypercube:2..6,hypercube:3..5:eps=0.3"
)
IDENTITY_FAMILIES = "hypercube:3,cycle:7"
THM2_FAMILIES = "complete:8,complete:16,cycle:7,hypercube:3"
ORACLE_FAMILIES = (
    "complete:2..8,complete:16,complete:32,cycle:3..10,cycle:16,cycle:32,hypercube:2..5,"
    "hypercube:3:eps=0.2,path:3..6,directed-cycle:3..6,trap:2"
)
FORMULA_SIZES = (8, 16, 32)
FORMULA_SPEEDS = tuple((ly, lz) for ly in (0.0, 0.5, 1.0) for lz in (0.0, 1.0, 4.0))
THM2_SPEEDS = FORMULA_SPEEDS + tuple((ly, lz) for ly in (0.0, 0.5, 1.0) for lz in (10.0, 20.0))
IDENTITY_SPEEDS = tuple((ly, lz) for ly in (0.0, 0.5, 1.0, 2.0) for lz in (0.0, 0.5, 1.0, 2.0) if ly + lz > 0)
ORACLE_SPEEDS = ((1.0, 1.0, 0.0), (1.0, 0.0, 1.0), (1.0, 1.0, 1.0), (1.0, 0.5, 2.0))
THETAS = (1e-4, 1e-3, 1e-2, 1e-1)


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class Check:
    name: str
    claim: str  # the statement tested, or "plumbing"
    lhs: float
    rhs: float
    relation: str  # "<=", ">=", "<", ">", "~="
    tolerance: float
    method: str
    passed: bool | None  # None when skipped
    kind: str = "check"  # "check" | "control" | "evidence"
    note: str = ""

    @property
    def skipped(self) -> bool:
        return self.passed is None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "claim": self.claim,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relation": self.relation,
            "tolerance": self.tolerance,
            "method": self.method,
            "pass": self.passed,
            "kind": self.kind,
            "note": self.note,
        }


def holds(lhs: float, relation: str, rhs: float, tol: float) -> bool:
    """Whether ``lhs relation rhs`` holds with slack ``tol`` (strict relations need a margin of ``tol``)."""
    if relation == "<=":
        return bool(lhs <= rhs + tol)
    if relation == ">=":
        return bool(lhs >= rhs - tol)
    if relation == "<":
        return bool(lhs < rhs - tol)
    if relation == ">":
        return bool(lhs > rhs + tol)
    if relation == "~=":
        return bool(abs(lhs - rhs) <= tol)
    raise ValueError(f"unknown relation {relation!r}")


def make_check(name, claim, lhs, relation, rhs, tol, method, kind="check", note="") -> Check:
    lhs, rhs = float(lhs), float(rhs)
    return Check(name, claim, lhs, rhs, relation, float(tol), method, holds(lhs, relation, rhs, tol), kind, note)


def skipped(name, claim, reason) -> Check:
    return Check(name, claim, float("nan"), float("nan"), "", 0.0, "", None, "check", f"skipped: {reason}")


@dataclass
class VerificationReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    chains: list[dict] = field(default_factory=list)
    speeds: list = field(default_factory=list)
    seed: int | None = None
    notes: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.kind != "evidence" and c.passed is False]

    @property
    def passed(self) -> bool:
        return not self.failures

    def counts(self) -> dict:
        active = [c for c in self.checks if c.kind != "evidence"]
        return {
            "passed": sum(c.passed is True for c in active),
            "failed": sum(c.passed is False for c in active),
            "skipped": sum(c.passed is None for c in active),
            "evidence": sum(c.kind == "evidence" for c in self.checks),
        }

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "counts": self.counts(),
            "chains": self.chains,
            "speeds": self.speeds,
            "seed": self.seed,
            "notes": self.notes,
            "checks": [c.to_dict() for c in self.checks],
            **self.extra,
        }

    def table(self) -> str:
        rows = [("status", "check", "lhs", "rel", "rhs", "tol")]
        for c in self.checks:
            if c.skipped:
                status = "SKIP"
            elif c.kind == "evidence":
                status = "note" if c.passed else "NOTE!"
            else:
                status = "ok" if c.passed else "FAIL"
            rows.append((status, c.name, f"{c.lhs:.6g}", c.relation, f"{c.rhs:.6g}", f"{c.tolerance:.1e}"))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows]
        cnt = self.counts()
        lines.append(f"[{self.suite}] passed {cnt['passed']}, failed {cnt['failed']}, skipped {cnt['skipped']}")
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


def _chains(families) -> list[ChainSpec]:
    if isinstance(families, str):
        return build_families(families)
    return list(families)


def _gate_transitive(chain: ChainSpec) -> str | None:
    """Reason the chain fails the reversible-and-transitive hypothesis, or None."""
    rev = check_reversible(chain)
    if not rev.reversible:
        return f"not reversible (residual {rev.residual:.2e})"
    rep = check_transitive(chain)
    if not rep.transitive:
        return f"transitivity verdict {rep.verdict}"
    return None


# ------------------------------------------------------- exact collision


def thm1_suite(families=THM1_FAMILIES, tol: float = 1e-10, capacity: int | None = None) -> VerificationReport:
    """Strict-rule good-first probability at speeds (1, 1, 0) is at least 1/4 on transitive chains.

    The weak-rule probability is logged against 1/3 as evidence only.
    """
    rep = VerificationReport("thm1", speeds=[[1.0, 1.0, 0.0]])
    sp = SpeedTriple(1.0, 1.0, 0.0)
    weakest = None
    for chain in _chains(families):
        label = chain_label(chain)
        rep.chains.append(chain.describe())
        reason = _gate_transitive(chain)
        name = f"quarter-bound[{label}]"
        claim = "transitive reversible chains: P(M_good < M_bad) >= 1/4"
        if reason:
            rep.add(skipped(name, claim, f"hypothesis: {reason}"))
            continue
        try:
            strict = collision_exact(chain, sp, "strict", capacity)
            weak = collision_exact(chain, sp, "weak", capacity)
        except CapacityExceeded as e:
            rep.add(skipped(name, claim, str(e)))
            continue
        rep.add(make_check(name, claim, strict.probability, ">=", QUARTER, tol,
                           f"exact absorbing solve on {chain.n ** 3} states"))
        rep.add(make_check(f"weak-third[{label}]", "reversible chains: P(M_good <= M_bad) >= 1/3 (open conjecture)",
                           weak.probability, ">=", THIRD, 0.0, "exact absorbing solve", kind="evidence"))
        if weakest is None or weak.probability < weakest[1]:
            weakest = (label, weak.probability)
    if weakest:
        rep.notes.append(f"minimum weak-rule probability {weakest[1]:.6f} on {weakest[0]}")
        rep.extra["conjecture_min"] = {"chain": weakest[0], "weak_probability": weakest[1]}
    return rep


def thm2_bound(lambda_y: float, lambda_z: float, c: float = SPEED_BOUND_C) -> float:
    return c / (np.sqrt(1.0 + lambda_z) + np.sqrt(lambda_y + lambda_z)) ** 2


def linear_bound(lambda_y: float, lambda_z: float) -> float:
    return 0.25 * (1.0 - 2.0 * lambda_z / (1.0 + lambda_y))


def thm2_suite(families=THM2_FAMILIES, speed_grid=THM2_SPEEDS, tol: float = 1e-10,
               capacity: int | None = None) -> VerificationReport:
    """Speed-dependent lower bound with c = 1/4752, plus the linear-combination bound where positive."""
    rep = VerificationReport("thm2", speeds=[[1.0, ly, lz] for ly, lz in speed_grid])
    for chain in _chains(families):
        label = chain_label(chain)
        rep.chains.append(chain.describe())
        reason = _gate_transitive(chain)
        for ly, lz in speed_grid:
            cell = f"{label}, ly={ly:g}, lz={lz:g}"
            claim = "P(M_good < M_bad) >= (1/4752) / (sqrt(1+lz) + sqrt(ly+lz))^2"
            if reason:
                rep.add(skipped(f"speed-bound[{cell}]", claim, f"hypothesis: {reason}"))
                continue
            if not 0 <= ly <= 1 or lz < 0:
                rep.add(skipped(f"speed-bound[{cell}]", claim, "needs 0 <= ly <= 1, lz >= 0"))
                continue
            try:
                p = collision_exact(chain, SpeedTriple(1.0, ly, lz), "strict", capacity).probability
            except CapacityExceeded as e:
                rep.add(skipped(f"speed-bound[{cell}]", claim, str(e)))
                continue
            rep.add(make_check(f"speed-bound[{cell}]", claim, p, ">=", thm2_bound(ly, lz), tol, "exact absorbing solve"))
            lin = linear_bound(ly, lz)
            if lin > 0:
                rep.add(make_check(f"linear-bound[{cell}]", "P(M_good < M_bad) >= (1/4)(1 - 2 lz/(1+ly))",
                                   p, ">=", lin, tol, "exact absorbing solve"))
    return rep


def complete_formula_suite(sizes=FORMULA_SIZES, speed_grid=FORMULA_SPEEDS,
                           capacity: int | None = None) -> VerificationReport:
    """Weak-rule probability on K_n against (1+ly)/(2(1+ly+lz)) with slack 3/n."""
    rep = VerificationReport("formula", speeds=[[1.0, ly, lz] for ly, lz in speed_grid])
    for n in sizes:
        chain = build_family("complete", n)
        rep.chains.append(chain.describe())
        for ly, lz in speed_grid:
            p = collision_exact(chain, SpeedTriple(1.0, ly, lz), "weak", capacity).probability
            target = (1.0 + ly) / (2.0 * (1.0 + ly + lz))
            rep.add(make_check(f"complete-formula[n={n}, ly={ly:g}, lz={lz:g}]",
                               "complete graph: P(M_good <= M_bad) = (1+ly)/(2(1+ly+lz)) - O(1/n)",
                               p, "~=", target, 3.0 / n, "exact absorbing solve, slack 3/n"))
    return rep


# ----------------------------------------------------------- identities


def _time_grid(t_hit: float, rate: float, points: int = 41) -> np.ndarray:
    return np.linspace(0.0, 4.0 * t_hit / rate, points)


def identity_suite(families=IDENTITY_FAMILIES, speed_grid=IDENTITY_SPEEDS, pairs=None,
                   control: ChainSpec | None = None, tol: float = 1e-8) -> VerificationReport:
    """Meeting time of (Y, Z) from (x, z) has the law of tau_z at speed ly+lz, on transitive chains.

    ``pairs`` restricts the (x, z) pairs (default: all x != z). The
    ``control`` chain (default: walk on a 3-path) must show a gap above 1e-3.
    """
    rep = VerificationReport("identity", speeds=[[1.0, ly, lz] for ly, lz in speed_grid])
    for chain in _chains(families):
        label = chain_label(chain)
        rep.chains.append(chain.describe())
        reason = _gate_transitive(chain)
        t_hit = hitting_moments(chain).t_hit
        todo = pairs or [(x, z) for x in range(chain.n) for z in range(chain.n) if x != z]
        for ly, lz in speed_grid:
            name = f"identity[{label}, ly={ly:g}, lz={lz:g}]"
            claim = "transitive: P_(x,z)(M_YZ <= t) = P_x(tau_z <= (ly+lz) t)"
            if reason:
                rep.add(skipped(name, claim, f"hypothesis: {reason}"))
                continue
            grid = _time_grid(t_hit, ly + lz)
            gaps = [identity_gap(chain, x, z, ly, lz, grid, check_hypotheses=False) for x, z in todo]
            worst = max(gaps, key=lambda g: g.sup_gap)
            rep.add(make_check(name, claim, worst.sup_gap, "<=", 0.0, tol,
                               f"uniformization on both sides, {len(todo)} pairs x {len(grid)} times",
                               note=f"worst pair {worst.pair}"))
    if control is None:
        control = build_family("path", 3)
    rep.chains.append(control.describe())
    t_hit = hitting_moments(control).t_hit
    grid = _time_grid(t_hit, 2.0)
    gaps = [identity_gap(control, x, z, 1.0, 1.0, grid, check_hypotheses=False).sup_gap
            for x in range(control.n) for z in range(control.n) if x != z]
    rep.add(make_check(f"identity-control[{chain_label(control)}]",
                       "non-transitive chain breaks the identity (the check can fail)",
                       max(gaps), ">", 1e-3, 0.0, "uniformization on both sides", kind="control"))
    return rep


def _single_generator_residual(chain: ChainSpec, f: np.ndarray) -> float:
    # sum_x' P(x,x') f(x',z) - f(x,z) = -1 for x != z
    r = chain.matrix @ f - f + 1.0
    np.fill_diagonal(r, 0.0)
    return float(np.max(np.abs(r)))


def _pair_generator_residual(chain: ChainSpec, f: np.ndarray) -> float:
    # sum_x' P(x,x') f(x',y) + sum_y' P(y,y') f(x,y') - 2 f(x,y) = -2 for x != y
    P = chain.matrix
    r = P @ f + (P @ f.T).T - 2.0 * f + 2.0
    np.fill_diagonal(r, 0.0)
    return float(np.max(np.abs(r)))


def structural_suite(families=STRUCTURAL_FAMILIES, thetas=THETAS, corollary_speeds=FORMULA_SPEEDS,
                     tol_single: float = 1e-10, tol_pair: float = 1e-9, tol_sym: float = 1e-9,
                     tol_ab: float = 1e-8, ab_points: int = 50, anchors=None) -> VerificationReport:
    """Hitting-time facts on reversible chains; transitive-only checks are gated per chain.

    ``anchors`` lists the starting states used for the small-time profiles
    (default: the first and last state).
    """
    rep = VerificationReport("structural", extra={"thetas": list(thetas)})
    for chain in _chains(families):
        label = chain_label(chain)
        rep.chains.append(chain.describe())
        rev = check_reversible(chain)
        if not rev.reversible:
            rep.add(skipped(f"structural[{label}]", "reversible chains", "hypothesis: not reversible"))
            continue
        hs = hitting_moments(chain)
        f = hs.expectations
        rep.add(make_check(f"thit-vs-tstar[{label}]", "reversible: t_hit <= 2 t*_hit",
                           hs.t_hit, "<=", 2.0 * hs.t_star_hit, 1e-9 * hs.t_hit, "sparse LU hitting solves"))
        rep.add(make_check(f"single-martingale[{label}]", "f(X_t, z) + t is a martingale (generator identity)",
                           _single_generator_residual(chain, f), "<=", 0.0, tol_single, "residual of P f - f + 1"))
        trans = check_transitive(chain)
        spec = spectral_summary(chain)
        if spec.t_rel_abs != spec.t_rel_cont:
            rep.notes.append(f"{label}: t_rel from |lambda| = {spec.t_rel_abs:.6g}, from lambda_2 = {spec.t_rel_cont:.6g}")
        _aldous_brown_checks(rep, chain, label, hs, spec, tol_ab, ab_points)
        _negative_set_checks(rep, chain, label, hs, spec)
        if not trans.transitive:
            for nm in ("hitting-symmetry", "pair-martingale", "small-time"):
                rep.add(skipped(f"{nm}[{label}]", "transitive chains", f"hypothesis: verdict {trans.verdict}"))
            continue
        rep.add(make_check(f"pair-martingale[{label}]", "f(X_t, Y_t) + 2t is a martingale on transitive chains",
                           _pair_generator_residual(chain, f), "<=", 0.0, tol_pair, "residual of the two-walker generator"))
        rep.add(make_check(f"hitting-symmetry[{label}]", "transitive: P_x(tau_z <= t) = P_z(tau_x <= t)",
                           _symmetry_gap(chain, hs.t_hit), "<=", 0.0, tol_sym, "uniformization, all pairs, 21 times"))
        xs = anchors if anchors is not None else sorted({0, chain.n - 1})
        for x in xs:
            prof = small_time_profile(chain, x, thetas)
            for th, lhs, b in zip(prof.thetas, prof.lhs, prof.bound):
                rep.add(make_check(f"small-time[{label}, x={x}, theta={th:g}]",
                                   "pi(A_x)-average of P_x(tau_z <= theta t_hit) <= 6 sqrt(theta)",
                                   lhs, "<=", b, 1e-10, "uniformization over the negative set"))
            for ly, lz in corollary_speeds:
                mp = meeting_small_time_profile(chain, x, thetas, ly, lz)
                for i, th in enumerate(mp.thetas):
                    cell = f"{label}, x={x}, ly={ly:g}, lz={lz:g}, theta={th:g}"
                    rep.add(make_check(f"small-time-xz[{cell}]", "meeting of X, Z: <= 6 sqrt((1+lz) theta)",
                                       mp.lhs_xz[i], "<=", mp.bound_xz[i], 1e-10, "pair-chain uniformization"))
                    if ly + lz > 0:
                        rep.add(make_check(f"small-time-yz[{cell}]", "meeting of Y, Z: <= 6 sqrt((ly+lz) theta)",
                                           mp.lhs_yz[i], "<=", mp.bound_yz[i], 1e-10, "pair-chain uniformization"))
    return rep


def _symmetry_gap(chain: ChainSpec, t_hit: float, points: int = 21) -> float:
    grid = np.linspace(0.0, 3.0 * t_hit, points)
    n = chain.n
    S = np.empty((points, n, n))  # S[t, x, z] = P_x(tau_z > t)
    for z in range(n):
        S[:, :, z], _ = hitting_survival_all(chain, z, 1.0, grid)
    return float(np.max(np.abs(S - S.transpose(0, 2, 1))))


def _aldous_brown_checks(rep, chain, label, hs, spec, tol, points):
    s_grid = np.linspace(0.0, 10.0 * hs.t_star_hit, points)
    worst_drop, worst_excess = 0.0, -np.inf
    where_drop = where_excess = None
    for z in range(chain.n):
        curve = aldous_brown_curve(chain, z, s_grid)
        scale = max(1.0, float(np.max(np.abs(curve.values))))
        drop = float(np.max(curve.values[:-1] - curve.values[1:], initial=0.0)) / scale
        excess = float(np.max(curve.values)) - curve.bound
        if drop > worst_drop:
            worst_drop, where_drop = drop, z
        if excess > worst_excess:
            worst_excess, where_excess = excess, z
    rep.add(make_check(f"residual-life-monotone[{label}]", "f(s) = E_pi[tau_z - s | tau_z > s] is nondecreasing",
                       worst_drop, "<=", 0.0, 1e-9, f"killed spectrum, {points}-point grid, all z (relative drop)",
                       note=f"z={where_drop}" if where_drop is not None else ""))
    rep.add(make_check(f"residual-life-bound[{label}]", "sup_s f(s) <= E_pi[tau_z] + t_rel",
                       worst_excess, "<=", 0.0, tol, "killed spectrum vs direct solve, all z",
                       note=f"worst z={where_excess}"))


def _negative_set_checks(rep, chain, label, hs, spec):
    ns = negative_set(chain)
    rep.add(make_check(f"negative-set-mass[{label}]", "pi(A) >= 1/2 for A = {phi <= 0}",
                       ns.pi_a, ">=", 0.5, 1e-12, "dense eigensolve"))
    rep.add(make_check(f"eigen-residual[{label}]", "plumbing", ns.eigen_residual, "<=", 0.0, 1e-9,
                       "|P phi - lambda_2 phi|"))
    grid = np.linspace(0.0, 3.0 * spec.t_rel_cont, 31)
    cdf = hitting_cdf(chain, ns.anchor, ns.set_a, 1.0, grid)
    margin = float(np.min((1.0 - cdf.values) - np.exp(-grid / spec.t_rel_cont)))
    rep.add(make_check(f"negative-set-tail[{label}]", "P_anchor(tau_A > t) >= exp(-t / t_rel)",
                       margin, ">=", 0.0, cdf.err_bound + 1e-12, "uniformization of the set hitting time"))


# ------------------------------------------------------------ sharpness


@dataclass(frozen=True)
class HolroydCheck:
    n: int
    eps: float
    per_k: list  # (k, exact worst-start probability, bound (1-eps)^k)
    collision: dict  # {"weak": ..., "strict": ...}
    budget: float  # 1/3 + 2 n eps

    def to_dict(self) -> dict:
        return {"n": self.n, "eps": self.eps, "per_k": [list(t) for t in self.per_k],
                "collision": self.collision, "budget": self.budget}


def prefix_hit_probabilities(d: int, eps: float, k: int) -> np.ndarray:
    """``P(tau_k < sigma_{k+1})`` for every difference pattern on the first ``k`` coordinates.

    The first ``k`` coordinates of X xor z form a 2^k-state chain flipping
    bit i at rate q_i; the race against ``sigma_{k+1}`` is an independent
    kill at rate ``sum_{j>k} q_j``. Index = pattern with bit i-1 for coordinate i.
    """
    q = hypercube_rates(d, eps)
    m = 1 << k
    A = np.eye(m)
    b = np.zeros(m)
    b[0] = 1.0
    for D in range(1, m):
        for i in range(k):
            A[D, D ^ (1 << i)] -= q[i]
    return np.linalg.solve(A, b)


def prefix_hit_mc(d: int, eps: float, k: int, pattern: int, n_samples: int, seed: int):
    """Monte Carlo counterpart of :func:`prefix_hit_probabilities` for one start pattern."""
    q = hypercube_rates(d, eps)
    probs = np.r_[q[:k], q[k:].sum()]
    rng = np.random.default_rng(seed)
    D = np.full(n_samples, pattern, dtype=np.int64)
    success = D == 0
    alive = ~success
    while alive.any():
        idx = np.flatnonzero(alive)
        c = rng.choice(k + 1, size=len(idx), p=probs)
        alive[idx[c == k]] = False
        flip = idx[c < k]
        D[flip] ^= np.left_shift(1, c[c < k])
        hit = flip[D[flip] == 0]
        success[hit] = True
        alive[hit] = False
    p = float(success.mean())
    return p, float(np.sqrt(p * (1 - p) / n_samples))


def _k_of(u, v):
    diff = u ^ v
    return np.where(diff == 0, 0, np.floor(np.log2(np.maximum(diff, 1))).astype(int) + 1)


def sharpness_suite(d: int = 3, eps: float = 0.01, samples: int = 200_000, seed: int = 0,
                    capacity: int | None = None) -> tuple[HolroydCheck, VerificationReport]:
    """Fast-coordinate hypercube: weak probability near 1/3 and the prefix-hitting bounds."""
    rep = VerificationReport("sharpness", speeds=[[1.0, 1.0, 0.0]], seed=seed)
    chain = build_hypercube(d, eps)
    label = chain_label(chain)
    rep.chains.append(chain.describe())
    sp = SpeedTriple(1.0, 1.0, 0.0)
    budget = THIRD + 2 * d * eps
    per_k = []
    for k in range(1, d):
        h = prefix_hit_probabilities(d, eps, k)
        worst = int(np.argmin(h))
        bound = (1.0 - eps) ** k
        per_k.append((k, float(h[worst]), bound))
        rep.add(make_check(f"prefix-hit[{label}, k={k}]", "P(tau_k < sigma_(k+1)) >= (1-eps)^k",
                           h[worst], ">=", bound, 1e-12, f"exact {1 << k}-state killed solve, worst start",
                           note=f"worst pattern {worst:0{k}b}"))
        p_mc, se = prefix_hit_mc(d, eps, k, worst, samples, seed + k)
        rep.add(make_check(f"prefix-hit-mc-agrees[{label}, k={k}]", "plumbing", p_mc, "~=", h[worst],
                           SE_MULT * se, f"Monte Carlo, N={samples}"))
        rep.add(make_check(f"prefix-hit-mc[{label}, k={k}]", "P(tau_k < sigma_(k+1)) >= (1-eps)^k",
                           p_mc, ">=", bound, SE_MULT * se, f"Monte Carlo, N={samples}"))
    try:
        weak = collision_exact(chain, sp, "weak", capacity)
        strict = collision_exact(chain, sp, "strict", capacity).probability
        h, _, _ = absorption_vector(chain, sp, "strict", capacity)
    except CapacityExceeded as e:
        rep.add(skipped(f"sharp-third[{label}]", "P(M_good <= M_bad) <= 1/3 + 2 n eps", str(e)))
        return HolroydCheck(d, eps, per_k, {}, budget), rep
    rep.add(make_check(f"sharp-third[{label}]", "P(M_good <= M_bad) <= 1/3 + 2 n eps",
                       weak.probability, "<=", budget, 1e-9, f"exact absorbing solve on {8 ** d} states"))
    n = chain.n
    idx = np.arange(n**3)
    x, y, z = idx // (n * n), (idx // n) % n, idx % n
    kxy, kxz, kyz = _k_of(x, y), _k_of(x, z), _k_of(y, z)
    far = kxy > np.minimum(kxz, kyz)
    rep.add(make_check(f"far-start[{label}]", "k(x,y) > min(k(x,z), k(y,z)) implies P_(x,y,z)(M_good < M_bad) < 2 n eps",
                       float(h[far].max()), "<", 2 * d * eps, 0.0, "exact absorbing solve, worst such start"))
    rep.add(make_check(f"weak-third[{label}]", "reversible chains: P(M_good <= M_bad) >= 1/3 (open conjecture)",
                       weak.probability, ">=", THIRD, 0.0, "exact absorbing solve", kind="evidence"))
    hc = HolroydCheck(d, eps, per_k, {"weak": weak.probability, "strict": strict}, budget)
    rep.extra["holroyd"] = hc.to_dict()
    return hc, rep


def sharpness_report(d: int = 3, eps: float = 0.01, samples: int = 200_000, seed: int = 0,
                     capacity: int | None = None) -> VerificationReport:
    return sharpness_suite(d, eps, samples, seed, capacity)[1]


# ----------------------------------------------------------- Monte Carlo


def _trend_checks(rep, label_fmt, sizes, estimates, claim):
    for (n0, e0), (n1, e1) in zip(zip(sizes, estimates), zip(sizes[1:], estimates[1:])):
        comb = float(np.hypot(e0.std_err, e1.std_err))
        rep.add(make_check(label_fmt.format(n0=n0, n1=n1), claim, e1.mean, "<", e0.mean, TREND_SE_MULT * comb,
                           f"Monte Carlo, margin {TREND_SE_MULT:g} combined SE",
                           note=f"gap {(e0.mean - e1.mean) / comb:.1f} SE" if comb > 0 else ""))


def counterexample_suite(eps: float = 0.5, n_list=(20, 60, 160), samples: int = 20_000, seed: int = 0,
                         tie_rule: str = "weak", workers: int = 1) -> VerificationReport:
    """Trap graphs with C = 6/eps at speeds (1, 0, 1): a decreasing trend and the Down-mass bound."""
    c = 6.0 / eps
    sp = SpeedTriple(1.0, 0.0, 1.0)
    rep = VerificationReport("counterexample", speeds=[[1.0, 0.0, 1.0]], seed=seed, extra={"C": c})
    ests = []
    for n in n_list:
        chain, layout = build_trap_graph(n, c)
        rep.chains.append(chain.describe())
        pi = stationary(chain)
        rep.add(make_check(f"down-mass[n={n}, C={c:g}]", "pi(Down) <= 2/C", float(pi[list(layout.down)].sum()),
                           "<=", 2.0 / c, 1e-12, "stationary solve"))
        try:
            e = estimate_collision(chain, sp, tie_rule, samples, seed, workers=workers)
        except InconclusiveEstimate as err:
            rep.add(skipped(f"estimate[n={n}]", "plumbing", str(err)))
            return rep
        ests.append(e)
        rep.extra.setdefault("estimates", []).append({"n": n, "states": chain.n, **e.to_dict()})
    _trend_checks(rep, "decreasing[n={n0} -> n={n1}]", list(n_list), ests,
                  "trap graphs: P(M_good <= M_bad) decreases towards 0 as n grows")
    return rep


def nonreversible_demo(n_list=(10, 30, 90), samples: int = 20_000, seed: int = 0, exact_n: int = 3,
                       exact_samples: int = 100_000, workers: int = 1) -> VerificationReport:
    """Directed cycles at speeds (1, 1, 0): the strict probability decays with n."""
    sp = SpeedTriple(1.0, 1.0, 0.0)
    rep = VerificationReport("nonreversible", speeds=[[1.0, 1.0, 0.0]], seed=seed)
    small = build_family("directed-cycle", exact_n)
    rev = check_reversible(small)
    rep.add(make_check(f"not-reversible[directed-cycle(n={exact_n})]", "plumbing", rev.residual, ">", 0.0,
                       1e-10, "detailed-balance residual"))
    ex = collision_exact(small, sp, "strict").probability
    mc = estimate_collision(small, sp, "strict", exact_samples, seed, workers=workers)
    rep.add(make_check(f"exact-vs-mc[directed-cycle(n={exact_n})]", "plumbing", mc.mean, "~=", ex,
                       SE_MULT * mc.std_err, f"exact solve vs Monte Carlo N={exact_samples}"))
    ests = []
    for n in n_list:
        chain = build_family("directed-cycle", n)
        rep.chains.append(chain.describe())
        e = estimate_collision(chain, sp, "strict", samples, seed, workers=workers)
        ests.append(e)
        rep.extra.setdefault("estimates", []).append({"n": n, **e.to_dict()})
    _trend_checks(rep, "decreasing[n={n0} -> n={n1}]", list(n_list), ests,
                  "without reversibility the probability has no positive lower bound")
    return rep


def oracle_suite(families=ORACLE_FAMILIES, speed_grid=ORACLE_SPEEDS, samples: int = 100_000, seed: int = 0,
                 tie_rule: str = "strict", min_agree: float = 0.95, workers: int = 1) -> VerificationReport:
    """Monte Carlo against the exact solve on every (chain, speed) cell; 95% must agree within 3.5 SE."""
    rep = VerificationReport("oracle", speeds=[list(s) for s in speed_grid], seed=seed)
    agree = total = 0
    for chain in _chains(families):
        label = chain_label(chain)
        rep.chains.append(chain.describe())
        for s in speed_grid:
            sp = SpeedTriple(*s)
            ex = collision_exact(chain, sp, tie_rule).probability
            mc = estimate_collision(chain, sp, tie_rule, samples, seed, workers=workers)
            c = make_check(f"cell[{label}, speeds={s}]", "plumbing", mc.mean, "~=", ex, SE_MULT * mc.std_err,
                           f"Monte Carlo N={samples} vs exact", kind="evidence")
            rep.add(c)
            total += 1
            agree += bool(c.passed)
    rep.add(make_check("agreement-rate", "plumbing", agree / total, ">=", min_agree, 0.0,
                       f"{agree} of {total} cells within {SE_MULT} SE"))
    return rep


def moving_target_suite(families="cycle:5,cycle:8,cycle:12,hypercube:2..4", samples: int = 20_000, seed: int = 0,
                        trajectory_seeds=(0, 1, 2), workers: int = 1) -> VerificationReport:
    """Hitting a fixed trajectory from any start takes at most 11 t*_hit on average."""
    rep = VerificationReport("moving-target", seed=seed)
    for chain in _chains(families):
        label = chain_label(chain)
        rep.chains.append(chain.describe())
        if not check_reversible(chain).reversible:
            rep.add(skipped(f"moving-target[{label}]", "reversible chains", "hypothesis: not reversible"))
            continue
        hs = hitting_moments(chain)
        x = 0
        far = int(np.argmax(hs.expectations[x]))
        for z in sorted({far, 1 % chain.n}):
            e = moving_target_check(chain, x, n_samples=samples, seed=seed, frozen_at=z, workers=workers)
            rep.add(make_check(f"frozen-exact[{label}, x={x}, z={z}]", "plumbing", e.mean, "~=",
                               hs.expectations[x, z], SE_MULT * e.std_err, f"Monte Carlo N={samples} vs exact"))
            rep.add(make_check(f"frozen-bound[{label}, x={x}, z={z}]", "E_x[tau_h] <= 11 t*_hit", e.mean, "<=",
                               MOVING_TARGET_FACTOR * hs.t_star_hit, SE_MULT * e.std_err, f"Monte Carlo N={samples}"))
        for ts in trajectory_seeds:
            e = moving_target_check(chain, x, trajectory_seed=ts, n_samples=samples, seed=seed, workers=workers)
            rep.add(make_check(f"random-bound[{label}, x={x}, trajectory={ts}]", "E_x[tau_h] <= 11 t*_hit",
                               e.mean, "<=", MOVING_TARGET_FACTOR * hs.t_star_hit, SE_MULT * e.std_err,
                               f"Monte Carlo N={samples}, {e.extra['trajectory_jumps']} target jumps"))
    rep.notes.append("targets are frozen or random paths; adversarial trajectories are not searched")
    return rep


def occupation_suite(families="complete:5,hypercube:3", speeds=(1.0, 1.0, 1.0), samples: int = 100_000,
                     seed: int = 0, workers: int = 1) -> VerificationReport:
    """Diagonal occupation up to the post-bad return time against E[tau]/n^2, and the 22 t*_hit/n bound."""
    sp = SpeedTriple(*speeds)
    rep = VerificationReport("occupation", speeds=[list(speeds)], seed=seed)
    for chain in _chains(families):
        label = chain_label(chain)
        rep.chains.append(chain.describe())
        reason = _gate_transitive(chain)
        if reason:
            rep.add(skipped(f"occupation[{label}]", "transitive chains", f"hypothesis: {reason}"))
            continue
        r = occupation_check(chain, sp, samples, seed, workers=workers)
        rep.add(make_check(f"occupation-identity[{label}]",
                           "E_mu[time at (v,v) before tau] = E_mu[tau] / n^2 for every v",
                           r.max_z, "<=", SE_MULT, 0.0,
                           f"Monte Carlo, {r.n_accepted} accepted of {samples}; max |residual| / combined SE"))
        rep.add(make_check(f"occupation-integral[{label}]", "E_mu[integral of 1(X=Y) up to M_bad] <= 22 t*_hit / n",
                           r.t_integral.mean, "<=", r.t_bound, SE_MULT * r.t_integral.std_err, "Monte Carlo"))
        rep.extra.setdefault("occupation", []).append({"chain": label, **r.to_dict()})
    return rep


SUITES = {
    "thm1": thm1_suite,
    "thm2": thm2_suite,
    "formula": complete_formula_suite,
    "identity": identity_suite,
    "structural": structural_suite,
    "counterexample": counterexample_suite,
    "sharpness": sharpness_report,
    "nonreversible": nonreversible_demo,
    "oracle": oracle_suite,
    "moving-target": moving_target_suite,
    "occupation": occupation_suite,
}
