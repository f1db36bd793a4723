"""Acceptance criteria, one test per criterion at its stated tolerance.

Each test prints a single ``criterion NN: PASS/FAIL`` line (collected again in
the terminal summary) before asserting.
"""
import time

import pytest

from rwcollide import verify
from rwcollide.chain import SpeedTriple, build_hypercube
from rwcollide.collision import collision_exact

from .conftest import record_criterion

pytestmark = pytest.mark.acceptance


def _summary(rep, prefixes=None):
    checks = [c for c in rep.checks if c.kind != "evidence"]
    if prefixes is not None:
        checks = [c for c in checks if c.name.split("[")[0] in prefixes]
    ran = [c for c in checks if not c.skipped]
    bad = [c for c in ran if not c.passed]
    return ran, bad


def _report(number, ran, bad, extra=""):
    ok = bool(ran) and not bad
    worst = f"; first failure {bad[0].name}: {bad[0].lhs:.6g} {bad[0].relation} {bad[0].rhs:.6g}" if bad else ""
    record_criterion(number, ok, f"{len(ran) - len(bad)}/{len(ran)} checks{extra}{worst}")
    assert ran, "no checks ran"
    assert not bad, [c.to_dict() for c in bad[:5]]


@pytest.fixture(scope="module")
def structural():
    return verify.structural_suite()


def test_c01_quarter_bound_small_families():
    t0 = time.perf_counter()
    rep = verify.thm1_suite(tol=1e-10)
    elapsed = time.perf_counter() - t0
    ran, bad = _summary(rep, {"quarter-bound"})
    assert len(ran) == 8 + 7 + 3
    if elapsed >= 120:
        bad = bad + [verify.make_check("runtime", "plumbing", elapsed, "<", 120, 0, "wall clock")]
    _report(1, ran, bad, f", {elapsed:.1f}s")


def test_c02_complete_graph_formula():
    rep = verify.complete_formula_suite()
    ran, bad = _summary(rep)
    assert len(ran) == 3 * 9
    _report(2, ran, bad)


def test_c03_identity_and_control():
    rep = verify.identity_suite(tol=1e-8)
    ran, bad = _summary(rep)
    controls = [c for c in ran if c.kind == "control"]
    assert controls and all(c.lhs > 1e-3 for c in controls)
    _report(3, ran, bad)


def test_c04_generator_identities(structural):
    ran, bad = _summary(structural, {"single-martingale", "pair-martingale"})
    assert all(c.tolerance <= 1e-9 for c in ran)
    _report(4, ran, bad)


def test_c05_hitting_symmetry_and_thit(structural):
    ran, bad = _summary(structural, {"hitting-symmetry", "thit-vs-tstar"})
    _report(5, ran, bad)


def test_c06_residual_life_curve(structural):
    ran, bad = _summary(structural, {"residual-life-monotone", "residual-life-bound"})
    _report(6, ran, bad)


def test_c07_small_time_profiles(structural):
    ran, bad = _summary(structural, {"small-time", "small-time-xz", "small-time-yz"})
    thetas = {c.name.rsplit("theta=", 1)[-1].rstrip("]") for c in ran if c.name.startswith("small-time[")}
    assert thetas == {"0.0001", "0.001", "0.01", "0.1"}
    _report(7, ran, bad)


def test_structural_support_checks(structural):
    assert structural.passed, [c.to_dict() for c in structural.failures[:5]]


def test_c08_speed_bound():
    rep = verify.thm2_suite(speed_grid=verify.THM2_SPEEDS)
    ran, bad = _summary(rep)
    assert any(c.name.startswith("speed-bound") for c in ran)
    _report(8, ran, bad)


@pytest.mark.slow
def test_c09_trap_graph_decay():
    t0 = time.perf_counter()
    rep = verify.counterexample_suite(n_list=(20, 60, 160), samples=20_000, seed=7)
    elapsed = time.perf_counter() - t0
    ran, bad = _summary(rep)
    if elapsed >= 600:
        bad = bad + [verify.make_check("runtime", "plumbing", elapsed, "<", 600, 0, "wall clock")]
    assert sum(c.name.startswith("decreasing") for c in ran) == 2
    means = ", ".join(f"{e['mean']:.4f}" for e in rep.extra.get("estimates", []))
    _report(9, ran, bad, f", {elapsed:.0f}s, estimates {means}")


def test_c10_sharpness():
    holroyd, rep = verify.sharpness_suite(d=3, eps=0.01, samples=200_000, seed=0)
    ran, bad = _summary(rep)
    weak = collision_exact(build_hypercube(3, 0.01), SpeedTriple(1, 1, 0), tie_rule="weak").probability
    if weak > 1 / 3 + 0.06:
        bad = bad + [verify.make_check("sharp-third-direct", "plumbing", weak, "<=", 1 / 3 + 0.06, 0, "exact")]
    _report(10, ran, bad, f", weak={weak:.4f}")


@pytest.mark.slow
def test_c11_occupation():
    rep = verify.occupation_suite(speeds=(1.0, 1.0, 1.0), samples=100_000, seed=0)
    ran, bad = _summary(rep)
    assert {c.name.split("[")[0] for c in ran} == {"occupation-identity", "occupation-integral"}
    _report(11, ran, bad)


@pytest.mark.slow
def test_c12_moving_target():
    rep = verify.moving_target_suite(seed=0)
    ran, bad = _summary(rep)
    kinds = {c.name.split("[")[0] for c in ran}
    assert {"frozen-exact", "frozen-bound", "random-bound"} <= kinds
    _report(12, ran, bad)


@pytest.mark.slow
def test_c13_oracle_agreement():
    rep = verify.oracle_suite(samples=100_000, min_agree=0.95, seed=0)
    rate = next(c for c in rep.checks if c.name == "agreement-rate")
    ran, bad = _summary(rep)
    _report(13, ran, bad, f", agreement {rate.lhs:.3f}")


@pytest.mark.slow
def test_c14_nonreversible_demo():
    rep = verify.nonreversible_demo(n_list=(10, 30, 90), seed=0)
    ran, bad = _summary(rep)
    assert sum(c.name.startswith("decreasing") for c in ran) == 2
    means = ", ".join(f"{e['mean']:.4f}" for e in rep.extra.get("estimates", []))
    _report(14, ran, bad, f", estimates {means}")
