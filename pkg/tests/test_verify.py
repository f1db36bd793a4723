import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rwcollide import verify
from rwcollide.chain import build_hypercube, hypercube_rates


def test_holds_relations():
    assert verify.holds(1.0, "<=", 1.0, 0.0) and not verify.holds(1.1, "<=", 1.0, 0.05)
    assert verify.holds(0.9, ">=", 1.0, 0.1) and not verify.holds(0.8, ">=", 1.0, 0.1)
    assert verify.holds(0.5, "<", 1.0, 0.4) and not verify.holds(0.5, "<", 1.0, 0.5)
    assert verify.holds(2.0, ">", 1.0, 0.5) and not verify.holds(1.2, ">", 1.0, 0.5)
    assert verify.holds(1.0, "~=", 1.04, 0.05) and not verify.holds(1.0, "~=", 1.2, 0.1)
    with pytest.raises(ValueError):
        verify.holds(1, "!=", 2, 0)


def test_report_accounting():
    rep = verify.VerificationReport("demo")
    rep.add(verify.make_check("a", "plumbing", 1, "<=", 2, 0, "m"))
    rep.add(verify.make_check("b", "plumbing", 3, "<=", 2, 0, "m", kind="evidence"))
    rep.add(verify.skipped("c", "plumbing", "why"))
    assert rep.passed and rep.counts() == {"passed": 1, "failed": 0, "skipped": 1, "evidence": 1}
    assert "NOTE!" in rep.table() and "SKIP" in rep.table()
    rep.add(verify.make_check("d", "plumbing", 3, "<=", 2, 0, "m"))
    assert not rep.passed and [c.name for c in rep.failures] == ["d"]
    d = rep.to_dict()
    assert d["checks"][0]["pass"] is True and d["checks"][2]["pass"] is None


def test_thm1_gates_non_transitive():
    rep = verify.thm1_suite("path:4,cycle:5")
    ran = [c for c in rep.checks if c.name.startswith("quarter-bound") and not c.skipped]
    skipped = [c for c in rep.checks if c.skipped]
    assert len(ran) == 1 and len(skipped) == 1 and rep.passed
    assert "conjecture_min" in rep.extra


def test_formula_and_bounds():
    assert verify.thm2_bound(0, 0) == pytest.approx(1 / 4752)
    assert verify.thm2_bound(1, 3) == pytest.approx((1 / 4752) / (2 + 2) ** 2)
    assert verify.linear_bound(1, 0) == pytest.approx(0.25)
    assert verify.linear_bound(0, 1) < 0


def test_small_suites_pass():
    assert verify.complete_formula_suite(sizes=(8,)).passed
    assert verify.thm2_suite("complete:6", speed_grid=((0.5, 1.0), (1.0, 20.0))).passed
    rep = verify.identity_suite("cycle:5", speed_grid=((1.0, 1.0),))
    assert rep.passed and any(c.kind == "control" for c in rep.checks)


def test_structural_small():
    rep = verify.structural_suite("cycle:6,path:4", thetas=(1e-2,), corollary_speeds=((1.0, 1.0),))
    assert rep.passed
    names = {c.name.split("[")[0] for c in rep.checks if not c.skipped}
    assert {"single-martingale", "pair-martingale", "hitting-symmetry", "residual-life-monotone",
            "residual-life-bound", "small-time", "small-time-xz", "small-time-yz", "negative-set-mass"} <= names
    # path(4) is not transitive: the transitive-only items are skipped, the rest still run
    path_checks = [c for c in rep.checks if "path" in c.name]
    assert any(c.skipped for c in path_checks) and any(not c.skipped for c in path_checks)


def _prefix_hit_full_cube(d, eps, k, start):
    """Oracle on the full cube: absorb at 0, kill on any move that flips a coordinate above k."""
    P = build_hypercube(d, eps).dense()
    alive = np.arange(1, 1 << k)
    A = np.eye(len(alive)) - P[np.ix_(alive, alive)]
    h = np.linalg.solve(A, P[alive, 0])
    return 1.0 if start == 0 else h[start - 1]


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.floats(0.01, 0.6), st.data())
def test_prefix_hit_against_iteration(d, eps, data):
    k = data.draw(st.integers(1, d - 1))
    h = verify.prefix_hit_probabilities(d, eps, k)
    pattern = data.draw(st.integers(0, (1 << k) - 1))
    assert h[pattern] == pytest.approx(_prefix_hit_full_cube(d, eps, k, pattern), abs=1e-12)
    assert h[0] == 1.0 and np.all((h >= 0) & (h <= 1))


def test_prefix_hit_k1_closed_form():
    q = hypercube_rates(3, 0.01)
    h = verify.prefix_hit_probabilities(3, 0.01, 1)
    assert h[1] == pytest.approx(q[0])


def test_prefix_hit_mc_agrees():
    h = verify.prefix_hit_probabilities(3, 0.2, 2)
    p, se = verify.prefix_hit_mc(3, 0.2, 2, 3, 50_000, seed=1)
    assert abs(p - h[3]) <= 3.5 * se


def test_k_of():
    assert verify._k_of(np.array([0, 1, 2, 5]), np.array([0, 0, 0, 1])).tolist() == [0, 1, 2, 3]


def test_sharpness_small():
    hc, rep = verify.sharpness_suite(d=2, eps=0.05, samples=20_000, seed=1)
    assert rep.passed and hc.collision["weak"] <= hc.budget


def test_trend_checks_margin():
    from rwcollide.montecarlo import McEstimate
    rep = verify.VerificationReport("t")
    ests = [McEstimate(0.5, 0.01, 100, 0, 0.0), McEstimate(0.4, 0.01, 100, 0, 0.0), McEstimate(0.39, 0.01, 100, 0, 0.0)]
    verify._trend_checks(rep, "dec[{n0}->{n1}]", [1, 2, 3], ests, "claim")
    assert [c.passed for c in rep.checks] == [True, False]


def test_suites_registry():
    assert set(verify.SUITES) == {"thm1", "thm2", "formula", "identity", "structural", "counterexample",
                                  "sharpness", "nonreversible", "oracle", "moving-target", "occupation"}


def test_small_mc_suites():
    assert verify.moving_target_suite("cycle:5", samples=4000, seed=2).passed
    assert verify.oracle_suite("complete:3..4", speed_grid=((1.0, 1.0, 0.0),), samples=20_000).passed
