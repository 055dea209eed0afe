"""Acceptance gate: one test per release criterion, tolerances pinned.

Each criterion prints exactly one line

    ACCEPTANCE <n> (<name>): PASS|FAIL

outside pytest's capture, then asserts.  A criterion collects every failed
check before failing so a red run names all of its problems at once.
Expected values are recomputed here from first principles (hand formulas,
brute force, finite differences), not imported from the library under test.
"""

import json
import math
import time

import numpy as np

from logifold.core import (compute_core, default_grid, select_threshold,
                           theoretical_bound, threshold_sweep)
from logifold.ensemble import (Ensemble, average_function, pointwise_entropy,
                               total_entropy, truth_pointwise_cross_entropy)
from logifold.laws import (random_interior_ensemble, random_space,
                           suite_conservation_ensemble,
                           suite_conservation_single, suite_core_agreement,
                           suite_strictness)
from logifold.lifelong.process import run_learning_process, separable_fixture
from logifold.lifelong.scenario import ScenarioConfig, run_immunization_scenario
from logifold.model import model_truth_cross_entropy
from logifold.simplex import (Dist, LabelSet, cross_entropy, entropy_gradient,
                              linear_cross_entropy, shannon_entropy)

from conftest import AB, make_model, make_space

SEED = 2026


def run_criterion(capsys, number, name, budget_s, body):
    failures = []

    def check(cond, message):
        if not cond:
            failures.append(message)

    start = time.perf_counter()
    try:
        body(check)
    except Exception as exc:
        failures.append(f"unexpected {type(exc).__name__}: {exc}")
    elapsed = time.perf_counter() - start
    if budget_s is not None and elapsed >= budget_s:
        failures.append(f"runtime {elapsed:.2f}s exceeded the "
                        f"{budget_s:.0f}s budget")
    verdict = "PASS" if not failures else "FAIL"
    with capsys.disabled():
        print(f"ACCEPTANCE {number} ({name}): {verdict}")
    assert not failures, "\n".join(failures)


def test_criterion_1_two_point_fixture(capsys):
    def body(check):
        space = make_space({"x1": 1.0, "x2": 1.0})
        f1 = make_model("f1", space, AB,
                        {"x1": (0.6, 0.4), "x2": (0.95, 0.05)})
        f2 = make_model("f2", space, AB,
                        {"x1": (0.6, 0.4), "x2": (0.25, 0.75)})
        e = Ensemble((f1, f2))

        d1 = average_function(e, "x1")
        d2 = average_function(e, "x2")
        check(d1.probs == (0.6, 0.4),
              f"average at x1 is {d1.probs}, expected exactly (0.6, 0.4)")
        check(d2.probs == (0.6, 0.4),
              f"average at x2 is {d2.probs}, expected exactly (0.6, 0.4)")

        # hand formula: mean over the 4 ordered member pairs of
        # -sum_a l_a log2 r_a, both member targets being {a, b}
        def ce(l, r):
            return -(l[0] * math.log2(r[0]) + l[1] * math.log2(r[1]))

        def hand(preds):
            return sum(ce(l, r) for l in preds for r in preds) / 4.0

        h1 = pointwise_entropy(e, "x1").h_x
        h2 = pointwise_entropy(e, "x2").h_x
        oracle1 = hand([(0.6, 0.4), (0.6, 0.4)])
        oracle2 = hand([(0.95, 0.05), (0.25, 0.75)])
        check(abs(h1 - oracle1) <= 1e-6,
              f"H(x1) = {h1!r} vs hand formula {oracle1!r}")
        check(abs(h2 - oracle2) <= 1e-6,
              f"H(x2) = {h2!r} vs hand formula {oracle2!r}")
        check(abs(h1 - 0.970951) <= 1e-6, f"H(x1) = {h1!r}, not 0.970951")
        check(abs(h2 - 1.569593) <= 1e-6, f"H(x2) = {h2!r}, not 1.569593")
        check(h2 > h1, "disagreement at x2 must exceed the shared fuzziness "
                       "at x1")

    run_criterion(capsys, 1, "two-point fixture", 1.0, body)


def test_criterion_2_conservation_laws(capsys):
    def body(check):
        single = suite_conservation_single(SEED, 100, tol=1e-9)
        ens = suite_conservation_ensemble(SEED, 100, tol=1e-9)
        check(single.trials == 100 and ens.trials == 100, "wrong trial count")
        check(single.passed,
              "single-model residuals: " + "; ".join(single.failures[:3]))
        check(ens.passed,
              "ensemble residuals: " + "; ".join(ens.failures[:3]))
        check(single.worst is not None and single.worst <= 1e-9,
              f"worst single-model residual {single.worst!r}")
        check(ens.worst is not None and ens.worst <= 1e-9,
              f"worst ensemble residual {ens.worst!r}")

    run_criterion(capsys, 2, "conservation laws", 5.0, body)


def test_criterion_3_vanishing_entropy(capsys):
    def body(check):
        suite = suite_strictness(SEED, 100)
        check(suite.trials == 100, "wrong trial count")
        check(suite.passed,
              "equivalence failures: " + "; ".join(suite.failures[:3]))

        # constructed positive: full cover, unanimous one-hot members
        space = make_space({"x": 1.0, "y": 2.0})
        pos = Ensemble((
            make_model("p0", space, AB, {"x": (1.0, 0.0), "y": (0.0, 1.0)}),
            make_model("p1", space, AB, {"x": (1.0, 0.0), "y": (0.0, 1.0)}),
        ))
        check(total_entropy(pos, True) == 0.0,
              "strict cover-and-agree ensemble must have total entropy 0")
        # constructed negatives: an uncovered sample, then a disagreement
        gap = Ensemble((make_model("n0", space, AB, {"x": (1.0, 0.0)}),))
        check(total_entropy(gap, True) > 0.0,
              "an uncovered sample must leave positive total entropy")
        split = Ensemble((
            make_model("n1", space, AB, {"x": (1.0, 0.0), "y": (1.0, 0.0)}),
            make_model("n2", space, AB, {"x": (1.0, 0.0), "y": (0.0, 1.0)}),
        ))
        check(total_entropy(split, True) > 0.0,
              "certain disagreement must leave positive total entropy")

    run_criterion(capsys, 3, "vanishing entropy", 5.0, body)


def test_criterion_4_non_fuzzy_limit(capsys):
    def body(check):
        suite = suite_core_agreement(SEED, 200)
        check(suite.trials == 200, "wrong trial count")
        check(suite.passed,
              "core agreement failures: " + "; ".join(suite.failures[:3]))

    run_criterion(capsys, 4, "non-fuzzy limit", 10.0, body)


def test_criterion_5_core_machinery(capsys):
    def body(check):
        rng = np.random.default_rng(SEED)
        for t in range(30):
            k = int(rng.integers(2, 6))
            y = LabelSet(tuple(f"c{i}" for i in range(k)))
            space = random_space(rng, int(rng.integers(4, 16)), y)
            e = random_interior_ensemble(rng, space, y,
                                         int(rng.integers(1, 4)))
            bound = theoretical_bound(k)
            lo, hi = sorted(float(v) for v in rng.uniform(0.0, bound, 2))
            small, big = compute_core(e, lo), compute_core(e, hi)
            check(small.members <= big.members,
                  f"trial {t}: core at {lo} not nested in core at {hi}")

            curve = threshold_sweep(e, space, default_grid())
            cov = [p.core_coverage for p in curve.points]
            check(cov == sorted(cov),
                  f"trial {t}: sweep coverage column decreases")
            for target in (0.5, 0.9):
                tau = select_threshold(curve, target)
                qualifying = [p.tau for p in curve.points
                              if p.core_accuracy is not None
                              and p.core_accuracy >= target]
                if tau is None:
                    check(not qualifying,
                          f"trial {t}: selection missed a qualifying "
                          f"threshold for target {target}")
                else:
                    check(qualifying and tau == max(qualifying),
                          f"trial {t}: selected {tau} but the largest "
                          f"qualifying threshold is {max(qualifying, default=None)}")
        b10 = theoretical_bound(10)
        check(abs(b10 - 0.176091) <= 1e-6,
              f"bound for 10 labels is {b10!r}, not 0.176091")

    run_criterion(capsys, 5, "core machinery", None, body)


def test_criterion_6_learning_descent(capsys):
    def body(check):
        space, batch, specs, schedule = separable_fixture()
        log = run_learning_process(space, None, batch, specs, schedule)
        records = list(log)
        check(len(records) >= 2, "the run admitted no training step")
        final = records[-1]
        check(final.truth_cross_entropy < 0.01,
              f"final truth cross entropy {final.truth_cross_entropy!r}")
        check(final.entropy < 0.05, f"final total entropy {final.entropy!r}")
        ces = log.truth_ce_column()
        check(all(b < a for a, b in zip(ces, ces[1:])),
              "logged cross-entropy column is not strictly decreasing")
        cov = log.coverage_column()
        check(all(b >= a for a, b in zip(cov, cov[1:])),
              "logged domain column decreases")

    run_criterion(capsys, 6, "learning descent", 30.0, body)


def test_criterion_7_immunization_scenario(capsys):
    def body(check):
        config = ScenarioConfig()
        first = run_immunization_scenario(config)
        second = run_immunization_scenario(config)
        t = first.tables

        cov = t["e2"]["coverage_at_tau_compare"]
        check(cov["u1"] < cov["u0"],
              f"strong perturbation: specialist family coverage {cov['u1']!r} "
              f"not below initial family coverage {cov['u0']!r}")
        acc = t["union"]["accuracy"]
        check(acc["imm"] >= acc["naive"] + 0.05,
              f"union accuracy: routed {acc['imm']!r} vs naive "
              f"{acc['naive']!r}, gap under 5 points")
        for env in ("e1", "e2"):
            ent = t[env]["entropy"]
            check(ent["imm"] < ent["u1"],
                  f"{env}: routed entropy {ent['imm']!r} not below the "
                  f"unrouted family's {ent['u1']!r}")
        blob1 = json.dumps(first.as_json_dict(), sort_keys=True).encode()
        blob2 = json.dumps(second.as_json_dict(), sort_keys=True).encode()
        check(blob1 == blob2, "same-seed reruns are not byte-identical")

    run_criterion(capsys, 7, "immunization scenario", 120.0, body)


def test_criterion_8_numerical_hygiene(capsys):
    def body(check):
        rng = np.random.default_rng(SEED + 8)

        # gradient against central finite differences along tangents
        eps = 1e-6
        for t in range(50):
            k = int(rng.integers(2, 6))
            y = LabelSet(tuple(f"c{i}" for i in range(k)))
            probs = rng.dirichlet(np.full(k, 4.0))
            probs = np.clip(probs, 0.05, None)
            probs = probs / probs.sum()
            d = Dist(y, tuple(float(p) for p in probs))
            tangent = rng.normal(size=k)
            tangent -= tangent.mean()
            tangent /= np.linalg.norm(tangent)
            plus = Dist(y, tuple(float(p + eps * v)
                                 for p, v in zip(d.probs, tangent)))
            minus = Dist(y, tuple(float(p - eps * v)
                                  for p, v in zip(d.probs, tangent)))
            fd = (shannon_entropy(plus, k) - shannon_entropy(minus, k)) / (2 * eps)
            dot = sum(g * v for g, v in zip(entropy_gradient(d, k), tangent))
            check(abs(fd - dot) <= 1e-6 * max(1.0, abs(dot)),
                  f"tangent {t}: finite difference {fd!r} vs gradient "
                  f"product {dot!r}")
            linear = linear_cross_entropy(tuple(float(v) for v in tangent),
                                          d, k)
            check(abs(dot - linear) <= 1e-9,
                  f"tangent {t}: gradient product {dot!r} disagrees with the "
                  f"linearized form {linear!r}")

        # Gibbs: cross entropy dominates entropy on random pairs
        for t in range(1000):
            k = int(rng.integers(2, 7))
            y = LabelSet(tuple(f"c{i}" for i in range(k)))

            def draw():
                p = np.maximum(rng.dirichlet(np.full(k, 1.0)), 1e-12)
                p = p / p.sum()
                return Dist(y, tuple(float(v) for v in p))

            d, g = draw(), draw()
            h = shannon_entropy(d, k)
            ce = cross_entropy(d, g, k)
            check(ce >= h - 1e-12,
                  f"pair {t}: cross entropy {ce!r} below entropy {h!r}")

        # the +infinity inventory: produced exactly where specified
        y2 = AB
        half = Dist(y2, (0.5, 0.5))
        hole = Dist(y2, (1.0, 0.0))
        check(cross_entropy(half, hole, 2) == math.inf,
              "mass on a zero must give +inf cross entropy")
        check(math.isfinite(cross_entropy(hole, half, 2)),
              "zero-mass labels in the first argument must be skipped")
        check(shannon_entropy(hole, 2) == 0.0,
              "0 log 0 must contribute nothing to entropy")
        check(linear_cross_entropy((-0.5, 0.5), hole, 2) == math.inf,
              "positive coefficient on a zero must give +inf")
        check(linear_cross_entropy((0.5, -0.5), hole, 2) == -math.inf,
              "negative coefficient on a zero must give -inf")
        check(math.isfinite(linear_cross_entropy((1.0, 0.0), hole, 2)),
              "zero coefficients must skip their term")

        tspace = make_space({"x": 1.0}, truth={"x": "b"})
        m = make_model("m", tspace, AB, {"x": (1.0, 0.0)})
        check(model_truth_cross_entropy(m) == math.inf,
              "zero mass on the truth label must give +inf model cross "
              "entropy")
        check(truth_pointwise_cross_entropy(Ensemble((m,)), "x") == math.inf,
              "zero mass on the truth label must give +inf ensemble cross "
              "entropy")

        mixed_space = make_space({"x": 1.0}, universe=LabelSet(("a", "b", "c")))
        left = make_model("left", mixed_space, AB, {"x": (0.6, 0.4)})
        right = make_model("right", mixed_space, LabelSet(("b", "c")),
                           {"x": (0.5, 0.5)})
        mixed = Ensemble((left, right))
        check(pointwise_entropy(mixed, "x").h_x == math.inf,
              "disjoint-leaning targets must give +inf pointwise entropy")
        check(total_entropy(mixed) == math.inf,
              "+inf pointwise entropy must propagate to the total")
        same = Ensemble((left,))
        check(math.isfinite(pointwise_entropy(same, "x").h_x),
              "a lone interior member must stay finite")

    run_criterion(capsys, 8, "numerical hygiene", None, body)
