"""Randomized verification suites for the calculus' exact laws.

Each suite generates seeded random instances, evaluates both sides of a law
through independent code paths, and reports counterexamples instead of
raising.  The same suites back the `verify-laws` command and the acceptance
tests, so the instance generators live here too.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .core import theoretical_bound
from .ensemble import (Ensemble, conservation_residual_ensemble,
                       pointwise_entropy_values, strictness_check, total_entropy)
from .model import Model, conservation_residual_single
from .simplex import Dist, LabelSet, argmax_label, one_hot
from .space import SampleSpace, SampleSubset


class SuiteResult(NamedTuple):
    name: str
    trials: int
    failures: tuple[str, ...]
    worst: Optional[float]

    @property
    def passed(self) -> bool:
        return not self.failures


def _labels(k: int) -> LabelSet:
    return LabelSet(tuple(f"c{i}" for i in range(k)))


def random_space(rng: np.random.Generator, n_samples: int, labels: LabelSet,
                 with_truth: bool = True,
                 truth_from: Optional[LabelSet] = None) -> SampleSpace:
    """Random positively weighted space, optionally with random truth labels
    drawn from `truth_from` (default: the whole universe)."""
    ids = tuple(f"s{i:03d}" for i in range(n_samples))
    weights = rng.uniform(0.2, 1.0, size=n_samples)
    samples = tuple(zip(ids, (float(w) for w in weights)))
    truth = None
    if with_truth:
        pool = tuple(truth_from.labels if truth_from is not None else labels.labels)
        picks = rng.integers(0, len(pool), size=n_samples)
        truth = {sid: pool[int(i)] for sid, i in zip(ids, picks)}
    return SampleSpace(samples, labels, truth)


def random_subset(rng: np.random.Generator, space: SampleSpace,
                  keep_prob: float) -> SampleSubset:
    mask = rng.random(len(space.sample_ids)) < keep_prob
    return SampleSubset(frozenset(
        sid for sid, m in zip(space.sample_ids, mask) if m))


def random_interior_model(rng: np.random.Generator, model_id: str,
                          space: SampleSpace, domain: SampleSubset,
                          target: LabelSet) -> Model:
    """Model with strictly interior Dirichlet predictions on the domain."""
    predictions = {}
    for sid in space.ordered(domain):
        probs = rng.dirichlet(np.full(target.size, 2.0))
        probs = np.maximum(probs, 1e-9)
        probs = probs / probs.sum()
        predictions[sid] = Dist(target, tuple(float(p) for p in probs))
    return Model(model_id, space, domain, target, predictions)


def random_interior_ensemble(rng: np.random.Generator, space: SampleSpace,
                             target: LabelSet, n_models: int,
                             keep_prob: float = 0.8) -> Ensemble:
    members = []
    for i in range(n_models):
        domain = random_subset(rng, space, keep_prob)
        members.append(random_interior_model(rng, f"m{i}", space, domain, target))
    return Ensemble(members)


def _strict_ensemble(rng: np.random.Generator, space: SampleSpace,
                     n_models: int) -> Ensemble:
    """Full-cover ensemble of exactly one-hot models agreeing on one labeling."""
    y = space.label_universe
    picks = rng.integers(0, y.size, size=len(space.sample_ids))
    labeling = {sid: y.labels[int(i)] for sid, i in zip(space.sample_ids, picks)}
    members = []
    for i in range(n_models):
        if i == 0:
            domain = SampleSubset(frozenset(space.sample_ids))
        else:
            domain = random_subset(rng, space, 0.6)
        predictions = {sid: one_hot(y, labeling[sid])
                       for sid in space.ordered(domain)}
        members.append(Model(f"m{i}", space, domain, y, predictions))
    return Ensemble(members)


def _break_strictness(rng: np.random.Generator, e: Ensemble, mode: int) -> Ensemble:
    """Damage a strict ensemble: disagree (mode 0), uncover (mode 1), or
    blur one prediction (mode 2)."""
    space = e.space
    y = space.label_universe
    if mode == 1:
        victim = space.sample_ids[int(rng.integers(0, len(space.sample_ids)))]
        members = []
        for m in e.members:
            domain = SampleSubset(m.domain.members - {victim})
            predictions = {sid: m.predict(sid) for sid in space.ordered(domain)}
            members.append(Model(m.model_id, space, domain, m.target, predictions))
        return Ensemble(members)
    first = e.members[0]
    victim = space.sample_ids[int(rng.integers(0, len(space.sample_ids)))]
    old = first.predict(victim)
    if mode == 0:
        current = argmax_label(old).label
        others = [lab for lab in y.labels if lab != current]
        replacement = one_hot(y, others[int(rng.integers(0, len(others)))])
    else:
        probs = [0.9 if p == 1.0 else 0.1 / (y.size - 1) for p in old.probs]
        replacement = Dist(y, probs)
    predictions = {sid: (replacement if sid == victim else first.predict(sid))
                   for sid in space.ordered(first.domain)}
    fixed = Model(first.model_id, space, first.domain, first.target, predictions)
    return Ensemble((fixed,) + e.members[1:])


def suite_conservation_single(seed: int, trials: int = 100,
                              tol: float = 1e-9) -> SuiteResult:
    """|residual| of the single-model conservation identity on random
    interior models with partial domains."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 101]))
    failures = []
    worst = 0.0
    for t in range(trials):
        t_size = int(rng.integers(2, 6))
        target = _labels(t_size)
        space = random_space(rng, int(rng.integers(2, 16)), target,
                             truth_from=target)
        domain = random_subset(rng, space, 0.7)
        m = random_interior_model(rng, "m0", space, domain, target)
        include = t % 2 == 0
        r = abs(conservation_residual_single(m, include_complement=include))
        worst = max(worst, r)
        if not r <= tol:
            failures.append(f"trial {t}: single-model residual {r:.3e} > {tol}")
    return SuiteResult("conservation-single", trials, tuple(failures), worst)


def suite_conservation_ensemble(seed: int, trials: int = 100,
                                tol: float = 1e-9) -> SuiteResult:
    """|residual| of the ensemble conservation identity on random interior
    common-target 3-model ensembles."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 102]))
    failures = []
    worst = 0.0
    for t in range(trials):
        target = _labels(4)
        space = random_space(rng, 10, target, truth_from=target)
        e = random_interior_ensemble(rng, space, target, 3, keep_prob=0.8)
        include = t % 2 == 0
        r = abs(conservation_residual_ensemble(e, include_complement=include))
        worst = max(worst, r)
        if not r <= tol:
            failures.append(f"trial {t}: ensemble residual {r:.3e} > {tol}")
    return SuiteResult("conservation-ensemble", trials, tuple(failures), worst)


def suite_strictness(seed: int, trials: int = 100) -> SuiteResult:
    """Exact equivalence: total entropy (complement included) vanishes iff
    the ensemble covers the space and agrees with one-hot certainty.

    Trials rotate through random fuzzy instances, constructed strict
    positives, and three ways of breaking strictness.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 103]))
    failures = []
    for t in range(trials):
        y = _labels(int(rng.integers(2, 6)))
        space = random_space(rng, int(rng.integers(2, 21)), y, with_truth=False)
        n_models = int(rng.integers(1, 5))
        kind = t % 5
        if kind == 0:
            e = random_interior_ensemble(rng, space, y, n_models, keep_prob=0.7)
        elif kind == 1:
            e = _strict_ensemble(rng, space, n_models)
        else:
            e = _break_strictness(rng, _strict_ensemble(rng, space, n_models),
                                  kind - 2)
        vanishes = total_entropy(e, include_complement=True) == 0.0
        strict = strictness_check(e).strict
        if vanishes != strict:
            failures.append(
                f"trial {t} (kind {kind}): entropy-vanishes={vanishes} but "
                f"strictness-check={strict}")
    return SuiteResult("strictness-equivalence", trials, tuple(failures), None)


def suite_core_agreement(seed: int, trials: int = 200) -> SuiteResult:
    """Below the bound, every core sample has a unique argmax per covering
    model and all covering models name the same label (brute force)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 104]))
    failures = []
    for t in range(trials):
        y = _labels(4)
        space = random_space(rng, 30, y, with_truth=False)
        e = random_interior_ensemble(rng, space, y, 3, keep_prob=0.8)
        p = 0.9 * theoretical_bound(y.size)
        values = pointwise_entropy_values(e)
        for sid in space.sample_ids:
            if not values[sid] < p:
                continue
            seen = set()
            for m in e.covering(sid):
                result = argmax_label(m.predict(sid))
                if result.tie:
                    failures.append(f"trial {t}: tied argmax at {sid}")
                seen.add(result.label)
            if len(seen) != 1:
                failures.append(
                    f"trial {t}: core sample {sid} has argmax disagreement "
                    f"{sorted(map(str, seen))}")
    return SuiteResult("core-agreement", trials, tuple(failures), None)


def run_all_suites(seed: int, trials: int = 100) -> list[SuiteResult]:
    return [
        suite_conservation_single(seed, trials),
        suite_conservation_ensemble(seed, trials),
        suite_strictness(seed, trials),
        suite_core_agreement(seed, max(trials, 200) if trials >= 100 else trials),
    ]
