"""Admitted learning steps over a finite labeled space.

A step is admitted only if it strictly lowers the truth cross entropy while
never shrinking the covered domain.  Training continues through rejected
attempts; only admitted states are logged, and a run stops cleanly after
too many consecutive rejections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from ..ensemble import Ensemble, total_entropy, truth_total_cross_entropy
from ..core import aggregator_accuracy
from ..errors import DomainError, NoDataError
from ..simplex import LabelSet
from ..space import SampleSpace, SampleSubset, measure
from .learner import LabeledBatch, ToyLearner, learner_as_model, train_learner


class LogRecord(NamedTuple):
    step: int
    truth_cross_entropy: float
    entropy: float
    accuracy: float
    memory: float
    coverage: float


@dataclass(frozen=True)
class LearningLog:
    records: tuple[LogRecord, ...]
    stopped_reason: str

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def truth_ce_column(self) -> list[float]:
        return [r.truth_cross_entropy for r in self.records]

    def coverage_column(self) -> list[float]:
        return [r.coverage for r in self.records]


@dataclass(frozen=True)
class LearnerSpec:
    seed: int
    learning_rate: float = 2.0
    init_scale: float = 0.01


@dataclass(frozen=True)
class ProcessSchedule:
    max_steps: int = 60
    epochs_per_attempt: int = 10
    patience: int = 12
    ce_floor: float = 1e-3
    # covered fraction of the space per training attempt; clamped to the last
    # entry once exhausted, must be nondecreasing.  Indexed by attempt, not
    # admitted step: a rejected attempt at one fraction must not pin the
    # curriculum there, or a cross-entropy plateau under a partial domain
    # (the uncovered mass contributes a constant) would stall the run.
    domain_fractions: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        if not self.domain_fractions:
            raise DomainError("domain_fractions must be nonempty")
        if list(self.domain_fractions) != sorted(self.domain_fractions):
            raise DomainError("domain_fractions must be nondecreasing")
        if not 0.0 < self.domain_fractions[-1] <= 1.0:
            raise DomainError("domain fractions must end in (0, 1]")

    def fraction_at(self, step: int) -> float:
        i = min(step, len(self.domain_fractions) - 1)
        return self.domain_fractions[i]


def _prefix_domain(space: SampleSpace, fraction: float) -> SampleSubset:
    n = len(space.sample_ids)
    k = min(n, max(1, math.ceil(fraction * n)))
    return SampleSubset(frozenset(space.sample_ids[:k]))


def _materialize(learners: Sequence[ToyLearner], space: SampleSpace,
                 domain: SampleSubset, batch: LabeledBatch) -> Ensemble:
    models = [learner_as_model(l, space, domain, batch, f"learner{i}")
              for i, l in enumerate(learners)]
    return Ensemble(models)


def run_learning_process(space: SampleSpace, truth: Optional[dict],
                         batch: LabeledBatch,
                         learner_specs: Sequence[LearnerSpec],
                         schedule: ProcessSchedule) -> LearningLog:
    """Train an ensemble of toy learners with the admission rule.

    `truth` overrides or supplies the labeling when the space carries none;
    `batch` provides the feature rows for every sample.  Logged columns:
    truth cross entropy (strictly decreasing), total entropy, aggregator
    accuracy, entropy with complement dropped (the memory proxy), and
    covered fraction (nondecreasing).
    """
    if truth is not None:
        space = space.with_truth(truth)
    if space.truth is None:
        raise DomainError("a learning process needs a truth labeling")
    if not learner_specs:
        raise NoDataError("no learners specified")
    if len(space.sample_ids) == 0:
        raise NoDataError("empty sample space")
    universe = space.label_universe
    learners = [ToyLearner.new(batch.feature_dim, universe, spec.seed,
                               spec.learning_rate, spec.init_scale)
                for spec in learner_specs]

    def snapshot(step: int, ens: Ensemble, domain: SampleSubset) -> LogRecord:
        ce = truth_total_cross_entropy(ens, include_complement=True)
        ent = total_entropy(ens, include_complement=True)
        mem = total_entropy(ens, include_complement=False)
        acc = aggregator_accuracy(ens, space,
                                  SampleSubset(frozenset(space.sample_ids)))
        cov = measure(space, domain) / space.total_mass
        return LogRecord(step, ce, ent, acc if acc is not None else 0.0, mem, cov)

    domain = _prefix_domain(space, schedule.fraction_at(0))
    ensemble = _materialize(learners, space, domain, batch)
    records = [snapshot(0, ensemble, domain)]
    last_ce = records[0].truth_cross_entropy
    reason = "max-steps"
    rejected = 0
    step = 1
    attempt = 1
    while step <= schedule.max_steps:
        if last_ce < schedule.ce_floor:
            reason = "ce-floor"
            break
        candidate_domain = _prefix_domain(space, schedule.fraction_at(attempt))
        attempt += 1
        train_data = batch.subset(candidate_domain)
        learners = [train_learner(l, train_data, schedule.epochs_per_attempt)
                    for l in learners]
        ensemble = _materialize(learners, space, candidate_domain, batch)
        ce = truth_total_cross_entropy(ensemble, include_complement=True)
        if ce < last_ce:
            domain = candidate_domain
            records.append(snapshot(step, ensemble, domain))
            last_ce = ce
            rejected = 0
            step += 1
        else:
            rejected += 1
            if rejected >= schedule.patience:
                reason = "patience"
                break
    else:
        reason = "max-steps"
    if last_ce < schedule.ce_floor and reason == "max-steps":
        reason = "ce-floor"
    return LearningLog(tuple(records), reason)


def separable_fixture(seed: int = 7) -> tuple[SampleSpace, LabeledBatch,
                                              list[LearnerSpec], ProcessSchedule]:
    """Two well-separated 2D blobs; any correct trainer drives the truth
    cross entropy toward zero here."""
    from .learner import Environment

    labels = LabelSet(("neg", "pos"))
    env = Environment("sep", labels, seed=seed, radius=3.0, std=0.35)
    batch = env.sample(120, "train")
    space = batch.to_space(with_truth=True)
    specs = [LearnerSpec(seed=seed + i, learning_rate=4.0) for i in range(3)]
    schedule = ProcessSchedule(
        max_steps=80, epochs_per_attempt=25, patience=15, ce_floor=5e-3,
        domain_fractions=(0.6, 0.6, 0.6, 0.8, 0.8, 1.0))
    return space, batch, specs, schedule
