"""Multi-generation routing systems.

A system is an ordered list of generations over one shared sample space.
A sample is handled by the first active generation whose pointwise entropy
at the sample is below that generation's threshold; the last active
generation absorbs whatever remains, so routing is always a partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

from ..core import SweepCurve, select_threshold
from ..ensemble import (Ensemble, average_function, pointwise_entropy,
                        pointwise_entropy_values, total_entropy)
from ..errors import DomainError, NoDataError
from ..model import Model
from ..simplex import Dist, argmax_label
from ..space import SampleSpace, SampleSubset, measure
from .learner import LabeledBatch, ToyLearner, learner_as_model, train_learner

ACTIVE = "active"
ANNIHILATED = "annihilated"


@dataclass(frozen=True)
class Generation:
    gen_index: int
    ensemble: Ensemble
    threshold: Optional[float]
    status: str = ACTIVE
    baseline_coverage: Optional[float] = None

    def __post_init__(self):
        if self.status not in (ACTIVE, ANNIHILATED):
            raise DomainError(f"unknown generation status {self.status!r}")
        if self.status == ANNIHILATED and self.threshold is not None:
            raise DomainError("an annihilated generation carries no threshold")


@dataclass(frozen=True)
class LogifoldSystem:
    generations: tuple[Generation, ...]
    trigger_delta: float = 0.2
    accuracy_target: float = 0.9

    def __post_init__(self):
        if not self.generations:
            raise DomainError("a system needs at least one generation")
        space = self.generations[0].ensemble.space
        for g in self.generations[1:]:
            if g.ensemble.space != space:
                raise DomainError("generations live on different sample spaces")
        if not self.active_generations():
            raise DomainError("a system needs at least one active generation")

    @property
    def space(self) -> SampleSpace:
        return self.generations[0].ensemble.space

    def active_generations(self) -> tuple[Generation, ...]:
        return tuple(g for g in self.generations if g.status == ACTIVE)


class RoutedPrediction(NamedTuple):
    dist: Dist
    generation_index: int


def route_partition(sys: LogifoldSystem) -> dict[int, SampleSubset]:
    """Which generation handles which sample; keys are gen_index values of
    the active generations, every sample appears exactly once."""
    active = sys.active_generations()
    if not active:
        raise DomainError("no active generations to route to")
    entropy_maps = {g.gen_index: pointwise_entropy_values(g.ensemble)
                    for g in active[:-1] if g.threshold is not None}
    assignment: dict[int, set[str]] = {g.gen_index: set() for g in active}
    last = active[-1]
    for sid in sys.space.sample_ids:
        handler = last.gen_index
        for g in active[:-1]:
            if g.threshold is None:
                continue
            if entropy_maps[g.gen_index][sid] < g.threshold:
                handler = g.gen_index
                break
        assignment[handler].add(sid)
    return {gi: SampleSubset(frozenset(ids)) for gi, ids in assignment.items()}


def imm_route(sys: LogifoldSystem, sample_id: str) -> RoutedPrediction:
    """Route one sample: first in-core active generation wins, the last
    active generation absorbs out-of-core samples."""
    active = sys.active_generations()
    if not active:
        raise DomainError("no active generations to route to")
    for g in active[:-1]:
        if g.threshold is None:
            continue
        if pointwise_entropy(g.ensemble, sample_id).h_x < g.threshold:
            return RoutedPrediction(average_function(g.ensemble, sample_id),
                                    g.gen_index)
    last = active[-1]
    return RoutedPrediction(average_function(last.ensemble, sample_id),
                            last.gen_index)


class GenerationShare(NamedTuple):
    gen_index: int
    handled: SampleSubset
    mass: float
    correct_count: int
    sample_count: int
    accuracy: Optional[float]


class RouteReport(NamedTuple):
    accuracy: float
    shares: tuple[GenerationShare, ...]
    total_mass: float


def _check_labeled(sys: LogifoldSystem, labeled: Optional[SampleSpace]) -> SampleSpace:
    space = sys.space if labeled is None else labeled
    if space.truth is None:
        raise DomainError("evaluation needs a truth labeling")
    if space.samples != sys.space.samples:
        raise DomainError(
            "evaluation space must carry the same samples and weights as "
            "the system's space")
    return space


def route_report(sys: LogifoldSystem,
                 labeled: Optional[SampleSpace] = None) -> RouteReport:
    """Routed accuracy with the per-generation breakdown behind the
    accounting identity accuracy = sum of coverage_g * accuracy_g."""
    space = _check_labeled(sys, labeled)
    partition = route_partition(sys)
    by_index = {g.gen_index: g for g in sys.active_generations()}
    shares = []
    hit_terms = []
    for gi in sorted(partition):
        region = partition[gi]
        ens = by_index[gi].ensemble
        mass = measure(space, region)
        hits = []
        n_correct = 0
        for sid in space.ordered(region):
            predicted = argmax_label(average_function(ens, sid)).label
            if predicted == space.truth_label(sid):
                hits.append(space.weight(sid))
                n_correct += 1
        acc = None if mass == 0.0 else math.fsum(hits) / mass
        shares.append(GenerationShare(gi, region, mass, n_correct,
                                      len(region), acc))
        hit_terms.extend(hits)
    total = space.total_mass
    return RouteReport(math.fsum(hit_terms) / total, tuple(shares), total)


def evaluate_P(sys: LogifoldSystem,
               labeled: Optional[SampleSpace] = None) -> float:
    """Weighted argmax accuracy of the routed predictions."""
    return route_report(sys, labeled).accuracy


def _restrict(m: Model, region: SampleSubset, new_id: str) -> Model:
    domain = m.domain & region
    predictions = {sid: m.predict(sid) for sid in m.space.ordered(domain)}
    return Model(new_id, m.space, domain, m.target, predictions)


def memory_I(sys: LogifoldSystem) -> float:
    """Total entropy of the union of the active generations, each member
    restricted to the region its generation actually handles.

    The restriction reflects the routing semantics: a generation's opinion
    outside its handled region never reaches the output.  The uncovered
    complement is dropped (routing is total, so it is empty anyway when
    members cover the space).
    """
    partition = route_partition(sys)
    members = []
    for g in sys.active_generations():
        region = partition[g.gen_index]
        for m in g.ensemble.members:
            members.append(_restrict(m, region, f"g{g.gen_index}:{m.model_id}"))
    return total_entropy(Ensemble(members), include_complement=False)


class ChangeReport(NamedTuple):
    coverage: float
    baseline_coverage: float
    triggered: bool


def detect_environment_change(g: Generation, batch: Optional[SampleSubset] = None,
                              trigger_delta: float = 0.2) -> ChangeReport:
    """Coverage of the batch inside the generation's core versus the
    baseline recorded at threshold selection; a drop beyond the trigger
    fraction signals an environment change."""
    if g.status != ACTIVE or g.threshold is None:
        raise DomainError("an annihilated generation cannot detect changes")
    if g.baseline_coverage is None:
        raise DomainError("generation has no recorded baseline coverage")
    space = g.ensemble.space
    ids = batch if batch is not None else SampleSubset(frozenset(space.sample_ids))
    if len(ids) == 0:
        raise NoDataError("empty batch: cannot measure coverage")
    values = pointwise_entropy_values(g.ensemble)
    total = measure(space, ids)
    inside = math.fsum(space.weight(sid) for sid in space.ordered(ids)
                       if values[sid] < g.threshold)
    coverage = inside / total
    triggered = (g.baseline_coverage - coverage) > trigger_delta
    return ChangeReport(coverage, g.baseline_coverage, triggered)


@dataclass(frozen=True)
class SpawnSpec:
    count: int
    seed: int
    epochs: int = 300
    learning_rate: float = 2.0
    init_scale: float = 0.01
    threshold: Optional[float] = None
    baseline_coverage: Optional[float] = None
    extra_training: Optional[LabeledBatch] = None

    def __post_init__(self):
        if self.count <= 0:
            raise DomainError("spawn count must be positive")


def spawn_generation(sys: LogifoldSystem, out_of_core: LabeledBatch,
                     spec: SpawnSpec) -> LogifoldSystem:
    """Train fresh learners on the out-of-core batch and append them as a
    new generation whose domain is exactly that region.

    `spec.extra_training` (the union-with-clean option) widens the training
    data without widening the domain.  Earlier generations keep their
    thresholds; the new generation becomes the absorbing last one.
    """
    if len(out_of_core) == 0:
        raise NoDataError("cannot spawn from an empty out-of-core batch")
    space = sys.space
    region = SampleSubset(frozenset(out_of_core.sample_ids))
    unknown = region.members - set(space.sample_ids)
    if unknown:
        raise DomainError(
            f"out-of-core samples not in the system space: {sorted(unknown)[:5]!r}")
    train_data = out_of_core
    if spec.extra_training is not None:
        from .learner import concat_batches
        train_data = concat_batches(out_of_core, spec.extra_training)
    universe = space.label_universe
    next_index = max(g.gen_index for g in sys.generations) + 1
    models = []
    for j in range(spec.count):
        learner = ToyLearner.new(out_of_core.feature_dim, universe,
                                 spec.seed + j, spec.learning_rate,
                                 spec.init_scale)
        learner = train_learner(learner, train_data, spec.epochs)
        models.append(learner_as_model(
            learner, space, region, out_of_core, f"spawn{next_index}_{j}"))
    gen = Generation(next_index, Ensemble(models), spec.threshold,
                     ACTIVE, spec.baseline_coverage)
    return replace(sys, generations=sys.generations + (gen,))


def annihilate_if_unusable(sys: LogifoldSystem, gen_index: int,
                           curve: SweepCurve) -> LogifoldSystem:
    """Mark a generation annihilated when no grid threshold reaches the
    accuracy target; refuse if it is the only active generation."""
    tau = select_threshold(curve, sys.accuracy_target)
    if tau is not None:
        return sys
    active = sys.active_generations()
    target = None
    for g in sys.generations:
        if g.gen_index == gen_index:
            target = g
    if target is None:
        raise DomainError(f"no generation with index {gen_index}")
    if target.status == ANNIHILATED:
        return sys
    if len(active) <= 1:
        raise DomainError(
            "refusing to annihilate the only active generation; routing "
            "must stay total")
    updated = tuple(
        replace(g, status=ANNIHILATED, threshold=None, baseline_coverage=None)
        if g.gen_index == gen_index else g
        for g in sys.generations)
    return replace(sys, generations=updated)
