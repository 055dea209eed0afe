"""Cores, non-fuzzy limits, and threshold selection.

The core at threshold p is the strict sublevel set of the pointwise
ensemble entropy.  Below the closed-form bound min(2/|Y|, log_|Y| 3/2) the
covering models are guaranteed a unanimous unique argmax on the core;
larger thresholds are allowed (sweeps go up to 1.4) but only carry a
warning and weaker semantics.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Sequence

from .ensemble import Ensemble, average_function, pointwise_entropy_values
from .errors import BoundWarning, DomainError, PropertyViolation
from .simplex import argmax_label
from .space import SampleSpace, SampleSubset, measure


def theoretical_bound(y_size: int) -> float:
    """min(2/|Y|, log_|Y|(3/2)) for a label universe of the given size."""
    if y_size < 2:
        raise DomainError("the bound needs a label universe with >= 2 labels")
    return min(2.0 / y_size, math.log(1.5) / math.log(y_size))


@dataclass(frozen=True)
class CoreResult:
    threshold: float
    members: SampleSubset
    coverage: float
    theoretical_bound: float
    within_bound: bool


def _sublevel(space: SampleSpace, values: Mapping, p: float) -> SampleSubset:
    return SampleSubset(frozenset(
        sid for sid in space.sample_ids if values[sid] < p))


def compute_core(e: Ensemble, p: float) -> CoreResult:
    """Strict sublevel set {x : H_x < p} with its coverage fraction."""
    if p < 0:
        raise DomainError(f"threshold must be >= 0, got {p!r}")
    bound = theoretical_bound(e.label_universe.size)
    within = p <= bound
    if not within:
        warnings.warn(
            f"threshold {p} exceeds the agreement bound {bound:.6f}; the "
            "non-fuzzy-limit guarantee does not apply", BoundWarning,
            stacklevel=2)
    values = pointwise_entropy_values(e)
    members = _sublevel(e.space, values, p)
    coverage = measure(e.space, members) / e.space.total_mass
    return CoreResult(p, members, coverage, bound, within)


class NonFuzzyResult(Mapping):
    """Partial labeling of the core; mapping sample_id -> label.

    `flags` marks core samples where a covering model had a tied argmax or
    the models disagreed (possible only under override).
    """

    def __init__(self, labels: dict, flags: dict):
        self._labels = dict(labels)
        self.flags = dict(flags)

    def __getitem__(self, sample_id: str):
        return self._labels[sample_id]

    def __iter__(self) -> Iterator[str]:
        return iter(self._labels)

    def __len__(self) -> int:
        return len(self._labels)

    def __repr__(self) -> str:
        return f"NonFuzzyResult({self._labels!r}, flags={self.flags!r})"


def non_fuzzy_limit(e: Ensemble, p: float, override: bool = False) -> NonFuzzyResult:
    """Common argmax labeling on the core at threshold p.

    Within the bound, uniqueness of each argmax and agreement across
    covering models are guaranteed; both are verified and a violation
    raises, since it would falsify the implementation.  With override=true
    thresholds beyond the bound are admitted: ties and disagreements are
    then flagged instead of fatal and a majority argmax is returned.
    """
    bound = theoretical_bound(e.label_universe.size)
    if p >= bound and not override:
        raise DomainError(
            f"threshold {p} is not below the bound {bound:.6f}; pass "
            "override=True to accept flagged majority labels")
    values = pointwise_entropy_values(e)
    core = _sublevel(e.space, values, p)
    labels: dict = {}
    flags: dict = {}
    for sid in e.space.ordered(core):
        votes = []
        tie_seen = False
        for m in e.covering(sid):
            result = argmax_label(m.predict(sid))
            votes.append(result.label)
            tie_seen = tie_seen or result.tie
        counts = Counter(votes)
        top = counts.most_common()
        best_count = top[0][1]
        leaders = sorted((label for label, c in top if c == best_count),
                         key=lambda lab: (type(lab).__name__, lab))
        majority = leaders[0]
        unanimous = len(counts) == 1 and not tie_seen
        if not unanimous:
            if not override:
                raise PropertyViolation(
                    f"core sample {sid!r} at threshold {p} lacks a unanimous "
                    f"unique argmax (votes {dict(counts)!r}, tie={tie_seen}); "
                    "this falsifies the within-bound agreement guarantee")
            flags[sid] = "tie" if (tie_seen and len(counts) == 1) else "disagreement"
        labels[sid] = majority
    return NonFuzzyResult(labels, flags)


class SweepPoint(NamedTuple):
    tau: float
    core_coverage: float
    core_accuracy: Optional[float]
    outcore_accuracy: Optional[float]
    core_count: int


@dataclass(frozen=True)
class SweepCurve:
    points: tuple[SweepPoint, ...]

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)


def default_grid() -> tuple[float, ...]:
    """141 thresholds: 0, 0.01, ..., 1.40."""
    return tuple(i / 100 for i in range(141))


def _check_eval_space(e: Ensemble, labeled_eval: SampleSpace) -> None:
    if labeled_eval.truth is None:
        raise DomainError("sweep evaluation needs a truth labeling")
    if labeled_eval.samples != e.space.samples:
        raise DomainError(
            "evaluation space must carry the same samples and weights as "
            "the ensemble's space")


def aggregator_accuracy(e: Ensemble, labeled_eval: SampleSpace,
                        subset: SampleSubset) -> Optional[float]:
    """Weighted argmax accuracy of the probability-average aggregator on the
    subset; None (undefined) when the subset is empty."""
    _check_eval_space(e, labeled_eval)
    mass = measure(labeled_eval, subset)
    if mass == 0.0:
        return None
    hits = []
    for sid in labeled_eval.ordered(subset):
        predicted = argmax_label(average_function(e, sid)).label
        if predicted == labeled_eval.truth_label(sid):
            hits.append(labeled_eval.weight(sid))
    return math.fsum(hits) / mass


def threshold_sweep(e: Ensemble, labeled_eval: SampleSpace,
                    grid: Optional[Sequence[float]] = None) -> SweepCurve:
    """Coverage and aggregator accuracy of C_tau across a threshold grid."""
    _check_eval_space(e, labeled_eval)
    taus = default_grid() if grid is None else tuple(grid)
    if not taus:
        raise DomainError("sweep grid is empty")
    if list(taus) != sorted(taus):
        raise DomainError("sweep grid must be sorted ascending")
    values = pointwise_entropy_values(e)
    total = labeled_eval.total_mass
    correct = {}
    for sid in labeled_eval.sample_ids:
        predicted = argmax_label(average_function(e, sid)).label
        correct[sid] = predicted == labeled_eval.truth_label(sid)
    points = []
    for tau in taus:
        core = _sublevel(labeled_eval, values, tau)
        in_mass = measure(labeled_eval, core)
        out_mass = total - in_mass
        in_hits = math.fsum(labeled_eval.weight(sid)
                            for sid in labeled_eval.ordered(core)
                            if correct[sid])
        all_hits = math.fsum(labeled_eval.weight(sid)
                             for sid in labeled_eval.sample_ids if correct[sid])
        core_acc = None if in_mass == 0.0 else in_hits / in_mass
        out_acc = None if out_mass <= 0.0 else (all_hits - in_hits) / out_mass
        points.append(SweepPoint(tau, in_mass / total, core_acc, out_acc,
                                 len(core)))
    return SweepCurve(tuple(points))


def select_threshold(curve: SweepCurve, target_core_accuracy: float) -> Optional[float]:
    """Largest grid threshold whose core accuracy meets the target.

    Coverage is nondecreasing in tau, so the largest qualifying threshold
    also maximizes coverage.  An undefined (empty-core) accuracy never
    qualifies.  None means no usable threshold exists: the annihilation
    signal.  Targets above 1 are allowed and simply never met.
    """
    if not curve.points:
        raise DomainError("cannot select a threshold from an empty curve")
    if target_core_accuracy <= 0:
        raise DomainError("target accuracy must be positive")
    chosen = None
    for point in curve.points:
        if point.core_accuracy is not None and point.core_accuracy >= target_core_accuracy:
            chosen = point.tau
    return chosen
