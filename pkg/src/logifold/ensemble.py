"""Ensemble entropy calculus.

The pointwise entropy of an ensemble at a sample averages cross entropies
over all ordered pairs of covering models (diagonal included, normalization
1/K^2); each pair is compared in the simplex over the union of the two
target sets.  Out-of-domain samples carry the maximal value 1.  Totals
integrate against the space's weights, optionally adding the measure of the
uncovered complement.

Infinities propagate: a zero-probability mismatch across members makes the
affected pointwise value (and any total it enters) +inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import DomainError
from .model import Model
from .simplex import Dist, LabelSet, cross_entropy, embed, entropy_gradient, uniform
from .space import SampleSpace, SampleSubset, complement, measure


@dataclass(frozen=True)
class Ensemble:
    """A finite collection of models over one shared sample space."""

    members: tuple[Model, ...]
    name: str = ""
    _covering_cache: dict = field(init=False, repr=False, compare=False)

    def __init__(self, members: Sequence[Model], name: str = ""):
        members = tuple(members)
        if not members:
            raise DomainError("an ensemble needs at least one model")
        space = members[0].space
        for m in members[1:]:
            if m.space != space:
                raise DomainError(
                    f"model {m.model_id!r} lives on a different sample space")
        ids = [m.model_id for m in members]
        if len(set(ids)) != len(ids):
            raise DomainError(f"duplicate model ids in ensemble: {ids!r}")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_covering_cache", {})

    @property
    def space(self) -> SampleSpace:
        return self.members[0].space

    @property
    def label_universe(self) -> LabelSet:
        return self.space.label_universe

    def covering(self, sample_id: str) -> tuple[Model, ...]:
        """Members whose domain contains the sample."""
        if sample_id not in self.space:
            raise DomainError(f"unknown sample id {sample_id!r}")
        return tuple(m for m in self.members if m.covers(sample_id))


class PointwiseReport(NamedTuple):
    sample_id: str
    h_x: float
    k_x: int
    in_knowledge_domain: bool


class StrictnessResult(NamedTuple):
    strict: bool
    witness: Optional[str]


def knowledge_domain(e: Ensemble) -> SampleSubset:
    """Union of the member domains."""
    members: frozenset[str] = frozenset()
    for m in e.members:
        members = members | m.domain.members
    return SampleSubset(members)


def _common_target(models: Sequence[Model]) -> Optional[LabelSet]:
    target = models[0].target
    for m in models[1:]:
        if m.target != target:
            return None
    return target


def _pair_sum(models: Sequence[Model], sample_id: str) -> float:
    """sum over ordered pairs (l, r) of h(F_l, F_r) in base |T_l u T_r|."""
    target = _common_target(models)
    if target is not None and target.size >= 2:
        p = np.array([m.predict(sample_id).probs for m in models])
        nats = _kernels.pair_cross_total_nats(p)
        return nats / math.log(target.size)
    total = []
    for ml in models:
        fl = ml.predict(sample_id)
        for mr in models:
            fr = mr.predict(sample_id)
            pair_target = ml.target.union(mr.target)
            if pair_target.size < 2:
                # identical single-label targets: both predictions are the
                # same point mass, zero cross entropy in any convention
                continue
            value = cross_entropy(embed(fl, pair_target), embed(fr, pair_target),
                                  base=pair_target.size)
            if math.isinf(value):
                return math.inf
            total.append(value)
    return math.fsum(total)


def pointwise_entropy(e: Ensemble, sample_id: str) -> PointwiseReport:
    """Eq.-(2)-style pointwise entropy; 1 outside the knowledge domain."""
    covering = e.covering(sample_id)
    k = len(covering)
    if k == 0:
        return PointwiseReport(sample_id, 1.0, 0, False)
    h = _pair_sum(covering, sample_id) / (k * k)
    return PointwiseReport(sample_id, h, k, True)


def pointwise_entropy_values(e: Ensemble) -> dict[str, float]:
    """Pointwise entropy for every sample of the space, batched.

    Samples sharing a covering set and a common target are evaluated through
    the compiled kernels in one call; everything else goes sample by sample.
    """
    out: dict[str, float] = {}
    groups: dict[tuple[int, ...], list[str]] = {}
    for sid in e.space.sample_ids:
        sig = tuple(i for i, m in enumerate(e.members) if m.covers(sid))
        groups.setdefault(sig, []).append(sid)
    for sig, sids in groups.items():
        if not sig:
            for sid in sids:
                out[sid] = 1.0
            continue
        models = [e.members[i] for i in sig]
        k = len(models)
        target = _common_target(models)
        if target is not None and target.size >= 2:
            p = np.array([[m.predict(sid).probs for sid in sids] for m in models])
            nats = _kernels.batch_pair_cross_total_nats(p)
            scale = 1.0 / (k * k * math.log(target.size))
            for sid, v in zip(sids, nats):
                out[sid] = float(v) * scale
        else:
            for sid in sids:
                out[sid] = _pair_sum(models, sid) / (k * k)
    return out


def total_entropy(e: Ensemble, include_complement: bool = True) -> float:
    """Weighted integral of the pointwise entropy over the knowledge domain,
    plus (optionally) the measure of the uncovered complement."""
    values = pointwise_entropy_values(e)
    kd = knowledge_domain(e)
    terms = [e.space.weight(sid) * values[sid] for sid in e.space.ordered(kd)]
    if any(math.isinf(t) for t in terms):
        return math.inf
    total = math.fsum(terms)
    if include_complement:
        total += measure(e.space, complement(e.space, kd))
    return total


def pairwise_cross_entropy(m1: Model, m2: Model) -> float:
    """Weighted cross entropy of two models over their domain intersection,
    in base |T_1 u T_2|; 0 when the intersection is empty."""
    if m1.space != m2.space:
        raise DomainError("models live on different sample spaces")
    target = m1.target.union(m2.target)
    inter = m1.domain & m2.domain
    terms = []
    for sid in m1.space.ordered(inter):
        if target.size < 2:
            continue
        value = cross_entropy(embed(m1.predict(sid), target),
                              embed(m2.predict(sid), target), base=target.size)
        if math.isinf(value):
            return math.inf
        terms.append(m1.space.weight(sid) * value)
    return math.fsum(terms)


def pointwise_cross_entropy_ensembles(u: Ensemble, v: Ensemble,
                                      sample_id: str) -> float:
    """Pointwise cross entropy of an ordered pair of ensembles.

    Three cases: both cover the sample (mean of pairwise cross entropies);
    only the second does (log-product form); the second does not (value 1).
    """
    if u.space != v.space:
        raise DomainError("ensembles live on different sample spaces")
    left = u.covering(sample_id)
    right = v.covering(sample_id)
    if len(right) == 0:
        return 1.0
    if len(left) == 0:
        y_size = u.label_universe.size
        terms = []
        for mr in right:
            g = mr.predict(sample_id)
            t_r = mr.target.size
            if t_r < 2:
                raise DomainError(
                    "the log-product case is undefined for a single-label target")
            if any(p <= 0.0 for p in g.probs):
                return math.inf
            log_prod = math.fsum(math.log(p) for p in g.probs) / math.log(t_r)
            terms.append(log_prod)
        return -math.fsum(terms) / (len(right) * y_size)
    terms = []
    for ml in left:
        fl = ml.predict(sample_id)
        for mr in right:
            gr = mr.predict(sample_id)
            pair_target = ml.target.union(mr.target)
            value = cross_entropy(embed(fl, pair_target), embed(gr, pair_target),
                                  base=pair_target.size)
            if math.isinf(value):
                return math.inf
            terms.append(value)
    return math.fsum(terms) / (len(left) * len(right))


def total_cross_entropy_ensembles(u: Ensemble, v: Ensemble) -> float:
    """Weighted sum of the pointwise cross entropy over the whole space."""
    terms = []
    for sid in u.space.sample_ids:
        value = pointwise_cross_entropy_ensembles(u, v, sid)
        if math.isinf(value):
            return math.inf
        terms.append(u.space.weight(sid) * value)
    return math.fsum(terms)


def truth_pointwise_cross_entropy(u: Ensemble, sample_id: str) -> float:
    """Average over covering models of -log_|T_l| of the true-label
    probability; 1 outside the knowledge domain."""
    if u.space.truth is None:
        raise DomainError("truth cross entropy requires a truth labeling")
    covering = u.covering(sample_id)
    if not covering:
        return 1.0
    label = u.space.truth_label(sample_id)
    terms = []
    for m in covering:
        if m.target.size == 1:
            if label in m.target:
                continue
            return math.inf
        p = m.predict(sample_id).get(label, 0.0)
        if p <= 0.0:
            return math.inf
        terms.append(-math.log(p) / math.log(m.target.size))
    return math.fsum(terms) / len(covering)


def truth_total_cross_entropy(u: Ensemble, include_complement: bool = True) -> float:
    """Weighted integral of the truth pointwise cross entropy over the
    knowledge domain, plus optionally the uncovered complement."""
    kd = knowledge_domain(u)
    terms = []
    for sid in u.space.ordered(kd):
        value = truth_pointwise_cross_entropy(u, sid)
        if math.isinf(value):
            return math.inf
        terms.append(u.space.weight(sid) * value)
    total = math.fsum(terms)
    if include_complement:
        total += measure(u.space, complement(u.space, kd))
    return total


def average_function(e: Ensemble, sample_id: str) -> Dist:
    """Mean of the covering models' predictions embedded into the label
    universe; uniform when no model covers the sample."""
    y = e.label_universe
    covering = e.covering(sample_id)
    if not covering:
        return uniform(y)
    embedded = [embed(m.predict(sample_id), y) for m in covering]
    k = len(embedded)
    probs = [math.fsum(d.probs[i] for d in embedded) / k for i in range(y.size)]
    return Dist(y, probs)


def strictness_check(e: Ensemble) -> StrictnessResult:
    """Brute-force test for exactly-vanishing entropy.

    True iff every sample is covered and all covering models emit exactly
    one-hot predictions that agree on one labeling.  The witness names the
    first sample (in space order) that breaks either condition.
    """
    for sid in e.space.sample_ids:
        covering = e.covering(sid)
        if not covering:
            return StrictnessResult(False, sid)
        chosen = None
        for m in covering:
            pred = m.predict(sid)
            hot = [label for label, p in zip(pred.support.labels, pred.probs)
                   if p == 1.0]
            if len(hot) != 1 or any(0.0 < p < 1.0 for p in pred.probs):
                return StrictnessResult(False, sid)
            if chosen is None:
                chosen = hot[0]
            elif chosen != hot[0]:
                return StrictnessResult(False, sid)
    return StrictnessResult(True, None)


def conservation_residual_ensemble(e: Ensemble,
                                   include_complement: bool = True) -> float:
    """LHS - RHS of the ensemble conservation identity.

    LHS integrates the averaged entropy gradient dotted with (truth one-hot
    minus averaged prediction) over the knowledge domain; RHS is the truth
    total cross entropy minus the total entropy with complements handled
    identically.  Exact only for a common target set; mixed targets are
    refused because the two sides would use different logarithm scalings.
    """
    if e.space.truth is None:
        raise DomainError("the conservation check requires a truth labeling")
    target = _common_target(e.members)
    if target is None:
        raise DomainError(
            "members have heterogeneous targets; the identity is exact only "
            "for a common target set")
    base = target.size
    if base < 2:
        raise DomainError("the conservation check needs a target with >= 2 labels")
    kd = knowledge_domain(e)
    lhs_terms = []
    for sid in e.space.ordered(kd):
        covering = e.covering(sid)
        label = e.space.truth_label(sid)
        if label not in target:
            raise DomainError(
                f"true label {label!r} of {sid!r} is outside the common target")
        truth_idx = target.index(label)
        k = len(covering)
        grads = [entropy_gradient(m.predict(sid), base) for m in covering]
        v = [math.fsum(g[i] for g in grads) / k for i in range(base)]
        f = [math.fsum(m.predict(sid).probs[i] for m in covering) / k
             for i in range(base)]
        tangent = [(1.0 if i == truth_idx else 0.0) - f[i] for i in range(base)]
        dot = math.fsum(vi * ti for vi, ti in zip(v, tangent))
        lhs_terms.append(e.space.weight(sid) * dot)
    lhs = math.fsum(lhs_terms)
    rhs = (truth_total_cross_entropy(e, include_complement)
           - total_entropy(e, include_complement))
    return lhs - rhs
