"""A single partial-domain classifier as a prediction table.

Only the composite prediction map restricted to the sample space is stored;
the Euclidean feature map behind it is not observable by any formula here.
Entropy and truth cross entropy integrate per-sample terms against the
space's weights, plus the measure of the uncovered complement (each
uncovered unit of mass contributes the maximal value 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import DomainError
from .simplex import (
    Dist,
    LabelSet,
    entropy_gradient,
    one_hot,
    shannon_entropy,
)
from .space import SampleSpace, SampleSubset, complement, measure


@dataclass(frozen=True)
class Model:
    """A classifier defined on a subset of a sample space.

    predictions maps every domain member (and no other sample) to a Dist
    over `target`; `target` must sit inside the space's label universe.
    """

    model_id: str
    space: SampleSpace
    domain: SampleSubset
    target: LabelSet
    predictions: Mapping[str, Dist]
    _pred: dict = field(init=False, repr=False, compare=False)

    def __init__(self, model_id: str, space: SampleSpace, domain: SampleSubset,
                 target: LabelSet, predictions: Mapping[str, Dist]):
        space._check(domain)
        if not target.issubset(space.label_universe):
            raise DomainError(
                f"target {target.labels!r} is not contained in the label universe")
        pred = dict(predictions)
        if set(pred) != set(domain.members):
            extra = sorted(set(pred) - set(domain.members))[:5]
            missing = sorted(set(domain.members) - set(pred))[:5]
            raise DomainError(
                f"predictions must cover the domain exactly "
                f"(extra {extra!r}, missing {missing!r})")
        for sid, dist in pred.items():
            if dist.support != target:
                raise DomainError(
                    f"prediction for {sid!r} is over {dist.support.labels!r}, "
                    f"not the model target {target.labels!r}")
        object.__setattr__(self, "model_id", model_id)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "predictions", pred)
        object.__setattr__(self, "_pred", pred)

    def predict(self, sample_id: str) -> Dist:
        try:
            return self._pred[sample_id]
        except KeyError:
            raise DomainError(f"sample {sample_id!r} is outside the model domain") from None

    def covers(self, sample_id: str) -> bool:
        return sample_id in self._pred

    def is_interior(self) -> bool:
        return all(d.is_interior() for d in self._pred.values())

    def floored(self, epsilon: float) -> "Model":
        """Model with every prediction's hard zeros floored at epsilon."""
        return Model(self.model_id, self.space, self.domain, self.target,
                     {sid: d.floored(epsilon) for sid, d in self._pred.items()})


def _domain_order(m: Model) -> tuple[str, ...]:
    return m.space.ordered(m.domain)


def model_total_entropy(m: Model, include_complement: bool = True) -> float:
    """Weighted per-sample entropy in base |target| plus, optionally, the
    measure of the uncovered complement.

    A single-label model has entropy contribution 0 by convention (it is
    non-fuzzy by construction).
    """
    if m.target.size >= 2:
        base = m.target.size
        bulk = math.fsum(
            m.space.weight(sid) * shannon_entropy(m.predict(sid), base)
            for sid in _domain_order(m))
    else:
        bulk = 0.0
    if include_complement:
        bulk += measure(m.space, complement(m.space, m.domain))
    return bulk


def model_truth_cross_entropy(m: Model, include_complement: bool = True) -> float:
    """Weighted -log_|target| of the predicted probability of the true label,
    plus optionally the complement measure.

    +inf exactly when some in-domain sample puts probability 0 on its true
    label; a true label outside the target counts as probability 0.
    """
    if m.space.truth is None:
        raise DomainError("truth cross entropy requires a truth labeling")
    terms = []
    for sid in _domain_order(m):
        w = m.space.weight(sid)
        label = m.space.truth_label(sid)
        if m.target.size == 1:
            # base-1 log is undefined; a correct single-label model is exact
            if label in m.target:
                continue
            return math.inf
        p = m.predict(sid).get(label, 0.0)
        if p <= 0.0:
            return math.inf
        terms.append(w * (-math.log(p) / math.log(m.target.size)))
    total = math.fsum(terms)
    if include_complement:
        total += measure(m.space, complement(m.space, m.domain))
    return total


def conservation_residual_single(m: Model, include_complement: bool = True) -> float:
    """LHS - RHS of the single-model conservation identity.

    LHS integrates grad H at the prediction dotted with (truth one-hot minus
    prediction) over the domain, in base |target|; RHS is truth cross
    entropy minus total entropy with the complement handled identically on
    both terms (so it cancels).  |residual| <= 1e-9 for interior predictions.
    """
    if m.space.truth is None:
        raise DomainError("the conservation check requires a truth labeling")
    base = m.target.size
    if base < 2:
        raise DomainError("the conservation check needs a target with >= 2 labels")
    lhs_terms = []
    for sid in _domain_order(m):
        label = m.space.truth_label(sid)
        if label not in m.target:
            raise DomainError(
                f"true label {label!r} of {sid!r} is outside the model target; "
                "the truth one-hot cannot be embedded")
        pred = m.predict(sid)
        if not pred.is_interior():
            raise DomainError(
                f"prediction for {sid!r} lies on the simplex boundary")
        grad = entropy_gradient(pred, base)
        truth_vec = one_hot(m.target, label)
        dot = math.fsum(
            g * (tv - pv) for g, tv, pv in zip(grad, truth_vec.probs, pred.probs))
        lhs_terms.append(m.space.weight(sid) * dot)
    lhs = math.fsum(lhs_terms)
    rhs = (model_truth_cross_entropy(m, include_complement)
           - model_total_entropy(m, include_complement))
    return lhs - rhs
