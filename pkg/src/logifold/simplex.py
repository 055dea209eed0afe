"""Exact probability-simplex arithmetic.

Entropy, cross entropy and the entropy gradient over finite label sets.
Everything is computed internally in natural log and rescaled by 1/ln(base)
at the boundary; every operation takes the base explicitly.  Conventions:
0*log(0) = 0, and a cross-entropy term with y_a > 0 against g_a = 0 is +inf
(an explicit float infinity, never a sentinel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Union

from .errors import DomainError

Label = Union[str, int]

SUM_TOL = 1e-9


def _label_key(label: Label):
    # total order across mixed str/int label sets
    return (type(label).__name__, label)


@dataclass(frozen=True)
class LabelSet:
    """An ordered finite set of distinct labels in canonical (sorted) order.

    Two label sets with the same members compare equal regardless of the
    order they were constructed with.
    """

    labels: tuple[Label, ...]

    def __init__(self, labels: Iterable[Label]):
        canon = tuple(sorted(labels, key=_label_key))
        if not canon:
            raise DomainError("a label set must contain at least one label")
        if len(set(canon)) != len(canon):
            raise DomainError(f"labels are not pairwise distinct: {canon!r}")
        object.__setattr__(self, "labels", canon)

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label: Label) -> bool:
        return label in self.labels

    def index(self, label: Label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"label {label!r} not in label set {self.labels!r}") from None

    def issubset(self, other: "LabelSet") -> bool:
        return set(self.labels) <= set(other.labels)

    def union(self, other: "LabelSet") -> "LabelSet":
        return LabelSet(set(self.labels) | set(other.labels))


@dataclass(frozen=True)
class Dist:
    """A probability distribution over a LabelSet (a point of the simplex)."""

    support: LabelSet
    probs: tuple[float, ...]

    def __init__(self, support: LabelSet, probs: Sequence[float]):
        probs = tuple(float(p) for p in probs)
        if len(probs) != support.size:
            raise DomainError(
                f"{len(probs)} probabilities for {support.size} labels")
        for p in probs:
            if not (0.0 <= p <= 1.0):
                raise DomainError(f"probability {p!r} outside [0, 1]")
        if abs(math.fsum(probs) - 1.0) > SUM_TOL:
            raise DomainError(
                f"probabilities sum to {math.fsum(probs)!r}, not 1 within {SUM_TOL}")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    def __getitem__(self, label: Label) -> float:
        return self.probs[self.support.index(label)]

    def get(self, label: Label, default: float = 0.0) -> float:
        """Probability of a label, 0 for labels outside the support."""
        if label in self.support:
            return self.probs[self.support.index(label)]
        return default

    def is_interior(self) -> bool:
        return all(p > 0.0 for p in self.probs)

    def floored(self, epsilon: float) -> "Dist":
        """Replace hard zeros by `epsilon` and renormalize.

        Intended for ingested prediction tables; leaves interior points
        nearly untouched.
        """
        if epsilon <= 0.0:
            raise DomainError("epsilon floor must be positive")
        raised = [max(p, epsilon) for p in self.probs]
        total = math.fsum(raised)
        return Dist(self.support, [p / total for p in raised])


def one_hot(support: LabelSet, label: Label) -> Dist:
    """The degenerate distribution concentrated on one label."""
    idx = support.index(label)
    return Dist(support, tuple(1.0 if i == idx else 0.0 for i in range(support.size)))


def uniform(support: LabelSet) -> Dist:
    t = support.size
    return Dist(support, (1.0 / t,) * t)


def _check_base(base: int) -> float:
    if int(base) != base or base < 2:
        raise DomainError(f"logarithm base must be an integer >= 2, got {base!r}")
    return math.log(base)


def shannon_entropy(d: Dist, base: int) -> float:
    """-sum_a d_a log_base d_a, with 0*log(0) = 0.

    In base t = |support| the value lies in [0, 1], 0 iff one-hot and 1 iff
    uniform.
    """
    ln_b = _check_base(base)
    return -math.fsum(p * math.log(p) for p in d.probs if p > 0.0) / ln_b


def cross_entropy(y: Dist, g: Dist, base: int) -> float:
    """-sum_a y_a log_base g_a over a shared support.

    Returns +inf exactly when some label has y_a > 0 and g_a = 0; terms with
    y_a = 0 are skipped.  A support mismatch is an error, never silently
    reconciled: embed both arguments first.
    """
    ln_b = _check_base(base)
    if y.support != g.support:
        raise DomainError(
            f"support mismatch: {y.support.labels!r} vs {g.support.labels!r}")
    terms = []
    for ya, ga in zip(y.probs, g.probs):
        if ya > 0.0:
            if ga <= 0.0:
                return math.inf
            terms.append(ya * math.log(ga))
    return -math.fsum(terms) / ln_b


def linear_cross_entropy(coeffs: Sequence[float], g: Dist, base: int) -> float:
    """h extended linearly in its first argument: -sum_a c_a log_base g_a.

    The coefficient vector may have negative entries (tangent directions);
    it must be indexed like g's support.  Zero coefficients skip their term.
    """
    ln_b = _check_base(base)
    if len(coeffs) != g.support.size:
        raise DomainError("coefficient vector does not match the support")
    terms = []
    for ca, ga in zip(coeffs, g.probs):
        if ca != 0.0:
            if ga <= 0.0:
                return math.inf if ca > 0.0 else -math.inf
            terms.append(ca * math.log(ga))
    return -math.fsum(terms) / ln_b


def entropy_gradient(d: Dist, base: int) -> tuple[float, ...]:
    """Gradient of shannon_entropy at an interior point.

    Component a equals -(log_base d_a + 1/ln base).  Its dot product with
    any tangent direction y' (sum zero) equals linear_cross_entropy(y', d).
    """
    ln_b = _check_base(base)
    if not d.is_interior():
        raise DomainError("entropy gradient is undefined on the simplex boundary")
    return tuple(-(math.log(p) / ln_b + 1.0 / ln_b) for p in d.probs)


def embed(d: Dist, target: LabelSet) -> Dist:
    """Reindex a distribution over a superset of labels; new labels get 0."""
    if not d.support.issubset(target):
        raise DomainError(
            f"support {d.support.labels!r} is not contained in {target.labels!r}")
    if d.support == target:
        return d
    probs = [0.0] * target.size
    for label, p in zip(d.support.labels, d.probs):
        probs[target.index(label)] = p
    return Dist(target, probs)


def restrict(d: Dist, target: LabelSet) -> Dist:
    """Inverse of embed for distributions fully supported on `target`."""
    for label, p in zip(d.support.labels, d.probs):
        if p > 0.0 and label not in target:
            raise DomainError(f"mass {p!r} on label {label!r} outside {target.labels!r}")
    return Dist(target, [d.get(label) for label in target.labels])


class ArgmaxResult(NamedTuple):
    label: Label
    tie: bool


def argmax_label(d: Dist) -> ArgmaxResult:
    """Label of the largest probability; ties go to the first label in
    canonical order and are flagged."""
    best = max(d.probs)
    winners = [label for label, p in zip(d.support.labels, d.probs) if p == best]
    return ArgmaxResult(winners[0], len(winners) > 1)
