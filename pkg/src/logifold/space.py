"""Finite measured sample spaces.

A SampleSpace is a finite weighted set of samples together with a label
universe and an optional total ground-truth labeling.  Integrals elsewhere
in the library are weighted sums over such a space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import DomainError
from .simplex import Label, LabelSet


@dataclass(frozen=True)
class SampleSpace:
    """Finite weighted sample set with label universe Y and optional truth.

    samples: ordered (sample_id, weight) pairs, weights > 0.
    label_universe: at least two labels.
    truth: when present, a total mapping sample_id -> label in Y.
    """

    samples: tuple[tuple[str, float], ...]
    label_universe: LabelSet
    truth: Optional[Mapping[str, Label]] = None
    _index: dict = field(init=False, repr=False, compare=False)

    def __init__(self, samples: Iterable[tuple[str, float]],
                 label_universe: LabelSet,
                 truth: Optional[Mapping[str, Label]] = None):
        samples = tuple((str(sid), float(w)) for sid, w in samples)
        index = {}
        for i, (sid, w) in enumerate(samples):
            if sid in index:
                raise DomainError(f"duplicate sample id {sid!r}")
            if not (w > 0.0 and math.isfinite(w)):
                raise DomainError(f"weight {w!r} for {sid!r} must be positive and finite")
            index[sid] = i
        if label_universe.size < 2:
            raise DomainError("label universe must contain at least two labels")
        if truth is not None:
            truth = dict(truth)
            missing = [sid for sid, _ in samples if sid not in truth]
            if missing:
                raise DomainError(f"truth labeling is not total; missing {missing[:5]!r}")
            for sid, label in truth.items():
                if sid not in index:
                    raise DomainError(f"truth labels unknown sample {sid!r}")
                if label not in label_universe:
                    raise DomainError(
                        f"truth label {label!r} for {sid!r} outside the label universe")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "label_universe", label_universe)
        object.__setattr__(self, "truth", truth)
        object.__setattr__(self, "_index", index)

    @property
    def sample_ids(self) -> tuple[str, ...]:
        return tuple(sid for sid, _ in self.samples)

    @property
    def total_mass(self) -> float:
        return math.fsum(w for _, w in self.samples)

    def __len__(self) -> int:
        return len(self.samples)

    def __contains__(self, sample_id: str) -> bool:
        return sample_id in self._index

    def weight(self, sample_id: str) -> float:
        if sample_id not in self._index:
            raise DomainError(f"unknown sample id {sample_id!r}")
        return self.samples[self._index[sample_id]][1]

    def truth_label(self, sample_id: str) -> Label:
        if self.truth is None:
            raise DomainError("sample space carries no truth labeling")
        if sample_id not in self._index:
            raise DomainError(f"unknown sample id {sample_id!r}")
        return self.truth[sample_id]

    def with_truth(self, truth: Mapping[str, Label]) -> "SampleSpace":
        return SampleSpace(self.samples, self.label_universe, truth)

    def all_samples(self) -> "SampleSubset":
        return SampleSubset(frozenset(self._index))

    def ordered(self, subset: "SampleSubset") -> tuple[str, ...]:
        """Members of a subset in the space's sample order (deterministic)."""
        self._check(subset)
        return tuple(sid for sid, _ in self.samples if sid in subset.members)

    def _check(self, subset: "SampleSubset") -> None:
        unknown = [sid for sid in subset.members if sid not in self._index]
        if unknown:
            raise DomainError(f"subset contains unknown sample ids {sorted(unknown)[:5]!r}")


@dataclass(frozen=True)
class SampleSubset:
    """A subset of one space's sample ids (a measurable subset)."""

    members: frozenset[str]

    def __init__(self, members: Iterable[str]):
        object.__setattr__(self, "members", frozenset(members))

    def __contains__(self, sample_id: str) -> bool:
        return sample_id in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __or__(self, other: "SampleSubset") -> "SampleSubset":
        return SampleSubset(self.members | other.members)

    def __and__(self, other: "SampleSubset") -> "SampleSubset":
        return SampleSubset(self.members & other.members)

    def __le__(self, other: "SampleSubset") -> bool:
        return self.members <= other.members


EMPTY_SUBSET = SampleSubset(frozenset())


def measure(space: SampleSpace, subset: SampleSubset) -> float:
    """Sum of member weights; additive over disjoint subsets."""
    space._check(subset)
    return math.fsum(w for sid, w in space.samples if sid in subset.members)


def complement(space: SampleSpace, subset: SampleSubset) -> SampleSubset:
    space._check(subset)
    return SampleSubset(sid for sid, _ in space.samples if sid not in subset.members)
