"""Toy learners, labeled batches, and synthetic environments.

The learner is a softmax of an affine map: weights of shape (n+1) x |T|,
the last row being the bias.  It is deliberately small; real prediction
tables can be ingested through the bundle loader instead.  Softmax logits
are shifted and clipped so every output component stays strictly positive,
keeping all cross entropies finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from ..errors import DomainError, NoDataError, ValidationError
from ..model import Model
from ..simplex import Dist, LabelSet
from ..space import SampleSpace, SampleSubset

# softmax logits are clipped here after max-shift; exp stays positive
_LOGIT_FLOOR = -700.0


@dataclass(frozen=True)
class LabeledBatch:
    """Feature rows with labels; the raw material both for training and for
    materializing a learner as a prediction table."""

    sample_ids: tuple[str, ...]
    features: np.ndarray
    labels: tuple
    label_universe: LabelSet

    def __post_init__(self):
        if len(self.sample_ids) != len(set(self.sample_ids)):
            raise ValidationError("duplicate sample ids in batch")
        if self.features.ndim != 2 or self.features.shape[0] != len(self.sample_ids):
            raise ValidationError("features must be one row per sample")
        if len(self.labels) != len(self.sample_ids):
            raise ValidationError("labels must align with sample ids")
        for lab in self.labels:
            if lab not in self.label_universe:
                raise ValidationError(f"label {lab!r} outside the universe")

    def __len__(self) -> int:
        return len(self.sample_ids)

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    def index_of(self, sample_id: str) -> int:
        try:
            return self.sample_ids.index(sample_id)
        except ValueError:
            raise DomainError(f"sample {sample_id!r} not in batch") from None

    def feature_map(self) -> dict[str, np.ndarray]:
        return {sid: self.features[i] for i, sid in enumerate(self.sample_ids)}

    def to_space(self, with_truth: bool = True) -> SampleSpace:
        """Uniform-weight space of total mass 1 over the batch samples."""
        if not self.sample_ids:
            raise NoDataError("empty batch has no sample space")
        w = 1.0 / len(self.sample_ids)
        samples = tuple((sid, w) for sid in self.sample_ids)
        truth = dict(zip(self.sample_ids, self.labels)) if with_truth else None
        return SampleSpace(samples, self.label_universe, truth)

    def subset(self, ids: SampleSubset) -> "LabeledBatch":
        keep = [i for i, sid in enumerate(self.sample_ids) if sid in ids]
        return LabeledBatch(
            tuple(self.sample_ids[i] for i in keep),
            self.features[keep] if keep else self.features[:0],
            tuple(self.labels[i] for i in keep),
            self.label_universe)


def concat_batches(*batches: LabeledBatch) -> LabeledBatch:
    if not batches:
        raise NoDataError("nothing to concatenate")
    universe = batches[0].label_universe
    for b in batches[1:]:
        if b.label_universe != universe:
            raise DomainError("batches disagree on the label universe")
    return LabeledBatch(
        tuple(sid for b in batches for sid in b.sample_ids),
        np.concatenate([b.features for b in batches], axis=0),
        tuple(lab for b in batches for lab in b.labels),
        universe)


@dataclass(frozen=True, eq=False)
class ToyLearner:
    """Softmax-affine classifier with a deterministic training rule."""

    feature_dim: int
    target: LabelSet
    weights: np.ndarray
    learning_rate: float
    rng_seed: int

    @classmethod
    def new(cls, feature_dim: int, target: LabelSet, seed: int,
            learning_rate: float = 2.0, init_scale: float = 0.01) -> "ToyLearner":
        if target.size < 2:
            raise DomainError("a learner needs a target with >= 2 labels")
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), 7]))
        w = init_scale * rng.standard_normal((feature_dim + 1, target.size))
        return cls(feature_dim, target, w, learning_rate, int(seed))

    def _augment(self, features: np.ndarray) -> np.ndarray:
        if features.ndim != 2 or features.shape[1] != self.feature_dim:
            raise DomainError(
                f"expected features of width {self.feature_dim}, "
                f"got shape {features.shape}")
        ones = np.ones((features.shape[0], 1))
        return np.concatenate([features, ones], axis=1)

    def predict_batch(self, features: np.ndarray) -> np.ndarray:
        """Row-wise softmax outputs, every entry strictly positive."""
        z = self._augment(features) @ self.weights
        z = z - z.max(axis=1, keepdims=True)
        np.clip(z, _LOGIT_FLOOR, None, out=z)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def mean_loss(self, features: np.ndarray, label_indices: np.ndarray) -> float:
        p = self.predict_batch(features)
        picked = p[np.arange(len(label_indices)), label_indices]
        return float(-np.log(picked).mean())


def _label_indices(batch: LabeledBatch, target: LabelSet) -> np.ndarray:
    idx = []
    for lab in batch.labels:
        if lab not in target:
            raise DomainError(f"batch label {lab!r} outside learner target")
        idx.append(target.index(lab))
    return np.array(idx, dtype=np.intp)


def train_learner(l: ToyLearner, data: LabeledBatch, epochs: int) -> ToyLearner:
    """Full-batch gradient descent on the mean cross-entropy loss.

    The step is halved (up to 60 times) whenever it would increase the
    loss, so the per-epoch loss is nonincreasing and the whole trajectory
    is deterministic.  Zero epochs returns the learner unchanged.
    """
    if len(data) == 0:
        raise NoDataError("cannot train on an empty batch")
    if epochs < 0:
        raise DomainError("epochs must be >= 0")
    if epochs == 0:
        return l
    x = data.features
    idx = _label_indices(data, l.target)
    a = l._augment(x)
    onehot = np.zeros((len(data), l.target.size))
    onehot[np.arange(len(data)), idx] = 1.0
    w = l.weights.copy()
    lr = l.learning_rate
    current = replace(l, weights=w)
    loss = current.mean_loss(x, idx)
    m = len(data)
    for _ in range(epochs):
        p = current.predict_batch(x)
        grad = a.T @ (p - onehot) / m
        accepted = False
        for _half in range(60):
            cand = replace(l, weights=w - lr * grad, learning_rate=lr)
            cand_loss = cand.mean_loss(x, idx)
            if cand_loss <= loss:
                current, loss, w = cand, cand_loss, cand.weights
                accepted = True
                break
            lr *= 0.5
        if not accepted:
            break
    return replace(current, learning_rate=lr)


def learner_as_model(l: ToyLearner, space: SampleSpace, domain: SampleSubset,
                     features: Union[LabeledBatch, Mapping[str, np.ndarray]],
                     model_id: str) -> Model:
    """Materialize the learner as a prediction table over the domain.

    Features may come as a batch or a per-sample mapping; every domain
    sample must have a feature row.
    """
    if isinstance(features, LabeledBatch):
        fmap = features.feature_map()
    else:
        fmap = features
    ordered = space.ordered(domain)
    missing = [sid for sid in ordered if sid not in fmap]
    if missing:
        raise DomainError(f"no features for domain samples {missing[:5]!r}")
    predictions = {}
    if ordered:
        rows = np.stack([np.asarray(fmap[sid], dtype=float) for sid in ordered])
        probs = l.predict_batch(rows)
        for i, sid in enumerate(ordered):
            predictions[sid] = Dist(l.target, tuple(float(v) for v in probs[i]))
    return Model(model_id, space, domain, l.target, predictions)


@dataclass(frozen=True)
class Perturbation:
    """Additive input perturbation: a fixed shift along a direction, or
    isotropic Gaussian noise of a given magnitude."""

    kind: str
    magnitude: float
    direction: tuple[float, ...] = (1.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("shift", "noise"):
            raise ValidationError(f"unknown perturbation kind {self.kind!r}")
        if self.magnitude < 0:
            raise ValidationError("perturbation magnitude must be >= 0")

    def apply(self, features: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "shift":
            d = np.asarray(self.direction, dtype=float)
            norm = math.sqrt(float((d * d).sum()))
            if norm == 0.0:
                raise ValidationError("shift direction must be nonzero")
            return features + self.magnitude * (d / norm)
        return features + self.magnitude * rng.standard_normal(features.shape)


@dataclass(frozen=True)
class Environment:
    """Seeded Gaussian-blob generator over a fixed label universe.

    Class means sit on a circle; an optional perturbation is applied to
    every drawn feature row.  Identical (env, tag, n) arguments produce an
    identical batch, bit for bit.
    """

    env_id: str
    label_universe: LabelSet
    seed: int
    radius: float = 2.0
    std: float = 0.5
    feature_dim: int = 2
    perturbation: Optional[Perturbation] = None

    def class_means(self) -> np.ndarray:
        k = self.label_universe.size
        angles = np.pi / 2 + 2 * np.pi * np.arange(k) / k
        means = np.zeros((k, self.feature_dim))
        means[:, 0] = self.radius * np.cos(angles)
        means[:, 1] = self.radius * np.sin(angles)
        return means

    def sample(self, n: int, tag: str) -> LabeledBatch:
        if n <= 0:
            raise NoDataError("cannot sample an empty batch")
        rng = np.random.default_rng(np.random.SeedSequence(
            [int(self.seed), hash_tag(tag)]))
        k = self.label_universe.size
        means = self.class_means()
        classes = np.arange(n) % k
        features = means[classes] + self.std * rng.standard_normal(
            (n, self.feature_dim))
        if self.perturbation is not None:
            features = self.perturbation.apply(features, rng)
        ids = tuple(f"{self.env_id}:{tag}:{i:04d}" for i in range(n))
        labels = tuple(self.label_universe.labels[int(c)] for c in classes)
        return LabeledBatch(ids, features, labels, self.label_universe)


def hash_tag(tag: str) -> int:
    """Stable small integer for a stream tag (str hash is randomized
    between processes, so it cannot be used for seeding)."""
    h = 0
    for ch in tag:
        h = (h * 131 + ord(ch)) % (2 ** 31 - 1)
    return h
