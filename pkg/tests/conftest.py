"""Shared builders for the test suite."""

import pytest

from logifold.ensemble import Ensemble
from logifold.model import Model
from logifold.simplex import Dist, LabelSet
from logifold.space import SampleSpace, SampleSubset

AB = LabelSet(("a", "b"))
ABC = LabelSet(("a", "b", "c"))


def make_space(weights, universe=AB, truth=None):
    """weights: {sample_id: weight}, insertion order preserved."""
    return SampleSpace(list(weights.items()), universe, truth=truth)


def make_model(model_id, space, target, rows):
    """rows: {sample_id: probs in canonical target order}; domain = keys."""
    domain = SampleSubset(rows.keys())
    preds = {sid: Dist(target, probs) for sid, probs in rows.items()}
    return Model(model_id, space, domain, target, preds)


@pytest.fixture
def two_point_space():
    return make_space({"x1": 1.0, "x2": 1.0})


@pytest.fixture
def disagreement_pair(two_point_space):
    # agree at x1, split hard at x2; the average hides the split
    f1 = make_model("f1", two_point_space, AB,
                    {"x1": (0.6, 0.4), "x2": (0.95, 0.05)})
    f2 = make_model("f2", two_point_space, AB,
                    {"x1": (0.6, 0.4), "x2": (0.25, 0.75)})
    return Ensemble([f1, f2])
