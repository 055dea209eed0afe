"""Sample spaces, subsets, and measure."""

import math

import pytest

from logifold.errors import DomainError
from logifold.simplex import LabelSet
from logifold.space import (EMPTY_SUBSET, SampleSpace, SampleSubset,
                            complement, measure)

from conftest import AB, make_space


def test_basic_accessors():
    sp = make_space({"x": 2.0, "y": 0.5})
    assert sp.sample_ids == ("x", "y")
    assert sp.total_mass == 2.5
    assert len(sp) == 2
    assert "x" in sp and "z" not in sp
    assert sp.weight("y") == 0.5


def test_duplicate_ids_rejected():
    with pytest.raises(DomainError):
        SampleSpace([("x", 1.0), ("x", 2.0)], AB)


@pytest.mark.parametrize("w", [0.0, -1.0, math.nan, math.inf])
def test_bad_weights_rejected(w):
    with pytest.raises(DomainError):
        SampleSpace([("x", w)], AB)


def test_universe_needs_two_labels():
    with pytest.raises(DomainError):
        SampleSpace([("x", 1.0)], LabelSet(("only",)))


class TestTruth:
    def test_total_mapping_required(self):
        with pytest.raises(DomainError):
            make_space({"x": 1.0, "y": 1.0}, truth={"x": "a"})

    def test_unknown_sample_rejected(self):
        with pytest.raises(DomainError):
            make_space({"x": 1.0}, truth={"x": "a", "ghost": "b"})

    def test_label_outside_universe_rejected(self):
        with pytest.raises(DomainError):
            make_space({"x": 1.0}, truth={"x": "z"})

    def test_with_truth_attaches(self):
        sp = make_space({"x": 1.0}).with_truth({"x": "b"})
        assert sp.truth_label("x") == "b"

    def test_truth_label_without_truth(self):
        with pytest.raises(DomainError):
            make_space({"x": 1.0}).truth_label("x")


class TestSubset:
    def test_set_algebra(self):
        s = SampleSubset(("a", "b"))
        t = SampleSubset(("b", "c"))
        assert sorted((s | t).members) == ["a", "b", "c"]
        assert sorted((s & t).members) == ["b"]
        assert SampleSubset(("b",)) <= s
        assert not (s <= t)

    def test_empty(self):
        assert len(EMPTY_SUBSET) == 0
        assert EMPTY_SUBSET <= SampleSubset(("a",))

    def test_membership_outside_space_rejected_by_ops(self):
        sp = make_space({"x": 1.0})
        with pytest.raises(DomainError):
            measure(sp, SampleSubset(("ghost",)))


def test_measure_and_complement():
    sp = make_space({"x": 1.0, "y": 2.0, "z": 4.0})
    sub = SampleSubset(("x", "z"))
    assert measure(sp, sub) == 5.0
    assert sorted(complement(sp, sub).members) == ["y"]
    assert measure(sp, complement(sp, sub)) == 2.0
    assert measure(sp, EMPTY_SUBSET) == 0.0


def test_ordered_follows_space_order():
    sp = make_space({"c": 1.0, "a": 1.0, "b": 1.0})
    assert sp.ordered(SampleSubset(("b", "a"))) == ("a", "b")
