import pytest
from hypothesis import given, strategies as st

from fairrank.errors import InfeasibleConstraints, InsufficientItems
from fairrank.model import (
    FairnessConstraints,
    InGroupRanking,
    as_fraction,
    in_group_rankings,
    is_group_fair,
    representation_of,
    validate,
)
from fractions import Fraction


def test_valid_small_instance():
    validate(FairnessConstraints(4, (1, 1), (3, 3)))


def test_valid_credit_instance():
    validate(FairnessConstraints(100, (80, 10), (90, 20)))


def test_lower_sum_above_k_is_infeasible():
    with pytest.raises(InfeasibleConstraints) as err:
        validate(FairnessConstraints(4, (3, 3), (4, 4)))
    assert err.value.inequality == "sum(L) <= k"


def test_upper_sum_below_k_is_infeasible():
    with pytest.raises(InfeasibleConstraints) as err:
        validate(FairnessConstraints(10, (0, 0), (3, 4)))
    assert err.value.inequality == "sum(U) >= k"


@pytest.mark.parametrize("lower,upper", [((2, 0), (1, 5)), ((-1, 0), (3, 3)), ((0, 0), (3, 9))])
def test_bad_box_is_infeasible(lower, upper):
    with pytest.raises(InfeasibleConstraints):
        validate(FairnessConstraints(5, lower, upper))


def test_mismatched_lengths():
    with pytest.raises(InfeasibleConstraints):
        validate(FairnessConstraints(3, (1, 1), (2, 2, 2)))


def test_short_in_group_list_is_rejected():
    c = FairnessConstraints(4, (1, 1), (3, 3))
    with pytest.raises(InsufficientItems) as err:
        validate(c, in_group_rankings([["a", "b", "c"], ["p", "q"]]))
    assert (err.value.group, err.value.needed, err.value.available) == (1, 3, 2)


def test_duplicate_items_rejected():
    c = FairnessConstraints(2, (1, 1), (1, 1))
    with pytest.raises(ValueError):
        validate(c, in_group_rankings([["a"], ["a"]]))


def test_in_group_label_must_match_position():
    with pytest.raises(ValueError):
        validate(FairnessConstraints(2, (1, 1), (1, 1)), [InGroupRanking(1, ("a",)), InGroupRanking(0, ("b",))])


@pytest.mark.parametrize("y,ell,x", [
    ((0, 1, 0, 0), 2, (3, 1)),
    ((1, 1), 2, (0, 2)),
    ((0, 1, 2, 1, 0), 3, (2, 2, 1)),
])
def test_representation_of(y, ell, x):
    assert representation_of(y, ell) == x


@pytest.mark.parametrize("x,expected", [((2, 2), True), ((4, 0), False), ((2, 1), False)])
def test_is_group_fair(x, expected):
    assert is_group_fair(x, FairnessConstraints(4, (1, 1), (3, 3))) is expected


def test_as_fraction_uses_decimal_text_of_floats():
    assert as_fraction(0.85) == Fraction(17, 20)
    assert as_fraction(Fraction(1, 3)) == Fraction(1, 3)


@given(st.lists(st.integers(0, 4), min_size=1, max_size=30))
def test_representation_sums_to_length(y):
    x = representation_of(y, 5)
    assert sum(x) == len(y)
    assert all(x[g] == y.count(g) for g in range(5))
