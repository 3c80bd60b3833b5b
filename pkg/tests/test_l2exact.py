from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from pydantic import ValidationError

from monotone_lab.l2exact import (
    DomainViolationError,
    FinSeq,
    embed,
    format_finseq,
    gap_eval,
    inner_exact,
    parse_finseq,
    partial_sum_matrix,
    related_witness,
    related_witness_suite,
    resolvent_S,
    resolvent_Sstar,
    s_apply,
    seq_sum,
    shift_left,
    shift_right,
    sstar_apply,
)

rationals = st.fractions(min_value=-10, max_value=10, max_denominator=12)
sequences = st.lists(rationals, min_size=0, max_size=12).map(FinSeq.of)
zero_sum_sequences = sequences.map(lambda y: FinSeq.of(y.entries + (-seq_sum(y),)))


def test_trailing_zeros_are_dropped():
    assert FinSeq.of([1, 0, 0]) == FinSeq.of([1])
    assert FinSeq.of([0, 0]).is_zero()
    assert FinSeq.basis(3).entry(3) == 1
    assert FinSeq.basis(3).entry(7) == 0


def test_parse_and_format():
    y = parse_finseq("[1/2, -3 4]")
    assert y.entries == (Fraction(1, 2), Fraction(-3), Fraction(4))
    assert format_finseq(y) == "1/2 -3 4"
    assert format_finseq(FinSeq()) == "0"
    with pytest.raises(ValueError):
        parse_finseq("1 0.5")


def test_partial_sums_on_a_zero_sum_sequence():
    y = FinSeq.basis(1) - FinSeq.basis(2)
    assert s_apply(y) == FinSeq.of([Fraction(1, 2), Fraction(1, 2)])
    assert inner_exact(s_apply(y), y) == 0


def test_domain_guard_carries_the_sum():
    with pytest.raises(DomainViolationError) as info:
        s_apply(FinSeq.ones(3))
    assert info.value.s == 3
    with pytest.raises(DomainViolationError):
        resolvent_S(FinSeq.basis(2))


def test_adjoint_on_the_first_basis_vector():
    assert sstar_apply(FinSeq.basis(1)) == FinSeq.of([Fraction(1, 2)])
    assert sstar_apply(FinSeq.basis(2)) == FinSeq.of([1, Fraction(1, 2)])


def test_gap_values():
    e1 = gap_eval(FinSeq.basis(1))
    assert (e1.lhs, e1.rhs) == (Fraction(1, 2), 0)
    assert e1.strict
    ones = gap_eval(FinSeq.ones(2))
    assert (ones.lhs, ones.rhs) == (2, 0)
    flat = gap_eval(FinSeq.basis(1) - FinSeq.basis(2))
    assert (flat.lhs, flat.rhs) == (0, 0)
    assert not flat.strict
    assert e1.model_dump() == {"lhs": Fraction(1, 2), "rhs": Fraction(0), "reduction": Fraction(1, 2)}
    with pytest.raises(ValidationError):
        e1.lhs = Fraction(0)


def test_gap_off_the_axis_is_infinite():
    gap = gap_eval(FinSeq.basis(1), xstar=FinSeq.basis(2))
    assert gap.lhs == gap.rhs == float("inf")
    assert gap_eval(FinSeq.basis(1), xstar=FinSeq()).lhs == Fraction(1, 2)


def test_truncation_and_embedding():
    y = FinSeq.of([1, -2, 1])
    assert_allclose(partial_sum_matrix(4) @ embed(y, 4).coords, embed(s_apply(y), 4).coords)
    with pytest.raises(ValueError):
        embed(y, 2)


def test_related_witness():
    x, xstar = related_witness()
    assert sstar_apply(x) == xstar
    report = related_witness_suite(n_max=8, rng=np.random.default_rng(1), samples=20)
    assert report.ok
    assert report.summary.total == 6


@settings(max_examples=60, derandomize=True)
@given(y=sequences)
def test_adjoint_quadratic_form(y):
    assert inner_exact(sstar_apply(y), y) == seq_sum(y) ** 2 / 2
    assert resolvent_Sstar(y) == sstar_apply(y)


@settings(max_examples=60, derandomize=True)
@given(y=zero_sum_sequences)
def test_skew_on_the_domain(y):
    assert inner_exact(s_apply(y), y) == 0
    assert sstar_apply(y) == -s_apply(y)
    assert resolvent_S(y) == s_apply(y)
    gap = gap_eval(y)
    assert not gap.strict and gap.consistent


@settings(max_examples=60, derandomize=True)
@given(x=sequences, y=zero_sum_sequences)
def test_adjoint_pairings(x, y):
    assert inner_exact(sstar_apply(x), y) == inner_exact(x, s_apply(y))
    assert inner_exact(shift_right(x), y) == inner_exact(x, shift_left(y))
