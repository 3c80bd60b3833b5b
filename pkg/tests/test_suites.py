import numpy as np
import pytest

from monotone_lab import linrel, monotone
from monotone_lab.report import render_report
from monotone_lab.suites import (
    GRID_PROPERTIES,
    GridRelations,
    monotone_relation,
    random_context,
    random_monotone_matrix,
    random_relation,
    run_suite,
    truncated_skew,
)
from monotone_lab.volterra import Grid


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("bogus")


def test_exact_suite_passes_and_is_reproducible():
    first = run_suite("l2exact", seed=7)
    second = run_suite("l2exact", seed=7)
    assert first.ok
    assert first.summary.untestable == 2
    assert render_report(first) == render_report(second)


def test_random_monotone_matrix_is_monotone():
    rng = np.random.default_rng(11)
    for _ in range(10):
        ctx = random_context(rng, 4)
        A = linrel.from_matrix(random_monotone_matrix(rng, ctx), ctx=ctx)
        assert monotone.is_monotone(A, 1e-9).result


def test_monotone_relation_and_its_extension():
    rng = np.random.default_rng(2)
    ctx = random_context(rng, 4)
    restricted, maximal = monotone_relation(rng, ctx, 2, 1)
    assert restricted.rank == 3
    assert maximal.rank == 4
    assert linrel.is_subrelation(restricted, maximal, 1e-9)
    assert monotone.is_maximal_monotone(maximal, 1e-9).result
    assert not monotone.is_maximal_monotone(restricted, 1e-9).result


def test_random_relations_stay_in_range():
    rng = np.random.default_rng(4)
    for _ in range(30):
        kind, A = random_relation(rng, 3)
        assert 0 <= A.rank <= 6
        if kind == "maximal":
            assert monotone.is_maximal_monotone(A, 1e-9).result


@pytest.mark.parametrize("n", [2, 3, 5])
def test_truncated_partial_sums(n):
    A = truncated_skew(n)
    assert A.rank == n - 1
    assert monotone.is_skew(A, 1e-9).result
    assert not monotone.is_monotone(linrel.adjoint(A), 1e-9).result


@pytest.mark.parametrize("m", [2, 3, 6])
def test_grid_properties_hold_on_small_grids(m):
    relations = GridRelations.build(Grid(m))
    rng = np.random.default_rng(0)
    failing = [check_id for check_id, _, predicate in GRID_PROPERTIES if not predicate(relations, rng, 1e-9)]
    assert failing == []


@pytest.mark.parametrize("suite", ["l2exact", "linrel", "fitz", "volterra"])
def test_every_suite_passes(suite):
    report = run_suite(suite, seed=7)
    assert [c.check_id for c in report.failures()] == []
    assert report.ok


def test_all_suites_pass_with_the_default_seed():
    report = run_suite("all", seed=7)
    assert report.ok
    assert report.summary.failed == 0
    assert report.summary.untestable == 3
