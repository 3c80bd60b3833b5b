import numpy as np
import pytest
from numpy.testing import assert_allclose

from monotone_lab import linrel, monotone
from monotone_lab.space import HilbertContext, orthonormal_columns

ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])


def restricted_identity() -> linrel.LinearRelation:
    """Identity on span{e1} inside R^2."""
    ctx = HilbertContext.uniform(2)
    return linrel.from_matrix(np.eye(2), domain=orthonormal_columns(ctx, np.array([[1.0], [0.0]])), ctx=ctx)


def test_identity_is_maximal_monotone():
    A = linrel.from_matrix(np.eye(3))
    verdict = monotone.is_monotone(A)
    assert verdict.result
    assert verdict.margin > 0
    maximal = monotone.is_maximal_monotone(A)
    assert maximal.result
    assert maximal.details["adjoint_monotone"]


def test_negated_identity_has_a_witness():
    verdict = monotone.is_monotone(linrel.negate(linrel.from_matrix(np.eye(2))))
    assert not verdict.result
    assert verdict.margin < 0
    x, xstar = (np.asarray(v) for v in verdict.witness)
    assert x @ xstar < 0


def test_rotation_is_skew_and_anti_self_adjoint():
    A = linrel.from_matrix(ROTATION)
    assert monotone.is_skew(A).result
    assert monotone.is_maximal_monotone(A).result
    assert monotone.is_anti_self_adjoint(A).result
    assert not monotone.is_self_adjoint(A).result
    assert monotone.is_maximal_skew(A).result


def test_symmetric_matrix_is_self_adjoint():
    ctx = HilbertContext((1.0, 3.0))
    S = np.array([[2.0, 1.0], [1.0 / 3.0, 1.0]])
    A = linrel.from_matrix(S, ctx=ctx)
    assert monotone.is_symmetric(A).result
    assert monotone.is_self_adjoint(A).result


def test_restricted_relation_is_not_maximal():
    verdict = monotone.is_maximal_monotone(restricted_identity())
    assert not verdict.result
    assert verdict.details["monotone"]
    assert verdict.details["rank"] == 1
    assert not verdict.details["adjoint_monotone"]


def test_verdict_serializes():
    data = monotone.is_monotone(linrel.from_matrix(np.eye(2))).model_dump()
    assert data["predicate"] == "monotone"
    assert data["witness"] is None


def test_graph_point_is_related_with_zero_margin():
    ctx = HilbertContext.uniform(1)
    A = linrel.from_matrix(np.eye(1), ctx=ctx)
    on_graph = monotone.monotonically_related(ctx.vector([1.0]), ctx.vector([1.0]), A)
    assert on_graph.result
    assert on_graph.margin == pytest.approx(0.0, abs=1e-12)


def test_off_graph_margin_is_the_exact_infimum():
    # inf_a (1 - a)(-1 - a) = inf_a a^2 - 1 = -1
    ctx = HilbertContext.uniform(1)
    A = linrel.from_matrix(np.eye(1), ctx=ctx)
    verdict = monotone.monotonically_related(ctx.vector([1.0]), ctx.vector([-1.0]), A)
    assert not verdict.result
    assert_allclose(verdict.margin, -1.0)


def test_flat_direction_with_slope_is_unbounded():
    ctx = HilbertContext.uniform(2)
    flat = linrel.zero_relation(ctx, domain=orthonormal_columns(ctx, np.array([[1.0], [0.0]])))
    verdict = monotone.monotonically_related(ctx.basis_vector(1), ctx.basis_vector(0), flat)
    assert not verdict.result
    assert verdict.margin == float("-inf")
    assert verdict.details["unbounded_direction"]


def test_related_needs_a_monotone_relation():
    ctx = HilbertContext.uniform(2)
    with pytest.raises(monotone.NotMonotoneError):
        monotone.monotonically_related(ctx.zeros(), ctx.zeros(), linrel.negate(linrel.from_matrix(np.eye(2))))


def test_unique_extension_of_rotation():
    A = linrel.from_matrix(ROTATION)
    assert monotone.unique_extension_check(A).result
    assert monotone.unique_extension_check(linrel.inverse(A)).result
    with pytest.raises(monotone.PreconditionError):
        monotone.unique_extension_check(linrel.from_matrix(np.eye(2)))


def test_skew_dichotomy():
    assert monotone.skew_dichotomy_check(linrel.from_matrix(ROTATION)).result
    ctx = HilbertContext.uniform(2)
    partial = linrel.zero_relation(ctx, domain=orthonormal_columns(ctx, np.array([[1.0], [1.0]])))
    with pytest.raises(monotone.PreconditionError):
        monotone.skew_dichotomy_check(partial)
