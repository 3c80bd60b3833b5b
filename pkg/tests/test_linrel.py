import numpy as np
import pytest
from numpy.testing import assert_allclose

from monotone_lab import linrel
from monotone_lab.space import ContextMismatchError, HilbertContext, orthonormal_columns

WEIGHTED = HilbertContext((1.0, 2.0, 0.5))
M = np.array([[1.0, 2.0, 0.0], [-1.0, 0.5, 3.0], [0.0, 1.0, 2.0]])


def test_matrix_round_trip():
    A = linrel.from_matrix(M, ctx=WEIGHTED)
    assert A.rank == 3
    assert_allclose(linrel.to_matrix(A), M, atol=1e-10)


def test_adjoint_of_matrix_is_weighted_transpose():
    A = linrel.from_matrix(M, ctx=WEIGHTED)
    expected = linrel.weighted_adjoint_matrix(WEIGHTED, M)
    assert_allclose(linrel.to_matrix(linrel.adjoint(A)), expected, atol=1e-9)
    assert_allclose(expected, np.diag(1 / WEIGHTED.w) @ M.T @ np.diag(WEIGHTED.w))


def test_adjoint_is_an_involution():
    A = linrel.from_pairs(WEIGHTED, np.array([[1.0], [0.0], [1.0]]), np.array([[0.0], [2.0], [1.0]]))
    assert linrel.equals(linrel.adjoint(linrel.adjoint(A)), A)
    assert A.rank + linrel.adjoint(A).rank == 2 * A.n


def test_inverse_and_sum_of_matrices():
    B = np.eye(3) * 2.0
    A = linrel.from_matrix(M, ctx=WEIGHTED)
    assert_allclose(linrel.to_matrix(linrel.inverse(A)), np.linalg.inv(M), atol=1e-9)
    total = linrel.add(A, linrel.from_matrix(B, ctx=WEIGHTED))
    assert_allclose(linrel.to_matrix(total), M + B, atol=1e-9)


def test_scale_by_zero_is_rejected():
    with pytest.raises(ValueError):
        linrel.scale(0.0, linrel.from_matrix(M))


def test_sum_needs_a_shared_space():
    with pytest.raises(ContextMismatchError):
        linrel.add(linrel.from_matrix(M), linrel.from_matrix(M, ctx=WEIGHTED))


def multivalued_example() -> linrel.LinearRelation:
    """gra = span{(e1, e1), (0, e2)} on R^2."""
    ctx = HilbertContext.uniform(2)
    return linrel.from_pairs(ctx, np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([[1.0, 0.0], [0.0, 1.0]]))


def test_domain_range_and_multivalued_part():
    A = multivalued_example()
    assert linrel.dom(A).rank == 1
    assert linrel.ran(A).rank == 2
    assert linrel.multivalued_part(A).rank == 1
    assert linrel.kernel(A).rank == 0


def test_image_returns_minimum_norm_selection():
    A = multivalued_example()
    ctx = A.ctx
    img = linrel.image(A, ctx.vector([1.0, 0.0]))
    assert img is not None
    assert_allclose(img.particular.coords, [1.0, 0.0], atol=1e-12)
    assert img.directions.rank == 1
    assert img.contains(ctx.vector([1.0, 5.0]))
    assert linrel.image(A, ctx.vector([0.0, 1.0])) is None


def test_to_matrix_rejects_multivalued_relations():
    with pytest.raises(ValueError):
        linrel.to_matrix(multivalued_example())


def test_restriction_is_a_subrelation():
    A = linrel.from_matrix(M, ctx=WEIGHTED)
    line = orthonormal_columns(WEIGHTED, np.array([[1.0], [0.0], [0.0]]))
    R = linrel.restrict(A, line)
    assert R.rank == 1
    assert linrel.is_subrelation(R, A)
    assert linrel.contains_pair(R, WEIGHTED.basis_vector(0), WEIGHTED.vector(M[:, 0]))
    assert not linrel.contains_pair(R, WEIGHTED.basis_vector(1), WEIGHTED.vector(M[:, 1]))


def test_parts_split_symmetric_and_skew():
    sym, skew = linrel.parts(linrel.from_matrix(M, ctx=WEIGHTED))
    assert_allclose(sym + skew, M, atol=1e-9)
    assert_allclose(linrel.weighted_adjoint_matrix(WEIGHTED, skew), -skew, atol=1e-9)
    assert_allclose(linrel.weighted_adjoint_matrix(WEIGHTED, sym), sym, atol=1e-9)
