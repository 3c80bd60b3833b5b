import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from monotone_lab.space import (
    ContextMismatchError,
    HilbertContext,
    Subspace,
    complement,
    contains,
    equals,
    inner,
    intersect,
    is_subspace_of,
    kernel_basis,
    orthonormal_columns,
    project,
    random_subspace,
    span,
    span_sum,
)


def test_context_rejects_bad_weights():
    with pytest.raises(ValueError):
        HilbertContext(())
    with pytest.raises(ValueError):
        HilbertContext((1.0, -2.0))


def test_product_and_half():
    ctx = HilbertContext((1.0, 2.0))
    assert ctx.product().dim == 4
    assert ctx.product().is_product
    assert ctx.product().half == ctx
    with pytest.raises(ContextMismatchError):
        _ = HilbertContext((1.0, 2.0, 3.0)).half


def test_weighted_inner():
    ctx = HilbertContext((2.0, 3.0))
    assert inner(ctx.vector([1, 1]), ctx.vector([1, 2])) == pytest.approx(8.0)
    assert ctx.vector([1, 0]).norm() == pytest.approx(np.sqrt(2.0))
    assert ctx.vector([1, 2]).to_list() == [1.0, 2.0]


def test_vectors_from_different_contexts_do_not_mix():
    a = HilbertContext.uniform(2).vector([1, 0])
    b = HilbertContext((1.0, 2.0)).vector([1, 0])
    with pytest.raises(ContextMismatchError):
        _ = a + b


def test_orthonormal_columns_drops_dependent_columns():
    ctx = HilbertContext((1.0, 4.0, 0.5))
    S = orthonormal_columns(ctx, np.array([[1.0, 2.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 0.0]]))
    assert S.rank == 1
    assert S.gram_error() < 1e-12


def test_kernel_basis_handles_empty_shapes():
    assert_allclose(kernel_basis(np.zeros((0, 3))), np.eye(3))
    assert kernel_basis(np.zeros((2, 0))).shape == (0, 0)
    assert_allclose(kernel_basis(np.zeros((2, 2))), np.eye(2))


def test_complement_is_orthogonal():
    ctx = HilbertContext((1.0, 2.0, 0.5, 3.0))
    S = random_subspace(ctx, 2, np.random.default_rng(1))
    C = complement(S)
    assert S.rank + C.rank == ctx.dim
    assert_allclose(S.basis.T @ (ctx.w[:, None] * C.basis), 0.0, atol=1e-12)


def test_complement_of_trivial_and_full():
    ctx = HilbertContext((1.0, 2.0))
    assert complement(ctx.trivial()).rank == 2
    assert complement(ctx.full()).rank == 0


def test_intersection_of_coordinate_planes():
    ctx = HilbertContext.uniform(3)
    e1, e2, e3 = (ctx.basis_vector(i) for i in range(3))
    common = intersect(span([e1, e2]), span([e2, e3]))
    assert common.rank == 1
    assert contains(common, e2)
    assert not contains(common, e1)


def test_projection_and_sum():
    ctx = HilbertContext.uniform(2)
    line = span([ctx.basis_vector(0)])
    assert_allclose(project(line, ctx.vector([3, 4])).coords, [3, 0])
    assert span_sum(line, span([ctx.basis_vector(1)])).rank == 2
    assert is_subspace_of(line, ctx.full())
    assert not is_subspace_of(ctx.full(), line)


def test_subspace_dict_round_trip():
    ctx = HilbertContext((1.0, 2.0, 3.0))
    S = random_subspace(ctx, 2, np.random.default_rng(3))
    assert equals(Subspace.from_dict(S.to_dict()), S)


def test_subspace_dict_with_wrong_dim_is_rejected():
    data = Subspace(HilbertContext((1.0, 2.0)), np.array([[1.0], [0.0]])).to_dict()
    data["dim"] = 3
    with pytest.raises(ValueError):
        Subspace.from_dict(data)


@settings(max_examples=40, derandomize=True, deadline=None)
@given(dim=st.integers(1, 6), data=st.data(), seed=st.integers(0, 2**16))
def test_double_complement_is_identity(dim, data, seed):
    rng = np.random.default_rng(seed)
    ctx = HilbertContext(tuple(float(w) for w in rng.uniform(0.5, 2.0, dim)))
    S = random_subspace(ctx, data.draw(st.integers(0, dim)), rng)
    assert equals(complement(complement(S)), S, tol=1e-8)


@settings(max_examples=40, derandomize=True, deadline=None)
@given(dim=st.integers(2, 6), seed=st.integers(0, 2**16))
def test_sum_and_intersection_dimensions(dim, seed):
    rng = np.random.default_rng(seed)
    ctx = HilbertContext.uniform(dim)
    S1 = random_subspace(ctx, int(rng.integers(0, dim + 1)), rng)
    S2 = random_subspace(ctx, int(rng.integers(0, dim + 1)), rng)
    assert span_sum(S1, S2).rank + intersect(S1, S2).rank == S1.rank + S2.rank
