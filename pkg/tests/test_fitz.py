import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monotone_lab import fitz, linrel
from monotone_lab.monotone import NotMonotoneError
from monotone_lab.space import HilbertContext, orthonormal_columns

ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])


def test_fitzpatrick_of_identity_in_one_dimension():
    # F_I(x, x*) = (x + x*)^2 / 4
    F = fitz.fitzpatrick(linrel.from_matrix(np.eye(1)))
    assert fitz.evaluate(F, np.array([1.0, 1.0])) == pytest.approx(1.0)
    assert fitz.evaluate(F, np.array([1.0, -1.0])) == pytest.approx(0.0, abs=1e-12)
    assert fitz.evaluate(F, np.array([2.0, 0.0])) == pytest.approx(1.0)


def test_indicator_of_a_line():
    ctx = HilbertContext.uniform(3)
    line = orthonormal_columns(ctx, np.ones((3, 1)))
    f = fitz.indicator(line)
    assert fitz.evaluate(f, ctx.basis_vector(0)) == float("inf")
    assert fitz.evaluate(f, 2.5 * ctx.ones()) == 0.0


def test_infinite_tags_swap_under_conjugation():
    ctx = HilbertContext.uniform(2)
    top = fitz.everywhere_plus_infinity(ctx)
    assert fitz.evaluate(top, ctx.zeros()) == float("inf")
    bottom = fitz.conjugate(top)
    assert bottom.tag == fitz.Tag.MINUS_INFINITY
    assert fitz.evaluate(bottom, ctx.ones()) == float("-inf")
    assert fitz.conjugate(bottom).tag == fitz.Tag.PLUS_INFINITY


def test_half_squared_norm_is_self_conjugate():
    ctx = HilbertContext((1.0, 2.0, 0.5))
    q = fitz.quadratic_form(ctx, np.eye(3))
    assert fitz.equals(fitz.conjugate(q), q)


def test_biconjugate_of_a_partial_quadratic():
    ctx = HilbertContext((1.0, 3.0, 0.5))
    plane = orthonormal_columns(ctx, np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 2.0]]))
    f = fitz.make(
        ctx,
        plane,
        hessian=np.array([[1.0, 0.0], [0.0, 0.0]]),
        linear=np.array([0.5, -1.0]),
        constant=2.0,
        origin=np.array([0.3, -1.0, 2.0]),
    )
    assert fitz.discrepancy(fitz.conjugate(fitz.conjugate(f)), f) < 1e-8


def test_nonconvex_conjugate():
    ctx = HilbertContext.uniform(1)
    concave = fitz.make(ctx, ctx.full(), hessian=np.array([[-1.0]]))
    assert fitz.conjugate(concave).tag == fitz.Tag.PLUS_INFINITY
    with pytest.raises(fitz.NonConvexError):
        fitz.conjugate(concave, strict=True)


def test_scale_and_transpose():
    F = fitz.fitzpatrick(linrel.from_matrix(np.array([[2.0]])))
    with pytest.raises(ValueError):
        fitz.scale(F, 0.0)
    assert fitz.equals(fitz.transpose(fitz.transpose(F)), F)
    z = np.array([0.7, -0.2])
    assert fitz.evaluate(fitz.scale(F, 3.0), z) == pytest.approx(3.0 * fitz.evaluate(F, z))


def test_precompose_with_a_linear_map():
    ctx = HilbertContext.uniform(2)
    q = fitz.quadratic_form(ctx, np.eye(2))
    g = fitz.precompose(q, np.array([[1.0], [1.0]]))
    assert fitz.evaluate(g, np.array([3.0])) == pytest.approx(9.0)


def test_precompose_onto_a_missed_domain_is_plus_infinity():
    ctx = HilbertContext.uniform(2)
    point = fitz.indicator(ctx.trivial(), origin=np.array([1.0, 0.0]))
    g = fitz.precompose(point, np.array([[0.0], [1.0]]))
    assert g.tag == fitz.Tag.PLUS_INFINITY


def test_sum_formula_for_full_domain_operators():
    ctx = HilbertContext((1.0, 2.0))
    A = linrel.from_matrix(np.eye(2), ctx=ctx)
    B = linrel.from_matrix(np.array([[1.0, -1.0], [0.5, 1.0]]), ctx=ctx)
    joint = fitz.box2(fitz.fitzpatrick(A), fitz.fitzpatrick(B))
    assert fitz.discrepancy(fitz.fitzpatrick(linrel.add(A, B)), joint) < 1e-8


def test_skew_operator_has_an_indicator_fitzpatrick_function():
    K = linrel.from_matrix(ROTATION)
    F = fitz.fitzpatrick(K)
    assert fitz.discrepancy(F, fitz.indicator(K.graph)) < 1e-8
    assert fitz.is_autoconjugate(F)
    assert not fitz.is_autoconjugate(fitz.fitzpatrick(linrel.from_matrix(np.eye(2))))


def test_fitzpatrick_of_a_non_monotone_relation_is_plus_infinity():
    F = fitz.fitzpatrick(linrel.negate(linrel.from_matrix(np.eye(2))))
    assert F.tag == fitz.Tag.PLUS_INFINITY


def test_symmetric_part_path_matches_the_graph_path():
    # W M = [[1, 1], [-1, 2]] has a positive definite symmetric part
    ctx = HilbertContext((1.0, 2.0))
    M = np.array([[1.0, 1.0], [-0.5, 1.0]])
    via_graph = fitz.fitzpatrick(linrel.from_matrix(M, ctx=ctx))
    assert fitz.discrepancy(via_graph, fitz.f1fitz(M, ctx)) < 1e-8
    with pytest.raises(NotMonotoneError):
        fitz.f1fitz(-np.eye(2))


def test_lower_bound_by_the_pairing():
    ctx = HilbertContext.uniform(2)
    A = linrel.from_matrix(np.array([[1.0, 1.0], [-1.0, 2.0]]), ctx=ctx)
    F = fitz.fitzpatrick(A)
    rng = np.random.default_rng(5)
    for _ in range(50):
        x, xstar = rng.standard_normal(2), rng.standard_normal(2)
        assert fitz.evaluate(F, np.concatenate([x, xstar])) >= x @ xstar - 1e-9


def test_discrepancy_of_different_tags_is_infinite():
    ctx = HilbertContext.uniform(2)
    assert fitz.discrepancy(fitz.everywhere_plus_infinity(ctx), fitz.indicator(ctx.full())) == float("inf")


def test_dict_export():
    data = fitz.fitzpatrick(linrel.from_matrix(np.eye(1))).to_dict()
    assert data["tag"] == "proper"
    assert set(data) == {"tag", "dim", "origin", "directions", "hessian", "linear", "constant"}


@settings(max_examples=30, derandomize=True, deadline=None)
@given(n=st.integers(1, 4), seed=st.integers(0, 2**16))
def test_fitzpatrick_exceeds_the_pairing_off_the_graph(n, seed):
    # M = P + K with P definite: F_A(x, Mx + d) - <x, Mx + d> = d P^-1 d / 4
    rng = np.random.default_rng(seed)
    B, C = rng.standard_normal((n, n)), rng.standard_normal((n, n))
    P = B @ B.T + 0.5 * np.eye(n)
    M = P + C - C.T
    F = fitz.fitzpatrick(linrel.from_matrix(M))
    x = rng.standard_normal(n)
    d = rng.uniform(0.5, 1.5, n) * rng.choice([-1.0, 1.0], n)
    xstar = M @ x + d
    gap = fitz.evaluate(F, np.concatenate([x, xstar])) - x @ xstar
    assert gap > 0
    assert gap == pytest.approx(0.25 * d @ np.linalg.solve(P, d), rel=1e-6, abs=1e-9)
    assert fitz.evaluate(F, np.concatenate([x, M @ x])) == pytest.approx(x @ M @ x, rel=1e-6, abs=1e-9)
