import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from monotone_lab.space import (
    DEFAULT_RANK_TOL,
    ContextMismatchError,
    HilbertContext,
    Subspace,
    Vector,
    complement,
    containment_residual,
    equals as subspace_equals,
    intersect,
    is_subspace_of,
    kernel_basis,
    orthonormal_columns,
    project_coords,
    residual,
    weighted_norm,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LinearRelation:
    """A linear subspace of X x X, i.e. a possibly multivalued linear operator on X."""

    ctx: HilbertContext
    graph: Subspace

    def __post_init__(self) -> None:
        if self.graph.ctx != self.ctx.product():
            raise ContextMismatchError("graph must live in ctx x ctx")

    @property
    def n(self) -> int:
        return self.ctx.dim

    @property
    def rank(self) -> int:
        return self.graph.rank

    @property
    def top(self) -> np.ndarray:
        return self.graph.basis[: self.n]

    @property
    def bottom(self) -> np.ndarray:
        return self.graph.basis[self.n :]

    def pair(self, j: int) -> Tuple[Vector, Vector]:
        return self.ctx.vector(self.top[:, j]), self.ctx.vector(self.bottom[:, j])

    def __repr__(self) -> str:
        return f"LinearRelation(n={self.n}, rank={self.rank})"


def from_pairs(
    ctx: HilbertContext, xs: np.ndarray, xstars: np.ndarray, tol: float = DEFAULT_RANK_TOL
) -> LinearRelation:
    xs = np.asarray(xs, dtype=float).reshape(ctx.dim, -1)
    xstars = np.asarray(xstars, dtype=float).reshape(ctx.dim, -1)
    if xs.shape != xstars.shape:
        raise ContextMismatchError(f"pair blocks differ in shape: {xs.shape} vs {xstars.shape}")
    graph = orthonormal_columns(ctx.product(), np.vstack([xs, xstars]), tol)
    return LinearRelation(ctx, graph)


def from_matrix(
    M: np.ndarray, domain: Optional[Subspace] = None, ctx: Optional[HilbertContext] = None
) -> LinearRelation:
    """Graph of x -> M x, optionally restricted to `domain`."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    ctx = ctx or HilbertContext.uniform(M.shape[0])
    if ctx.dim != M.shape[0]:
        raise ContextMismatchError(f"matrix of size {M.shape[0]} on a context of dim {ctx.dim}")
    D = domain.basis if domain is not None else np.eye(ctx.dim)
    if domain is not None and domain.ctx != ctx:
        raise ContextMismatchError("domain lives in another context")
    return from_pairs(ctx, D, M @ D)


def adjoint(A: LinearRelation) -> LinearRelation:
    """gra A* = {(x, x*) : (x*, -x) is orthogonal to gra A}."""
    perp = complement(A.graph)
    p, q = perp.basis[: A.n], perp.basis[A.n :]
    # (p, q) = (x*, -x) and the swap keeps columns orthonormal in the product weights
    return LinearRelation(A.ctx, Subspace(A.graph.ctx, np.vstack([-q, p])))


def inverse(A: LinearRelation) -> LinearRelation:
    return LinearRelation(A.ctx, Subspace(A.graph.ctx, np.vstack([A.bottom, A.top])))


def scale(k: float, A: LinearRelation) -> LinearRelation:
    if k == 0:
        raise ValueError("scaling a relation by 0 collapses its graph; use the zero relation instead")
    return from_pairs(A.ctx, A.top, k * A.bottom)


def negate(A: LinearRelation) -> LinearRelation:
    return LinearRelation(A.ctx, Subspace(A.graph.ctx, np.vstack([A.top, -A.bottom])))


def add(A: LinearRelation, B: LinearRelation) -> LinearRelation:
    """gra(A + B) = {(x, a* + b*) : (x, a*) in gra A, (x, b*) in gra B}."""
    if A.ctx != B.ctx:
        raise ContextMismatchError("sum of relations on different spaces")
    N = kernel_basis(np.hstack([A.top, -B.top]))
    if N.size == 0:
        return zero_relation(A.ctx, domain=A.ctx.trivial())
    Nc, Nd = N[: A.rank], N[A.rank :]
    return from_pairs(A.ctx, A.top @ Nc, A.bottom @ Nc + B.bottom @ Nd)


def zero_relation(ctx: HilbertContext, domain: Optional[Subspace] = None) -> LinearRelation:
    D = domain.basis if domain is not None else np.eye(ctx.dim)
    return from_pairs(ctx, D, np.zeros_like(D))


def dom(A: LinearRelation) -> Subspace:
    return orthonormal_columns(A.ctx, A.top)


def ran(A: LinearRelation) -> Subspace:
    return orthonormal_columns(A.ctx, A.bottom)


def multivalued_part(A: LinearRelation) -> Subspace:
    """A(0) = {x* : (0, x*) in gra A}."""
    if A.rank == 0:
        return A.ctx.trivial()
    N = kernel_basis(A.top)
    return orthonormal_columns(A.ctx, A.bottom @ N)


def kernel(A: LinearRelation) -> Subspace:
    """{x : (x, 0) in gra A}."""
    if A.rank == 0:
        return A.ctx.trivial()
    N = kernel_basis(A.bottom)
    return orthonormal_columns(A.ctx, A.top @ N)


@dataclass(frozen=True, eq=False)
class Image:
    """The affine set particular + span(directions); particular is the minimum-norm element."""

    particular: Vector
    directions: Subspace

    def contains(self, v: Vector, tol: float = DEFAULT_RANK_TOL) -> bool:
        return residual(self.directions, v.coords - self.particular.coords) <= tol


def image(A: LinearRelation, x: Vector, tol: float = DEFAULT_RANK_TOL) -> Optional[Image]:
    if x.ctx != A.ctx:
        raise ContextMismatchError("point and relation live in different spaces")
    if A.rank == 0:
        return None if weighted_norm(A.ctx, x.coords) > tol else Image(A.ctx.zeros(), A.ctx.trivial())
    c, *_ = np.linalg.lstsq(A.top, x.coords, rcond=None)
    miss = weighted_norm(A.ctx, A.top @ c - x.coords) / (1.0 + weighted_norm(A.ctx, x.coords))
    if miss > tol:
        return None
    directions = multivalued_part(A)
    value = A.bottom @ c
    particular = value - project_coords(directions, value)
    return Image(A.ctx.vector(particular), directions)


def contains_pair(A: LinearRelation, x: Vector, xstar: Vector, tol: float = DEFAULT_RANK_TOL) -> bool:
    return residual(A.graph, np.concatenate([x.coords, xstar.coords])) <= tol


def restrict(A: LinearRelation, D: Subspace) -> LinearRelation:
    n = A.n
    box = np.zeros((2 * n, D.rank + n))
    box[:n, : D.rank] = D.basis
    box[n:, D.rank :] = np.eye(n)
    return LinearRelation(A.ctx, intersect(A.graph, orthonormal_columns(A.graph.ctx, box)))


def graph_residual(A: LinearRelation, B: LinearRelation) -> float:
    if A.ctx != B.ctx:
        raise ContextMismatchError("relations on different spaces")
    return containment_residual(A.graph, B.graph)


def is_subrelation(A: LinearRelation, B: LinearRelation, tol: float = DEFAULT_RANK_TOL) -> bool:
    return is_subspace_of(A.graph, B.graph, tol)


def equals(A: LinearRelation, B: LinearRelation, tol: float = DEFAULT_RANK_TOL) -> bool:
    return A.ctx == B.ctx and subspace_equals(A.graph, B.graph, tol)


def to_matrix(A: LinearRelation, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    if A.rank != A.n or multivalued_part(A).rank != 0:
        raise ValueError(f"relation with rank {A.rank} is not a full-domain single-valued operator on dim {A.n}")
    return np.asarray(np.linalg.solve(A.top.T, A.bottom.T).T)


def weighted_adjoint_matrix(ctx: HilbertContext, M: np.ndarray) -> np.ndarray:
    """M* = W^-1 M^T W."""
    w = ctx.w
    return np.asarray(M.T * w[None, :] / w[:, None])


def parts(A: LinearRelation) -> Tuple[np.ndarray, np.ndarray]:
    """(A+, A0): symmetric and skew parts of a full-domain single-valued relation."""
    M = to_matrix(A)
    Mstar = weighted_adjoint_matrix(A.ctx, M)
    return 0.5 * (M + Mstar), 0.5 * (M - Mstar)
