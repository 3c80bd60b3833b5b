import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

logger = logging.getLogger(__name__)

DEFAULT_RANK_TOL = 1e-10


class ContextMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class HilbertContext:
    """Finite-dimensional real inner-product space with a diagonal Gram matrix."""

    weights: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.weights) < 1:
            raise ValueError("HilbertContext needs dim >= 1")
        if any(w <= 0 for w in self.weights):
            raise ValueError(f"weights must be positive, got {self.weights}")

    @classmethod
    def uniform(cls, dim: int, weight: float = 1.0) -> "HilbertContext":
        return cls(tuple([float(weight)] * dim))

    @property
    def dim(self) -> int:
        return len(self.weights)

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def product(self) -> "HilbertContext":
        return HilbertContext(self.weights + self.weights)

    @property
    def is_product(self) -> bool:
        n = self.dim // 2
        return self.dim % 2 == 0 and self.weights[:n] == self.weights[n:]

    @property
    def half(self) -> "HilbertContext":
        if not self.is_product:
            raise ContextMismatchError("context is not a product X x X")
        return HilbertContext(self.weights[: self.dim // 2])

    def vector(self, coords: Any) -> "Vector":
        return Vector(np.asarray(coords, dtype=float).reshape(-1), self)

    def zeros(self) -> "Vector":
        return Vector(np.zeros(self.dim), self)

    def ones(self) -> "Vector":
        return Vector(np.ones(self.dim), self)

    def basis_vector(self, index: int) -> "Vector":
        coords = np.zeros(self.dim)
        coords[index] = 1.0
        return Vector(coords, self)

    def full(self) -> "Subspace":
        return Subspace(self, np.diag(1.0 / np.sqrt(self.w)))

    def trivial(self) -> "Subspace":
        return Subspace(self, np.zeros((self.dim, 0)))


@dataclass(frozen=True, eq=False)
class Vector:
    coords: np.ndarray
    ctx: HilbertContext

    def __post_init__(self) -> None:
        if self.coords.shape != (self.ctx.dim,):
            raise ContextMismatchError(f"expected {self.ctx.dim} coordinates, got shape {self.coords.shape}")

    def _check(self, other: "Vector") -> None:
        if self.ctx != other.ctx:
            raise ContextMismatchError("vectors live in different contexts")

    def __add__(self, other: "Vector") -> "Vector":
        self._check(other)
        return Vector(self.coords + other.coords, self.ctx)

    def __sub__(self, other: "Vector") -> "Vector":
        self._check(other)
        return Vector(self.coords - other.coords, self.ctx)

    def __neg__(self) -> "Vector":
        return Vector(-self.coords, self.ctx)

    def __mul__(self, k: float) -> "Vector":
        return Vector(k * self.coords, self.ctx)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.sqrt(inner(self, self)))

    def to_list(self) -> List[float]:
        return [float(c) for c in self.coords]


@dataclass(frozen=True, eq=False)
class Subspace:
    """Column span of `basis`; columns are orthonormal in the weighted inner product."""

    ctx: HilbertContext
    basis: np.ndarray

    def __post_init__(self) -> None:
        if self.basis.ndim != 2 or self.basis.shape[0] != self.ctx.dim:
            raise ContextMismatchError(f"basis shape {self.basis.shape} does not fit dim {self.ctx.dim}")

    @property
    def rank(self) -> int:
        return int(self.basis.shape[1])

    def gram_error(self) -> float:
        if self.rank == 0:
            return 0.0
        gram = self.basis.T @ (self.ctx.w[:, None] * self.basis)
        return float(np.max(np.abs(gram - np.eye(self.rank))))

    def column(self, j: int) -> Vector:
        return Vector(self.basis[:, j].copy(), self.ctx)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.ctx.dim,
            "weights": list(self.ctx.weights),
            "basis": self.basis.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Subspace":
        ctx = HilbertContext(tuple(float(w) for w in data["weights"]))
        if ctx.dim != data["dim"]:
            raise ValueError(f"subspace dict has dim {data['dim']} but {ctx.dim} weights")
        basis = np.asarray(data["basis"], dtype=float).reshape(ctx.dim, -1)
        return cls(ctx, basis)


def weighted_norm(ctx: HilbertContext, coords: np.ndarray) -> float:
    return float(np.sqrt(coords @ (ctx.w * coords)))


def inner(x: Vector, y: Vector) -> float:
    x._check(y)
    return float(np.sum(x.ctx.w * x.coords * y.coords))


def kernel_basis(matrix: np.ndarray) -> np.ndarray:
    """Euclidean orthonormal basis of {c : matrix @ c = 0}; tolerates empty shapes."""
    rows, cols = matrix.shape
    if cols == 0:
        return np.zeros((0, 0))
    if rows == 0 or not np.any(matrix):
        return np.eye(cols)
    return np.asarray(null_space(matrix, rcond=DEFAULT_RANK_TOL))


def orthonormal_columns(ctx: HilbertContext, columns: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> Subspace:
    """Modified Gram-Schmidt in the weighted inner product, one re-orthogonalization pass."""
    columns = np.asarray(columns, dtype=float).reshape(ctx.dim, -1)
    w = ctx.w
    norms = np.sqrt(np.sum(w[:, None] * columns**2, axis=0)) if columns.shape[1] else np.zeros(0)
    threshold = tol * max(1.0, float(np.max(norms)) if norms.size else 0.0)

    kept: List[np.ndarray] = []
    for j in range(columns.shape[1]):
        v = columns[:, j].copy()
        for _ in range(2):
            for q in kept:
                v -= (q @ (w * v)) * q
        norm = weighted_norm(ctx, v)
        if norm <= threshold:
            continue
        kept.append(v / norm)

    if not kept:
        return ctx.trivial()
    return Subspace(ctx, np.column_stack(kept))


def orthonormalize(
    vs: Sequence[Vector], tol: float = DEFAULT_RANK_TOL, ctx: Optional[HilbertContext] = None
) -> Subspace:
    if not vs:
        if ctx is None:
            raise ValueError("empty input needs an explicit context")
        return ctx.trivial()
    ctx = ctx or vs[0].ctx
    for v in vs:
        if v.ctx != ctx:
            raise ContextMismatchError("orthonormalize needs a shared context")
    return orthonormal_columns(ctx, np.column_stack([v.coords for v in vs]), tol)


def project_coords(S: Subspace, coords: np.ndarray) -> np.ndarray:
    if S.rank == 0:
        return np.zeros_like(coords)
    return np.asarray(S.basis @ (S.basis.T @ (S.ctx.w * coords)))


def project(S: Subspace, v: Vector) -> Vector:
    if S.ctx != v.ctx:
        raise ContextMismatchError("projection onto a subspace of another context")
    return Vector(project_coords(S, v.coords), S.ctx)


def complement(S: Subspace) -> Subspace:
    if S.rank == 0:
        return S.ctx.full()
    # z is orthogonal to S iff basis^T W z = 0
    kernel = kernel_basis(S.basis.T * S.ctx.w[None, :])
    result = orthonormal_columns(S.ctx, kernel)
    if result.rank + S.rank != S.ctx.dim:
        logger.warning(f"complement rank {result.rank} + {S.rank} != dim {S.ctx.dim}")
    return result


def span_sum(S1: Subspace, S2: Subspace) -> Subspace:
    if S1.ctx != S2.ctx:
        raise ContextMismatchError("sum of subspaces from different contexts")
    return orthonormal_columns(S1.ctx, np.hstack([S1.basis, S2.basis]))


def intersect(S1: Subspace, S2: Subspace) -> Subspace:
    if S1.ctx != S2.ctx:
        raise ContextMismatchError("intersection of subspaces from different contexts")
    return complement(span_sum(complement(S1), complement(S2)))


def residual(S: Subspace, coords: np.ndarray) -> float:
    diff = coords - project_coords(S, coords)
    return weighted_norm(S.ctx, diff) / (1.0 + weighted_norm(S.ctx, coords))


def contains(S: Subspace, v: Vector, tol: float = DEFAULT_RANK_TOL) -> bool:
    if S.ctx != v.ctx:
        raise ContextMismatchError("membership test across contexts")
    return residual(S, v.coords) <= tol


def containment_residual(S1: Subspace, S2: Subspace) -> float:
    """Largest relative distance from a basis column of S1 to S2 (0.0 when S1 is trivial)."""
    if S1.ctx != S2.ctx:
        raise ContextMismatchError("containment across contexts")
    if S1.rank == 0:
        return 0.0
    return max(residual(S2, S1.basis[:, j]) for j in range(S1.rank))


def is_subspace_of(S1: Subspace, S2: Subspace, tol: float = DEFAULT_RANK_TOL) -> bool:
    return S1.rank <= S2.rank and containment_residual(S1, S2) <= tol


def equals(S1: Subspace, S2: Subspace, tol: float = DEFAULT_RANK_TOL) -> bool:
    return S1.rank == S2.rank and is_subspace_of(S1, S2, tol) and is_subspace_of(S2, S1, tol)


def span(vs: Sequence[Vector], ctx: Optional[HilbertContext] = None) -> Subspace:
    return orthonormalize(vs, ctx=ctx)


def random_subspace(ctx: HilbertContext, rank: int, rng: np.random.Generator) -> Subspace:
    return orthonormal_columns(ctx, rng.standard_normal((ctx.dim, rank)))
