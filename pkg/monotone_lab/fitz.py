"""
Partial quadratic functions and the Fitzpatrick calculus on them.

A PartialQuadratic is f(o + U c) = 1/2 c^T H c + g^T c + k on the affine set o + span(U),
and +inf off it. U has weighted-orthonormal columns, so c = U^T W (z - o).
Conjugation, the partial infimal convolution box2, transposition and composition with
affine maps all stay inside this class, so every Fitzpatrick function of a linear relation
is computed in closed form.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from monotone_lab.linrel import LinearRelation, weighted_adjoint_matrix
from monotone_lab.monotone import NotMonotoneError
from monotone_lab.space import (
    DEFAULT_RANK_TOL,
    ContextMismatchError,
    HilbertContext,
    Subspace,
    Vector,
    complement,
    is_subspace_of,
    kernel_basis,
    orthonormal_columns,
    residual,
)

logger = logging.getLogger(__name__)

CURVATURE_TOL = 1e-9

Point = Union[Vector, np.ndarray]


class NonConvexError(ValueError):
    pass


class Tag(str, Enum):
    PROPER = "proper"
    PLUS_INFINITY = "everywhere_plus_infinity"
    MINUS_INFINITY = "minus_infinity_on_domain"


@dataclass(frozen=True, eq=False)
class PartialQuadratic:
    ctx: HilbertContext
    tag: Tag
    origin: np.ndarray
    directions: Subspace
    hessian: np.ndarray
    linear: np.ndarray
    constant: float

    def __post_init__(self) -> None:
        k = self.directions.rank
        if self.directions.ctx != self.ctx or self.origin.shape != (self.ctx.dim,):
            raise ContextMismatchError("domain does not live in the function's context")
        if self.hessian.shape != (k, k) or self.linear.shape != (k,):
            raise ValueError(f"coefficients do not match a domain of dimension {k}")

    @property
    def domain_dim(self) -> int:
        return self.directions.rank

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tag": self.tag.value,
            "dim": self.ctx.dim,
            "origin": self.origin.tolist(),
            "directions": self.directions.basis.tolist(),
            "hessian": self.hessian.tolist(),
            "linear": self.linear.tolist(),
            "constant": self.constant,
        }


def make(
    ctx: HilbertContext,
    directions: Subspace,
    hessian: Optional[np.ndarray] = None,
    linear: Optional[np.ndarray] = None,
    constant: float = 0.0,
    origin: Optional[np.ndarray] = None,
    tag: Tag = Tag.PROPER,
) -> PartialQuadratic:
    k = directions.rank
    H = np.zeros((k, k)) if hessian is None else np.asarray(hessian, dtype=float).reshape(k, k)
    return PartialQuadratic(
        ctx=ctx,
        tag=tag,
        origin=np.zeros(ctx.dim) if origin is None else np.asarray(origin, dtype=float),
        directions=directions,
        hessian=0.5 * (H + H.T),
        linear=np.zeros(k) if linear is None else np.asarray(linear, dtype=float).reshape(k),
        constant=float(constant),
    )


def everywhere_plus_infinity(ctx: HilbertContext) -> PartialQuadratic:
    return make(ctx, ctx.trivial(), tag=Tag.PLUS_INFINITY)


def minus_infinity_on(
    ctx: HilbertContext, directions: Subspace, origin: Optional[np.ndarray] = None
) -> PartialQuadratic:
    return make(ctx, directions, origin=origin, tag=Tag.MINUS_INFINITY)


def indicator(S: Subspace, origin: Optional[np.ndarray] = None) -> PartialQuadratic:
    return make(S.ctx, S, origin=origin)


def quadratic_form(ctx: HilbertContext, M: np.ndarray) -> PartialQuadratic:
    """q_M(x) = 1/2 <x, M x> on the whole space."""
    full = ctx.full()
    WM = ctx.w[:, None] * np.asarray(M, dtype=float)
    return make(ctx, full, hessian=full.basis.T @ (0.5 * (WM + WM.T)) @ full.basis)


def pairing_on(graph: Subspace) -> PartialQuadratic:
    """(x, x*) -> <x, x*> restricted to a subspace of a product space."""
    ctx = graph.ctx
    n = ctx.half.dim
    top, bottom = graph.basis[:n], graph.basis[n:]
    w = ctx.half.w
    cross = top.T @ (w[:, None] * bottom)
    return make(ctx, graph, hessian=cross + cross.T)


def _as_coords(f: PartialQuadratic, z: Point) -> np.ndarray:
    if isinstance(z, Vector):
        if z.ctx != f.ctx:
            raise ContextMismatchError("point lives in another context")
        return z.coords
    coords = np.asarray(z, dtype=float).reshape(-1)
    if coords.shape != (f.ctx.dim,):
        raise ContextMismatchError(f"expected {f.ctx.dim} coordinates, got {coords.shape}")
    return coords


def _local(f: PartialQuadratic, z: np.ndarray, tol: float) -> Optional[np.ndarray]:
    """Domain coordinates of z, or None off the domain."""
    shifted = z - f.origin
    if residual(f.directions, shifted) > tol:
        return None
    return np.asarray(f.directions.basis.T @ (f.ctx.w * shifted))


def _value(f: PartialQuadratic, c: np.ndarray) -> float:
    return float(0.5 * c @ f.hessian @ c + f.linear @ c + f.constant)


def evaluate(f: PartialQuadratic, z: Point, tol: float = DEFAULT_RANK_TOL) -> float:
    if f.tag == Tag.PLUS_INFINITY:
        return float("inf")
    c = _local(f, _as_coords(f, z), tol)
    if c is None:
        return float("inf")
    if f.tag == Tag.MINUS_INFINITY:
        return float("-inf")
    return _value(f, c)


def _split_spectrum(H: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(eigenvalues, eigenvectors, null columns, pseudo-inverse)."""
    if H.size == 0:
        return np.zeros(0), np.zeros((0, 0)), np.zeros((0, 0)), np.zeros((0, 0))
    eigenvalues, eigenvectors = np.linalg.eigh(H)
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    positive = eigenvalues > CURVATURE_TOL * scale
    null = np.abs(eigenvalues) <= CURVATURE_TOL * scale
    V = eigenvectors[:, positive]
    pinv = V @ np.diag(1.0 / eigenvalues[positive]) @ V.T
    return eigenvalues, eigenvectors, eigenvectors[:, null], pinv


def conjugate(f: PartialQuadratic, strict: bool = False) -> PartialQuadratic:
    """f*(w) = sup_z <w, z> - f(z)."""
    ctx = f.ctx
    if f.tag == Tag.PLUS_INFINITY:
        return minus_infinity_on(ctx, ctx.full())
    if f.tag == Tag.MINUS_INFINITY:
        return everywhere_plus_infinity(ctx)

    eigenvalues, _, N, Hpinv = _split_spectrum(f.hessian)
    if eigenvalues.size and eigenvalues[0] < -CURVATURE_TOL * max(1.0, float(np.max(np.abs(eigenvalues)))):
        if strict:
            raise NonConvexError(f"hessian has a negative eigenvalue {eigenvalues[0]:.3e}")
        logger.debug(f"conjugate of a nonconvex quadratic (min eigenvalue {eigenvalues[0]:.3e}) is +inf")
        return everywhere_plus_infinity(ctx)

    U, w = f.directions.basis, ctx.w
    k = f.domain_dim
    if N.size == 0:
        N = np.zeros((k, 0))
    # w is in dom f* iff the slope along the flat directions of f vanishes: M^T W w = N^T g
    M = U @ N
    w0 = M @ (N.T @ f.linear)
    if M.shape[1] == 0:
        D = ctx.full()
    else:
        D = complement(Subspace(ctx, M))
    Up = D.basis

    r0 = U.T @ (w * w0) - f.linear
    R = U.T @ (w[:, None] * Up)
    H_new = R.T @ Hpinv @ R
    g_new = Up.T @ (w * f.origin) + R.T @ (Hpinv @ r0)
    k_new = float(w0 @ (w * f.origin)) - f.constant + 0.5 * float(r0 @ Hpinv @ r0)
    return make(ctx, D, hessian=H_new, linear=g_new, constant=k_new, origin=w0)


def transpose(f: PartialQuadratic) -> PartialQuadratic:
    """(x, x*) -> f(x*, x)."""
    n = f.ctx.half.dim

    def swap(a: np.ndarray) -> np.ndarray:
        return np.concatenate([a[n:], a[:n]], axis=0)

    directions = Subspace(f.ctx, swap(f.directions.basis))
    return PartialQuadratic(f.ctx, f.tag, swap(f.origin), directions, f.hessian, f.linear, f.constant)


def scale(f: PartialQuadratic, alpha: float) -> PartialQuadratic:
    if alpha <= 0:
        raise ValueError(f"scaling factor must be positive, got {alpha}")
    return PartialQuadratic(
        f.ctx, f.tag, f.origin, f.directions, alpha * f.hessian, alpha * f.linear, alpha * f.constant
    )


def precompose(
    f: PartialQuadratic, L: np.ndarray, b: Optional[np.ndarray] = None, ctx: Optional[HilbertContext] = None
) -> PartialQuadratic:
    """z -> f(L z + b), with L mapping `ctx` into f's context."""
    L = np.asarray(L, dtype=float)
    ctx = ctx or HilbertContext.uniform(L.shape[1])
    if L.shape != (f.ctx.dim, ctx.dim):
        raise ContextMismatchError(f"map of shape {L.shape} between dims {ctx.dim} and {f.ctx.dim}")
    b = np.zeros(f.ctx.dim) if b is None else np.asarray(b, dtype=float)
    if f.tag == Tag.PLUS_INFINITY:
        return everywhere_plus_infinity(ctx)

    wf = f.ctx.w
    C = complement(f.directions).basis
    K = C.T @ (wf[:, None] * L)
    r = C.T @ (wf * (f.origin - b))
    if K.shape[0]:
        z0, *_ = np.linalg.lstsq(K, r, rcond=None)
    else:
        z0 = np.zeros(ctx.dim)
    if np.linalg.norm(K @ z0 - r) > DEFAULT_RANK_TOL * (1.0 + np.linalg.norm(r)):
        return everywhere_plus_infinity(ctx)
    D = orthonormal_columns(ctx, kernel_basis(K))
    if f.tag == Tag.MINUS_INFINITY:
        return minus_infinity_on(ctx, D, origin=z0)

    U = f.directions.basis
    c0 = U.T @ (wf * (L @ z0 + b - f.origin))
    R = U.T @ (wf[:, None] * (L @ D.basis))
    return make(
        ctx,
        D,
        hessian=R.T @ f.hessian @ R,
        linear=R.T @ (f.hessian @ c0 + f.linear),
        constant=_value(f, c0),
        origin=z0,
    )


def box2(f: PartialQuadratic, g: PartialQuadratic) -> PartialQuadratic:
    """(x, x*) -> inf_{y*} f(x, x* - y*) + g(x, y*), computed exactly."""
    if f.ctx != g.ctx:
        raise ContextMismatchError("box2 of functions on different spaces")
    ctx = f.ctx
    n = ctx.half.dim
    if Tag.PLUS_INFINITY in (f.tag, g.tag):
        return everywhere_plus_infinity(ctx)

    Uf, Ug = f.directions.basis, g.directions.basis
    kf, kg = Uf.shape[1], Ug.shape[1]
    # joint coordinates p = (c, d) with matching first components
    constraint = np.hstack([Uf[:n], -Ug[:n]])
    target = g.origin[:n] - f.origin[:n]
    if kf + kg:
        p0, *_ = np.linalg.lstsq(constraint, target, rcond=None)
    else:
        p0 = np.zeros(0)
    if np.linalg.norm(constraint @ p0 - target) > DEFAULT_RANK_TOL * (1.0 + np.linalg.norm(target)):
        return everywhere_plus_infinity(ctx)
    E = kernel_basis(constraint) if kf + kg else np.zeros((0, 0))

    L = np.zeros((2 * n, kf + kg))
    L[:n, :kf] = Uf[:n]
    L[n:, :kf] = Uf[n:]
    L[n:, kf:] = Ug[n:]
    z0 = np.concatenate([f.origin[:n], f.origin[n:] + g.origin[n:]])
    z1 = z0 + L @ p0
    M = L @ E
    D = orthonormal_columns(ctx, M)
    if Tag.MINUS_INFINITY in (f.tag, g.tag):
        return minus_infinity_on(ctx, D, origin=z1)

    Q = np.zeros((kf + kg, kf + kg))
    Q[:kf, :kf] = f.hessian
    Q[kf:, kf:] = g.hessian
    q = np.concatenate([f.linear, g.linear])
    Qe = E.T @ Q @ E
    qe = E.T @ (Q @ p0 + q)
    kappa = float(0.5 * p0 @ Q @ p0 + q @ p0 + f.constant + g.constant)

    if D.rank:
        # same cutoff as kernel_basis so Y and Nm split the fibre consistently
        Y = np.linalg.pinv(M, rcond=DEFAULT_RANK_TOL) @ D.basis
    else:
        Y = np.zeros((E.shape[1], 0))
    Nm = kernel_basis(M) if M.size else np.eye(E.shape[1])
    C = Nm.T @ Qe @ Nm
    b = Nm.T @ qe

    eigenvalues, eigenvectors, flat, Cpinv = _split_spectrum(C)
    if eigenvalues.size:
        curvature_scale = max(1.0, float(np.max(np.abs(eigenvalues))))
        if eigenvalues[0] < -CURVATURE_TOL * curvature_scale:
            logger.debug("box2 fibre is nonconvex; infimum is -inf")
            return minus_infinity_on(ctx, D, origin=z1)
        if flat.size and np.any(np.abs(flat.T @ b) > CURVATURE_TOL * (1.0 + np.linalg.norm(b))):
            logger.debug("box2 fibre has an unbounded linear direction; infimum is -inf")
            return minus_infinity_on(ctx, D, origin=z1)

    A = Y.T @ Qe @ Y
    B = Y.T @ Qe @ Nm
    a = Y.T @ qe
    return make(
        ctx,
        D,
        hessian=A - B @ Cpinv @ B.T,
        linear=a - B @ Cpinv @ b,
        constant=kappa - 0.5 * float(b @ Cpinv @ b),
        origin=z1,
    )


def fitzpatrick(A: LinearRelation) -> PartialQuadratic:
    """F_A(x, x*) = sup over (a, a*) in gra A of <x, a*> + <a, x*> - <a, a*>."""
    h = pairing_on(A.graph)
    return transpose(conjugate(h, strict=False))


def f1fitz(M: np.ndarray, ctx: Optional[HilbertContext] = None, tol: float = DEFAULT_RANK_TOL) -> PartialQuadratic:
    """F_A for a full-domain monotone matrix, through 1/2 q*_{A+}(x* + A* x)."""
    M = np.asarray(M, dtype=float)
    ctx = ctx or HilbertContext.uniform(M.shape[0])
    Mstar = weighted_adjoint_matrix(ctx, M)
    sym = 0.5 * (M + Mstar)
    lowest = float(np.min(np.linalg.eigvalsh(ctx.w[:, None] * sym)))
    if lowest < -tol:
        raise NotMonotoneError(f"symmetric part has eigenvalue {lowest:.3e}")
    qstar = conjugate(quadratic_form(ctx, sym))
    L = np.hstack([Mstar, np.eye(ctx.dim)])
    return scale(precompose(qstar, L, ctx=ctx.product()), 0.5)


def sample_points(f: PartialQuadratic) -> List[np.ndarray]:
    if f.tag == Tag.PLUS_INFINITY:
        return []
    points = [f.origin]
    for j in range(f.domain_dim):
        points.append(f.origin + f.directions.basis[:, j])
        points.append(f.origin - f.directions.basis[:, j])
    return points


def _same_domain(f: PartialQuadratic, g: PartialQuadratic, tol: float) -> bool:
    if f.domain_dim != g.domain_dim:
        return False
    if residual(g.directions, f.origin - g.origin) > tol:
        return False
    return is_subspace_of(f.directions, g.directions, tol) and is_subspace_of(g.directions, f.directions, tol)


def discrepancy(f: PartialQuadratic, g: PartialQuadratic, tol: float = 1e-8) -> float:
    """Largest relative value gap on sample points of both domains; inf when domains or tags differ."""
    if f.ctx != g.ctx:
        raise ContextMismatchError("comparing functions on different spaces")
    if f.tag != g.tag:
        return float("inf")
    if f.tag == Tag.PLUS_INFINITY:
        return 0.0
    if not _same_domain(f, g, tol):
        return float("inf")
    if f.tag == Tag.MINUS_INFINITY:
        return 0.0
    worst = 0.0
    for z in sample_points(f) + sample_points(g):
        a, b = evaluate(f, z, tol), evaluate(g, z, tol)
        worst = max(worst, abs(a - b) / (1.0 + max(abs(a), abs(b))))
    return worst


def equals(f: PartialQuadratic, g: PartialQuadratic, tol: float = 1e-8) -> bool:
    return discrepancy(f, g, tol) <= tol


def is_autoconjugate(F: PartialQuadratic, tol: float = 1e-8) -> bool:
    """F equals the transpose of its conjugate."""
    return equals(F, transpose(conjugate(F)), tol)
