import logging
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel

from monotone_lab.linrel import LinearRelation, adjoint, graph_residual, negate
from monotone_lab.space import DEFAULT_RANK_TOL, ContextMismatchError, Vector, inner

logger = logging.getLogger(__name__)


class NotMonotoneError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class MaximalityInconsistencyError(ValueError):
    """Rank test and adjoint test disagree on maximality of a monotone relation."""


class MonotonicityVerdict(BaseModel):
    predicate: str
    result: bool
    margin: float
    witness: Optional[List[List[float]]] = None
    details: Dict[str, Any] = {}


def pairing_form(A: LinearRelation) -> np.ndarray:
    """Symmetric matrix of c -> <x, x*> on graph coordinates."""
    P = A.top.T @ (A.ctx.w[:, None] * A.bottom)
    return np.asarray(0.5 * (P + P.T))


def _witness(A: LinearRelation, c: np.ndarray) -> List[List[float]]:
    return [(A.top @ c).tolist(), (A.bottom @ c).tolist()]


def is_monotone(A: LinearRelation, tol: float = DEFAULT_RANK_TOL) -> MonotonicityVerdict:
    if A.rank == 0:
        return MonotonicityVerdict(predicate="monotone", result=True, margin=0.0)
    eigenvalues, eigenvectors = np.linalg.eigh(pairing_form(A))
    margin = float(eigenvalues[0])
    result = margin >= -tol
    witness = None if result else _witness(A, eigenvectors[:, 0])
    return MonotonicityVerdict(predicate="monotone", result=result, margin=margin, witness=witness)


def is_skew(A: LinearRelation, tol: float = DEFAULT_RANK_TOL) -> MonotonicityVerdict:
    if A.rank == 0:
        return MonotonicityVerdict(predicate="skew", result=True, margin=0.0)
    eigenvalues, eigenvectors = np.linalg.eigh(pairing_form(A))
    worst = int(np.argmax(np.abs(eigenvalues)))
    margin = float(abs(eigenvalues[worst]))
    result = margin <= tol
    witness = None if result else _witness(A, eigenvectors[:, worst])
    return MonotonicityVerdict(predicate="skew", result=result, margin=margin, witness=witness)


def is_symmetric(A: LinearRelation, tol: float = DEFAULT_RANK_TOL) -> MonotonicityVerdict:
    """gra A inside gra A*."""
    margin = graph_residual(A, adjoint(A))
    return MonotonicityVerdict(predicate="symmetric", result=margin <= tol, margin=margin)


def _self_adjoint_margin(A: LinearRelation, B: LinearRelation) -> float:
    return max(graph_residual(A, B), graph_residual(B, A), 0.0 if A.rank == B.rank else 1.0)


def is_self_adjoint(A: LinearRelation, tol: float = DEFAULT_RANK_TOL) -> MonotonicityVerdict:
    margin = _self_adjoint_margin(A, adjoint(A))
    return MonotonicityVerdict(predicate="self_adjoint", result=margin <= tol, margin=margin)


def is_anti_self_adjoint(A: LinearRelation, tol: float = DEFAULT_RANK_TOL) -> MonotonicityVerdict:
    margin = _self_adjoint_margin(A, negate(adjoint(A)))
    return MonotonicityVerdict(predicate="anti_self_adjoint", result=margin <= tol, margin=margin)


def is_maximal_monotone(A: LinearRelation, tol: float = DEFAULT_RANK_TOL) -> MonotonicityVerdict:
    """Monotone with rank n, cross-checked against monotonicity of the adjoint."""
    mono = is_monotone(A, tol)
    adj = is_monotone(adjoint(A), tol)
    full_rank = A.rank == A.n
    if mono.result and full_rank != adj.result:
        raise MaximalityInconsistencyError(
            f"monotone relation of rank {A.rank} on dim {A.n} has adjoint monotone={adj.result} "
            f"(margin {adj.margin:.3e})"
        )
    result = mono.result and full_rank
    margin = mono.margin if not full_rank or not mono.result else min(mono.margin, adj.margin)
    return MonotonicityVerdict(
        predicate="maximal_monotone",
        result=result,
        margin=margin,
        witness=mono.witness,
        details={
            "rank": A.rank,
            "n": A.n,
            "monotone": mono.result,
            "adjoint_monotone": adj.result,
            "adjoint_margin": adj.margin,
        },
    )


def is_maximal_skew(A: LinearRelation, tol: float = DEFAULT_RANK_TOL) -> MonotonicityVerdict:
    """Skew with no proper skew extension; in finite dimension that means rank n."""
    skew = is_skew(A, tol)
    return MonotonicityVerdict(
        predicate="maximal_skew",
        result=skew.result and A.rank == A.n,
        margin=skew.margin,
        witness=skew.witness,
        details={"rank": A.rank, "n": A.n},
    )


def monotonically_related(
    x: Vector, xstar: Vector, A: LinearRelation, tol: float = DEFAULT_RANK_TOL
) -> MonotonicityVerdict:
    """inf over (a, a*) in gra A of <x - a, x* - a*>, compared against -tol."""
    if x.ctx != A.ctx or xstar.ctx != A.ctx:
        raise ContextMismatchError("point and relation live in different spaces")
    mono = is_monotone(A, tol)
    if not mono.result:
        raise NotMonotoneError(f"relation is not monotone (margin {mono.margin:.3e})")

    base = inner(x, xstar)
    if A.rank == 0:
        return MonotonicityVerdict(predicate="monotonically_related", result=base >= -tol, margin=base)

    w = A.ctx.w
    # <x - Pc, x* - Qc> = base - l.c + c^T P c
    ell = A.bottom.T @ (w * x.coords) + A.top.T @ (w * xstar.coords)
    eigenvalues, eigenvectors = np.linalg.eigh(pairing_form(A))
    slope = eigenvectors.T @ ell
    flat = eigenvalues <= tol
    scale = 1.0 + float(np.linalg.norm(ell))

    if np.any(np.abs(slope[flat]) > tol * scale):
        j = int(np.flatnonzero(flat & (np.abs(slope) > tol * scale))[0])
        direction = eigenvectors[:, j] * np.sign(slope[j])
        return MonotonicityVerdict(
            predicate="monotonically_related",
            result=False,
            margin=float("-inf"),
            witness=_witness(A, direction),
            details={"unbounded_direction": True},
        )

    curved = ~flat
    c_opt = eigenvectors[:, curved] @ (0.5 * slope[curved] / eigenvalues[curved])
    margin = base - 0.25 * float(np.sum(slope[curved] ** 2 / eigenvalues[curved]))
    result = margin >= -tol
    return MonotonicityVerdict(
        predicate="monotonically_related",
        result=result,
        margin=margin,
        witness=None if result else _witness(A, c_opt),
    )


def unique_extension_check(A: LinearRelation, tol: float = DEFAULT_RANK_TOL) -> MonotonicityVerdict:
    """For maximal monotone skew A: -A inside A* and A* maximal monotone."""
    maximal = is_maximal_monotone(A, tol)
    skew = is_skew(A, tol)
    if not (maximal.result and skew.result):
        raise PreconditionError(
            f"needs a maximal monotone skew relation (maximal={maximal.result}, skew={skew.result})"
        )
    adj = adjoint(A)
    containment = graph_residual(negate(A), adj)
    adj_maximal = is_maximal_monotone(adj, tol)
    return MonotonicityVerdict(
        predicate="unique_extension",
        result=containment <= tol and adj_maximal.result,
        margin=containment,
        details={"adjoint_maximal_monotone": adj_maximal.result, "adjoint_rank": adj.rank},
    )


def skew_dichotomy_check(A: LinearRelation, tol: float = DEFAULT_RANK_TOL) -> MonotonicityVerdict:
    """For maximal skew A, at least one of A* and -A* is maximal monotone."""
    maximal_skew = is_maximal_skew(A, tol)
    if not maximal_skew.result:
        raise PreconditionError(f"needs a maximal skew relation (rank {A.rank}, n {A.n})")
    adj = adjoint(A)
    plus = is_maximal_monotone(adj, tol).result
    minus = is_maximal_monotone(negate(adj), tol).result
    return MonotonicityVerdict(
        predicate="skew_dichotomy",
        result=plus or minus,
        margin=0.0,
        details={"adjoint_maximal_monotone": plus, "negated_adjoint_maximal_monotone": minus},
    )
