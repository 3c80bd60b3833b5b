import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from monotone_lab import fitz
from monotone_lab.fitz import PartialQuadratic
from monotone_lab.linrel import (
    LinearRelation,
    adjoint,
    from_matrix,
    from_pairs,
    inverse,
    weighted_adjoint_matrix,
)
from monotone_lab.monotone import is_anti_self_adjoint
from monotone_lab.report import ConvergenceRow
from monotone_lab.space import HilbertContext, Subspace, Vector, complement, orthonormal_columns

logger = logging.getLogger(__name__)

DEFAULT_M_LIST = [8, 16, 32, 64, 128]
SWEEP_FAMILIES = ("volterra-box2", "vplus-conj", "t1-identities")
VPLUS_LEVELS = (-2.0, -1.0, 0.0, 1.0, 3.0)


@dataclass(frozen=True)
class Grid:
    m: int

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError(f"grid needs m >= 2, got {self.m}")

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @property
    def ctx(self) -> HilbertContext:
        return HilbertContext.uniform(self.m, self.h)

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.m) + 0.5) * self.h

    def e(self) -> Vector:
        return self.ctx.ones()

    def e_perp(self) -> Subspace:
        return complement(orthonormal_columns(self.ctx, np.ones((self.m, 1))))


@dataclass(frozen=True, eq=False)
class SampledFunction:
    name: str
    samples: Vector
    x0: float
    x1: float

    @property
    def target(self) -> float:
        return 0.5 * (self.x1**2 + self.x0**2)


FUNCTIONS: Dict[str, Tuple[Callable[[np.ndarray], np.ndarray], float, float]] = {
    "t": (lambda t: t, 0.0, 1.0),
    "t2p1": (lambda t: t**2 + 1.0, 1.0, 2.0),
    "const1": (lambda t: np.ones_like(t), 1.0, 1.0),
}


def sample_function(name: str, g: Grid) -> SampledFunction:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}, expected one of {sorted(FUNCTIONS)}")
    fn, x0, x1 = FUNCTIONS[name]
    return SampledFunction(name=name, samples=g.ctx.vector(fn(g.midpoints)), x0=x0, x1=x1)


def build_V(g: Grid) -> np.ndarray:
    return g.h * (np.tril(np.ones((g.m, g.m)), k=-1) + 0.5 * np.eye(g.m))


def build_Vstar(g: Grid) -> np.ndarray:
    return weighted_adjoint_matrix(g.ctx, build_V(g))


def build_Vplus(g: Grid) -> np.ndarray:
    return 0.5 * (build_V(g) + build_Vstar(g))


def build_Vcirc(g: Grid) -> np.ndarray:
    return 0.5 * (build_V(g) - build_Vstar(g))


def build_T(g: Grid) -> LinearRelation:
    """Differentiation with x(0) = 0: the inverse of V."""
    return inverse(from_matrix(build_V(g), ctx=g.ctx))


def build_Tstar(g: Grid) -> LinearRelation:
    return inverse(from_matrix(build_Vstar(g), ctx=g.ctx))


def build_T1(g: Grid) -> LinearRelation:
    """{(Vu + a e, u) : <u, e> = 0}: differentiation on functions with x(0) = x(1)."""
    U = g.e_perp().basis
    xs = np.hstack([build_V(g) @ U, np.ones((g.m, 1))])
    xstars = np.hstack([U, np.zeros((g.m, 1))])
    return from_pairs(g.ctx, xs, xstars)


def build_T2(g: Grid) -> LinearRelation:
    return inverse(from_matrix(build_Vcirc(g), ctx=g.ctx))


def skewpart_S(g: Grid) -> LinearRelation:
    """{(Vu, u) : <u, e> = 0}: differentiation with both boundary values zero."""
    U = g.e_perp().basis
    return from_pairs(g.ctx, build_V(g) @ U, U)


def vplus_conjugate_closed_form(g: Grid) -> PartialQuadratic:
    """z -> <z, e>^2 on span{e}, +inf elsewhere."""
    line = orthonormal_columns(g.ctx, np.ones((g.m, 1)))
    return fitz.make(g.ctx, line, hessian=np.array([[2.0]]))


def fitzpatrick_T_closed_form(g: Grid) -> PartialQuadratic:
    """(x, x*) -> 1/2 <x + V* x*, e>^2 when x + V* x* lies in span{e}."""
    L = np.hstack([np.eye(g.m), build_Vstar(g)])
    return fitz.scale(fitz.precompose(vplus_conjugate_closed_form(g), L, ctx=g.ctx.product()), 0.5)


def pinned_dual(g: Grid, f: SampledFunction) -> Vector:
    """The y* with x + V y* = x(0) e, the grid image of y* = -x'."""
    rhs = f.samples.coords - f.x0 * np.ones(g.m)
    return g.ctx.vector(-np.linalg.solve(build_V(g), rhs))


def pinned_box_value(g: Grid, f: SampledFunction, F_T: PartialQuadratic, F_Tstar: PartialQuadratic) -> float:
    ystar = pinned_dual(g, f).coords
    x = f.samples.coords
    return fitz.evaluate(F_T, np.concatenate([x, -ystar]), tol=1e-8) + fitz.evaluate(
        F_Tstar, np.concatenate([x, ystar]), tol=1e-8
    )


@lru_cache(maxsize=8)
def fitzpatrick_pair(m: int) -> Tuple[PartialQuadratic, PartialQuadratic, PartialQuadratic]:
    g = Grid(m)
    F_T = fitz.fitzpatrick(build_T(g))
    F_Tstar = fitz.fitzpatrick(build_Tstar(g))
    return F_T, F_Tstar, fitz.box2(F_T, F_Tstar)


def ft_box_convergence(name: str, m_list: Sequence[int], with_generic: bool = True) -> List[ConvergenceRow]:
    """
    Boundary-pinned values of the infimal sum of F_T and F_{T*} at (x, 0) against
    1/2 (x(1)^2 + x(0)^2). The unrestricted box2 value is reported alongside; on a grid it
    equals F_{T+T*}(x, 0) = 1/2 <x, Tx>.
    """
    rows: List[ConvergenceRow] = []
    previous: Optional[float] = None
    for m in tqdm(m_list, desc=f"box2 {name}", disable=len(m_list) < 4):
        g = Grid(m)
        f = sample_function(name, g)
        F_T, F_Tstar, joint = fitzpatrick_pair(m)
        value = pinned_box_value(g, f, F_T, F_Tstar)
        generic = None
        if with_generic:
            generic = fitz.evaluate(joint, np.concatenate([f.samples.coords, np.zeros(m)]), tol=1e-8)
        error = abs(value - f.target)
        ratio = error / previous if previous else None
        rows.append(
            ConvergenceRow(
                m=m,
                h=g.h,
                function=name,
                value=value,
                target=f.target,
                abs_error=error,
                ratio_prev=ratio,
                generic=generic,
            )
        )
        previous = error
    return rows


def vplus_conjugate(g: Grid) -> PartialQuadratic:
    return fitz.conjugate(fitz.quadratic_form(g.ctx, build_Vplus(g)))


def vplus_conjugate_errors(g: Grid, qstar: Optional[PartialQuadratic] = None) -> Tuple[float, float]:
    qstar = qstar or vplus_conjugate(g)
    e = np.ones(g.m)
    worst = max(abs(fitz.evaluate(qstar, level * e) - level**2) for level in VPLUS_LEVELS)
    off_span = fitz.evaluate(qstar, g.ctx.basis_vector(0).coords)
    return worst, off_span


def _vplus_row(m: int) -> ConvergenceRow:
    g = Grid(m)
    qstar = vplus_conjugate(g)
    worst, off_span = vplus_conjugate_errors(g, qstar)
    if off_span != float("inf"):
        worst = float("inf")
    return ConvergenceRow(
        m=m, h=g.h, function="vplus-conj", value=fitz.evaluate(qstar, 3.0 * np.ones(m)), target=9.0, abs_error=worst
    )


def _t1_rows(m: int) -> List[ConvergenceRow]:
    g = Grid(m)
    rows = []
    for label, relation in (("t1-anti-self-adjoint", build_T1(g)), ("t2-anti-self-adjoint", build_T2(g))):
        margin = is_anti_self_adjoint(relation).margin
        rows.append(ConvergenceRow(m=m, h=g.h, function=label, value=margin, target=0.0, abs_error=margin))
    return rows


def sweep_rows(family: str, m_list: Sequence[int]) -> List[ConvergenceRow]:
    if family not in SWEEP_FAMILIES:
        raise ValueError(f"unknown sweep family {family!r}, expected one of {list(SWEEP_FAMILIES)}")
    if any(m < 2 for m in m_list):
        raise ValueError(f"grid sizes must be >= 2, got {list(m_list)}")
    logger.info(f"Sweep {family} over m={list(m_list)}")
    if family == "volterra-box2":
        rows: List[ConvergenceRow] = []
        for name in FUNCTIONS:
            rows.extend(ft_box_convergence(name, m_list))
        return rows
    if family == "vplus-conj":
        return [_vplus_row(m) for m in tqdm(m_list, desc="vplus-conj", disable=len(m_list) < 4)]
    rows = []
    for m in tqdm(m_list, desc="t1-identities", disable=len(m_list) < 4):
        rows.extend(_t1_rows(m))
    return rows


def relation_registry(g: Grid) -> Dict[str, Callable[[], LinearRelation]]:
    return {
        "T": lambda: build_T(g),
        "Tstar": lambda: build_Tstar(g),
        "T1": lambda: build_T1(g),
        "T2": lambda: build_T2(g),
        "S": lambda: skewpart_S(g),
        "Sstar": lambda: adjoint(skewpart_S(g)),
        "V": lambda: from_matrix(build_V(g), ctx=g.ctx),
    }
