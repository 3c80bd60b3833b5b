import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from monotone_lab.report import ReportBuilder, VerificationReport
from monotone_lab.space import HilbertContext, Vector

logger = logging.getLogger(__name__)

Rational = Union[Fraction, int]
ExtendedRational = Union[Fraction, float]

_TOKEN = re.compile(r"^[+-]?\d+(/\d+)?$")


class DomainViolationError(ValueError):
    def __init__(self, s: Fraction):
        super().__init__(f"sequence is outside dom S: entries sum to {s}")
        self.s = s


@dataclass(frozen=True)
class FinSeq:
    """Rational sequence y_1, y_2, ... with finitely many non-zero entries; trailing zeros are dropped."""

    entries: Tuple[Fraction, ...] = ()

    def __post_init__(self) -> None:
        values = [Fraction(v) for v in self.entries]
        while values and values[-1] == 0:
            values.pop()
        object.__setattr__(self, "entries", tuple(values))

    @classmethod
    def of(cls, values: Iterable[Rational]) -> "FinSeq":
        return cls(tuple(Fraction(v) for v in values))

    @classmethod
    def basis(cls, n: int) -> "FinSeq":
        if n < 1:
            raise ValueError(f"basis index starts at 1, got {n}")
        return cls.of([0] * (n - 1) + [1])

    @classmethod
    def ones(cls, n: int) -> "FinSeq":
        return cls.of([1] * n)

    @property
    def support(self) -> int:
        return len(self.entries)

    def entry(self, n: int) -> Fraction:
        """y_n, 1-indexed; zero past the support."""
        return self.entries[n - 1] if 1 <= n <= len(self.entries) else Fraction(0)

    def __add__(self, other: "FinSeq") -> "FinSeq":
        size = max(self.support, other.support)
        return FinSeq.of(self.entry(i) + other.entry(i) for i in range(1, size + 1))

    def __neg__(self) -> "FinSeq":
        return FinSeq.of(-v for v in self.entries)

    def __sub__(self, other: "FinSeq") -> "FinSeq":
        return self + (-other)

    def scale(self, k: Rational) -> "FinSeq":
        return FinSeq.of(Fraction(k) * v for v in self.entries)

    def is_zero(self) -> bool:
        return not self.entries

    def max_abs(self) -> Fraction:
        return max((abs(v) for v in self.entries), default=Fraction(0))

    def __str__(self) -> str:
        return format_finseq(self)


def parse_finseq(text: str) -> FinSeq:
    tokens = [t for t in re.split(r"[\s,]+", text.strip().strip("[]")) if t]
    for token in tokens:
        if not _TOKEN.match(token):
            raise ValueError(f"not a rational number: {token!r}")
    return FinSeq.of(Fraction(t) for t in tokens)


def format_finseq(y: FinSeq) -> str:
    return " ".join(str(v) for v in y.entries) if y.entries else "0"


def seq_sum(y: FinSeq) -> Fraction:
    return sum(y.entries, Fraction(0))


def inner_exact(x: FinSeq, y: FinSeq) -> Fraction:
    return sum((a * b for a, b in zip(x.entries, y.entries)), Fraction(0))


def s_apply(y: FinSeq) -> FinSeq:
    """(Sy)_n = sum_{i<n} y_i + y_n / 2, for y with zero sum."""
    s = seq_sum(y)
    if s != 0:
        raise DomainViolationError(s)
    out: List[Fraction] = []
    prefix = Fraction(0)
    for v in y.entries:
        out.append(prefix + v / 2)
        prefix += v
    return FinSeq.of(out)


def sstar_apply(y: FinSeq) -> FinSeq:
    """(S*y)_n = sum_{i>n} y_i + y_n / 2."""
    out: List[Fraction] = []
    tail = Fraction(0)
    for v in reversed(y.entries):
        out.append(tail + v / 2)
        tail += v
    return FinSeq.of(reversed(out))


def shift_right(y: FinSeq) -> FinSeq:
    return FinSeq.of((Fraction(0),) + y.entries)


def shift_left(y: FinSeq) -> FinSeq:
    return FinSeq.of(y.entries[1:])


def resolvent_S(y: FinSeq) -> FinSeq:
    """(Id - R)^-1 y - y/2, the Neumann series of the right shift; finitely supported only on dom S."""
    s = seq_sum(y)
    if s != 0:
        raise DomainViolationError(s)
    out: List[Fraction] = []
    prefix = Fraction(0)
    for v in y.entries:
        prefix += v
        out.append(prefix - v / 2)
    return FinSeq.of(out)


def resolvent_Sstar(y: FinSeq) -> FinSeq:
    """(Id - L)^-1 y - y/2, the Neumann series of the left shift."""
    out: List[Fraction] = []
    tail = Fraction(0)
    for v in reversed(y.entries):
        tail += v
        out.append(tail - v / 2)
    return FinSeq.of(reversed(out))


class GapValue(BaseModel):
    """Both sides of F_{S+S*}(y, x*) <= (F_S box2 F_{S*})(y, x*)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lhs: ExtendedRational
    rhs: ExtendedRational
    reduction: ExtendedRational

    @property
    def strict(self) -> bool:
        return self.lhs != self.rhs

    @property
    def consistent(self) -> bool:
        return self.lhs == self.reduction


def gap_eval(y: FinSeq, xstar: Optional[FinSeq] = None) -> GapValue:
    """
    Exact values of the sum of Fitzpatrick functions for S and S*, and of the Fitzpatrick
    function of S + S*, at (y, x*).

    F_{S+S*} is the indicator of X x {0}, so x* = 0 on the right-hand side. The left-hand side
    is inf over y* of F_S(y, x* - y*) + F_{S*}(y, y*). F_S is the indicator of gra(-S*), so for
    x* = 0 the only feasible y* is S*y, which leaves <y, S*y> = (sum y)^2 / 2.
    """
    if xstar is not None and not xstar.is_zero():
        inf = float("inf")
        return GapValue(lhs=inf, rhs=inf, reduction=inf)
    s = seq_sum(y)
    return GapValue(lhs=s * s / 2, rhs=Fraction(0), reduction=inner_exact(y, sstar_apply(y)))


def partial_sum_matrix(n: int) -> np.ndarray:
    return np.tril(np.ones((n, n)), k=-1) + 0.5 * np.eye(n)


def embed(y: FinSeq, n: int) -> Vector:
    if y.support > n:
        raise ValueError(f"support {y.support} does not fit in dimension {n}")
    coords = [float(y.entry(i)) for i in range(1, n + 1)]
    return HilbertContext.uniform(n).vector(coords)


def random_rational(rng: np.random.Generator, bound: int = 9, max_den: int = 6) -> Fraction:
    return Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, max_den + 1)))


def random_finseq(rng: np.random.Generator, support: int = 12, zero_sum: bool = False) -> FinSeq:
    values = [random_rational(rng) for _ in range(support)]
    if zero_sum:
        values.append(-sum(values, Fraction(0)))
    return FinSeq.of(values)


def related_witness() -> Tuple[FinSeq, FinSeq]:
    """(e_1, e_1 / 2): a point of gra S* outside dom S, monotonically related to gra(-S)."""
    e = FinSeq.basis(1)
    return e, e.scale(Fraction(1, 2))


def related_witness_suite(
    n_max: int = 20, rng: Optional[np.random.Generator] = None, samples: int = 100
) -> VerificationReport:
    """
    On y in dom S, <e_1, -Sy> + <y, e_1/2> = -y_1/2 + y_1/2 = 0 and <y, Sy> = 0, so
    <e_1 - y, e_1/2 + Sy> = 1/2 for every y: the pair extends -S monotonically although e_1 is
    not in dom S. Its mirror (e_1, -e_1/2) lies in gra(-S*) and pairs to -1/2.
    """
    rng = rng or np.random.default_rng(0)
    builder = ReportBuilder(suite="l2exact")
    x, xstar = related_witness()

    samples_y = [FinSeq.basis(n) - FinSeq.basis(1) for n in range(2, n_max + 1)]
    samples_y += [random_finseq(rng, support=int(rng.integers(1, 12)), zero_sum=True) for _ in range(samples)]

    with builder.run_check("l2.witness.cross_term", "(e, e/2) cross term against gra(-S) vanishes", 0) as check:
        worst = max(abs(inner_exact(x, -s_apply(y)) + inner_exact(y, xstar)) for y in samples_y)
        check.record(worst, Fraction(0), detail=f"y = e_n - e_1 for n=2..{n_max} and {samples} random zero-sum y")

    with builder.run_check("l2.witness.related_to_minus_S", "(e, e/2) is monotonically related to gra(-S)", 0) as check:
        worst = max(abs(inner_exact(x - y, xstar + s_apply(y)) - Fraction(1, 2)) for y in samples_y)
        check.record(worst, Fraction(0), detail="max |<e - y, e/2 + Sy> - 1/2| over the same y")

    with builder.run_check("l2.witness.in_sstar_graph", "(e, e/2) lies in gra S*", 0) as check:
        check.record(sstar_apply(x), xstar)

    with builder.run_check("l2.witness.outside_dom_S", "e lies in dom S* but not in dom S", 0) as check:
        check.record(seq_sum(x), Fraction(1), detail="sum of entries of e_1")

    with builder.run_check("l2.witness.minus_sstar_not_monotone", "-S* is not monotone: <e, -S*e> = -1/2", 0) as check:
        check.record(inner_exact(x, -sstar_apply(x)), Fraction(-1, 2))

    with builder.run_check("l2.witness.graph_points_of_S", "graph points of S pair to zero", 0) as check:
        worst = max(abs(inner_exact(y, s_apply(y))) for y in samples_y)
        check.record(worst, Fraction(0), detail="max |<y, Sy>| over the sampled y")

    return builder.build()
