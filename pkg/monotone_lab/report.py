import csv
import io
import logging
import math
import numbers
import time
from contextlib import contextmanager
from fractions import Fraction
from typing import Any, Iterator, List, Literal, Optional, Sequence, Union

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

Status = Literal["pass", "fail", "untestable"]
Value = Union[bool, int, float, str, None]


class CheckResult(BaseModel):
    check_id: str
    anchor: str
    status: Status
    lhs: Value = None
    rhs: Value = None
    tolerance: float = 0.0
    detail: Optional[str] = None
    runtime_ms: Optional[float] = None


class Summary(BaseModel):
    total: int = 0
    passed: int = 0
    failed: int = 0
    untestable: int = 0


class VerificationReport(BaseModel):
    schema_version: int = Field(default=SCHEMA_VERSION, serialization_alias="schema")
    suite: str
    seed: Optional[int] = None
    tolerance: Optional[float] = None
    summary: Summary = Summary()
    checks: List[CheckResult] = []

    @property
    def ok(self) -> bool:
        return self.summary.failed == 0

    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if c.status == "fail"]


class ConvergenceRow(BaseModel):
    m: int
    h: float
    function: str
    value: float
    target: float
    abs_error: float
    ratio_prev: Optional[float] = None
    generic: Optional[float] = None


def format_extended(value: Any) -> str:
    """Fractions as p/q, floats with 12 significant digits, infinities as +inf / -inf."""
    if isinstance(value, Fraction):
        return str(value)
    value = float(value)
    if math.isinf(value):
        return "+inf" if value > 0 else "-inf"
    return f"{value:.12g}"


def to_value(value: Any) -> Value:
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Real):
        number = float(value)
        if math.isinf(number) or math.isnan(number):
            return format_extended(number)
        return number
    return str(value)


def within(lhs: Any, rhs: Any, tolerance: float) -> bool:
    if lhs == rhs:
        return True
    if isinstance(lhs, bool) or isinstance(rhs, bool):
        return False
    if isinstance(lhs, numbers.Number) and isinstance(rhs, numbers.Number):
        gap = abs(lhs - rhs)  # type: ignore[operator]
        return not math.isnan(gap) and gap <= tolerance
    return False


class CheckHandle:
    def __init__(self) -> None:
        self.lhs: Any = None
        self.rhs: Any = None
        self.detail: Optional[str] = None
        self.recorded = False
        self.untestable = False

    def record(self, lhs: Any, rhs: Any, detail: Optional[str] = None) -> None:
        self.lhs, self.rhs, self.detail = lhs, rhs, detail
        self.recorded = True

    def mark_untestable(self, detail: str) -> None:
        self.untestable = True
        self.detail = detail


class ReportBuilder:
    def __init__(self, suite: str, seed: Optional[int] = None, tolerance: Optional[float] = None) -> None:
        self.suite = suite
        self.seed = seed
        self.tolerance = tolerance
        self.checks: List[CheckResult] = []

    @contextmanager
    def run_check(self, check_id: str, anchor: str, tolerance: float) -> Iterator[CheckHandle]:
        handle = CheckHandle()
        start = time.perf_counter()
        error: Optional[str] = None
        try:
            yield handle
        except Exception as e:
            error = f"{type(e).__name__}: {e}"
            logger.warning(f"Check {check_id} raised {error}")
        runtime_ms = (time.perf_counter() - start) * 1000.0

        if error is not None:
            status: Status = "fail"
            detail: Optional[str] = error
        elif handle.untestable:
            status, detail = "untestable", handle.detail
        elif not handle.recorded:
            status, detail = "fail", "check recorded no result"
        else:
            status = "pass" if within(handle.lhs, handle.rhs, tolerance) else "fail"
            detail = handle.detail
        if status == "fail":
            logger.warning(f"Check {check_id} failed: lhs={handle.lhs} rhs={handle.rhs} ({detail})")

        self.checks.append(
            CheckResult(
                check_id=check_id,
                anchor=anchor,
                status=status,
                lhs=to_value(handle.lhs),
                rhs=to_value(handle.rhs),
                tolerance=tolerance,
                detail=detail,
                runtime_ms=round(runtime_ms, 3),
            )
        )

    def untestable(self, check_id: str, anchor: str, detail: str) -> None:
        with self.run_check(check_id, anchor, 0.0) as check:
            check.mark_untestable(detail)

    def extend(self, checks: Sequence[CheckResult]) -> None:
        self.checks.extend(checks)

    def build(self) -> VerificationReport:
        return merge_reports(self.suite, [], seed=self.seed, tolerance=self.tolerance, checks=self.checks)


def summarize(checks: Sequence[CheckResult]) -> Summary:
    return Summary(
        total=len(checks),
        passed=sum(1 for c in checks if c.status == "pass"),
        failed=sum(1 for c in checks if c.status == "fail"),
        untestable=sum(1 for c in checks if c.status == "untestable"),
    )


def merge_reports(
    suite: str,
    reports: Sequence[VerificationReport],
    seed: Optional[int] = None,
    tolerance: Optional[float] = None,
    checks: Sequence[CheckResult] = (),
) -> VerificationReport:
    merged = list(checks)
    for report in reports:
        merged.extend(report.checks)
    return VerificationReport(suite=suite, seed=seed, tolerance=tolerance, summary=summarize(merged), checks=merged)


def render_json(report: VerificationReport, timings: bool = False) -> str:
    exclude = None if timings else {"checks": {"__all__": {"runtime_ms"}}}
    return report.model_dump_json(indent=2, by_alias=True, exclude=exclude) + "\n"


def render_markdown(report: VerificationReport, timings: bool = False) -> str:
    s = report.summary
    lines = [
        f"# {report.suite}",
        "",
        f"seed {report.seed}, {s.passed} passed, {s.failed} failed, {s.untestable} untestable of {s.total}",
        "",
        "| check | status | lhs | rhs | tol | anchor |" + (" ms |" if timings else ""),
        "|---|---|---|---|---|---|" + ("---|" if timings else ""),
    ]
    for c in report.checks:
        row = f"| {c.check_id} | {c.status} | {c.lhs} | {c.rhs} | {c.tolerance:g} | {c.anchor} |"
        if timings:
            row += f" {c.runtime_ms} |"
        lines.append(row)
    return "\n".join(lines) + "\n"


def render_checks_csv(report: VerificationReport, timings: bool = False) -> str:
    buffer = io.StringIO()
    columns = ["check_id", "status", "lhs", "rhs", "tolerance", "anchor", "detail"]
    if timings:
        columns.append("runtime_ms")
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for c in report.checks:
        writer.writerow({k: v for k, v in c.model_dump().items() if k in columns})
    return buffer.getvalue()


def render_report(report: VerificationReport, fmt: str = "json", timings: bool = False) -> str:
    renderers = {"json": render_json, "md": render_markdown, "csv": render_checks_csv}
    if fmt not in renderers:
        raise ValueError(f"unknown format {fmt!r}, expected one of {sorted(renderers)}")
    return renderers[fmt](report, timings)


CONVERGENCE_COLUMNS = ["m", "h", "function", "value", "target", "abs_error", "ratio_prev"]


def render_rows_csv(rows: Sequence[ConvergenceRow]) -> str:
    buffer = io.StringIO()
    extra = ["generic"] if any(r.generic is not None for r in rows) else []
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CONVERGENCE_COLUMNS + extra)
    for r in rows:
        values = [r.m, format_extended(r.h), r.function, format_extended(r.value), format_extended(r.target)]
        values += [format_extended(r.abs_error), "" if r.ratio_prev is None else format_extended(r.ratio_prev)]
        if extra:
            values.append("" if r.generic is None else format_extended(r.generic))
        writer.writerow(values)
    return buffer.getvalue()


def render_rows_markdown(rows: Sequence[ConvergenceRow]) -> str:
    lines = ["| " + " | ".join(CONVERGENCE_COLUMNS) + " |", "|" + "---|" * len(CONVERGENCE_COLUMNS)]
    for r in rows:
        ratio = "" if r.ratio_prev is None else format_extended(r.ratio_prev)
        lines.append(
            f"| {r.m} | {format_extended(r.h)} | {r.function} | {format_extended(r.value)} | "
            f"{format_extended(r.target)} | {format_extended(r.abs_error)} | {ratio} |"
        )
    return "\n".join(lines) + "\n"


def render_rows(rows: Sequence[ConvergenceRow], fmt: str = "csv") -> str:
    if fmt == "csv":
        return render_rows_csv(rows)
    if fmt == "md":
        return render_rows_markdown(rows)
    if fmt == "json":
        return "[\n" + ",\n".join("  " + r.model_dump_json() for r in rows) + "\n]\n"
    raise ValueError(f"unknown format {fmt!r}, expected one of ['csv', 'json', 'md']")
