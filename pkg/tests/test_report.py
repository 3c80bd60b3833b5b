import json
from fractions import Fraction

import pytest

from monotone_lab.report import (
    ConvergenceRow,
    ReportBuilder,
    format_extended,
    merge_reports,
    render_report,
    render_rows,
    within,
)


def test_format_extended():
    assert format_extended(Fraction(1, 2)) == "1/2"
    assert format_extended(float("inf")) == "+inf"
    assert format_extended(float("-inf")) == "-inf"
    assert format_extended(0.1) == "0.1"
    assert format_extended(1 / 3) == "0.333333333333"


def test_within():
    assert within(1.0, 1.0 + 1e-12, 1e-9)
    assert not within(1.0, 1.1, 1e-9)
    assert within(Fraction(1, 2), Fraction(1, 2), 0)
    assert within(float("inf"), float("inf"), 0)
    assert not within(True, False, 1.0)
    assert not within("a", "b", 1.0)


def build_sample() -> ReportBuilder:
    builder = ReportBuilder(suite="sample", seed=3, tolerance=1e-9)
    with builder.run_check("s.pass", "passes", 1e-9) as check:
        check.record(1.0, 1.0)
    with builder.run_check("s.fail", "fails", 0) as check:
        check.record(Fraction(1, 2), Fraction(0))
    with builder.run_check("s.raise", "raises", 0):
        raise RuntimeError("boom")
    with builder.run_check("s.silent", "records nothing", 0):
        pass
    builder.untestable("s.untestable", "needs infinite support", "untestable: infinite-dimensional")
    return builder


def test_builder_statuses():
    report = build_sample().build()
    statuses = {c.check_id: c.status for c in report.checks}
    assert statuses == {
        "s.pass": "pass",
        "s.fail": "fail",
        "s.raise": "fail",
        "s.silent": "fail",
        "s.untestable": "untestable",
    }
    assert (report.summary.passed, report.summary.failed, report.summary.untestable) == (1, 3, 1)
    assert not report.ok
    raised = next(c for c in report.checks if c.check_id == "s.raise")
    assert raised.detail == "RuntimeError: boom"
    assert [c.check_id for c in report.failures()] == ["s.fail", "s.raise", "s.silent"]


def test_json_hides_timings_by_default():
    report = build_sample().build()
    data = json.loads(render_report(report, "json"))
    assert data["schema"] == 1
    assert data["summary"]["total"] == 5
    assert "runtime_ms" not in data["checks"][0]
    assert data["checks"][1]["lhs"] == "1/2"
    timed = json.loads(render_report(report, "json", timings=True))
    assert "runtime_ms" in timed["checks"][0]


def test_markdown_and_csv():
    report = build_sample().build()
    assert "| s.pass | pass |" in render_report(report, "md")
    assert render_report(report, "csv").splitlines()[0] == "check_id,status,lhs,rhs,tolerance,anchor,detail"
    with pytest.raises(ValueError):
        render_report(report, "xml")


def test_merge_keeps_order_and_recounts():
    first = build_sample().build()
    second = ReportBuilder(suite="other")
    with second.run_check("o.pass", "passes", 0) as check:
        check.record(0, 0)
    merged = merge_reports("all", [first, second.build()], seed=3)
    assert merged.summary.total == 6
    assert merged.summary.passed == 2
    assert merged.checks[-1].check_id == "o.pass"


def test_convergence_rows():
    rows = [
        ConvergenceRow(m=8, h=0.125, function="t", value=0.5, target=0.5, abs_error=0.0),
        ConvergenceRow(m=16, h=0.0625, function="t", value=0.5, target=0.5, abs_error=0.0, generic=0.25),
    ]
    lines = render_rows(rows, "csv").splitlines()
    assert lines[0] == "m,h,function,value,target,abs_error,ratio_prev,generic"
    assert lines[1] == "8,0.125,t,0.5,0.5,0,,"
    assert lines[2] == "16,0.0625,t,0.5,0.5,0,,0.25"
    assert len(json.loads(render_rows(rows, "json"))) == 2
    assert render_rows(rows, "md").count("\n") == 4
    with pytest.raises(ValueError):
        render_rows(rows, "xml")
