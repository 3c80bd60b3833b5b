import asyncio
import json
import logging
import os
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import fire  # type: ignore
import numpy as np
from dotenv import load_dotenv

from monotone_lab import fitz, l2exact, linrel, volterra
from monotone_lab.db import RunLogger
from monotone_lab.report import format_extended, render_report, render_rows
from monotone_lab.suites import DEFAULT_SEED, DEFAULT_TOL, SUITES, run_suite

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

load_dotenv()

EXIT_FAILED = 1
EXIT_USAGE = 2

ExtendedValue = Union[Fraction, float]


class Config:
    seed: int = int(os.getenv("MONOTONE_LAB_SEED", DEFAULT_SEED))
    tol: float = float(os.getenv("MONOTONE_LAB_TOL", DEFAULT_TOL))
    db_file: Optional[Path] = Path(os.environ["MONOTONE_LAB_DB"]) if os.getenv("MONOTONE_LAB_DB") else None
    timings: bool = False


config = Config()


class UsageError(ValueError):
    pass


def parse_m_list(value: Any) -> List[int]:
    """Accepts 8, "8,16,32", (8, 16, 32) as produced by fire, and ranges like "2..64"."""
    if isinstance(value, (list, tuple)):
        items = [str(v) for v in value]
    else:
        items = [part for part in str(value).split(",") if part.strip()]
    result: List[int] = []
    for item in items:
        item = item.strip()
        bounds = re.fullmatch(r"(\d+)\.\.(\d+)", item)
        if bounds:
            lo, hi = int(bounds.group(1)), int(bounds.group(2))
            if lo > hi:
                raise UsageError(f"empty range {item!r}")
            result.extend(range(lo, hi + 1))
        elif item.isdigit():
            result.append(int(item))
        else:
            raise UsageError(f"bad grid size {item!r}")
    if not result or any(m < 2 for m in result):
        raise UsageError(f"grid sizes must be integers >= 2, got {value!r}")
    return result


def read_point(point: Any) -> str:
    """Point text from a file path or from the flag value itself."""
    if isinstance(point, (list, tuple)):
        return json.dumps([str(p) if isinstance(p, str) else p for p in point])
    text = str(point)
    path = Path(text)
    if len(text) < 256 and path.is_file():
        return path.read_text()
    return text


def parse_float_point(text: str, dim: int) -> np.ndarray:
    text = text.strip()
    try:
        if text.startswith("["):
            values = json.loads(text)
        else:
            values = [float(Fraction(t)) for t in text.replace(",", " ").split()]
        coords = np.asarray(values, dtype=float).reshape(-1)
    except (ValueError, TypeError) as e:
        raise UsageError(f"malformed point: {e}")
    if coords.shape != (dim,):
        raise UsageError(f"point needs {dim} coordinates, got {coords.size}")
    return coords


def _exact_gap(side: str) -> Callable[[str], ExtendedValue]:
    def evaluate(text: str) -> ExtendedValue:
        y_text, _, xstar_text = text.partition("|")
        try:
            y = l2exact.parse_finseq(y_text)
            xstar = l2exact.parse_finseq(xstar_text) if xstar_text.strip() else None
        except ValueError as e:
            raise UsageError(f"malformed point: {e}")
        gap = l2exact.gap_eval(y, xstar)
        return gap.lhs if side == "lhs" else gap.rhs

    return evaluate


EXACT_OBJECTS: Dict[str, Callable[[str], ExtendedValue]] = {
    "F_S_box2_F_Sstar_exact": _exact_gap("lhs"),
    "F_SplusSstar_exact": _exact_gap("rhs"),
}


def _grid_objects(g: volterra.Grid) -> Dict[str, Callable[[], Tuple[fitz.PartialQuadratic, int]]]:
    relations = volterra.relation_registry(g)

    def fitzpatrick_of(key: str) -> Callable[[], Tuple[fitz.PartialQuadratic, int]]:
        return lambda: (fitz.fitzpatrick(relations[key]()), 2 * g.m)

    objects = {f"F_{key}": fitzpatrick_of(key) for key in relations}
    objects["F_TplusTstar"] = lambda: (
        fitz.fitzpatrick(linrel.add(volterra.build_T(g), linrel.adjoint(volterra.build_T(g)))),
        2 * g.m,
    )
    objects["box2_T_Tstar"] = lambda: (volterra.fitzpatrick_pair(g.m)[2], 2 * g.m)
    objects["qstar_Vplus"] = lambda: (volterra.vplus_conjugate(g), g.m)
    return objects


def evaluate_object(name: str, point: Any) -> ExtendedValue:
    text = read_point(point)
    if name in EXACT_OBJECTS:
        return EXACT_OBJECTS[name](text)
    match = re.fullmatch(r"(\w+)@m=(\d+)", name)
    if not match:
        raise UsageError(f"unknown object {name!r}; exact objects: {sorted(EXACT_OBJECTS)}, grid objects: NAME@m=K")
    key, m = match.group(1), int(match.group(2))
    if m < 2:
        raise UsageError(f"grid needs m >= 2, got {m}")
    objects = _grid_objects(volterra.Grid(m))
    if key not in objects:
        raise UsageError(f"unknown grid object {key!r}, expected one of {sorted(objects)}")
    function, dim = objects[key]()
    return fitz.evaluate(function, parse_float_point(text, dim), tol=1e-8)


def write_output(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


async def log_run(command: str, target: str, **fields: Any) -> None:
    if config.db_file is None:
        return
    run_logger = RunLogger(db_path=config.db_file)
    await run_logger.init_db()
    await run_logger.log_run(command=command, target=target, **fields)


def cmd_verify(
    suite: str = "all",
    seed: Optional[int] = None,
    tol: Optional[float] = None,
    out: Optional[str] = None,
    format: str = "json",
    timings: bool = False,
    db_file: Optional[str] = None,
) -> None:
    config.seed = config.seed if seed is None else int(seed)
    config.tol = config.tol if tol is None else float(tol)
    config.timings = timings
    if db_file:
        config.db_file = Path(db_file)

    if suite != "all" and suite not in SUITES:
        logger.error(f"Unknown suite {suite!r}, expected one of {list(SUITES) + ['all']}")
        asyncio.run(log_run("verify", str(suite), seed=config.seed, tol=config.tol, error="unknown suite"))
        sys.exit(EXIT_USAGE)

    try:
        report = run_suite(suite, seed=config.seed, tol=config.tol)
        text = render_report(report, format, timings=config.timings)
    except ValueError as e:
        logger.error(f"verify {suite} aborted: {e}")
        asyncio.run(log_run("verify", suite, seed=config.seed, tol=config.tol, error=str(e)))
        sys.exit(EXIT_USAGE)

    write_output(text, out)
    s = report.summary
    logger.info(f"{s.passed} passed, {s.failed} failed, {s.untestable} untestable of {s.total} checks")
    asyncio.run(
        log_run(
            "verify",
            suite,
            seed=config.seed,
            tol=config.tol,
            passed=s.passed,
            failed=s.failed,
            untestable=s.untestable,
        )
    )
    if not report.ok:
        for check in report.failures():
            logger.warning(f"FAILED {check.check_id}: {check.anchor} ({check.detail})")
        sys.exit(EXIT_FAILED)


def cmd_sweep(family: str, m: Any = "8,16,32,64,128", out: Optional[str] = None, format: str = "csv") -> None:
    try:
        m_list = parse_m_list(m)
        rows = volterra.sweep_rows(family, m_list)
        text = render_rows(rows, format)
    except ValueError as e:
        logger.error(f"sweep {family} aborted: {e}")
        asyncio.run(log_run("sweep", str(family), error=str(e)))
        sys.exit(EXIT_USAGE)
    write_output(text, out)
    asyncio.run(log_run("sweep", family, passed=len(rows)))


def cmd_eval(object: str, point: Any) -> None:
    try:
        value = evaluate_object(object, point)
    except ValueError as e:
        logger.error(f"eval {object} aborted: {e}")
        sys.exit(EXIT_USAGE)
    print(format_extended(value))


def main() -> None:
    fire.Fire(
        {
            "verify": cmd_verify,
            "sweep": cmd_sweep,
            "eval": cmd_eval,
        }
    )


if __name__ == "__main__":
    main()
