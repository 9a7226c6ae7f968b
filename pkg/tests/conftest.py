import os
import re
from pathlib import Path

import pytest

from cbctt.instance import generate_toy_instance

HERE = Path(__file__).parent
COMP_ENV = "CTT_COMP_DIR"

_criteria: dict[int, tuple[str, str, str]] = {}


def comp_dir() -> Path | None:
    """Directory holding the published comp01..comp21 files, if available."""
    for cand in (os.environ.get(COMP_ENV), HERE / "data" / "comp"):
        if cand and Path(cand).is_dir() and any(Path(cand).glob("comp*.ctt")):
            return Path(cand)
    return None


@pytest.fixture
def toy1():
    return generate_toy_instance(2, 2, 2, 2, 1, seed=7)


@pytest.fixture
def comp_scale():
    # dimensions of comp01: 5 days x 6 timeslots, 6 rooms, 30 courses, 14 curricula, 160 lectures
    return generate_toy_instance(5, 6, 6, 30, 14, seed=3, n_lectures=160)


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    detail = "; ".join(f"{k}={v}" for k, v in report.user_properties)
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" else "FAIL"
        _criteria[n] = (m.group(2), status, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        name, status, detail = _criteria[n]
        line = f"criterion {n} ({name}): {status}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
