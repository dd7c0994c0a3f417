import time

import pytest

from linkcurves.link import ChannelTemplate, performance_curves
from linkcurves.studies import (
    DEFAULT_RV_GRID,
    study_loss_split,
    study_skew,
    study_via_count,
    study_via_spacing,
    study_xtalk_freq_vs_time,
)

ACCEPTANCE_LINES: list = []
BASELINE_TAPS = (0, 3, 12)


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="session")
def baseline_curves():
    """Baseline 3-tap-setting curves at 10 Gb/s with their wall time."""
    return timed(performance_curves, ChannelTemplate(data_rate=10e9), BASELINE_TAPS, DEFAULT_RV_GRID)


@pytest.fixture(scope="session")
def case_studies():
    tables, elapsed = {}, 0.0
    for name, fn in (("via-spacing", study_via_spacing), ("loss-split", study_loss_split),
                     ("skew", study_skew), ("via-count", study_via_count)):
        tables[name], dt = timed(fn)
        elapsed += dt
    return tables, elapsed


@pytest.fixture(scope="session")
def xtalk_table():
    return study_xtalk_freq_vs_time()
