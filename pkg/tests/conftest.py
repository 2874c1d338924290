import time

import helpers

SUITE_BUDGET_S = 300.0
_start = {}


def pytest_sessionstart(session):
    _start["t"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    lines = list(helpers.ACCEPTANCE)
    if not lines:
        return
    elapsed = time.perf_counter() - _start.get("t", time.perf_counter())
    ok = elapsed < SUITE_BUDGET_S
    lines.append(f"{'PASS' if ok else 'FAIL'} criterion 10b: whole suite runtime "
                 f"{elapsed:.1f} s (bound < {SUITE_BUDGET_S:.0f} s)")
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=_order):
        terminalreporter.write_line(line)


def _order(line):
    tag = line.split("criterion ", 1)[1].split(":", 1)[0]
    digits = "".join(c for c in tag if c.isdigit())
    return int(digits), tag
