import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}

TITLES = {
    1: "reciprocity suite",
    2: "representation suite",
    3: "degeneration suite",
    4: "finite-identity suite",
    5: "product-identity suite",
    6: "known-value suite",
    7: "numeric suite",
    8: "primitive property suite",
    9: "harness determinism",
}


def record(criterion: int, passed: bool, detail: str = "") -> None:
    prev = ACCEPTANCE.get(criterion)
    if prev is not None:
        passed = passed and prev[0]
        detail = "; ".join(x for x in (prev[1], detail) if x)
    ACCEPTANCE[criterion] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(TITLES):
        if n not in ACCEPTANCE:
            continue
        ok, detail = ACCEPTANCE[n]
        line = f"criterion {n} ({TITLES[n]}): {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f" - {detail}"
        terminalreporter.write_line(line)
