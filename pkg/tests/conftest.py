import json
import re
from pathlib import Path

from promut.engine import Budget, Error, Failure, Success, solve
from promut.reader import parse_program, parse_term
from promut.terms import Atom, Compound, make_list
from promut.writer import format_canonical

ORACLE_DIR = Path(__file__).parent / "oracle"
GOLDEN_DIR = Path(__file__).parent / "golden"

_VAR_NAME = re.compile(r"\b[A-Z][A-Za-z0-9_]*")
_FRESH_VAR = re.compile(r"\b_[A-Za-z0-9_]*")


def load_oracle(name):
    return json.loads((ORACLE_DIR / name).read_text(encoding="utf-8"))


def first_solution(program_text, query, budget=None):
    """Run a query and describe the first answer the way the reference recorder does."""
    program = parse_program(program_text)
    outcome = solve(program, parse_term(query), budget or Budget())
    if isinstance(outcome, Failure):
        return "failure", None
    if isinstance(outcome, Error):
        return "error", format_canonical(outcome.kind)
    assert isinstance(outcome, Success), outcome
    names = list(dict.fromkeys(_VAR_NAME.findall(re.sub(r"'[^']*'", "", query))))
    pairs = [Compound("=", (Atom(n), outcome.bindings[n])) for n in names]
    return "success", format_canonical(make_list(pairs))


def normalise_fresh(text):
    """Fresh variables print differently in every system; compare them as ``_``."""
    return None if text is None else _FRESH_VAR.sub("_", text)


# --- acceptance summary: one PASS/FAIL line per criterion ---------------------------

_ACCEPTANCE: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        name = report.nodeid.split("::")[-1]
        if _ACCEPTANCE.get(name) != "FAIL":
            _ACCEPTANCE[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        number, _, title = name[len("test_criterion_"):].partition("_")
        terminalreporter.write_line(f"{_ACCEPTANCE[name]} criterion {int(number)}: {title.replace('_', ' ')}")
