"""Bundled example programs, each paired with a PlUnit-style suite."""

from __future__ import annotations

from importlib import resources
from typing import List, Tuple

NAMES = (
    "wrapped_sort",
    "is_empty",
    "flatten",
    "remove_dups",
    "min",
    "rev",
    "add_to_list",
    "is_list",
    "filter",
)


def path(filename: str):
    return resources.files(__name__).joinpath(filename)


def source(filename: str) -> str:
    return path(filename).read_text(encoding="utf-8")


def load(name: str) -> Tuple[object, List[object]]:
    """(program, test cases) for a corpus entry."""
    from ..harness import parse_suite
    from ..reader import parse_program

    return parse_program(source(f"{name}.pl")), parse_suite(source(f"{name}_tests.pl"))
