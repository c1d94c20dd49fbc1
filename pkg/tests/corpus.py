"""Shared fixtures data: the example system files and a few hand-picked points."""

from __future__ import annotations

from pathlib import Path

from heightlab.cli.schema import load_file, parse_point

EXAMPLES = Path(__file__).resolve().parent.parent / "docs" / "examples"

# seed-4 Wehler surface points from five distinct orbits
WEHLER_POINTS = [
    "0:1,1:-1,1:0",
    "0:1,1:-1,1:-1",
    "1:-2,2:1,3:-2",
    "0:1,0:1,1:-1",
    "1:1,1:2,6:-5",
]


def load(name: str):
    return load_file(str(EXAMPLES / f"{name}.json"))


def point(loaded, text: str):
    return parse_point(loaded, text)
