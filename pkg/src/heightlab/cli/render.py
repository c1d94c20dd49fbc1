"""Rendering of results as JSON-ready dictionaries and CSV tables."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Any, Sequence

import mpmath

from heightlab import __version__
from heightlab.numlin.balls import BallReal


def decimal(x, digits: int) -> str:
    if isinstance(x, Fraction):
        x = mpmath.mpf(x.numerator) / x.denominator
    return mpmath.nstr(mpmath.mpf(x), digits, min_fixed=-6, max_fixed=12)


def ball(b: BallReal | None, digits: int) -> dict | None:
    if b is None:
        return None
    return {"lo": decimal(b.lower, digits), "hi": decimal(b.upper, digits), "mid": decimal(b.midpoint, digits)}


def exact(q: Fraction | None) -> str | None:
    return None if q is None else str(q)


def dumps(payload: dict) -> str:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def envelope(command: str, label: str, body: dict) -> dict:
    return {"schema": 1, "tool": "heightlab", "version": __version__, "command": command, "label": label, **body}


def table_csv(columns: Sequence[str], rows: Sequence[dict], metadata: dict[str, Any] | None = None) -> str:
    """RFC 4180 CSV with a header row; metadata goes in leading ``#`` comment lines."""
    out = io.StringIO()
    if metadata:
        for k in sorted(metadata):
            out.write(f"# {k}: {metadata[k]}\n")
    w = csv.DictWriter(out, fieldnames=list(columns), lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL,
                       extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
    return out.getvalue()
