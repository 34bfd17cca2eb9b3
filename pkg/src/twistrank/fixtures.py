"""Fixture file loading: curve models and rank panels.

Curve CSV format — a header row `label,a,b,conductor,root_number`, data
rows, then optionally a single line `ap_overrides` followed by rows
`label,p,a_p` supplying a_p at the primes (2 and 3) where the short model
cannot be counted directly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Dict

from .curve import EllipticCurve
from .errors import FixtureError

_CURVE_HEADER = ["label", "a", "b", "conductor", "root_number"]
_OVERRIDE_HEADER = ["label", "p", "a_p"]


@dataclass(frozen=True)
class CurveFixture:
    curve: EllipticCurve
    ap_overrides: Dict[int, int] = field(default_factory=dict)


def load_curves(path) -> Dict[str, CurveFixture]:
    """Parse a curve fixture CSV (with optional ap_overrides block)."""
    rows = []
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows or rows[0] != _CURVE_HEADER:
        raise FixtureError(f"{path}: expected header {','.join(_CURVE_HEADER)}")
    try:
        split = next(i for i, r in enumerate(rows) if r[0].strip() == "ap_overrides")
    except StopIteration:
        split = len(rows)
    curves: Dict[str, CurveFixture] = {}
    overrides: Dict[str, Dict[int, int]] = {}
    for lineno, row in enumerate(rows[split + 1:], start=split + 2):
        if row == _OVERRIDE_HEADER:
            continue
        try:
            label, p, ap = row[0].strip(), int(row[1]), int(row[2])
        except (ValueError, IndexError) as exc:
            raise FixtureError(f"{path}:{lineno}: bad override row {row!r}") from exc
        if p not in (2, 3):
            raise FixtureError(f"{path}:{lineno}: overrides only apply at p = 2, 3")
        overrides.setdefault(label, {})[p] = ap
    for lineno, row in enumerate(rows[1:split], start=2):
        try:
            label = row[0].strip()
            curve = EllipticCurve(a=int(row[1]), b=int(row[2]), N=int(row[3]),
                                  eps=int(row[4]), label=label)
        except (ValueError, IndexError) as exc:
            raise FixtureError(f"{path}:{lineno}: bad curve row {row!r}") from exc
        curves[label] = CurveFixture(curve=curve,
                                     ap_overrides=overrides.get(label, {}))
    unknown = set(overrides) - set(curves)
    if unknown:
        raise FixtureError(f"{path}: overrides for unknown curves {sorted(unknown)}")
    return curves


def load_ranks(path) -> Dict[int, int]:
    """Parse a rank panel CSV with header d,rank."""
    out: Dict[int, int] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["d", "rank"]:
            raise FixtureError(f"{path}: expected header d,rank")
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(c.strip() for c in row):
                continue
            try:
                out[int(row[0])] = int(row[1])
            except (ValueError, IndexError) as exc:
                raise FixtureError(f"{path}:{lineno}: bad row {row!r}") from exc
    return out
