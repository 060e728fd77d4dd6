# commands/arcs.py
"""farey-arcs: the level-j major/minor dissection of (0, 1]."""

import logging
from fractions import Fraction
from typing import Tuple

import pandas as pd

from commands import add_flag
from farey import arcs_cover, level_denominator_bound, level_dissection, tilde_disjointness
from utils.load_config import Command, RunConfig

logger = logging.getLogger(__name__)


def run_farey_arcs(config: RunConfig) -> Tuple[pd.DataFrame, dict]:
    j = config.level
    major = Fraction(config.major_fraction).limit_denominator(10 ** 6)
    arcs = level_dissection(j, major)
    rows = []
    for arc in arcs:
        lo, hi = arc.interval
        t_lo, t_hi = arc.tilde_interval
        rows.append({
            "p": arc.fraction.p,
            "q": arc.fraction.q,
            "kind": arc.kind.value,
            "lo": str(lo),
            "hi": str(hi),
            "width": float(hi - lo),
            "tilde_lo": float(t_lo),
            "tilde_hi": float(t_hi),
        })
    table = pd.DataFrame(rows, columns=["p", "q", "kind", "lo", "hi", "width", "tilde_lo", "tilde_hi"])

    n_major = int((table["kind"] == "major").sum())
    summary = {
        "level": j,
        "Q": level_denominator_bound(j),
        "arcs": len(table),
        "major": n_major,
        "minor": len(table) - n_major,
        "covers": arcs_cover(j),
        "tilde_disjoint": tilde_disjointness([arc.fraction for arc in arcs]),
    }
    logger.info("Level %d: %d arcs (%d major), cover=%s", j, summary["arcs"], n_major, summary["covers"])
    return table, summary


RUNNERS = {Command.FAREY_ARCS: run_farey_arcs}


def register(subparsers, common) -> None:
    p = subparsers.add_parser("farey-arcs", parents=[common], help="major/minor arcs at level j")
    add_flag(p, "--level", type=int, help="dyadic level j (Q = floor(2^{j/2}))")
    add_flag(p, "--major-fraction", type=float, help="major iff q <= fraction * 2^{j/2}")
