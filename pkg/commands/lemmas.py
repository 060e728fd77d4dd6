# commands/lemmas.py
"""lemma-error-scan: sampled residuals of the theta and f1 main-term approximations."""

import logging
from typing import Tuple

import pandas as pd

from commands import add_flag, int_list
from multipliers import error_law_summary, lemma1_error_scan, lemma2_error_scan
from utils.load_config import Command, RunConfig

logger = logging.getLogger(__name__)


def run_lemma_error_scan(config: RunConfig) -> Tuple[pd.DataFrame, dict]:
    lo, hi = config.levels
    levels = range(lo, hi + 1)
    if config.lemma == 1:
        scan = lemma1_error_scan(levels, config.moduli, config.samples_per_level, config.seed,
                                 threads=config.threads)
    else:
        scan = lemma2_error_scan(levels, config.samples_per_level, config.seed, threads=config.threads)

    law = error_law_summary(scan)
    summary = {
        "lemma": config.lemma,
        "samples": len(scan),
        "out_of_regime": int((~scan["in_regime"]).sum()),
        "slope": law.slope,
        "max_scaled": law.max_scaled,
        "bounded": law.bounded,
        "per_level": law.per_level.to_dict(orient="records"),
    }
    return scan, summary


RUNNERS = {Command.LEMMA_ERROR_SCAN: run_lemma_error_scan}


def _level_pair(text: str) -> Tuple[int, int]:
    lo, hi = int_list(text)
    return lo, hi


def register(subparsers, common) -> None:
    p = subparsers.add_parser("lemma-error-scan", parents=[common], help="error law of the main-term approximations")
    add_flag(p, "--lemma", type=int, choices=[1, 2])
    add_flag(p, "--levels", type=_level_pair, help="lo,hi (y = 2^-j for j in lo..hi)")
    add_flag(p, "--moduli", type=int_list, help="character moduli N, e.g. 1,3,4")
    add_flag(p, "--samples-per-level", type=int)
