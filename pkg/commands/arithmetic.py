# commands/arithmetic.py
"""characters, gauss-sums, pentagonal, class-group."""

import logging
from typing import Tuple

import numpy as np
import pandas as pd

from arith_core import (
    class_number,
    enumerate_characters,
    euler_split_coefficients,
    gauss_sum,
    is_fundamental_discriminant,
    pentagonal_coefficients,
    pentagonal_product_oracle,
    reduced_forms,
    unit_count,
)
from commands import add_flag
from utils.load_config import Command, RunConfig

logger = logging.getLogger(__name__)


def _moduli(config: RunConfig) -> range:
    if config.modulus is not None:
        return range(config.modulus, config.modulus + 1)
    return range(1, config.max_modulus + 1)


def run_characters(config: RunConfig) -> Tuple[pd.DataFrame, dict]:
    rows = []
    for N in _moduli(config):
        for chi in enumerate_characters(N):
            if config.primitive_only and not chi.is_primitive:
                continue
            row = chi.describe()
            row["phases"] = " ".join(str(int(v)) for v in chi.phases)
            rows.append(row)
    table = pd.DataFrame(rows, columns=["modulus", "label", "conductor", "primitive", "parity", "order", "phases"])
    summary = {"characters": len(table), "primitive": int(table["primitive"].sum()) if len(table) else 0}
    return table, summary


def run_gauss_sums(config: RunConfig) -> Tuple[pd.DataFrame, dict]:
    """tau(chi) for every primitive chi, with the deviation ||tau|^2 - N|."""
    rows = []
    for N in _moduli(config):
        for chi in enumerate_characters(N):
            if not chi.is_primitive:
                continue
            tau = gauss_sum(chi)
            rows.append({"modulus": N, "label": chi.label, "parity": chi.parity, "tau": tau,
                         "abs_sq_deviation": abs(abs(tau) ** 2 - N)})
    table = pd.DataFrame(rows, columns=["modulus", "label", "parity", "tau", "abs_sq_deviation"])
    worst = float(table["abs_sq_deviation"].max()) if len(table) else 0.0
    logger.info("Gauss sums: %d primitive characters, max ||tau|^2 - N| = %.3e", len(table), worst)
    return table, {"primitive_characters": len(table), "max_abs_sq_deviation": worst}


def run_pentagonal(config: RunConfig) -> Tuple[pd.DataFrame, dict]:
    M = config.degree
    a = pentagonal_coefficients(M)
    oracle = pentagonal_product_oracle(M).astype(np.int64)
    f1, f2 = euler_split_coefficients(M)
    table = pd.DataFrame({"n": np.arange(M + 1), "a_n": a, "product": oracle, "f1_plus_f2": f1 + f2})
    summary = {
        "degree": M,
        "nonzero": int(np.count_nonzero(a)),
        "product_matches": bool(np.array_equal(a, oracle)),
        "split_matches": bool(np.array_equal(a, f1 + f2)),
    }
    return table, summary


def run_class_group(config: RunConfig) -> Tuple[pd.DataFrame, dict]:
    D = config.disc
    forms = reduced_forms(D)
    table = pd.DataFrame([{"a": f.a, "b": f.b, "c": f.c} for f in forms], columns=["a", "b", "c"])
    summary = {"disc": D, "h": class_number(D), "fundamental": is_fundamental_discriminant(D),
               "units": unit_count(D)}
    logger.info("Class group of D=%d: h=%d", D, summary["h"])
    return table, summary


RUNNERS = {
    Command.CHARACTERS: run_characters,
    Command.GAUSS_SUMS: run_gauss_sums,
    Command.PENTAGONAL: run_pentagonal,
    Command.CLASS_GROUP: run_class_group,
}


def register(subparsers, common) -> None:
    for name, helptext in (("characters", "Dirichlet characters mod N"),
                           ("gauss-sums", "Gauss sums of primitive characters")):
        p = subparsers.add_parser(name, parents=[common], help=helptext)
        add_flag(p, "--modulus", type=int, help="a single modulus N")
        add_flag(p, "--max-modulus", type=int, help="every modulus 1..N")
        if name == "characters":
            add_flag(p, "--primitive-only", action="store_true")

    p = subparsers.add_parser("pentagonal", parents=[common], help="coefficients of prod (1 - x^n)")
    add_flag(p, "--degree", type=int)

    p = subparsers.add_parser("class-group", parents=[common], help="reduced forms of discriminant D")
    add_flag(p, "--disc", type=int)
