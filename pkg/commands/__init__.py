# commands/__init__.py
"""
One module per command group; each exposes `register(subparsers, common)` for its
flags and a `RUNNERS` mapping from Command to a function

    run(config: RunConfig) -> (table: pd.DataFrame, summary: dict)

`cli.dispatch` looks the runner up here and writes the artifact.
"""

import argparse
from typing import Callable, Dict, List, Tuple

import pandas as pd

from arith_core import CoefficientStream, primitive_characters, select_character
from multipliers import EvalParams, MultiplierSpec, PhaseKind
from utils.errors import require
from utils.load_config import Command, RunConfig

Runner = Callable[[RunConfig], Tuple[pd.DataFrame, dict]]


# =============================================================================
# FLAG HELPERS
# =============================================================================
def int_list(text: str) -> List[int]:
    """'1,3,4' -> [1, 3, 4]"""
    return [int(part) for part in text.split(",") if part.strip()]


def float_list(text: str) -> List[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def str_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def add_flag(parser: argparse.ArgumentParser, flag: str, **kwargs) -> None:
    """Flags never carry defaults: an absent flag leaves the config file value alone."""
    parser.add_argument(flag, default=argparse.SUPPRESS, **kwargs)


# =============================================================================
# CONFIG -> DOMAIN OBJECTS
# =============================================================================
def character_from_config(config: RunConfig):
    """The chosen character mod char_modulus (default: first primitive non-principal one)."""
    if config.char_label is not None:
        return select_character(config.char_modulus, config.char_label)
    candidates = [chi for chi in primitive_characters(config.char_modulus) if not chi.is_principal]
    require(bool(candidates), f"no primitive character mod {config.char_modulus}")
    return candidates[0]


def stream_from_config(config: RunConfig) -> CoefficientStream:
    if config.kind == "power":
        return CoefficientStream.power(config.k)
    if config.kind == "char":
        return CoefficientStream.twisted(character_from_config(config))
    if config.kind == "pentagonal":
        return CoefficientStream.pentagonal()
    return CoefficientStream.ideal_norm(config.disc)


def spec_from_config(config: RunConfig) -> MultiplierSpec:
    """m_{s,k}, m_{s,chi} (phase n^2), the pentagonal or the quadratic-field multiplier."""
    if config.kind == "char":
        return MultiplierSpec(config.s, stream_from_config(config), PhaseKind.POWER, 2)
    return MultiplierSpec(config.s, stream_from_config(config))


def params_from_config(config: RunConfig) -> EvalParams:
    """eps = G^{-2} unless --epsilon is given."""
    if config.epsilon is None:
        return EvalParams.for_grid(config.grid, n_max=config.n_max)
    return EvalParams(n_max=config.n_max, epsilon=config.epsilon)


def _runners() -> Dict[Command, Runner]:
    from commands import arcs, arithmetic, lattice, lemmas, weak

    table: Dict[Command, Runner] = {}
    for module in (arithmetic, arcs, weak, lemmas, lattice):
        table.update(module.RUNNERS)
    return table


def runner_for(command: Command) -> Runner:
    return _runners()[command]


def register_all(subparsers, common: argparse.ArgumentParser) -> None:
    from commands import arcs, arithmetic, lattice, lemmas, weak

    for module in (arithmetic, arcs, weak, lemmas, lattice):
        module.register(subparsers, common)
