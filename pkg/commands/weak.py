# commands/weak.py
"""multiplier-sample and weaktype-fit."""

import logging
from typing import Optional, Tuple

import pandas as pd

from commands import add_flag, params_from_config, spec_from_config
from multipliers import WeakTypePrediction, weak_type_exponent
from utils.errors import ValidationError
from utils.load_config import Command, RunConfig
from weaktype import exponent_fit, peak_locations, sample_multiplier, weak_constant

logger = logging.getLogger(__name__)


def _prediction(spec) -> Optional[WeakTypePrediction]:
    try:
        return weak_type_exponent(spec)
    except ValidationError as exc:
        logger.warning("No predicted exponent: %s", exc)
        return None


def run_multiplier_sample(config: RunConfig) -> Tuple[pd.DataFrame, dict]:
    """|m(x_j)| at x_j = (j + 1/2)/G, one row per grid point."""
    spec = spec_from_config(config)
    grid = sample_multiplier(spec, config.grid, params_from_config(config), threads=config.threads)
    peaks = peak_locations(grid, top=5)
    summary = {
        "multiplier": spec.name,
        "G": grid.G,
        "epsilon": grid.epsilon,
        "n_max": grid.n_max,
        "max_magnitude": float(grid.magnitudes.max()),
        "peaks": peaks.to_dict(orient="records"),
    }
    return grid.to_frame(), summary


def run_weaktype_fit(config: RunConfig) -> Tuple[pd.DataFrame, dict]:
    """The (alpha, lambda(alpha)) ladder; the fit and the predicted r go to the summary."""
    spec = spec_from_config(config)
    prediction = _prediction(spec)
    r_target = config.r_target if config.r_target is not None else (prediction.r if prediction else None)

    grid = sample_multiplier(spec, config.grid, params_from_config(config), threads=config.threads)
    fit = exponent_fit(grid, r_target=r_target)
    summary = {"multiplier": spec.name, "G": grid.G, "epsilon": grid.epsilon, "n_max": grid.n_max}
    summary.update(fit.summary())
    if r_target is not None:
        summary["weak_constant"] = weak_constant(grid, r_target)
    if prediction is not None:
        summary["predicted_r"] = prediction.r
        summary["predicted_range"] = list(prediction.s_range) if prediction.s_range else None
        summary["proven"] = prediction.proven
    logger.info("weaktype-fit %s: r_hat=%.4f target=%s", spec.name, fit.r_hat, r_target)
    return fit.to_frame(), summary


RUNNERS = {
    Command.MULTIPLIER_SAMPLE: run_multiplier_sample,
    Command.WEAKTYPE_FIT: run_weaktype_fit,
}


def add_multiplier_flags(p) -> None:
    add_flag(p, "--kind", choices=["power", "char", "pentagonal", "ideal_norm"])
    add_flag(p, "--s", type=float, help="exponent, 0 < s < 1")
    add_flag(p, "--k", type=int, help="power k of the phase n^k")
    add_flag(p, "--char-modulus", type=int)
    add_flag(p, "--char-label", type=int, help="index into the characters mod N")
    add_flag(p, "--disc", type=int, help="fundamental discriminant for ideal_norm")
    add_flag(p, "--epsilon", type=float, help="regulariser (default G^-2)")
    add_flag(p, "--n-max", type=int)


def register(subparsers, common) -> None:
    p = subparsers.add_parser("multiplier-sample", parents=[common], help="|m(x)| on the midpoint grid")
    add_multiplier_flags(p)
    add_flag(p, "--grid", type=int, help="grid size G")

    p = subparsers.add_parser("weaktype-fit", parents=[common], help="weak-L^r tail fit of |m|")
    add_multiplier_flags(p)
    add_flag(p, "--grid", type=int)
    add_flag(p, "--r-target", type=float, help="exponent for the weak constant (default: predicted r)")
