# commands/lattice.py
"""operator-apply, ratio-scan, sw-check."""

import logging
import math
from typing import Callable, Dict, Tuple

import numpy as np
import pandas as pd

from commands import add_flag, float_list, int_list, spec_from_config, str_list, stream_from_config
from commands.weak import add_multiplier_flags
from multipliers import weak_type_exponent
from operators import (
    LatticeFunction,
    SWParams,
    apply_fractional,
    apply_multiplier_operator,
    apply_stein_weiss,
    fractional_range_holds,
    multiplier_range_holds,
    operator_ratio_scan,
    scan_growth,
    sw_conditions_check,
    sw_exponent_balance,
    sw_operator,
    twisted_range_holds,
)
from utils.errors import ValidationError, require
from utils.load_config import Command, RunConfig

logger = logging.getLogger(__name__)

Operator = Callable[[LatticeFunction], LatticeFunction]


def _sw_params(config: RunConfig) -> SWParams:
    p = 2.0 if config.p is None else config.p
    q = 2.0 if config.q is None else config.q
    return SWParams(tuple(config.alphas), config.gamma, config.delta, p, q)


def _sw_dims(config: RunConfig) -> Tuple[int, ...]:
    return tuple(config.dims) if config.dims is not None else (1,) * len(config.alphas)


def _operator(config: RunConfig) -> Operator:
    if config.operator == "fractional":
        stream = stream_from_config(config)
        return lambda f: apply_fractional(f, stream, config.s, config.n_max)
    if config.operator == "multiplier":
        spec = spec_from_config(config)
        return lambda f: apply_multiplier_operator(f, spec, config.n_max)
    return sw_operator(_sw_params(config))


def _input_function(config: RunConfig) -> LatticeFunction:
    """The input f: `values` on a cube starting at `origin` (default a point mass)."""
    if config.operator != "stein_weiss":
        values = [1.0] if config.values is None else config.values
        origin = 0 if not config.origin else config.origin[0]
        return LatticeFunction.from_values(values, origin)

    dims = _sw_dims(config)
    ndim = sum(dims)
    origin = tuple(config.origin) if config.origin else (1,) * ndim
    require(len(origin) == ndim, f"origin needs {ndim} coordinates, got {len(origin)}")
    flat = np.asarray([1.0] if config.values is None else config.values, dtype=np.complex128)
    side = int(round(flat.size ** (1.0 / ndim)))
    require(side ** ndim == flat.size, f"{flat.size} values do not fill a cube in {ndim} dimensions")
    return LatticeFunction(flat.reshape((side,) * ndim), origin, dims)


# =============================================================================
# RUNNERS
# =============================================================================
def run_operator_apply(config: RunConfig) -> Tuple[pd.DataFrame, dict]:
    """T f on its natural output support; Stein-Weiss output on [-radius, radius]^N."""
    f = _input_function(config)
    if config.operator == "stein_weiss":
        box = tuple((-config.radius, config.radius) for _ in range(f.ndim))
        out = apply_stein_weiss(f, _sw_params(config), eval_box=box)
    else:
        out = _operator(config)(f)

    columns: Dict[str, np.ndarray] = {}
    mesh = np.meshgrid(*[out.coords(a) for a in range(out.ndim)], indexing="ij")
    for axis in range(out.ndim):
        columns[f"n{axis + 1}" if out.ndim > 1 else "n"] = mesh[axis].ravel()
    columns["value"] = out.values.ravel()
    table = pd.DataFrame(columns)
    summary = {"operator": config.operator, "input_points": int(f.values.size), "output_points": len(table)}
    return table, summary


def _range_prediction(config: RunConfig) -> dict:
    p, q = config.p, config.q
    if config.operator == "stein_weiss":
        ok, _ = sw_conditions_check(_sw_params(config), _sw_dims(config))
        return {"conditions_hold": ok}
    if config.operator == "fractional":
        return {"fractional_range": fractional_range_holds(config.s, p, q),
                "twisted_range": twisted_range_holds(config.s, p, q)}
    try:
        r = weak_type_exponent(spec_from_config(config)).r
    except ValidationError:
        return {"multiplier_range": None}
    return {"predicted_r": r, "multiplier_range": multiplier_range_holds(r, p, q)}


def run_ratio_scan(config: RunConfig) -> Tuple[pd.DataFrame, dict]:
    if config.operator == "stein_weiss":
        dims = _sw_dims(config)
        require(all(d == 1 for d in dims), "ratio-scan supports one-dimensional factors only")
        ndim = len(dims)
    else:
        ndim = 1
    table = operator_ratio_scan(
        _operator(config), config.p, config.q, families=config.families, boxes=config.boxes,
        ndim=ndim, members=config.members, seed=config.seed,
        growth_threshold=config.growth_threshold, threads=config.threads,
    )
    summary = {
        "operator": config.operator,
        "seed": config.seed,
        "max_growth": scan_growth(table),
        "flagged": bool(table.loc[table["family"] == "all", "flagged"].any()),
    }
    summary.update(_range_prediction(config))
    return table, summary


def run_sw_check(config: RunConfig) -> Tuple[pd.DataFrame, dict]:
    params = _sw_params(config)
    dims = _sw_dims(config)
    ok, report = sw_conditions_check(params, dims)
    summary = {"holds": ok, "alpha": params.alpha, "N": sum(dims)}
    try:
        summary["balanced_q"] = sw_exponent_balance(params.alphas, params.gamma, params.delta, params.p, dims)
    except ValidationError:
        summary["balanced_q"] = math.nan
    return report, summary


RUNNERS = {
    Command.OPERATOR_APPLY: run_operator_apply,
    Command.RATIO_SCAN: run_ratio_scan,
    Command.SW_CHECK: run_sw_check,
}


def _add_operator_flags(p) -> None:
    add_flag(p, "--operator", choices=["fractional", "multiplier", "stein_weiss"])
    add_multiplier_flags(p)


def _add_sw_flags(p) -> None:
    add_flag(p, "--alphas", type=float_list, help="alpha_1,...,alpha_k")
    add_flag(p, "--gamma", type=float)
    add_flag(p, "--delta", type=float)
    add_flag(p, "--dims", type=int_list, help="N_1,...,N_k (default all 1)")


def register(subparsers, common) -> None:
    p = subparsers.add_parser("operator-apply", parents=[common], help="apply an operator to a finite f")
    _add_operator_flags(p)
    _add_sw_flags(p)
    add_flag(p, "--values", type=float_list, help="values of f (a cube in several dimensions)")
    add_flag(p, "--origin", type=int_list, help="lattice point of the first value")
    add_flag(p, "--radius", type=int, help="Stein-Weiss output box [-radius, radius]^N")
    add_flag(p, "--p", type=float)
    add_flag(p, "--q", type=float)

    p = subparsers.add_parser("ratio-scan", parents=[common], help="||T f||_q / ||f||_p over growing boxes")
    _add_operator_flags(p)
    _add_sw_flags(p)
    add_flag(p, "--p", type=float)
    add_flag(p, "--q", type=float)
    add_flag(p, "--boxes", type=int_list, help="box sizes M")
    add_flag(p, "--families", type=str_list)
    add_flag(p, "--members", type=int)
    add_flag(p, "--growth-threshold", type=float)

    p = subparsers.add_parser("sw-check", parents=[common], help="Stein-Weiss boundedness conditions")
    _add_sw_flags(p)
    add_flag(p, "--p", type=float)
    add_flag(p, "--q", type=float)
