# cli.py
"""
Command-line entry point of the multiplier lab.

    python cli.py class-group --disc -23 --format json
    python cli.py weaktype-fit --kind power --k 2 --s 0.75 --grid 1048576
    python cli.py --config class-group.csv.config.json      # re-run an artifact

Every run writes one artifact (CSV or JSON). A CSV artifact gets a
`<artifact>.config.json` sidecar holding the resolved config and the run
summary; a JSON artifact embeds both.
"""

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError as ConfigError

from commands import register_all, runner_for
from utils.errors import FitError, QuadratureError, ValidationError
from utils.load_config import RunConfig, build_config, load_config_file, resolved_config, sidecar_path
from utils.utils import split_complex_columns

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
FLOAT_FORMAT = "%.17g"

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INVALID = 2


# =============================================================================
# PARSER
# =============================================================================
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON run file (flags override it)")
    common.add_argument("--output", default=argparse.SUPPRESS, help="artifact path (default <command>.<format>)")
    common.add_argument("--format", choices=["csv", "json"], default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="cli.py",
        description="Discrete fractional integrals, exponential sums and weak-type multipliers.",
        parents=[common],
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    register_all(subparsers, common)
    return parser


# =============================================================================
# ARTIFACTS
# =============================================================================
def _jsonable(value: Any) -> Any:
    """Plain JSON values; NaN and infinities become null."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": _jsonable(value.real), "im": _jsonable(value.imag)}
    if value is None or isinstance(value, str):
        return value
    if pd.isna(value):
        return None
    return str(value)


def _dump_json(payload: dict, path: Path) -> None:
    text = json.dumps(_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")


def _staged(path: Path) -> Path:
    return path.with_name(f".{path.name}.part")


def emit(table: pd.DataFrame, fmt: str, path, config: Optional[RunConfig] = None,
         summary: Optional[dict] = None) -> Path:
    """
    Write `table` as CSV (header row, RFC 4180 quoting, 17 significant digits)
    or as JSON {"config", "rows", "summary"} with sorted keys.

    Complex columns are split into `<col>_re` / `<col>_im`. Rows keep the
    order the table has, so equal inputs give byte-equal files.

    Files are staged next to their targets and moved into place only once
    all of them are written; the CSV is moved last, so a failed sidecar
    never leaves a CSV behind.
    """
    path = Path(path)
    flat = split_complex_columns(table)
    embedded = resolved_config(config) if config is not None else None
    staged = []
    try:
        if fmt == "csv":
            if config is not None:
                side = sidecar_path(str(path))
                staged.append((_staged(side), side))
                _dump_json({"config": embedded, "summary": summary or {}}, staged[-1][0])
            staged.append((_staged(path), path))
            flat.to_csv(staged[-1][0], index=False, float_format=FLOAT_FORMAT, lineterminator="\r\n",
                        quoting=csv.QUOTE_MINIMAL, encoding="utf-8")
        elif fmt == "json":
            staged.append((_staged(path), path))
            _dump_json({"config": embedded, "rows": flat.to_dict(orient="records"),
                        "summary": summary or {}}, staged[-1][0])
        else:
            raise ValidationError(f"unknown artifact format {fmt!r}")
        for part, target in staged:
            part.replace(target)
    finally:
        for part, _ in staged:
            part.unlink(missing_ok=True)
    logger.info("Wrote %d rows to %s", len(flat), path)
    return path


# =============================================================================
# DISPATCH
# =============================================================================
def output_path(config: RunConfig) -> Path:
    if config.output is not None:
        return Path(config.output)
    return Path(f"{config.command.value}.{config.format}")


def dispatch(config: RunConfig) -> int:
    """Run one command, write its artifact and return the exit status."""
    logger.info("Running %s", config.command.value)
    try:
        table, summary = runner_for(config.command)(config)
        emit(table, config.format, output_path(config), config, summary)
    except ValidationError as exc:
        logger.error("Invalid parameters: %s", exc)
        return EXIT_INVALID
    except (QuadratureError, FitError) as exc:
        logger.error("Numeric failure: %s", exc)
        return EXIT_RUNTIME
    except OSError as exc:
        logger.error("Cannot write artifact: %s", exc)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = vars(build_parser().parse_args(argv))
    config_path = args.pop("config", None)
    logging.basicConfig(level=args.get("log_level", "INFO"), format=LOG_FORMAT)

    try:
        config = build_config(load_config_file(config_path), args)
    except (ConfigError, ValueError) as exc:   # ValidationError and bad JSON are ValueErrors
        logger.error("Invalid configuration: %s", exc)
        return EXIT_INVALID
    except OSError as exc:
        logger.error("Cannot read config file: %s", exc)
        return EXIT_INVALID

    logging.getLogger().setLevel(config.log_level)
    return dispatch(config)


if __name__ == "__main__":
    sys.exit(main())
