# utils/load_config.py
"""
Run configuration for the command line.

A run is described by one `RunConfig`: values from an optional JSON file
(`--config path`) updated by the flags given explicitly on the command line.
Unknown keys are rejected and every parameter constraint of the computation
modules is checked again here, so a bad run fails before any work starts.

HOW TO USE
----------
from utils.load_config import load_config_file, build_config, resolved_config

cfg = build_config(load_config_file("run.json"), {"command": "class-group", "disc": -23})
"""

import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from arith_core import is_fundamental_discriminant
from utils.errors import require

logger = logging.getLogger(__name__)

# Fields that only steer the process, never the numbers in an artifact.
RUNTIME_FIELDS = ("output", "threads", "log_level")


class Command(str, Enum):
    CHARACTERS = "characters"
    GAUSS_SUMS = "gauss-sums"
    PENTAGONAL = "pentagonal"
    CLASS_GROUP = "class-group"
    FAREY_ARCS = "farey-arcs"
    MULTIPLIER_SAMPLE = "multiplier-sample"
    WEAKTYPE_FIT = "weaktype-fit"
    LEMMA_ERROR_SCAN = "lemma-error-scan"
    OPERATOR_APPLY = "operator-apply"
    RATIO_SCAN = "ratio-scan"
    SW_CHECK = "sw-check"


MULTIPLIER_COMMANDS = {Command.MULTIPLIER_SAMPLE, Command.WEAKTYPE_FIT}


class RunConfig(BaseModel):
    """Everything one CLI command needs. Extra keys are an error."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Command
    format: Literal["csv", "json"] = "csv"
    output: Optional[str] = None
    threads: Optional[int] = Field(default=None, ge=1)
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    seed: int = Field(default=0, ge=0)

    # ---------- arithmetic ----------
    modulus: Optional[int] = Field(default=None, ge=1)
    max_modulus: Optional[int] = Field(default=None, ge=1)
    primitive_only: bool = False
    degree: int = Field(default=100, ge=0)
    disc: Optional[int] = None

    # ---------- farey ----------
    level: Optional[int] = Field(default=None, ge=0, le=40)
    major_fraction: float = Field(default=0.1, gt=0, le=1)

    # ---------- multipliers / weak type ----------
    kind: Literal["power", "char", "pentagonal", "ideal_norm"] = "power"
    s: Optional[float] = None
    k: int = Field(default=2, ge=1)
    char_modulus: int = Field(default=4, ge=3)
    char_label: Optional[int] = Field(default=None, ge=0)
    grid: int = Field(default=1 << 12, ge=2)
    epsilon: Optional[float] = Field(default=None, ge=0)
    n_max: Optional[int] = Field(default=None, ge=1)
    r_target: Optional[float] = Field(default=None, gt=0)

    # ---------- lemma scans ----------
    lemma: Literal[1, 2] = 1
    levels: Tuple[int, int] = (6, 20)
    moduli: List[int] = [1, 3, 4]
    samples_per_level: int = Field(default=16, ge=1)

    # ---------- operators ----------
    operator: Literal["fractional", "multiplier", "stein_weiss"] = "fractional"
    values: Optional[List[float]] = None
    origin: Optional[List[int]] = None
    alphas: Optional[List[float]] = None
    gamma: float = 0.0
    delta: float = 0.0
    p: Optional[float] = None
    q: Optional[float] = None
    dims: Optional[List[int]] = None
    radius: int = Field(default=8, ge=1)
    boxes: List[int] = [64, 128, 256]
    families: List[str] = ["delta", "box", "power_decay", "random_signs"]
    members: int = Field(default=4, ge=1)
    growth_threshold: float = Field(default=0.05, gt=0)

    @model_validator(mode="after")
    def _check_command(self) -> "RunConfig":
        cmd = self.command
        if cmd in (Command.CHARACTERS, Command.GAUSS_SUMS):
            require(self.modulus is not None or self.max_modulus is not None,
                    f"{cmd.value} needs --modulus or --max-modulus")
        if cmd is Command.CLASS_GROUP:
            require(self.disc is not None, "class-group needs --disc")
            require(self.disc < 0 and self.disc % 4 in (0, 1), f"{self.disc} is not a negative discriminant")
        if cmd is Command.FAREY_ARCS:
            require(self.level is not None, "farey-arcs needs --level")
        if cmd in MULTIPLIER_COMMANDS or (cmd in (Command.OPERATOR_APPLY, Command.RATIO_SCAN)
                                          and self.operator != "stein_weiss"):
            self._check_multiplier()
        if cmd is Command.LEMMA_ERROR_SCAN:
            lo, hi = self.levels
            require(0 <= lo <= hi, f"levels must satisfy 0 <= lo <= hi, got {self.levels}")
            require(all(N >= 1 for N in self.moduli) and self.moduli, "moduli must be a non-empty list of N >= 1")
        if cmd in (Command.RATIO_SCAN, Command.SW_CHECK):
            require(self.p is not None and self.q is not None, f"{cmd.value} needs --p and --q")
            require(self.p >= 1 and self.q >= 1, f"p and q must be >= 1, got p={self.p}, q={self.q}")
        if cmd is Command.RATIO_SCAN:
            require(len(self.boxes) > 0 and all(M >= 1 for M in self.boxes), "boxes must be positive sizes")
            require(len(self.families) > 0, "at least one test family is required")
        if cmd is Command.SW_CHECK or (self.operator == "stein_weiss" and cmd in (Command.OPERATOR_APPLY, Command.RATIO_SCAN)):
            self._check_stein_weiss(cmd)
        return self

    def _check_multiplier(self) -> None:
        require(self.s is not None, f"{self.command.value} needs --s")
        if self.command in MULTIPLIER_COMMANDS or self.operator == "multiplier":
            require(0 < self.s < 1, f"multiplier exponent s must lie in (0, 1), got {self.s}")
        else:
            require(self.s > 0, f"s must be > 0, got {self.s}")
        if self.kind == "ideal_norm":
            require(self.disc is not None and is_fundamental_discriminant(self.disc),
                    f"ideal_norm streams need a fundamental --disc, got {self.disc}")

    def _check_stein_weiss(self, cmd: Command) -> None:
        require(self.alphas is not None and len(self.alphas) >= 1, f"{cmd.value} needs --alphas")
        dims = self.dims if self.dims is not None else [1] * len(self.alphas)
        require(len(dims) == len(self.alphas), f"{len(self.alphas)} alphas for {len(dims)} factors")
        require(len(dims) <= 3, "at most three product factors are supported")
        if cmd is not Command.SW_CHECK:
            for a, N in zip(self.alphas, dims):
                require(0 < a < N, f"alpha_i={a} must lie in (0, N_i={N})")
            p = 2.0 if self.p is None else self.p
            q = 2.0 if self.q is None else self.q
            require(1 < p <= q < math.inf, f"need 1 < p <= q < inf, got p={p}, q={q}")


# =============================================================================
# LOADING
# =============================================================================
def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    """
    Read a JSON run file. A file written next to an artifact
    (`<artifact>.config.json`) is accepted too: its "config" block is used.
    """
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    require(isinstance(data, dict), f"config file {path} must hold a JSON object")
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    logger.info("Loaded %d config keys from %s", len(data), path)
    return data


def build_config(file_values: Mapping[str, Any], overrides: Mapping[str, Any]) -> RunConfig:
    """File values updated by explicit flags, then validated."""
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.model_validate(merged)


def resolved_config(config: RunConfig) -> Dict[str, Any]:
    """The config as embedded in artifacts (runtime-only fields dropped)."""
    return config.model_dump(mode="json", exclude=set(RUNTIME_FIELDS))


def sidecar_path(output: str) -> Path:
    return Path(f"{output}.config.json")
