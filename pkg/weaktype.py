# weaktype.py
"""
Empirical weak-type L^r profiling of sampled multipliers.

A grid holds |m(x_j)| at the midpoints x_j = (j + 1/2)/G. From it we read the
distribution function lambda(alpha) = #{j : |m(x_j)| > alpha} / G, the weak
quasinorm sup alpha lambda^{1/r}, the constant sup alpha^r lambda and a
log-log fit of the tail exponent.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from farey import locate_arc
from multipliers import EvalParams, MultiplierSpec, eval_on_grid
from utils.errors import FitError, require

logger = logging.getLogger(__name__)

# ---------- constants ----------
LADDER_RATIO: float = 2.0 ** 0.25   # geometric alpha ladder
MIN_COUNT: int = 10                 # lambda * G below this is shot noise
STABLE_COUNT: int = 100             # lambda * G floor of the shared stability window
BULK_LAMBDA: float = 0.5            # lambda above this is the bulk, not the tail
MIN_FIT_POINTS: int = 8

AlphaRange = Tuple[float, float]


# =============================================================================
# TYPES
# =============================================================================
@dataclass(frozen=True, eq=False)
class SampleGrid:
    """Magnitudes |m(x_j)| at x_j = (j + 1/2)/G plus how they were evaluated."""
    G: int
    magnitudes: np.ndarray
    epsilon: float = 0.0
    n_max: Optional[int] = None
    label: str = ""

    def __post_init__(self):
        require(self.G >= 2, f"grid size must be >= 2, got {self.G}")
        require(self.magnitudes.shape == (self.G,), f"expected {self.G} magnitudes, got {self.magnitudes.shape}")
        require(bool(np.all(np.isfinite(self.magnitudes))), "grid magnitudes must be finite")
        require(bool(np.all(self.magnitudes >= 0)), "grid magnitudes must be >= 0")

    @property
    def xs(self) -> np.ndarray:
        return (np.arange(self.G, dtype=np.float64) + 0.5) / self.G

    def scaled(self, t: float) -> "SampleGrid":
        return SampleGrid(self.G, self.magnitudes * t, self.epsilon, self.n_max, self.label)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.xs, "magnitude": self.magnitudes})


@dataclass(frozen=True)
class WeakTypeFit:
    """
    Log-log fit of lambda(alpha) over the resolved window of the ladder.

    slope_hat ~ -r; `in_window` marks the ladder points used by the fit.
    """
    r_target: Optional[float]
    alphas: np.ndarray = field(repr=False)
    lambdas: np.ndarray = field(repr=False)
    in_window: np.ndarray = field(repr=False)
    slope_hat: float
    intercept: float
    residual: float
    c_hat: float

    @property
    def r_hat(self) -> float:
        return -self.slope_hat

    @property
    def resolved_points(self) -> int:
        return int(self.in_window.sum())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"alpha": self.alphas, "lambda": self.lambdas, "in_window": self.in_window})

    def summary(self) -> dict:
        return {
            "r_target": self.r_target, "r_hat": self.r_hat, "slope_hat": self.slope_hat,
            "intercept": self.intercept, "residual": self.residual, "c_hat": self.c_hat,
            "resolved_points": self.resolved_points,
        }


# =============================================================================
# GRIDS
# =============================================================================
def sample_multiplier(spec: MultiplierSpec, G: int, params: Optional[EvalParams] = None,
                      threads: Optional[int] = None) -> SampleGrid:
    """
    |m(x_j)| on the midpoint grid; eps defaults to G^{-2}.
    """
    params = EvalParams.for_grid(G) if params is None else params
    values = eval_on_grid(spec, G, params, offset=0.5, threads=threads)
    grid = SampleGrid(G, np.abs(values), params.epsilon, params.resolved_n_max(spec.stream), spec.name)
    logger.info("Sampled %s on G=%d (eps=%.3g, n_max=%d), max %.4g", spec.name, G,
                params.epsilon, grid.n_max, float(grid.magnitudes.max()))
    return grid


def synthetic_grid(G: int, beta: float, center: float = 0.5) -> SampleGrid:
    """|x_j - center|^{-beta}."""
    require(beta > 0, f"beta must be > 0, got {beta}")
    xs = (np.arange(G, dtype=np.float64) + 0.5) / G
    return SampleGrid(G, np.abs(xs - center) ** (-beta), label=f"synthetic_beta{beta:g}")


# =============================================================================
# DISTRIBUTION FUNCTION AND NORMS
# =============================================================================
def alpha_ladder(alpha_min: float, alpha_max: float, ratio: float = LADDER_RATIO) -> np.ndarray:
    """alpha_min * ratio^i for every i with the value <= alpha_max."""
    require(0 < alpha_min <= alpha_max, f"need 0 < alpha_min <= alpha_max, got {alpha_min}, {alpha_max}")
    require(ratio > 1, f"ladder ratio must be > 1, got {ratio}")
    steps = int(math.floor(math.log(alpha_max / alpha_min) / math.log(ratio) + 1e-12))
    return alpha_min * ratio ** np.arange(steps + 1, dtype=np.float64)


def distribution_function(grid: SampleGrid, alphas: Sequence[float]) -> np.ndarray:
    """lambda(alpha) = #{j : magnitude_j > alpha} / G for each alpha."""
    alphas = np.asarray(alphas, dtype=np.float64)
    if alphas.size == 0:
        return np.zeros(0)
    require(bool(np.all(alphas > 0)), "alphas must be positive")
    require(bool(np.all(np.diff(alphas) > 0)), "alphas must be strictly ascending")
    ordered = np.sort(grid.magnitudes)
    above = grid.G - np.searchsorted(ordered, alphas, side="right")
    return above / grid.G


def _tail_profile(grid: SampleGrid, alpha_range: Optional[AlphaRange]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Distinct magnitudes v (descending) with lambda(v^-) = #{|m| >= v}/G, the
    left limits at which sup_alpha of any increasing functional is attained.
    """
    ordered = np.sort(grid.magnitudes)[::-1]
    values, first = np.unique(-ordered, return_index=True)
    values = -values
    counts = np.append(first[1:], ordered.size)   # #{|m| >= v}
    lam = counts / grid.G
    if alpha_range is not None:
        lo, hi = alpha_range
        keep = (values >= lo) & (values <= hi)
        values, lam = values[keep], lam[keep]
    positive = values > 0
    return values[positive], lam[positive]


def weak_norm(grid: SampleGrid, r: float, alpha_range: Optional[AlphaRange] = None) -> float:
    """
    sup_alpha alpha lambda(alpha)^{1/r}, taken exactly over the sample values
    (alpha -> v from below) inside `alpha_range`.
    """
    require(r > 0, f"r must be > 0, got {r}")
    values, lam = _tail_profile(grid, alpha_range)
    if values.size == 0:
        return 0.0
    return float(np.max(values * lam ** (1.0 / r)))


def weak_constant(grid: SampleGrid, r: float, alpha_range: Optional[AlphaRange] = None) -> float:
    """sup_alpha alpha^r lambda(alpha) over `alpha_range`."""
    require(r > 0, f"r must be > 0, got {r}")
    values, lam = _tail_profile(grid, alpha_range)
    if values.size == 0:
        return 0.0
    return float(np.max(values ** r * lam))


def resolved_window(grid: SampleGrid, min_count: int = MIN_COUNT, bulk: float = BULK_LAMBDA) -> Optional[AlphaRange]:
    """
    Alpha range where bulk >= lambda and lambda * G >= min_count, read off
    the sorted magnitudes; None when the grid resolves no tail.
    """
    ordered = np.sort(grid.magnitudes)[::-1]
    k_lo = int(math.floor(bulk * grid.G))      # lambda <= bulk  <=>  alpha >= ordered[k_lo]
    k_hi = int(min_count) - 1                   # lambda * G >= min_count  <=>  alpha < ordered[k_hi]
    if k_hi >= ordered.size or k_lo >= ordered.size or k_lo <= k_hi:
        return None
    lo, hi = float(ordered[k_lo]), float(ordered[k_hi])
    if not (0 < lo < hi):
        return None
    return lo, hi


# =============================================================================
# EXPONENT FIT
# =============================================================================
def exponent_fit(grid: SampleGrid, alpha_range: Optional[AlphaRange] = None, r_target: Optional[float] = None,
                 ratio: float = LADDER_RATIO, min_count: int = MIN_COUNT, bulk: float = BULK_LAMBDA,
                 min_points: int = MIN_FIT_POINTS) -> WeakTypeFit:
    """
    Least-squares slope of log lambda against log alpha on the ladder.

    Ladder points with lambda * G < min_count (shot noise) or lambda > bulk
    (bulk region) are excluded from the fit.

    Raises
    ------
    FitError
        With fewer than `min_points` resolved ladder points.
    """
    if alpha_range is None:
        alpha_range = resolved_window(grid, min_count, bulk)
        if alpha_range is None:
            raise FitError(f"grid {grid.label or grid.G} has no resolved tail window", resolved_points=0)
    alphas = alpha_ladder(alpha_range[0], alpha_range[1], ratio)
    lambdas = distribution_function(grid, alphas)
    in_window = (lambdas * grid.G >= min_count) & (lambdas <= bulk) & (lambdas > 0)
    used = int(in_window.sum())
    if used < min_points:
        logger.warning("Exponent fit rejected: %d resolved ladder points (< %d)", used, min_points)
        raise FitError(f"only {used} resolved ladder points (need {min_points}); refine the grid or widen the range",
                       resolved_points=used)
    la, ll = np.log(alphas[in_window]), np.log(lambdas[in_window])
    slope, intercept = np.polyfit(la, ll, 1)
    residual = float(np.sqrt(np.mean((ll - (slope * la + intercept)) ** 2)))
    r_used = r_target if r_target is not None else -slope
    c_hat = float(np.max(alphas[in_window] ** r_used * lambdas[in_window]))
    logger.info("Exponent fit on %d points: r_hat=%.4f (residual %.3g)", used, -slope, residual)
    return WeakTypeFit(r_target, alphas, lambdas, in_window, float(slope), float(intercept), residual, c_hat)


# =============================================================================
# STABILITY AND PEAKS
# =============================================================================
def stability_scan(spec: MultiplierSpec, r: float, sizes: Sequence[int] = (1 << 18, 1 << 19, 1 << 20),
                   min_count: int = STABLE_COUNT, threads: Optional[int] = None) -> pd.DataFrame:
    """
    sup alpha^r lambda over one alpha window shared by every grid size
    (eps = G^{-2}); `change` is the relative change from the previous size.

    The window is the coarsest grid's resolved range with lambda * G >=
    `min_count` there, so its top never rests on the handful of largest
    samples, whose values move with the sampling offsets and eps.
    """
    sizes = sorted(int(G) for G in sizes)
    grids = [sample_multiplier(spec, G, threads=threads) for G in sizes]
    window = resolved_window(grids[0], min_count=min_count)
    require(window is not None, f"grid G={sizes[0]} resolves no tail window for {spec.name}")
    rows = []
    previous = None
    for G, grid in zip(sizes, grids):
        c = weak_constant(grid, r, window)
        change = 0.0 if previous is None else abs(c - previous) / previous
        rows.append({"G": G, "alpha_lo": window[0], "alpha_hi": window[1], "weak_constant": c, "change": change})
        previous = c
    table = pd.DataFrame(rows)
    logger.info("Stability scan for %s (r=%g): max change %.2f%%", spec.name, r, 100 * table["change"].max())
    return table


def peak_locations(grid: SampleGrid, top: int = 10, level: Optional[int] = None) -> pd.DataFrame:
    """
    The `top` largest samples with the level-j Farey arc containing each
    (j = floor(log2 G) by default).
    """
    level = int(math.floor(math.log2(grid.G))) if level is None else int(level)
    order = np.argsort(grid.magnitudes, kind="mergesort")[::-1][:top]
    xs = grid.xs
    rows = []
    for j in order:
        arc, delta = locate_arc(float(xs[j]), level)
        rows.append({"x": float(xs[j]), "magnitude": float(grid.magnitudes[j]),
                     "fraction": str(arc.fraction), "q": arc.fraction.q, "delta": delta,
                     "kind": arc.kind.value})
    return pd.DataFrame(rows, columns=["x", "magnitude", "fraction", "q", "delta", "kind"])
