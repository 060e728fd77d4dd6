# utils/utils.py
"""
Shared helpers for the multiplier lab.

WHY THIS FILE?
- Keeps the small numeric kernels every module leans on (compensated complex
  sums, exact phase reduction, seeded generators, the worker pool) in one place.
- Each computation module stays focused on its own mathematics.

HOW TO USE
----------
from utils.utils import (
    fsum_complex, frac_product, unit_phase,
    resolve_threads, parallel_map, counter_rng, split_complex_columns,
)
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# =============================================================================
# CONSTANTS
# =============================================================================
# Environment fallback for --threads.
THREADS_ENV: str = "MULTIPLIER_LAB_THREADS"

# Veltkamp splitter for IEEE doubles (2**27 + 1).
_SPLITTER: float = 134217729.0
_TWO_26: int = 1 << 26


# =============================================================================
# COMPENSATED SUMMATION
# =============================================================================
def fsum_complex(values: Iterable[complex]) -> complex:
    """
    Sum complex numbers with Shewchuk/Neumaier compensation on each component.

    Parameters
    ----------
    values : iterable of complex (or a numpy complex array)

    Returns
    -------
    complex
        Correctly rounded real and imaginary sums.
    """
    arr = np.asarray(values, dtype=np.complex128).ravel()
    if arr.size == 0:
        return 0j
    return complex(math.fsum(arr.real), math.fsum(arr.imag))


# =============================================================================
# EXACT PHASE REDUCTION
# =============================================================================
def _veltkamp(x: float) -> tuple:
    c = _SPLITTER * x
    hi = c - (c - x)
    return hi, x - hi


def frac_product(n: np.ndarray, x: float) -> np.ndarray:
    """
    Fractional part of n*x for integer n (|n| < 2**52) and a double x.

    Both factors are split into halves of at most 26 significant bits, so the
    four partial products are exact doubles and only their fractional parts
    are ever added. This keeps e^{2 pi i n x} accurate when n*x is far beyond
    2**30, where fl(n*x) would lose the phase.

    Returns
    -------
    np.ndarray
        Values in [0, 1).
    """
    n = np.asarray(n, dtype=np.int64)
    n_hi = ((n >> 26) << 26).astype(np.float64)
    n_lo = (n - ((n >> 26) << 26)).astype(np.float64)
    x_hi, x_lo = _veltkamp(float(x))
    acc = np.zeros(n.shape, dtype=np.float64)
    for a in (n_hi, n_lo):
        for b in (x_hi, x_lo):
            prod = a * b
            acc += prod - np.floor(prod)
    return acc - np.floor(acc)


def unit_phase(frac: np.ndarray) -> np.ndarray:
    """e^{2 pi i frac}, elementwise."""
    return np.exp(2j * np.pi * np.asarray(frac, dtype=np.float64))


def residue_phase(residues: np.ndarray, modulus: int) -> np.ndarray:
    """e^{2 pi i r / modulus} for integer residues, reduced exactly first."""
    r = np.mod(np.asarray(residues, dtype=np.int64), modulus)
    return np.exp(2j * np.pi * r.astype(np.float64) / modulus)


# =============================================================================
# WORKER POOL
# =============================================================================
def resolve_threads(threads: Optional[int] = None) -> int:
    """
    Worker count: explicit value, else $MULTIPLIER_LAB_THREADS, else cpu_count.
    """
    if threads is not None and threads > 0:
        return int(threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
            if value > 0:
                return value
        except ValueError:
            logger.warning("Ignoring non-integer %s=%r", THREADS_ENV, env)
    return os.cpu_count() or 1


def parallel_map(func: Callable[[T], R], items: Sequence[T], threads: Optional[int] = None) -> List[R]:
    """
    Map `func` over `items` on a thread pool; results come back in input order.

    numpy releases the GIL in its heavy kernels, so threads are enough for the
    array work done here. With one worker the map runs inline.
    """
    workers = min(resolve_threads(threads), max(len(items), 1))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def counter_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """
    Counter-based generator (Philox) keyed by (seed, stream).

    The same (seed, stream) pair always yields the same draws, independent of
    which worker asks for them.
    """
    key = np.array([seed % (1 << 64), stream % (1 << 64)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# =============================================================================
# TABLE HELPERS
# =============================================================================
def split_complex_columns(df: pd.DataFrame) -> pd.DataFrame:
    """
    Return a copy of df with every complex column replaced by `<col>_re` and
    `<col>_im` float columns (CSV and JSON have no complex type).
    """
    out = pd.DataFrame(index=df.index)
    for col in df.columns:
        s = df[col]
        if np.iscomplexobj(s.to_numpy()) or s.map(lambda v: isinstance(v, complex)).any():
            vals = s.to_numpy(dtype=np.complex128)
            out[f"{col}_re"] = vals.real
            out[f"{col}_im"] = vals.imag
        else:
            out[col] = s
    return out
