# multipliers.py
"""
Numerical evaluation of the multiplier families and of the theta-function
main terms that approximate them on major arcs.

Families (all built on `CoefficientStream`):
  m_{s,k}(x)  = sum_m e^{-2 pi i m^k x} / m^s           MultiplierSpec.power
  m_{s,chi}(x)= sum_n chi(n) e^{-2 pi i n^2 x} / n^s     MultiplierSpec.twisted
  m_{s,f}(x)  = sum_n a_n e^{-2 pi i n x} / n^s          MultiplierSpec.pentagonal
  m_{s,K}(x)  = sum_n r_K(n) e^{-2 pi i n x} / n^s       MultiplierSpec.quadratic_field

Every evaluator reduces to one "kernel": integer positions P (where the phase
e^{-2 pi i P x} sits), coefficients c, summation indices n (for the Gaussian
regulariser e^{-pi n^2 eps}) and an exponent sigma with weight c P^{-sigma}.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import integrate, special

from arith_core import (
    CoefficientStream,
    DirichletCharacter,
    StreamKind,
    class_norm_counts,
    euler_weyl_sum,
    gauss_sum_table,
    quadratic_gauss_sum,
    reduced_forms,
    unit_count,
)
from utils.errors import QuadratureError, ValidationError, require
from utils.utils import (
    counter_rng,
    frac_product,
    fsum_complex,
    parallel_map,
    residue_phase,
    unit_phase,
)

logger = logging.getLogger(__name__)

# ---------- constants ----------
TAIL_TOL: float = 1e-16          # every Gaussian tail is cut below this
GRID_CHUNK: int = 1 << 20        # kernel terms folded per worker task
MAX_POSITION: int = 1 << 52      # frac_product is exact below this
SLOPE_TOL: float = 0.05          # error-law scans: allowed log-slope of the scaled residual


class PhaseKind(str, Enum):
    PLAIN = "plain"        # e^{-2 pi i n x}
    POWER = "power_k"      # e^{-2 pi i n^k x}


# =============================================================================
# SPECS AND PARAMETERS
# =============================================================================
@dataclass(frozen=True)
class MultiplierSpec:
    """
    A multiplier m_{s, stream}. With `phase_kind = POWER` the stream is
    indexed by m and sits at the phase m^k (a character stream with k = 2 is
    m_{s,chi}); power streams already carry their own k and use PLAIN.
    """
    s: float
    stream: CoefficientStream
    phase_kind: PhaseKind = PhaseKind.PLAIN
    k: int = 1

    def __post_init__(self):
        require(0 < self.s < 1, f"multiplier exponent s must lie in (0, 1), got {self.s}")
        require(self.k >= 1, f"phase power k must be >= 1, got {self.k}")
        if self.phase_kind is PhaseKind.POWER:
            require(not (self.stream.kind is StreamKind.POWER and self.stream.k > 1),
                    "a power stream already fixes its phase; use phase_kind='plain'")

    # ---------- constructors ----------
    @classmethod
    def power(cls, s: float, k: int) -> "MultiplierSpec":
        return cls(s, CoefficientStream.power(k))

    @classmethod
    def twisted(cls, s: float, chi: DirichletCharacter) -> "MultiplierSpec":
        return cls(s, CoefficientStream.twisted(chi), PhaseKind.POWER, 2)

    @classmethod
    def pentagonal(cls, s: float) -> "MultiplierSpec":
        return cls(s, CoefficientStream.pentagonal())

    @classmethod
    def quadratic_field(cls, s: float, D: int) -> "MultiplierSpec":
        return cls(s, CoefficientStream.ideal_norm(D))

    @classmethod
    def custom(cls, s: float, values: Sequence[complex]) -> "MultiplierSpec":
        return cls(s, CoefficientStream.custom(values))

    @property
    def phase_power(self) -> int:
        if self.stream.kind is StreamKind.POWER:
            return self.stream.k
        return self.k if self.phase_kind is PhaseKind.POWER else 1

    @property
    def name(self) -> str:
        suffix = f"_phase{self.k}" if self.phase_kind is PhaseKind.POWER else ""
        return f"{self.stream.name}{suffix}_s{self.s:g}"


@dataclass(frozen=True)
class EvalParams:
    """
    Truncation and regularisation of a multiplier series.

    n_max bounds the summation index (m for m^k phases). When it is left
    out it is derived from the regulariser tail e^{-pi n^2 eps} < tail_tol,
    which needs eps > 0 (or a finite custom stream).
    """
    n_max: Optional[int] = None
    epsilon: float = 0.0
    tail_tol: float = TAIL_TOL

    def __post_init__(self):
        require(self.n_max is None or self.n_max >= 1, f"n_max must be >= 1, got {self.n_max}")
        require(self.epsilon >= 0, f"epsilon must be >= 0, got {self.epsilon}")
        require(0 < self.tail_tol < 1, f"tail_tol must lie in (0, 1), got {self.tail_tol}")

    @classmethod
    def for_grid(cls, G: int, n_max: Optional[int] = None) -> "EvalParams":
        """eps tied to the sampling scale: eps = G^{-2}."""
        require(G >= 2, f"grid size must be >= 2, got {G}")
        return cls(n_max=n_max, epsilon=1.0 / (G * G))

    def tail_cutoff(self) -> Optional[int]:
        if self.epsilon <= 0:
            return None
        return int(math.ceil(math.sqrt(math.log(1.0 / self.tail_tol) / (math.pi * self.epsilon))))

    def resolved_n_max(self, stream: Optional[CoefficientStream] = None) -> int:
        if self.n_max is not None:
            return int(self.n_max)
        cutoff = self.tail_cutoff()
        if cutoff is not None:
            return cutoff
        if stream is not None and stream.length is not None:
            return max(stream.length, 1)
        raise ValidationError("n_max is required when epsilon = 0 and the stream is infinite")


@dataclass(frozen=True)
class _Kernel:
    positions: np.ndarray   # int64, P_n
    coeffs: np.ndarray      # complex, c_n (regulariser already applied)
    sigma: float

    @property
    def weights(self) -> np.ndarray:
        return self.coeffs * self.positions.astype(np.float64) ** (-self.sigma)


def _build_kernel(stream: CoefficientStream, s: float, phase_power: int, params: EvalParams,
                  indexed_by_root: bool) -> _Kernel:
    n_max = params.resolved_n_max(stream)
    n = np.arange(1, n_max + 1, dtype=np.int64)
    if stream.kind is StreamKind.POWER:
        coeffs = np.ones(n_max, dtype=np.complex128)
        k = stream.k
    elif indexed_by_root:
        coeffs = stream.terms(n_max)[1:]
        k = phase_power
    else:
        coeffs = stream.terms(n_max)[1:]
        k = 1
    require(float(n_max) ** k < MAX_POSITION, f"phase positions n^{k} overflow at n_max={n_max}")
    positions = n ** k
    if params.epsilon > 0:
        coeffs = coeffs * np.exp(-math.pi * params.epsilon * n.astype(np.float64) ** 2)
    keep = coeffs != 0
    return _Kernel(positions[keep], coeffs[keep], s / k)


def multiplier_kernel(spec: MultiplierSpec, params: EvalParams) -> Tuple[np.ndarray, np.ndarray]:
    """(positions P, weights w) with m(x) = sum w e^{-2 pi i P x}."""
    kern = _build_kernel(spec.stream, spec.s, spec.phase_power, params,
                         spec.phase_kind is PhaseKind.POWER)
    return kern.positions, kern.weights


def stream_kernel(stream: CoefficientStream, s: float, params: EvalParams,
                  phase_power: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Same as `multiplier_kernel` for a bare stream and any s >= 0."""
    require(s >= 0, f"s must be >= 0, got {s}")
    kern = _build_kernel(stream, s, phase_power, params, phase_power > 1)
    return kern.positions, kern.weights


# =============================================================================
# SERIES EVALUATION
# =============================================================================
def _eval_kernel(positions: np.ndarray, weights: np.ndarray, x: float) -> complex:
    if positions.size == 0:
        return 0j
    return fsum_complex(weights * unit_phase(-frac_product(positions, x)))


def eval_series(stream: CoefficientStream, s: float, x: float, params: EvalParams,
                phase_power: int = 1) -> complex:
    """
    sum_n a_n e^{-2 pi i n^k x} e^{-pi n^2 eps} / n^s for any s > 0.

    Used for sanity values outside the multiplier range (L-values at s = 1,
    Dedekind zeta at s = 1.5).
    """
    require(s > 0, f"s must be > 0, got {s}")
    positions, weights = stream_kernel(stream, s, params, phase_power)
    return _eval_kernel(positions, weights, float(x))


def eval_multiplier(spec: MultiplierSpec, x: float, params: EvalParams) -> complex:
    """
    Truncated, regularised m(x), summed with compensation.

    Phases are reduced exactly (frac_product) so large n^k x stays accurate.
    """
    require(0 <= x <= 1, f"x must lie in [0, 1], got {x}")
    positions, weights = multiplier_kernel(spec, params)
    return _eval_kernel(positions, weights, float(x))


def _fold_chunk(args) -> np.ndarray:
    positions, weights, G, num, den = args
    mod = G * den
    r = positions % mod
    shift = weights * residue_phase(-(r * num) % mod, mod)
    bins = r % G
    return (np.bincount(bins, weights=shift.real, minlength=G)
            + 1j * np.bincount(bins, weights=shift.imag, minlength=G))


def eval_on_grid(spec: MultiplierSpec, G: int, params: EvalParams, offset: float = 0.5,
                 threads: Optional[int] = None) -> np.ndarray:
    """
    m(x_j) at x_j = (j + offset)/G for j = 0..G-1, by folding the kernel mod G
    and one FFT:

        m(x_j) = sum_r e^{-2 pi i r j/G} sum_{P = r mod G} w_P e^{-2 pi i P offset/G}.

    Chunks are folded on a thread pool and merged in chunk order.
    """
    positions, weights = multiplier_kernel(spec, params)
    return fold_on_grid(positions, weights, G, offset, threads)


def fold_on_grid(positions: np.ndarray, weights: np.ndarray, G: int, offset: float = 0.5,
                 threads: Optional[int] = None) -> np.ndarray:
    """sum_P w_P e^{-2 pi i P (j + offset)/G} for j = 0..G-1 (see `eval_on_grid`)."""
    require(G >= 2, f"grid size must be >= 2, got {G}")
    frac = Fraction(offset).limit_denominator(1 << 20)
    require(0 <= frac < 1, f"offset must lie in [0, 1), got {offset}")
    tasks = [
        (positions[i:i + GRID_CHUNK], weights[i:i + GRID_CHUNK], G, frac.numerator, frac.denominator)
        for i in range(0, positions.size, GRID_CHUNK)
    ]
    folded = np.zeros(G, dtype=np.complex128)
    for part in parallel_map(_fold_chunk, tasks, threads):
        folded += part
    logger.debug("Folded %d kernel terms onto %d residues", positions.size, G)
    return np.fft.fft(folded)


def epsilon_halving_scan(spec: MultiplierSpec, xs: Iterable[float], epsilon0: float = 1e-6,
                         steps: int = 4, n_max_factor: float = 10.0) -> pd.DataFrame:
    """
    Values of m(x) as eps is halved, with n_max >= n_max_factor * eps^{-1/2}.

    Columns: x, epsilon, n_max, value, change (|difference| to the previous eps).
    """
    rows: List[Dict[str, object]] = []
    for x in xs:
        previous = None
        eps = float(epsilon0)
        for _ in range(steps):
            n_max = int(math.ceil(n_max_factor / math.sqrt(eps)))
            value = eval_multiplier(spec, x, EvalParams(n_max=n_max, epsilon=eps))
            change = float("nan") if previous is None else abs(value - previous)
            rows.append({"x": float(x), "epsilon": eps, "n_max": n_max, "value": value, "change": change})
            previous = value
            eps /= 2
    return pd.DataFrame(rows, columns=["x", "epsilon", "n_max", "value", "change"])


# =============================================================================
# THETA SUMS AND THE CHARACTER-THETA MAIN TERM
# =============================================================================
def gaussian_cutoff(rate: float, tail_tol: float = TAIL_TOL) -> int:
    """Smallest n with e^{-rate n^2} < tail_tol."""
    require(rate > 0, f"Gaussian rate must be > 0, got {rate}")
    return int(math.ceil(math.sqrt(math.log(1.0 / tail_tol) / rate))) + 1


def theta_S_y(chi: DirichletCharacter, x: float, y: float, cutoff: Optional[int] = None) -> complex:
    """S_y(x) = sum_{n in Z} chi(n) e^{-pi n^2 (y + 2 i x)}, truncated at |n| <= cutoff."""
    require(y > 0, f"y must be > 0, got {y}")
    c = gaussian_cutoff(math.pi * y) if cutoff is None else int(cutoff)
    n = np.arange(-c, c + 1, dtype=np.int64)
    terms = chi.at(n) * np.exp(-math.pi * y * (n * n).astype(np.float64))
    return fsum_complex(terms * unit_phase(-frac_product(n * n, x)))


@dataclass(frozen=True)
class RegimeGate:
    """q <= c1 y^{-1/2} and q |delta| <= c2 y^{1/2}."""
    c1: float = 1.0
    c2: float = 1.0

    def contains(self, q: int, delta: float, y: float) -> bool:
        return q <= self.c1 / math.sqrt(y) and q * abs(delta) <= self.c2 * math.sqrt(y)

    def max_denominator(self, y: float) -> int:
        return max(1, int(math.floor(self.c1 / math.sqrt(y))))


@dataclass(frozen=True)
class MainTerm:
    value: complex
    in_regime: bool


def _check_fraction(p: int, q: int) -> None:
    require(q >= 1, f"q must be >= 1, got {q}")
    require(math.gcd(p, q) == 1, f"gcd({p}, {q}) != 1")


def theta_dual_direct(p: int, q: int, delta: float, y: float, N: int = 1, k: int = 1) -> complex:
    """
    sum_n e^{2 pi i n^2 p/q} e^{-pi n^2 (y + 2 i delta)} e^{2 pi i n k/N},
    the n-side theta sum whose Poisson dual is `T_y_direct`.
    """
    _check_fraction(p, q)
    require(y > 0, f"y must be > 0, got {y}")
    require(N >= 1, f"N must be >= 1, got {N}")
    c = gaussian_cutoff(math.pi * y)
    n = np.arange(-c, c + 1, dtype=np.int64)
    sq = n * n
    exact = residue_phase(((p % q) * (sq % q)) % q, q) * residue_phase((k * n) % N, N)
    terms = exact * np.exp(-math.pi * y * sq.astype(np.float64)) * unit_phase(-frac_product(sq, delta))
    return fsum_complex(terms)


def T_y_direct(p: int, q: int, delta: float, y: float, N: int = 1, m_cutoff: Optional[int] = None,
               k: int = 1) -> complex:
    """
    (1/(q w^{1/2})) sum_m S(p/q, m/q) e^{-(pi/w)(m/q - k/N)^2},  w = y + 2 i delta.

    Without `m_cutoff` the m-window is taken around q k/N wide enough that
    the dropped Gaussian factors are below TAIL_TOL; with it, |m| <= m_cutoff.
    """
    _check_fraction(p, q)
    require(y > 0, f"y must be > 0, got {y}")
    require(N >= 1, f"N must be >= 1, got {N}")
    w = complex(y, 2.0 * delta)
    inv_w = 1.0 / w
    if m_cutoff is None:
        half = gaussian_cutoff(math.pi * inv_w.real / (q * q))
        centre = (q * k) // N
        m = np.arange(centre - half, centre + half + 2, dtype=np.int64)
    else:
        m = np.arange(-int(m_cutoff), int(m_cutoff) + 1, dtype=np.int64)
    table = gauss_sum_table(p, q)
    # (m/q - k/N) = (m N - k q) / (q N), kept integral until the last step
    d = (m * N - k * q).astype(np.float64) / (q * N)
    terms = table[m % q] * np.exp(-math.pi * inv_w * d * d)
    return fsum_complex(terms) / (q * np.sqrt(w))


def lemma1_main_term(p: int, q: int, delta: float, y: float, N: int = 1, k: int = 1,
                     gate: RegimeGate = RegimeGate()) -> MainTerm:
    """
    S(p/q, k/N) / (q (y + 2 i delta)^{1/2}) when N | q, else 0.

    Outside the gate the value is still returned, flagged `in_regime=False`.
    """
    _check_fraction(p, q)
    require(y > 0, f"y must be > 0, got {y}")
    require(N >= 1, f"N must be >= 1, got {N}")
    in_regime = gate.contains(q, delta, y)
    if not in_regime:
        logger.warning("Character-theta main term outside its regime: p/q=%d/%d delta=%g y=%g", p, q, delta, y)
    if q % N:
        return MainTerm(0j, in_regime)
    w = complex(y, 2.0 * delta)
    value = quadratic_gauss_sum(p, q, (q // N) * k) / (q * np.sqrt(w))
    return MainTerm(complex(value), in_regime)


def lemma1_residual_bound(q: int, delta: float, y: float) -> float:
    """
    Majorant of |T_y - main| y^{1/4} when N | q: with u = y/(q^2 |w|^2),
    sqrt(2) u^{1/4} sum_{d != 0} e^{-pi u d^2}.
    """
    w2 = y * y + 4.0 * delta * delta
    u = y / (q * q * w2)
    d = np.arange(1, gaussian_cutoff(math.pi * u) + 1, dtype=np.float64)
    return math.sqrt(2.0) * u ** 0.25 * 2.0 * math.fsum(np.exp(-math.pi * u * d * d))


# =============================================================================
# EULER'S FUNCTION AND ITS CUSP MAIN TERM
# =============================================================================
def euler_f1_direct(x: float, y: float, cutoff: Optional[int] = None) -> complex:
    """f1(-x + i y) = sum_{n in Z} e^{-2 pi i (6n^2+n) x} e^{-2 pi (6n^2+n) y}."""
    require(y > 0, f"y must be > 0, got {y}")
    # 6n^2 + n >= 5 n^2 for all n
    c = gaussian_cutoff(10.0 * math.pi * y) if cutoff is None else int(cutoff)
    n = np.arange(-c, c + 1, dtype=np.int64)
    e = 6 * n * n + n
    terms = np.exp(-2.0 * math.pi * y * e.astype(np.float64)) * unit_phase(-frac_product(e, x))
    return fsum_complex(terms)


def lemma2_main_term(p: int, q: int, delta: float, y: float,
                     gate: RegimeGate = RegimeGate()) -> MainTerm:
    """e^{pi w/12} S(p/q) / (sqrt(12) q w^{1/2}),  w = y + i delta."""
    _check_fraction(p, q)
    require(y > 0, f"y must be > 0, got {y}")
    in_regime = gate.contains(q, delta, y)
    if not in_regime:
        logger.warning("Euler-function main term outside its regime: p/q=%d/%d delta=%g y=%g", p, q, delta, y)
    w = complex(y, delta)
    value = np.exp(math.pi * w / 12.0) * euler_weyl_sum(p, q) / (math.sqrt(12.0) * q * np.sqrt(w))
    return MainTerm(complex(value), in_regime)


# =============================================================================
# ERROR-LAW SCANS
# =============================================================================
@dataclass(frozen=True)
class ErrorLawSummary:
    per_level: pd.DataFrame     # j, y, max_scaled
    slope: float                # fitted d log(max_scaled) / d log(1/y)
    max_scaled: float
    bounded: bool


def _sample_fraction(rng: np.random.Generator, y: float, gate: RegimeGate) -> Tuple[int, int, float]:
    q = int(rng.integers(1, gate.max_denominator(y) + 1))
    while True:
        p = int(rng.integers(1, q + 1))
        if math.gcd(p, q) == 1:
            break
    reach = gate.c2 * math.sqrt(y) / q
    return p, q, float(rng.uniform(-reach, reach))


def _lemma1_level(args) -> List[Dict[str, object]]:
    j, moduli, samples, seed, gate = args
    rng = counter_rng(seed, j)
    y = 2.0 ** -j
    rows = []
    for _ in range(samples):
        N = int(moduli[int(rng.integers(0, len(moduli)))])
        p, q, delta = _sample_fraction(rng, y, gate)
        direct = T_y_direct(p, q, delta, y, N)
        main = lemma1_main_term(p, q, delta, y, N, gate=gate)
        residual = abs(direct - main.value)
        rows.append({
            "j": j, "y": y, "N": N, "p": p, "q": q, "delta": delta,
            "direct": direct, "main": main.value, "residual": residual,
            "scaled": residual * y ** 0.25, "in_regime": main.in_regime,
        })
    return rows


def lemma1_error_scan(levels: Iterable[int] = range(6, 21), moduli: Sequence[int] = (1, 3, 4),
                      samples_per_level: int = 16, seed: int = 0, gate: RegimeGate = RegimeGate(),
                      threads: Optional[int] = None) -> pd.DataFrame:
    """
    Sampled |T_y_direct - lemma1_main_term| y^{1/4} with y = 2^{-j}, p/q and
    delta drawn inside the gate. Each level draws from its own counter
    stream, so the table does not depend on the worker count.
    """
    tasks = [(int(j), tuple(moduli), samples_per_level, seed, gate) for j in levels]
    rows = [row for chunk in parallel_map(_lemma1_level, tasks, threads) for row in chunk]
    logger.info("Character-theta error scan: %d samples over %d levels", len(rows), len(tasks))
    return pd.DataFrame(rows)


def _lemma2_level(args) -> List[Dict[str, object]]:
    j, samples, seed, gate = args
    rng = counter_rng(seed, (1 << 32) + j)
    y = 2.0 ** -j
    rows = []
    for _ in range(samples):
        p, q, delta = _sample_fraction(rng, y, gate)
        direct = euler_f1_direct(p / q + delta, y)
        main = lemma2_main_term(p, q, delta, y, gate=gate)
        residual = abs(direct - main.value)
        rows.append({
            "j": j, "y": y, "p": p, "q": q, "delta": delta,
            "direct": direct, "main": main.value, "residual": residual,
            "scaled": residual * y ** 0.25, "in_regime": main.in_regime,
        })
    return rows


def lemma2_error_scan(levels: Iterable[int] = range(6, 21), samples_per_level: int = 16, seed: int = 0,
                      gate: RegimeGate = RegimeGate(), threads: Optional[int] = None) -> pd.DataFrame:
    """Same protocol as `lemma1_error_scan` for f1 against its main term."""
    tasks = [(int(j), samples_per_level, seed, gate) for j in levels]
    rows = [row for chunk in parallel_map(_lemma2_level, tasks, threads) for row in chunk]
    logger.info("Euler-function error scan: %d samples over %d levels", len(rows), len(tasks))
    return pd.DataFrame(rows)


def error_law_summary(scan: pd.DataFrame, slope_tol: float = SLOPE_TOL) -> ErrorLawSummary:
    """
    Per-level maxima of the scaled residual and their log-log slope against
    1/y; the law holds when the slope is at most `slope_tol`.
    """
    require(not scan.empty, "error-law summary needs a non-empty scan")
    per_level = (scan.groupby("j", sort=True)
                 .agg(y=("y", "first"), max_scaled=("scaled", "max"))
                 .reset_index())
    positive = per_level[per_level["max_scaled"] > 0]
    if len(positive) >= 2:
        slope = float(np.polyfit(np.log(1.0 / positive["y"]), np.log(positive["max_scaled"]), 1)[0])
    else:
        slope = 0.0
    max_scaled = float(per_level["max_scaled"].max())
    bounded = bool(np.isfinite(max_scaled) and slope <= slope_tol)
    logger.info("Error law: max scaled residual %.4g, slope %.4f (bounded=%s)", max_scaled, slope, bounded)
    return ErrorLawSummary(per_level, slope, max_scaled, bounded)


# =============================================================================
# HEAT-KERNEL REPRESENTATION
# =============================================================================
@dataclass(frozen=True)
class QuadratureParams:
    epsabs: float = 1e-12
    epsrel: float = 1e-10
    limit: int = 200
    tolerance: float = 1e-8      # accepted total error estimate
    tail_exponent: float = 40.0  # integrate while e^{-2 pi P_min y} > e^{-tail_exponent}


def heat_kernel_eval(spec: MultiplierSpec, x: float, params: EvalParams,
                     quadrature: QuadratureParams = QuadratureParams()) -> complex:
    """
    (2 pi)^sigma / Gamma(sigma) * int_0^inf f(-x + i y) y^{sigma - 1} dy,
    f(z) = sum c_P e^{2 pi i P z} over the same truncated kernel as
    `eval_multiplier` (sigma = s for plain phases, s/k for m^k phases).

    [0, y0] uses the algebraic weight y^{sigma-1}; the rest is split into
    dyadic pieces so each one sees a smooth integrand.

    Raises
    ------
    QuadratureError
        If the summed error estimate exceeds `quadrature.tolerance`.
    """
    require(0 <= x <= 1, f"x must lie in [0, 1], got {x}")
    kern = _build_kernel(spec.stream, spec.s, spec.phase_power, params,
                         spec.phase_kind is PhaseKind.POWER)
    if kern.positions.size == 0:
        return 0j
    sigma = kern.sigma
    P = kern.positions.astype(np.float64)
    phased = kern.coeffs * unit_phase(-frac_product(kern.positions, x))

    def f(y: float) -> complex:
        return complex(np.dot(phased, np.exp(-2.0 * math.pi * P * y)))

    y0 = 1.0 / (2.0 * math.pi * P.max())
    y_end = max(quadrature.tail_exponent / (2.0 * math.pi * P.min()), 2.0 * y0)
    opts = dict(epsabs=quadrature.epsabs, epsrel=quadrature.epsrel, limit=quadrature.limit)

    total = 0j
    error = 0.0
    for part, pick in ((1.0, lambda v: v.real), (1j, lambda v: v.imag)):
        val, err = integrate.quad(lambda y: pick(f(y)), 0.0, y0, weight="alg", wvar=(sigma - 1.0, 0.0), **opts)
        total += part * val
        error += err
        lo = y0
        while lo < y_end:
            hi = min(2.0 * lo, y_end)
            val, err = integrate.quad(lambda y: pick(f(y)) * y ** (sigma - 1.0), lo, hi, **opts)
            total += part * val
            error += err
            lo = hi
    scale = (2.0 * math.pi) ** sigma / special.gamma(sigma)
    if scale * error > quadrature.tolerance:
        raise QuadratureError("heat-kernel integral did not converge", scale * error, quadrature.tolerance)
    logger.debug("Heat-kernel value at x=%g with error estimate %.3e", x, scale * error)
    return complex(scale * total)


# =============================================================================
# IMAGINARY QUADRATIC FIELDS
# =============================================================================
@dataclass(frozen=True)
class QuadFieldValue:
    """m_{s,K}(x) computed along two independent paths, plus the class split."""
    value: complex                       # sum_n a_n e^{-2 pi i n x} n^{-s}, a_n = ideal counts
    lattice: complex                     # sum over classes of (1/w) sum_{lattice} e^{-2 pi i x phi} phi^{-s}
    per_class: Dict[str, complex] = field(default_factory=dict)

    @property
    def discrepancy(self) -> float:
        return abs(self.value - self.lattice)


def _lattice_class_sum(form, s: float, x: float, n_max: int, w: int) -> complex:
    R = int(math.isqrt(int(n_max / form.min_eigenvalue))) + 1
    m2 = np.arange(-R, R + 1, dtype=np.int64)
    row_sums = []
    for m1 in range(-R, R + 1):
        phi = form(m1, m2)
        phi = phi[(phi >= 1) & (phi <= n_max)]
        if phi.size:
            terms = phi.astype(np.float64) ** (-s) * unit_phase(-frac_product(phi, x))
            row_sums.append(fsum_complex(terms))
    return fsum_complex(row_sums) / w


def quadfield_multiplier(D: int, s: float, x: float, n_max: int) -> QuadFieldValue:
    """
    m_{s,K}(x) = sum_A m_{s,A}(x) truncated at norm <= n_max.

    `value` sums the ideal-norm stream; `lattice` sums every reduced form's
    lattice points directly. Any s > 0 is accepted so that x = 0, s > 1
    reproduces the Dedekind zeta value.
    """
    require(s > 0, f"s must be > 0, got {s}")
    require(0 <= x <= 1, f"x must lie in [0, 1], got {x}")
    require(n_max >= 1, f"n_max must be >= 1, got {n_max}")
    w = unit_count(D)
    counts = class_norm_counts(D, n_max)       # rejects non-fundamental D
    n = np.arange(1, n_max + 1, dtype=np.int64)
    phase = unit_phase(-frac_product(n, x)) * n.astype(np.float64) ** (-s)

    per_class: Dict[str, complex] = {}
    lattice_parts = []
    for form in reduced_forms(D):
        per_class[str(form.triple)] = fsum_complex(counts[form][1:] * phase)
        lattice_parts.append(_lattice_class_sum(form, s, x, n_max, w))
    value = eval_series(CoefficientStream.ideal_norm(D), s, x, EvalParams(n_max=n_max))
    return QuadFieldValue(value=value, lattice=fsum_complex(lattice_parts), per_class=per_class)


# =============================================================================
# PREDICTED WEAK-TYPE EXPONENTS
# =============================================================================
@dataclass(frozen=True)
class WeakTypePrediction:
    r: float
    s_range: Optional[Tuple[float, float]]   # open interval where the claim is proven
    proven: Optional[bool]                   # None when the range is not explicit


def weak_type_exponent(spec: MultiplierSpec) -> WeakTypePrediction:
    """
    Exponent r with m in weak-L^r[0, 1]:
      m_{s,k}: k/(1-s)   (k = 1 all s; k = 2 for 1/2 < s < 1; k >= 3 only s near 1)
      m_{s,chi}: 2/(1-s) for 1/2 < s < 1
      pentagonal: 2/(1-2s) for 1/4 < s < 1/2
      m_{s,K}: 1/(1-s) for 1/2 < s < 1
    """
    s = spec.s
    kind = spec.stream.kind
    if kind is StreamKind.POWER or (kind is StreamKind.CUSTOM and spec.phase_kind is PhaseKind.POWER):
        k = spec.phase_power
        s_range = {1: (0.0, 1.0), 2: (0.5, 1.0)}.get(k)
        return _prediction(k / (1 - s), s_range, s)
    if kind is StreamKind.CHARACTER:
        k = spec.phase_power
        return _prediction(k / (1 - s), (0.5, 1.0) if k == 2 else None, s)
    if kind is StreamKind.PENTAGONAL:
        require(s < 0.5, f"pentagonal weak-type exponent needs s < 1/2, got {s}")
        return _prediction(2 / (1 - 2 * s), (0.25, 0.5), s)
    if kind is StreamKind.IDEAL_NORM:
        return _prediction(1 / (1 - s), (0.5, 1.0), s)
    raise ValidationError(f"no weak-type prediction for stream {spec.stream.name}")


def _prediction(r: float, s_range: Optional[Tuple[float, float]], s: float) -> WeakTypePrediction:
    proven = None if s_range is None else bool(s_range[0] < s < s_range[1])
    return WeakTypePrediction(float(r), s_range, proven)
