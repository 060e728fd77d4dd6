# operators.py
"""
Discrete fractional integral operators on finitely supported lattice
functions, the product-space Stein-Weiss operator, its continuous step-function
majorant and the empirical boundedness scans.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import special

from arith_core import CoefficientStream
from multipliers import EvalParams, MultiplierSpec, fold_on_grid, multiplier_kernel, stream_kernel
from utils.errors import require
from utils.utils import counter_rng, parallel_map

logger = logging.getLogger(__name__)

# ---------- constants ----------
GROWTH_THRESHOLD: float = 0.05     # ratio-scan flag: growth per doubling above 5%
DEFAULT_KERNEL_FLOOR: int = 256    # smallest truncation used by apply_fractional
MAJORANT_NODES: int = 12           # Gauss-Legendre nodes per singular piece
FAMILIES: Tuple[str, ...] = ("delta", "box", "power_decay", "random_signs")
NORMS: Tuple[str, ...] = ("euclidean", "sup")
SW_PAD: int = 4                    # sw_operator output box: [-SW_PAD * reach, SW_PAD * reach]^N

Box = Tuple[Tuple[int, int], ...]   # inclusive (lo, hi) per coordinate


# =============================================================================
# LATTICE FUNCTIONS
# =============================================================================
@dataclass(frozen=True, eq=False)
class LatticeFunction:
    """
    Finitely supported f on Z^{N_1} x ... x Z^{N_k}.

    `values` has one axis per coordinate (sum N_i axes); values[0, ..., 0]
    sits at the lattice point `origin`. Everything outside the array is 0.
    """
    values: np.ndarray
    origin: Tuple[int, ...]
    dims: Tuple[int, ...] = (1,)

    def __post_init__(self):
        require(len(self.dims) >= 1 and all(d >= 1 for d in self.dims), f"invalid factor dims {self.dims}")
        require(self.values.ndim == sum(self.dims),
                f"values have {self.values.ndim} axes but dims {self.dims} need {sum(self.dims)}")
        require(len(self.origin) == self.values.ndim, "origin must give one coordinate per axis")

    # ---------- constructors ----------
    @classmethod
    def from_values(cls, values: Sequence, origin=0, dims: Tuple[int, ...] = None) -> "LatticeFunction":
        arr = np.array(values, dtype=np.complex128)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        dims = tuple(dims) if dims is not None else (1,) * arr.ndim
        origin = (int(origin),) * arr.ndim if np.isscalar(origin) else tuple(int(o) for o in origin)
        return cls(arr, origin, dims)

    @classmethod
    def delta(cls, point, dims: Tuple[int, ...] = None) -> "LatticeFunction":
        point = (int(point),) if np.isscalar(point) else tuple(int(c) for c in point)
        dims = tuple(dims) if dims is not None else (1,) * len(point)
        return cls(np.ones((1,) * len(point), dtype=np.complex128), point, dims)

    @classmethod
    def zeros(cls, box: Box, dims: Tuple[int, ...] = None) -> "LatticeFunction":
        shape = tuple(hi - lo + 1 for lo, hi in box)
        dims = tuple(dims) if dims is not None else (1,) * len(box)
        return cls(np.zeros(shape, dtype=np.complex128), tuple(lo for lo, _ in box), dims)

    # ---------- geometry ----------
    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def box(self) -> Box:
        return tuple((o, o + n - 1) for o, n in zip(self.origin, self.values.shape))

    def coords(self, axis: int) -> np.ndarray:
        return np.arange(self.values.shape[axis], dtype=np.int64) + self.origin[axis]

    def at(self, point) -> complex:
        point = (int(point),) if np.isscalar(point) else tuple(int(c) for c in point)
        idx = tuple(c - o for c, o in zip(point, self.origin))
        if any(i < 0 or i >= n for i, n in zip(idx, self.values.shape)):
            return 0j
        return complex(self.values[idx])

    def on_box(self, box: Box) -> "LatticeFunction":
        """The same function stored on another box (zero padded or cut)."""
        out = LatticeFunction.zeros(box, self.dims)
        src, dst = [], []
        for (lo, hi), o, n in zip(box, self.origin, self.values.shape):
            a, b = max(lo, o), min(hi, o + n - 1)
            if a > b:
                return out
            src.append(slice(a - o, b - o + 1))
            dst.append(slice(a - lo, b - lo + 1))
        out.values[tuple(dst)] = self.values[tuple(src)]
        return out

    def combine(self, other: "LatticeFunction", a: complex = 1.0, b: complex = 1.0) -> "LatticeFunction":
        """a * self + b * other on the union box."""
        require(self.dims == other.dims, "cannot combine functions on different lattices")
        box = tuple((min(p[0], q[0]), max(p[1], q[1])) for p, q in zip(self.box, other.box))
        return LatticeFunction(a * self.on_box(box).values + b * other.on_box(box).values,
                               tuple(lo for lo, _ in box), self.dims)


def reflect(f: LatticeFunction) -> LatticeFunction:
    """f(-n)."""
    values = f.values[tuple(slice(None, None, -1) for _ in range(f.ndim))]
    origin = tuple(-(o + n - 1) for o, n in zip(f.origin, f.values.shape))
    return LatticeFunction(values.copy(), origin, f.dims)


def lp_norm(f: LatticeFunction, p: float) -> float:
    """(sum |f|^p)^{1/p} over the support; p = inf gives the sup."""
    require(p >= 1, f"p must be >= 1, got {p}")
    mag = np.abs(f.values).ravel()
    if mag.size == 0:
        return 0.0
    if math.isinf(p):
        return float(mag.max())
    top = mag.max()
    if top == 0:
        return 0.0
    # scale first so |f|^p cannot overflow
    return float(top * np.sum((mag / top) ** p) ** (1.0 / p))


# =============================================================================
# ONE-DIMENSIONAL CONVOLUTION OPERATORS
# =============================================================================
def _apply_kernel_1d(f: LatticeFunction, positions: np.ndarray, weights: np.ndarray) -> LatticeFunction:
    require(f.ndim == 1, "one-dimensional operators need a function on Z")
    if positions.size == 0:
        return LatticeFunction.zeros(((f.origin[0] + 1, f.origin[0] + 1),))
    dense = np.zeros(int(positions.max()), dtype=np.complex128)
    dense[positions - 1] = weights
    return LatticeFunction(np.convolve(f.values, dense), (f.origin[0] + 1,), (1,))


def default_kernel_length(f: LatticeFunction) -> int:
    return max(4 * f.values.shape[0], DEFAULT_KERNEL_FLOOR)


def apply_fractional(f: LatticeFunction, stream: CoefficientStream, s: float,
                     n_max: Optional[int] = None) -> LatticeFunction:
    """
    I g(m) = sum_{n=1}^{n_max} a_n g(m - n) / n^s, an exact finite convolution.

    The output lives on [lo + 1, hi + n_max]. Power streams carry their own
    normalisation (m^{-s} at n = m^k).
    """
    require(s > 0, f"s must be > 0, got {s}")
    n_max = default_kernel_length(f) if n_max is None else int(n_max)
    positions, weights = stream_kernel(stream, s, EvalParams(n_max=n_max))
    return _apply_kernel_1d(f, positions, weights)


def apply_multiplier_operator(f: LatticeFunction, spec: MultiplierSpec,
                              n_max: Optional[int] = None) -> LatticeFunction:
    """
    Convolution whose Fourier multiplier is `spec` (kernel w_P at shift P),
    truncated at shift <= n_max; covers phases n^k such as m_{s,chi}.
    """
    n_max = default_kernel_length(f) if n_max is None else int(n_max)
    k = spec.phase_power
    index = int(math.floor(n_max ** (1.0 / k) + 1e-9))
    while (index + 1) ** k <= n_max:
        index += 1
    while index > 1 and index ** k > n_max:
        index -= 1
    positions, weights = multiplier_kernel(spec, EvalParams(n_max=max(index, 1)))
    return _apply_kernel_1d(f, positions, weights)


def circulant_l2_norm(stream: CoefficientStream, s: float, G: int, params: EvalParams,
                      phase_power: int = 1, threads: Optional[int] = None) -> float:
    """
    l2 -> l2 norm of convolution by the truncated kernel folded onto Z/GZ:
    the circulant is diagonalised by the DFT, so the norm is
    max_j |sum_n w_n e^{-2 pi i P_n j/G}|.
    """
    require(G >= 2, f"grid size must be >= 2, got {G}")
    positions, weights = stream_kernel(stream, s, params, phase_power)
    if positions.size == 0:
        return 0.0
    return float(np.abs(fold_on_grid(positions, weights, G, offset=0.0, threads=threads)).max())


# =============================================================================
# STEIN-WEISS ON PRODUCT SPACES
# =============================================================================
@dataclass(frozen=True)
class SWParams:
    """
    T f(n) = sum_{m_i != n_i} f(m) |n|^{-gamma} |m|^{-delta} prod |n_i - m_i|^{alpha_i - N_i}.
    """
    alphas: Tuple[float, ...]
    gamma: float
    delta: float
    p: float
    q: float

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        require(len(self.alphas) >= 1, "at least one alpha is required")
        require(all(a > 0 for a in self.alphas), f"every alpha_i must be > 0, got {self.alphas}")
        require(1 < self.p <= self.q < math.inf, f"need 1 < p <= q < inf, got p={self.p}, q={self.q}")

    @property
    def alpha(self) -> float:
        return math.fsum(self.alphas)

    def check_dims(self, dims: Sequence[int]) -> None:
        require(len(dims) == len(self.alphas), f"{len(self.alphas)} alphas for {len(dims)} factors")
        for a, N in zip(self.alphas, dims):
            require(0 < a < N, f"alpha_i={a} must lie in (0, N_i={N})")


def _point_norm(points: np.ndarray, norm: str) -> np.ndarray:
    """|n| for an (..., d) array of lattice points."""
    require(norm in NORMS, f"norm must be one of {NORMS}, got {norm!r}")
    if norm == "sup":
        return np.abs(points).max(axis=-1).astype(np.float64)
    return np.sqrt((points.astype(np.float64) ** 2).sum(axis=-1))


def _grid_points(box: Box) -> np.ndarray:
    axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1)


def _factor_kernel(out_box: Box, in_box: Box, exponent: float) -> np.ndarray:
    """|n_i - m_i|^{exponent} between all points of two factor boxes, 0 when equal."""
    out_pts = _grid_points(out_box).reshape(-1, len(out_box))
    in_pts = _grid_points(in_box).reshape(-1, len(in_box))
    diff = out_pts[:, None, :] - in_pts[None, :, :]
    dist = np.sqrt((diff.astype(np.float64) ** 2).sum(axis=-1))
    with np.errstate(divide="ignore"):
        K = np.where(dist > 0, dist ** exponent, 0.0)
    return K


def _factor_slices(dims: Sequence[int]) -> List[slice]:
    bounds = np.cumsum((0,) + tuple(dims))
    return [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def apply_stein_weiss(f: LatticeFunction, params: SWParams, eval_box: Optional[Box] = None,
                      norm: str = "euclidean") -> LatticeFunction:
    """
    T_{alpha,gamma,delta} f on `eval_box` (default: the support box of f).

    Terms with m_i = n_i in any factor and the term m = 0 are skipped. The
    operator is undefined at n = 0; if the box contains it that entry is
    left 0 (use `stein_weiss_at` to evaluate single points).
    """
    params.check_dims(f.dims)
    eval_box = f.box if eval_box is None else tuple((int(lo), int(hi)) for lo, hi in eval_box)
    require(len(eval_box) == f.ndim, "evaluation box must have one range per coordinate")

    in_pts = _grid_points(f.box)
    weighted = f.values * _safe_power(_point_norm(in_pts, norm), -params.delta)

    factors = _factor_slices(f.dims)
    in_shape = [int(np.prod(f.values.shape[sl])) for sl in factors]
    out_shape = [int(np.prod([eval_box[i][1] - eval_box[i][0] + 1 for i in range(sl.start, sl.stop)]))
                 for sl in factors]
    work = weighted.reshape(in_shape)
    for i, (sl, a, N) in enumerate(zip(factors, params.alphas, f.dims)):
        K = _factor_kernel(eval_box[sl], f.box[sl], a - N)
        work = np.moveaxis(np.tensordot(K, work, axes=([1], [i])), 0, i)
    out_values = work.reshape(tuple(hi - lo + 1 for lo, hi in eval_box))

    out_pts = _grid_points(eval_box)
    out_values = out_values * _safe_power(_point_norm(out_pts, norm), -params.gamma)
    return LatticeFunction(out_values, tuple(lo for lo, _ in eval_box), f.dims)


def _safe_power(radius: np.ndarray, exponent: float) -> np.ndarray:
    """radius^exponent with the value at radius 0 replaced by 0 (skipped term)."""
    out = np.zeros_like(radius, dtype=np.float64)
    nz = radius > 0
    out[nz] = radius[nz] ** exponent
    return out


def stein_weiss_at(f: LatticeFunction, params: SWParams, n, norm: str = "euclidean") -> complex:
    """T f(n) at one point; n = 0 is rejected."""
    n = (int(n),) if np.isscalar(n) else tuple(int(c) for c in n)
    require(any(c != 0 for c in n), "the Stein-Weiss operator is undefined at n = 0")
    out = apply_stein_weiss(f, params, eval_box=tuple((c, c) for c in n), norm=norm)
    return complex(out.values.ravel()[0])


def sw_operator(params: SWParams, pad: int = SW_PAD, norm: str = "euclidean") -> Callable[[LatticeFunction], LatticeFunction]:
    """
    Operator handle evaluating on the support box enlarged `pad` times around
    the origin. Outside it T f decays like |n|^{alpha_i - N_i - gamma} per
    factor, so the dropped share of ||T f||_q is the same at every box size.
    """
    require(pad >= 1, f"pad must be >= 1, got {pad}")

    def op(f: LatticeFunction) -> LatticeFunction:
        reach = max(max(abs(lo), abs(hi)) for lo, hi in f.box)
        box = tuple((-pad * reach, pad * reach) for _ in range(f.ndim))
        return apply_stein_weiss(f, params, eval_box=box, norm=norm)
    return op


# =============================================================================
# CONTINUOUS MAJORANT (TRANSFERENCE)
# =============================================================================
def _cell_rule(x: float, lo: float, hi: float, a: float, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes y_j, weights W_j with sum W_j g(y_j) ~ int_lo^hi g(y) |x - y|^{a-1} dy.

    The substitution u = |y - x|^a removes the singularity; the rule is exact
    for g = 1, i.e. it reproduces the closed form of the one-factor integral.
    """
    t, wt = special.roots_legendre(nodes)
    ys, ws = [], []
    # (direction from x, nearest distance, farthest distance)
    if lo < x < hi:
        pieces = [(-1.0, 0.0, x - lo), (1.0, 0.0, hi - x)]
    elif x <= lo:
        pieces = [(1.0, lo - x, hi - x)]
    else:
        pieces = [(-1.0, x - hi, x - lo)]
    for sign, d0, d1 in pieces:
        u0, u1 = d0 ** a, d1 ** a
        u = 0.5 * (u1 - u0) * (t + 1.0) + u0
        ys.append(x + sign * u ** (1.0 / a))
        ws.append(0.5 * (u1 - u0) * wt / a)
    return np.concatenate(ys), np.concatenate(ws)


def continuous_majorant(f: LatticeFunction, params: SWParams, x, norm: str = "euclidean",
                        nodes: int = MAJORANT_NODES) -> float:
    """
    T* F(x) = int F(y) |x|^{-gamma} |y|^{-delta} prod |x_i - y_i|^{alpha_i - 1} dy,
    F the step extension of f on the cubes (-1/2, 1/2]^k + m. One-dimensional
    factors only.

    Each cell integral is exact when delta = 0 (closed-form one-factor pieces)
    and a tensor rule in the variables u_i = |y_i - x_i|^{alpha_i} otherwise.
    The cell m = 0 is skipped like the term m = 0 of the discrete operator.
    """
    require(all(d == 1 for d in f.dims), "the continuous majorant supports one-dimensional factors only")
    params.check_dims(f.dims)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    require(x.size == f.ndim, f"x must have {f.ndim} coordinates")
    require(_point_norm(x, norm) > 0, "the continuous majorant is undefined at |x| = 0")
    support = np.argwhere(f.values != 0)
    lattice = support + np.asarray(f.origin)
    require(not any(np.array_equal(x, m.astype(np.float64)) for m in lattice),
            f"x={tuple(x)} sits on a support lattice point")

    total = 0.0
    for idx, m in zip(support, lattice):
        if not np.any(m):
            continue
        fm = float(np.real(f.values[tuple(idx)]))
        rules = [_cell_rule(float(x[i]), m[i] - 0.5, m[i] + 0.5, params.alphas[i], nodes) for i in range(f.ndim)]
        if params.delta == 0:
            cell = math.prod(float(w.sum()) for _, w in rules)
        else:
            ys = np.stack(np.meshgrid(*[r[0] for r in rules], indexing="ij"), axis=-1)
            ws = np.ones(ys.shape[:-1])
            for i, (_, w) in enumerate(rules):
                shape = [1] * f.ndim
                shape[i] = w.size
                ws = ws * w.reshape(shape)
            cell = float(np.sum(ws * _point_norm(ys, norm) ** (-params.delta)))
        total += fm * cell
    return float(_point_norm(x, norm) ** (-params.gamma) * total)


def majorization_constant(f: LatticeFunction, params: SWParams, samples_per_point: int = 1,
                          seed: int = 0, eval_box: Optional[Box] = None,
                          norm: str = "euclidean") -> Tuple[float, pd.DataFrame]:
    """
    Empirical C in T f(n) <= C T* F(x), x in Q + n: the max ratio over
    every n != 0 of `eval_box` and `samples_per_point` random offsets each.
    """
    discrete = apply_stein_weiss(f, params, eval_box=eval_box, norm=norm)
    rng = counter_rng(seed, 0)
    rows = []
    for idx in np.ndindex(discrete.values.shape):
        n = np.asarray(discrete.origin) + np.asarray(idx)
        if not np.any(n):
            continue
        value = float(np.real(discrete.values[idx]))
        for _ in range(samples_per_point):
            # Q = (-1/2, 1/2]^k
            u = 0.5 - rng.random(f.ndim)
            x = n + u
            major = continuous_majorant(f, params, x, norm=norm)
            ratio = value / major if major > 0 else (0.0 if value == 0 else math.inf)
            rows.append({"n": tuple(int(c) for c in n), "x": tuple(float(c) for c in x),
                         "discrete": value, "majorant": major, "ratio": ratio})
    table = pd.DataFrame(rows, columns=["n", "x", "discrete", "majorant", "ratio"])
    C = float(table["ratio"].max()) if not table.empty else 0.0
    logger.info("Majorization constant %.4g over %d samples", C, len(table))
    return C, table


# =============================================================================
# CONDITIONS AND RANGES
# =============================================================================
_STRICT_TOL = 0.0
_EQUALITY_TOL = 1e-12


def sw_conditions_check(params: SWParams, dims: Sequence[int]) -> Tuple[bool, pd.DataFrame]:
    """
    Evaluate the boundedness conditions of the product-space Stein-Weiss
    inequality with the relaxed discrete scaling 1/q <= 1/p + (gamma+delta-alpha)/N.

    Returns (all hold, report) where the report has one row per condition:
    condition, lhs, rhs, margin (rhs - lhs, or lhs - rhs for lower bounds),
    strict, applies, holds.
    """
    dims = tuple(int(d) for d in dims)
    require(len(dims) == len(params.alphas), f"{len(params.alphas)} alphas for {len(dims)} factors")
    N = sum(dims)
    p, q, g, d = params.p, params.q, params.gamma, params.delta
    rows: List[Dict[str, object]] = []

    def add(name: str, lhs: float, rhs: float, strict: bool, applies: bool = True):
        margin = rhs - lhs
        holds = (margin > _STRICT_TOL) if strict else (margin >= -_EQUALITY_TOL)
        rows.append({"condition": name, "lhs": lhs, "rhs": rhs, "margin": margin,
                     "strict": strict, "applies": applies, "holds": holds if applies else True})

    for a, Ni in sorted(zip(params.alphas, dims)):
        add(f"0 < alpha_i (alpha_i={a:g}, N_i={Ni})", 0.0, a, strict=True)
        add(f"alpha_i < N_i (alpha_i={a:g}, N_i={Ni})", a, float(Ni), strict=True)
    add("gamma < N/q", g, N / q, strict=True)
    add("delta < N(p-1)/p", d, N * (p - 1) / p, strict=True)
    add("gamma + delta >= 0", 0.0, g + d, strict=False)
    add("1/q <= 1/p + (gamma+delta-alpha)/N", 1 / q, 1 / p + (g + d - params.alpha) / N, strict=False)

    case_a = g >= 0 and d <= 0
    case_b = g <= 0 and d >= 0
    for a, Ni in sorted(zip(params.alphas, dims)):
        add(f"alpha_i - N_i/p < delta (alpha_i={a:g}, N_i={Ni})", a - Ni / p, d, strict=True, applies=case_a)
        add(f"alpha_i - N_i(q-1)/q < gamma (alpha_i={a:g}, N_i={Ni})", a - Ni * (q - 1) / q, g,
            strict=True, applies=case_b)
    case_c = g > 0 and d > 0
    excess_p = math.fsum(a - Ni / p for a, Ni in zip(params.alphas, dims) if a >= Ni / p)
    excess_q = math.fsum(a - Ni * (q - 1) / q for a, Ni in zip(params.alphas, dims) if a >= Ni * (q - 1) / q)
    add("sum (alpha_i - N_i/p)_+ < delta", excess_p, d, strict=True, applies=case_c)
    add("sum (alpha_i - N_i(q-1)/q)_+ < gamma", excess_q, g, strict=True, applies=case_c)

    report = pd.DataFrame(rows, columns=["condition", "lhs", "rhs", "margin", "strict", "applies", "holds"])
    ok = bool(report["holds"].all())
    logger.info("Stein-Weiss conditions for alphas=%s gamma=%g delta=%g p=%g q=%g: %s",
                params.alphas, g, d, p, q, ok)
    return ok, report


def sw_exponent_balance(alphas: Sequence[float], gamma: float, delta: float, p: float,
                        dims: Sequence[int]) -> float:
    """q from the scaling equality 1/q = 1/p + (gamma+delta-alpha)/N."""
    inv_q = 1 / p + (gamma + delta - math.fsum(alphas)) / sum(dims)
    require(0 < inv_q < 1, f"no admissible q: 1/q = {inv_q:g}")
    return 1 / inv_q


def fractional_range_holds(s: float, p: float, q: float) -> bool:
    """1/q <= 1/p - 1 + s with 1 < p < q < inf (plain fractional integral)."""
    return 0 < s < 1 and 1 < p < q < math.inf and 1 / q <= 1 / p - 1 + s + _EQUALITY_TOL


def twisted_range_holds(s: float, p: float, q: float) -> bool:
    """1/q <= 1/p - 1/2 + s with 1 < p <= 2 <= q < inf and 1/4 < s < 1/2."""
    return 0.25 < s < 0.5 and 1 < p <= 2 <= q < math.inf and 1 / q <= 1 / p - 0.5 + s + _EQUALITY_TOL


def multiplier_range_holds(r: float, p: float, q: float) -> bool:
    """
    A convolution whose multiplier is weak-L^r is l^p -> l^q bounded when
    1/p - 1/q >= 1/r and 1 < p <= 2 <= q < inf.
    """
    return r > 0 and 1 < p <= 2 <= q < math.inf and 1 / p - 1 / q >= 1 / r - _EQUALITY_TOL


# =============================================================================
# BOUNDEDNESS SCANS
# =============================================================================
def family_members(name: str, M: int, ndim: int = 1, p: float = 2.0, members: int = 4,
                   seed: int = 0) -> List[LatticeFunction]:
    """
    Inputs supported on [1, M]^ndim:
      delta        the point mass at (1, ..., 1)
      box          the indicator of the whole box
      power_decay  |n|^{-1/p} log(|n| + 1)^{-1}
      random_signs `members` functions with about a quarter of the points set to +-1
    """
    require(name in FAMILIES, f"unknown test family {name!r}; choose from {FAMILIES}")
    require(M >= 1, f"box size must be >= 1, got {M}")
    origin = (1,) * ndim
    dims = (1,) * ndim
    shape = (M,) * ndim
    if name == "delta":
        return [LatticeFunction.delta(origin, dims)]
    if name == "box":
        return [LatticeFunction(np.ones(shape, dtype=np.complex128), origin, dims)]
    if name == "power_decay":
        r = _point_norm(_grid_points(tuple((1, M) for _ in range(ndim))), "euclidean")
        values = r ** (-1.0 / p) / np.log(r + 1.0)
        return [LatticeFunction(values.astype(np.complex128), origin, dims)]
    out = []
    for j in range(members):
        rng = counter_rng(seed, M * 1024 + j)
        mask = rng.random(shape) < 0.25
        signs = np.where(rng.random(shape) < 0.5, -1.0, 1.0)
        values = np.where(mask, signs, 0.0)
        if not values.any():
            values.flat[0] = 1.0
        out.append(LatticeFunction(values.astype(np.complex128), origin, dims))
    return out


def _scan_cell(args) -> Dict[str, object]:
    op, p, q, family, M, ndim, members, seed = args
    ratios = []
    for f in family_members(family, M, ndim, p, members, seed):
        denom = lp_norm(f, p)
        ratios.append(lp_norm(op(f), q) / denom if denom > 0 else 0.0)
    return {"family": family, "M": M, "members": len(ratios), "ratio_max": float(max(ratios))}


def operator_ratio_scan(op: Callable[[LatticeFunction], LatticeFunction], p: float, q: float,
                        families: Sequence[str] = FAMILIES, boxes: Sequence[int] = (64, 128, 256),
                        ndim: int = 1, members: int = 4, seed: int = 0,
                        growth_threshold: float = GROWTH_THRESHOLD,
                        threads: Optional[int] = None) -> pd.DataFrame:
    """
    ||op f||_q / ||f||_p for every family member and box size M.

    One row per (family, M) plus rows for family "all" (the max over
    families). `running_max` is the max over boxes up to M; `growth` is its
    relative change from the previous box and `flagged` marks growth above
    `growth_threshold`. Cells run on a thread pool and are merged in key order.
    """
    require(len(families) > 0, "at least one test family is required")
    require(p >= 1 and q >= 1, f"p and q must be >= 1, got p={p}, q={q}")
    boxes = sorted(int(M) for M in boxes)
    tasks = [(op, p, q, fam, M, ndim, members, seed) for fam in families for M in boxes]
    cells = pd.DataFrame(parallel_map(_scan_cell, tasks, threads))
    overall = cells.groupby("M", sort=True).agg(members=("members", "sum"), ratio_max=("ratio_max", "max")).reset_index()
    overall.insert(0, "family", "all")
    table = pd.concat([cells, overall], ignore_index=True)
    table = table.sort_values(["family", "M"], kind="mergesort").reset_index(drop=True)
    table["running_max"] = table.groupby("family")["ratio_max"].cummax()
    table["growth"] = table.groupby("family")["running_max"].pct_change().fillna(0.0)
    table["flagged"] = table["growth"] > growth_threshold
    for _, row in table[table["family"] == "all"].iterrows():
        logger.info("Ratio scan M=%d: max ratio %.6g (growth %.2f%%)", row["M"], row["ratio_max"], 100 * row["growth"])
    return table


def scan_growth(table: pd.DataFrame, family: str = "all") -> float:
    """Largest growth per doubling of the running max for one family."""
    rows = table[table["family"] == family]
    return float(rows["growth"].max()) if not rows.empty else 0.0
