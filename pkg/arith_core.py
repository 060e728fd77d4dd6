# arith_core.py
"""
Exact number-theoretic kernels: Dirichlet characters, Gauss and Weyl sums,
pentagonal coefficients, binary quadratic forms and ideal-norm counts.

Everything here is a pure function of immutable inputs.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import divisors, factorint, primitive_root, totient
from sympy.ntheory.modular import crt

from utils.errors import ValidationError, require
from utils.utils import fsum_complex, residue_phase

logger = logging.getLogger(__name__)

# ---------- constants ----------
UNIT_COUNTS: Dict[int, int] = {-3: 6, -4: 4}
DEFAULT_UNIT_COUNT: int = 2
MAGNITUDE_TOL: float = 1e-12


# =============================================================================
# DIRICHLET CHARACTERS
# =============================================================================
@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    """
    A Dirichlet character mod N stored as a table over residues 0..N-1.

    values[n] = exp(2 pi i phases[n] / order) on units and 0 elsewhere;
    phases[n] = -1 marks a non-unit. `label` is the position in the
    deterministic enumeration order of `enumerate_characters`.
    """
    modulus: int
    values: np.ndarray
    phases: np.ndarray
    order: int
    conductor: int
    label: int = 0

    def __call__(self, n: int) -> complex:
        return complex(self.values[int(n) % self.modulus])

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    @property
    def parity(self) -> int:
        """chi(-1), either +1 or -1."""
        return 1 if self.phases[(-1) % self.modulus] == 0 else -1

    @property
    def is_principal(self) -> bool:
        return bool(np.all(self.phases[self.phases >= 0] == 0))

    @property
    def is_real(self) -> bool:
        units = self.phases[self.phases >= 0]
        return bool(np.all((2 * units) % self.order == 0))

    def at(self, n: np.ndarray) -> np.ndarray:
        """Vectorised chi(n) for an integer array."""
        return self.values[np.mod(np.asarray(n, dtype=np.int64), self.modulus)]

    def describe(self) -> Dict[str, object]:
        return {
            "modulus": self.modulus,
            "label": self.label,
            "conductor": self.conductor,
            "primitive": self.is_primitive,
            "parity": self.parity,
            "order": self.order,
        }


def _unit_group_generators(N: int) -> List[Tuple[int, int]]:
    """
    Cyclic decomposition of (Z/NZ)* as (generator mod N, order) pairs.

    Odd prime powers contribute one primitive root; 4 contributes -1;
    2^e with e >= 3 contributes -1 and 5. Each generator is lifted by CRT so
    that it is 1 modulo the complementary part of N.
    """
    gens: List[Tuple[int, int]] = []
    for p, e in sorted(factorint(N).items()):
        pe = p ** e
        rest = N // pe
        if p == 2:
            if e == 1:
                local = []
            elif e == 2:
                local = [(3, 2)]
            else:
                local = [(pe - 1, 2), (5, 1 << (e - 2))]
        else:
            local = [(int(primitive_root(pe)), int(totient(pe)))]
        for g, order in local:
            if rest == 1:
                lifted = g % N
            else:
                lifted = int(crt([pe, rest], [g, 1])[0]) % N
            gens.append((lifted, order))
    return gens


def _discrete_logs(N: int, gens: Sequence[Tuple[int, int]]) -> np.ndarray:
    """logs[n, t] = exponent of generator t in n; rows of non-units stay -1."""
    logs = np.full((N, max(len(gens), 1)), -1, dtype=np.int64)
    orders = [o for _, o in gens]
    for exps in itertools.product(*[range(o) for o in orders]):
        n = 1 % N
        for (g, _), a in zip(gens, exps):
            n = (n * pow(g, a, N)) % N
        logs[n, :len(exps)] = exps
        if not gens:
            logs[n, 0] = 0
    return logs


def _conductor(N: int, phases: np.ndarray) -> int:
    units = np.nonzero(phases >= 0)[0]
    for d in divisors(N):
        kernel = units[(units % d) == (1 % d)]
        if np.all(phases[kernel] == 0):
            return int(d)
    return N


@lru_cache(maxsize=256)
def enumerate_characters(N: int) -> Tuple[DirichletCharacter, ...]:
    """
    All phi(N) Dirichlet characters mod N, principal character first.

    Parameters
    ----------
    N : int
        Modulus, N >= 1.

    Returns
    -------
    tuple of DirichletCharacter
        Ordered lexicographically by the exponent vector on the generators
        of `_unit_group_generators(N)`.
    """
    require(isinstance(N, (int, np.integer)) and N >= 1, f"modulus must be a positive integer, got {N!r}")
    N = int(N)
    gens = _unit_group_generators(N)
    orders = [o for _, o in gens]
    order = math.lcm(*orders) if orders else 1
    logs = _discrete_logs(N, gens)
    is_unit = logs[:, 0] >= 0

    chars: List[DirichletCharacter] = []
    for label, exps in enumerate(itertools.product(*[range(o) for o in orders])):
        weights = np.array([e * (order // o) for e, o in zip(exps, orders)], dtype=np.int64)
        if gens:
            phase = np.mod(logs @ weights, order)
        else:
            phase = np.zeros(N, dtype=np.int64)
        phase = np.where(is_unit, phase, -1)
        values = np.where(is_unit, residue_phase(np.maximum(phase, 0), order), 0j)
        values.setflags(write=False)
        phase.setflags(write=False)
        chars.append(DirichletCharacter(
            modulus=N, values=values, phases=phase, order=order,
            conductor=_conductor(N, phase), label=label,
        ))
    logger.debug("Enumerated %d characters mod %d", len(chars), N)
    return tuple(chars)


def is_primitive(chi: DirichletCharacter) -> bool:
    """True iff chi is not induced from a proper divisor of its modulus."""
    return chi.is_primitive


def primitive_characters(N: int) -> List[DirichletCharacter]:
    return [chi for chi in enumerate_characters(N) if chi.is_primitive]


def select_character(N: int, label: int) -> DirichletCharacter:
    chars = enumerate_characters(N)
    require(0 <= label < len(chars), f"character label {label} out of range 0..{len(chars) - 1} for modulus {N}")
    return chars[label]


def kronecker_character(D: int) -> DirichletCharacter:
    """The real primitive character mod |D| with chi(-1) = sign(D)."""
    require(is_fundamental_discriminant(D), f"{D} is not a fundamental discriminant")
    sign = 1 if D > 0 else -1
    for chi in enumerate_characters(abs(D)):
        if chi.is_primitive and chi.is_real and chi.parity == sign and not chi.is_principal:
            return chi
    raise ValidationError(f"no real primitive character attached to discriminant {D}")


def gauss_sum(chi: DirichletCharacter) -> complex:
    """
    tau(chi) = sum_{n mod N} chi(n) e^{2 pi i n / N}; |tau| = sqrt(N).

    Raises
    ------
    ValidationError
        If chi is not primitive.
    """
    require(chi.is_primitive, f"Gauss sum requested for imprimitive character (conductor {chi.conductor} < {chi.modulus})")
    n = np.arange(chi.modulus, dtype=np.int64)
    return fsum_complex(chi.values * residue_phase(n, chi.modulus))


def character_inversion(chi: DirichletCharacter, n: float) -> complex:
    """
    (chi(-1) tau(chi) / N) * sum_m conj(chi(m)) e^{2 pi i m n / N}.

    Equals chi(n) at integers; the right side is defined for real n too.
    """
    N = chi.modulus
    m = np.arange(N, dtype=np.float64)
    inner = fsum_complex(np.conj(chi.values) * np.exp(2j * np.pi * m * float(n) / N))
    return chi.parity * gauss_sum(chi) / N * inner


# =============================================================================
# EXPONENTIAL SUMS
# =============================================================================
def quadratic_gauss_sum(p: int, q: int, m: int) -> complex:
    """S(p/q, m/q) = sum_{l=1}^{q} e^{2 pi i (p l^2 + m l) / q}, gcd(p, q) = 1."""
    require(q >= 1, f"q must be >= 1, got {q}")
    require(math.gcd(p, q) == 1, f"gcd({p}, {q}) != 1")
    ell = np.arange(1, q + 1, dtype=np.int64)
    r = ((p % q) * ((ell * ell) % q) + (m % q) * ell) % q
    return fsum_complex(residue_phase(r, q))


@lru_cache(maxsize=4096)
def gauss_sum_table(p: int, q: int) -> np.ndarray:
    """
    All S(p/q, m/q) for m = 0..q-1 at once (a length-q inverse DFT).
    """
    require(q >= 1 and math.gcd(p, q) == 1, f"invalid fraction {p}/{q}")
    ell = np.arange(q, dtype=np.int64)
    g = residue_phase((p % q) * ((ell * ell) % q), q)
    table = np.fft.ifft(g) * q
    table.setflags(write=False)
    return table


def euler_weyl_sum(p: int, q: int) -> complex:
    """S(p/q) = sum_{l=1}^{q} e^{-2 pi i p (6 l^2 + l) / q}."""
    require(q >= 1, f"q must be >= 1, got {q}")
    require(math.gcd(p, q) == 1, f"gcd({p}, {q}) != 1")
    ell = np.arange(1, q + 1, dtype=np.int64)
    r = ((p % q) * ((6 * ((ell * ell) % q) + ell) % q)) % q
    return fsum_complex(residue_phase(-r, q))


# =============================================================================
# EULER'S PENTAGONAL IDENTITY
# =============================================================================
def _pentagonal_range(M: int) -> range:
    # n(3n+1)/2 <= M  <=>  |n| <= (1 + sqrt(1 + 24M)) / 6
    bound = int((1 + math.isqrt(1 + 24 * M)) // 6) + 1
    return range(-bound, bound + 1)


def pentagonal_coefficients(M: int) -> np.ndarray:
    """
    a_0..a_M of prod_{n>=1} (1 - x^n), from the closed form
    a_j = (-1)^n when j = n(3n+1)/2, n in Z, else 0.
    """
    require(M >= 0, f"M must be >= 0, got {M}")
    a = np.zeros(M + 1, dtype=np.int64)
    for n in _pentagonal_range(M):
        j = n * (3 * n + 1) // 2
        if 0 <= j <= M:
            a[j] = -1 if n % 2 else 1
    return a


def pentagonal_product_oracle(M: int) -> np.ndarray:
    """
    Exact integer expansion of prod_{n=1}^{M} (1 - x^n) truncated to degree M.

    Intermediate coefficients outgrow int64, so the array holds Python ints.
    """
    require(M >= 0, f"M must be >= 0, got {M}")
    a = np.zeros(M + 1, dtype=object)
    a[:] = 0
    a[0] = 1
    for n in range(1, M + 1):
        a[n:] = a[n:] - a[:-n]
    return a


def euler_split_coefficients(M: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Coefficients of f1 = sum x^{6n^2+n} and f2 = -sum x^{6n^2+7n+2} up to degree M.
    """
    require(M >= 0, f"M must be >= 0, got {M}")
    f1 = np.zeros(M + 1, dtype=np.int64)
    f2 = np.zeros(M + 1, dtype=np.int64)
    bound = math.isqrt(max(M, 0) // 6) + 2
    for n in range(-bound, bound + 1):
        e1 = 6 * n * n + n
        e2 = 6 * n * n + 7 * n + 2
        if 0 <= e1 <= M:
            f1[e1] += 1
        if 0 <= e2 <= M:
            f2[e2] -= 1
    return f1, f2


# =============================================================================
# BINARY QUADRATIC FORMS
# =============================================================================
@dataclass(frozen=True, order=True)
class QuadraticForm:
    """Primitive positive definite form a x^2 + b x y + c y^2."""
    a: int
    b: int
    c: int

    def __post_init__(self):
        require(self.discriminant < 0, f"form {self.triple} is not definite (D = {self.discriminant})")
        require(self.a > 0, f"form {self.triple} is not positive definite")
        require(math.gcd(math.gcd(self.a, self.b), self.c) == 1, f"form {self.triple} is not primitive")

    @property
    def triple(self) -> Tuple[int, int, int]:
        return (self.a, self.b, self.c)

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def is_reduced(self) -> bool:
        a, b, c = self.triple
        if not (abs(b) <= a <= c):
            return False
        if abs(b) == a or a == c:
            return b >= 0
        return True

    @property
    def matrix(self) -> np.ndarray:
        """A = [[2a, b], [b, 2c]], so that phi(x) = A[x] / 2."""
        return np.array([[2 * self.a, self.b], [self.b, 2 * self.c]], dtype=np.int64)

    @property
    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of [[a, b/2], [b/2, c]]."""
        a, b, c = self.triple
        return 0.5 * ((a + c) - math.sqrt((a - c) ** 2 + b * b))

    def __call__(self, m1, m2):
        return self.a * m1 * m1 + self.b * m1 * m2 + self.c * m2 * m2


def _valid_discriminant(D: int) -> bool:
    return D < 0 and D % 4 in (0, 1)


def reduced_forms(D: int) -> List[QuadraticForm]:
    """
    Reduced primitive positive definite forms of discriminant D, sorted by (a, b, c).

    The list length is the class number h(D).
    """
    require(_valid_discriminant(D), f"invalid discriminant {D}: need D < 0 and D = 0, 1 mod 4")
    forms: List[QuadraticForm] = []
    a_max = math.isqrt(-D // 3) + 1
    for a in range(1, a_max + 1):
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or math.gcd(math.gcd(a, b), c) != 1:
                continue
            if (abs(b) == a or a == c) and b < 0:
                continue
            forms.append(QuadraticForm(a, b, c))
    return sorted(forms)


def class_number(D: int) -> int:
    return len(reduced_forms(D))


def unit_count(D: int) -> int:
    """w: number of units in the ring of integers of Q(sqrt(D))."""
    return UNIT_COUNTS.get(D, DEFAULT_UNIT_COUNT)


def is_fundamental_discriminant(D: int) -> bool:
    if D >= 0 or D % 4 not in (0, 1):
        return False
    if D % 4 == 1:
        return _squarefree(-D)
    m = D // 4
    return m % 4 in (2, 3) and _squarefree(-m)


def _squarefree(n: int) -> bool:
    return all(e == 1 for e in factorint(abs(n)).values())


def representation_counts(form: QuadraticForm, n_max: int) -> np.ndarray:
    """
    r_A(n) for n = 0..n_max: lattice points (m1, m2) != (0, 0) with phi_A = n.

    Index 0 is always 0. The search box |m_i| <= sqrt(n_max / lambda_min)
    contains every solution.
    """
    require(n_max >= 1, f"n_max must be >= 1, got {n_max}")
    require(form.discriminant < 0, f"form {form.triple} is indefinite")
    R = int(math.isqrt(int(n_max / form.min_eigenvalue))) + 1
    m2 = np.arange(-R, R + 1, dtype=np.int64)
    counts = np.zeros(n_max + 1, dtype=np.int64)
    for m1 in range(-R, R + 1):
        vals = form(m1, m2)
        vals = vals[(vals >= 1) & (vals <= n_max)]
        counts += np.bincount(vals, minlength=n_max + 1)
    return counts


def class_norm_counts(D: int, n_max: int) -> Dict[QuadraticForm, np.ndarray]:
    """Per-class ideal counts r_A(n) / w (exact integers for fundamental D)."""
    require(is_fundamental_discriminant(D), f"{D} is not a fundamental discriminant")
    w = unit_count(D)
    out: Dict[QuadraticForm, np.ndarray] = {}
    for form in reduced_forms(D):
        r = representation_counts(form, n_max)
        out[form] = r // w
    return out


@lru_cache(maxsize=32)
def _ideal_norm_table(D: int, n_max: int) -> np.ndarray:
    w = unit_count(D)
    total = np.zeros(n_max + 1, dtype=np.int64)
    for form in reduced_forms(D):
        total += representation_counts(form, n_max)
    if np.any(total % w):
        raise ValidationError(f"lattice counts for D={D} are not divisible by w={w}")
    table = total // w
    table.setflags(write=False)
    return table


# =============================================================================
# COEFFICIENT STREAMS
# =============================================================================
class StreamKind(str, Enum):
    POWER = "power_k"
    CHARACTER = "char_twisted"
    PENTAGONAL = "pentagonal"
    IDEAL_NORM = "ideal_norm"
    CUSTOM = "custom"


def _integer_root(n: int, k: int) -> int:
    r = int(round(n ** (1.0 / k)))
    while r > 0 and r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


@dataclass(frozen=True, eq=False)
class CoefficientStream:
    """
    A coefficient sequence {a_n} feeding multipliers and operators.

    Power streams carry the I_{s,k} normalisation: the coefficient at
    n = m^k is weighted by m^{-s}, i.e. n^{-s/k}. All other kinds weight
    a_n by n^{-s}.
    """
    kind: StreamKind
    k: int = 1
    character: Optional[DirichletCharacter] = None
    discriminant: Optional[int] = None
    values: Optional[np.ndarray] = field(default=None, repr=False)
    drop_constant: bool = True

    # ---------- constructors ----------
    @classmethod
    def power(cls, k: int) -> "CoefficientStream":
        require(k >= 1, f"power stream needs k >= 1, got {k}")
        return cls(StreamKind.POWER, k=int(k))

    @classmethod
    def ones(cls) -> "CoefficientStream":
        return cls.power(1)

    @classmethod
    def twisted(cls, chi: DirichletCharacter) -> "CoefficientStream":
        return cls(StreamKind.CHARACTER, character=chi)

    @classmethod
    def pentagonal(cls) -> "CoefficientStream":
        return cls(StreamKind.PENTAGONAL)

    @classmethod
    def ideal_norm(cls, D: int) -> "CoefficientStream":
        require(is_fundamental_discriminant(D), f"{D} is not a fundamental discriminant")
        return cls(StreamKind.IDEAL_NORM, discriminant=int(D))

    @classmethod
    def custom(cls, values: Sequence[complex]) -> "CoefficientStream":
        arr = np.array(values, dtype=np.complex128)
        require(arr.ndim == 1 and arr.size >= 1, "custom stream needs a 1-D sequence a_0, a_1, ...")
        arr.setflags(write=False)
        return cls(StreamKind.CUSTOM, values=arr)

    # ---------- properties ----------
    @property
    def name(self) -> str:
        if self.kind is StreamKind.POWER:
            return f"power_{self.k}"
        if self.kind is StreamKind.CHARACTER:
            return f"char_{self.character.modulus}_{self.character.label}"
        if self.kind is StreamKind.IDEAL_NORM:
            return f"ideal_norm_{self.discriminant}"
        return self.kind.value

    @property
    def exponent_scale(self) -> float:
        return 1.0 / self.k if self.kind is StreamKind.POWER else 1.0

    @property
    def length(self) -> Optional[int]:
        """Largest index with a possibly nonzero term, None for infinite streams."""
        if self.kind is StreamKind.CUSTOM:
            return int(self.values.size - 1)
        return None

    # ---------- terms ----------
    def terms(self, n_max: int) -> np.ndarray:
        """
        a_0..a_{n_max} as an array (integer kinds come back as complex too,
        so every caller can treat streams alike).
        """
        require(n_max >= 0, f"n_max must be >= 0, got {n_max}")
        a = np.zeros(n_max + 1, dtype=np.complex128)
        if self.kind is StreamKind.POWER:
            m = np.arange(1, _integer_root(n_max, self.k) + 1, dtype=np.int64)
            a[m ** self.k] = 1.0
        elif self.kind is StreamKind.CHARACTER:
            a[1:] = self.character.at(np.arange(1, n_max + 1))
        elif self.kind is StreamKind.PENTAGONAL:
            a[:] = pentagonal_coefficients(n_max)
        elif self.kind is StreamKind.IDEAL_NORM:
            a[:] = _ideal_norm_table(self.discriminant, n_max)
        else:
            top = min(n_max, self.values.size - 1)
            a[: top + 1] = self.values[: top + 1]
        return a

    def weights(self, s: float, n_max: int) -> np.ndarray:
        """
        w_n = a_n / n^{s * exponent_scale} for n = 1..n_max, with w_0 = 0.
        """
        a = self.terms(n_max)
        w = np.zeros_like(a)
        n = np.arange(1, n_max + 1, dtype=np.float64)
        w[1:] = a[1:] * n ** (-s * self.exponent_scale)
        return w


def ideal_norm_counts(D: int, n_max: int) -> CoefficientStream:
    """
    Number of integral ideals of each norm in Q(sqrt(D)), as a stream.

    a_n = (1/w) sum_A r_A(n) over the reduced forms of discriminant D. The
    table up to n_max is computed eagerly so invalid input fails here.
    """
    require(n_max >= 1, f"n_max must be >= 1, got {n_max}")
    stream = CoefficientStream.ideal_norm(D)
    _ideal_norm_table(D, n_max)
    return stream
