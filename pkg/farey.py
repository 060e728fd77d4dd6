# farey.py
"""
Farey dissection of (0, 1] with major/minor arc classification.

Fractions follow the convention 0 < p/q <= 1, so 1/1 stands for the point
0 = 1 on the circle. Interval endpoints are exact `Fraction`s.
"""

import bisect
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from sympy import sieve

from utils.errors import require

logger = logging.getLogger(__name__)

# ---------- constants ----------
MAJOR_ARC_FRACTION: Fraction = Fraction(1, 10)   # major iff q <= (1/10) 2^{j/2}
TILDE_RADIUS: Fraction = Fraction(1, 10)         # tilde I_{p/q} = {|x - p/q| <= 1/(10 q^2)}

Real = Union[float, Fraction, int]


@dataclass(frozen=True, order=True)
class FareyFraction:
    """p/q in lowest terms with 0 < p/q <= 1 (sorts by value)."""
    value: Fraction
    p: int
    q: int

    @classmethod
    def of(cls, p: int, q: int) -> "FareyFraction":
        require(q >= 1, f"denominator must be >= 1, got {q}")
        require(math.gcd(p, q) == 1, f"{p}/{q} is not in lowest terms")
        require(0 < p <= q, f"{p}/{q} is outside (0, 1]")
        return cls(Fraction(p, q), p, q)

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


class ArcKind(str, Enum):
    MAJOR = "major"
    MINOR = "minor"


@dataclass(frozen=True)
class ArcClassification:
    """
    One arc of the level-j dissection.

    `interval` is the closed mediant interval [lo, hi]; for 1/1 it is written
    in lifted coordinates [Q/(Q+1), 1 + 1/(Q+1)] and is understood mod 1.
    """
    fraction: FareyFraction
    level: int
    kind: ArcKind
    interval: Tuple[Fraction, Fraction]
    tilde_interval: Tuple[Fraction, Fraction]

    def contains(self, x: Real) -> bool:
        x = Fraction(x)
        lo, hi = self.interval
        return lo <= x <= hi or lo <= x + 1 <= hi


# =============================================================================
# SEQUENCES
# =============================================================================
def farey_sequence(Q: int) -> List[FareyFraction]:
    """
    All p/q with q <= Q, gcd(p, q) = 1 and 0 < p/q <= 1, ascending.

    Uses the next-term recurrence of consecutive Farey fractions, starting
    from the neighbour pair 0/1, 1/Q.
    """
    require(Q >= 1, f"Q must be >= 1, got {Q}")
    out: List[FareyFraction] = []
    a, b, c, d = 0, 1, 1, Q
    while c <= Q:
        out.append(FareyFraction(Fraction(c, d), c, d))
        k = (Q + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
        if a == 1 and b == 1:
            break
    return out


def farey_length(Q: int) -> int:
    """sum_{q<=Q} phi(q), the size of `farey_sequence(Q)`."""
    require(Q >= 1, f"Q must be >= 1, got {Q}")
    return int(sum(sieve.totientrange(1, Q + 1)))


def farey_neighbours(x: Real, Q: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """
    Consecutive fractions a/b <= x <= c/d of the Farey sequence of order Q
    (including 0/1), found by Stern-Brocot descent with whole runs per step.
    """
    x = Fraction(x)
    lower, upper = (0, 1), (1, 1)
    if x == 0:
        return lower, (1, Q)
    if x == 1:
        return ((Q - 1, Q) if Q > 1 else (0, 1)), upper
    while True:
        a, b = lower
        c, d = upper
        if Fraction(a, b) == x:
            return lower, lower
        if Fraction(c, d) == x:
            return upper, upper
        if b + d > Q:
            return lower, upper
        mediant = Fraction(a + c, b + d)
        if x == mediant:
            return (a + c, b + d), (a + c, b + d)
        if x > mediant:
            # move lower towards upper: (a + t c)/(b + t d) <= x, b + t d <= Q
            t_val = (x * b - a) / (c - x * d)
            t = max(1, math.floor(t_val))
            t = min(t, (Q - b) // d)
            lower = (a + t * c, b + t * d)
        else:
            t_val = (c - x * d) / (x * b - a)
            t = max(1, math.floor(t_val))
            t = min(t, (Q - d) // b)
            upper = (c + t * a, d + t * b)


def _as_circle_point(xf: Fraction, p: int, q: int) -> Tuple[FareyFraction, float]:
    if p == 0:
        # 0/1 and 1/1 are the same point of the circle
        return FareyFraction.of(1, 1), float(xf)
    frac = FareyFraction.of(p, q)
    return frac, float(xf - frac.value)


def _mediant_side(xf: Fraction, Q: int) -> Tuple[int, int]:
    """The Farey neighbour of x on x's side of their mediant (the arc owner)."""
    (a, b), (c, d) = farey_neighbours(xf, Q)
    if (a, b) == (c, d):
        return a, b
    return (a, b) if xf <= Fraction(a + c, b + d) else (c, d)


def nearest_fraction(x: Real, Q: int) -> Tuple[FareyFraction, float]:
    """
    Closest p/q to x in (0, 1] with q <= Q and |x - p/q| <= 1/(q (Q + 1)).

    The closest fraction is one of the two Farey neighbours of x. When it
    misses the Dirichlet bound (x lies past the mediant but the mediant sits
    far from the midpoint) the other neighbour is returned; that one always
    meets it. Ties go to the smaller denominator. A result of 0/1 is reported
    as 1/1 with delta = x.

    Returns
    -------
    (FareyFraction, float)
        The fraction and delta = x - p/q.
    """
    require(Q >= 1, f"Q must be >= 1, got {Q}")
    xf = Fraction(x)
    require(0 < xf <= 1, f"x must lie in (0, 1], got {x}")
    lower, upper = farey_neighbours(xf, Q)

    def admissible(pq: Tuple[int, int]) -> bool:
        return abs(xf - Fraction(*pq)) * pq[1] * (Q + 1) <= 1

    candidates = [pq for pq in {lower, upper} if admissible(pq)]
    p, q = min(candidates, key=lambda pq: (abs(xf - Fraction(*pq)), pq[1]))
    return _as_circle_point(xf, p, q)


# =============================================================================
# ARCS
# =============================================================================
def level_denominator_bound(j: int) -> int:
    """floor(2^{j/2})."""
    require(j >= 0, f"level must be >= 0, got {j}")
    return math.isqrt(1 << j)


def classify_arc(j: int, q: int, major_fraction: Fraction = MAJOR_ARC_FRACTION) -> ArcKind:
    """
    Major iff q <= major_fraction * 2^{j/2}, minor otherwise.

    Raises
    ------
    ValidationError
        If q > 2^{j/2} (the fraction is not part of the level-j dissection).
    """
    require(j >= 0, f"level must be >= 0, got {j}")
    require(1 <= q and q * q <= (1 << j), f"q={q} exceeds 2^(j/2) at level j={j}")
    c = Fraction(major_fraction)
    # q <= c 2^{j/2}  <=>  q^2 <= c^2 2^j
    return ArcKind.MAJOR if q * q <= c * c * (1 << j) else ArcKind.MINOR


def tilde_interval(frac: FareyFraction, radius: Fraction = TILDE_RADIUS) -> Tuple[Fraction, Fraction]:
    r = Fraction(radius) / (frac.q * frac.q)
    return frac.value - r, frac.value + r


def level_dissection(j: int, major_fraction: Fraction = MAJOR_ARC_FRACTION) -> List[ArcClassification]:
    """
    The level-j arcs I^j_{p/q}: one per p/q with q <= 2^{j/2}, bounded by the
    mediants with its Farey neighbours (wrapping around at 1/1).
    """
    Q = level_denominator_bound(j)
    fracs = farey_sequence(Q)
    arcs: List[ArcClassification] = []
    n = len(fracs)
    for i, f in enumerate(fracs):
        if f.q == 1:
            lo = Fraction(Q, Q + 1)
            hi = 1 + Fraction(1, Q + 1)
        else:
            left = fracs[i - 1] if i > 0 else None
            right = fracs[i + 1] if i + 1 < n else None
            lo = Fraction(left.p + f.p, left.q + f.q) if left else Fraction(f.p, f.q + 1)
            hi = Fraction(f.p + right.p, f.q + right.q)
        arcs.append(ArcClassification(
            fraction=f, level=j, kind=classify_arc(j, f.q, major_fraction),
            interval=(lo, hi), tilde_interval=tilde_interval(f),
        ))
    return arcs


def locate_arc(x: Real, j: int, major_fraction: Fraction = MAJOR_ARC_FRACTION) -> Tuple[ArcClassification, float]:
    """The level-j arc containing x, with delta = x - p/q."""
    Q = level_denominator_bound(j)
    xf = Fraction(x)
    require(0 < xf <= 1, f"x must lie in (0, 1], got {x}")
    frac, delta = _as_circle_point(xf, *_mediant_side(xf, Q))
    if frac.q == 1:
        lo, hi = Fraction(Q, Q + 1), 1 + Fraction(1, Q + 1)
    else:
        left, right = _adjacent(frac, Q)
        lo = Fraction(left[0] + frac.p, left[1] + frac.q)
        hi = Fraction(frac.p + right[0], frac.q + right[1])
    arc = ArcClassification(
        fraction=frac, level=j, kind=classify_arc(j, frac.q, major_fraction),
        interval=(lo, hi), tilde_interval=tilde_interval(frac),
    )
    if not arc.contains(xf):
        logger.debug("x=%s sits on a mediant boundary of %s", x, frac)
    return arc, delta


def _adjacent(frac: FareyFraction, Q: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """Predecessor and successor of p/q in the Farey sequence of order Q."""
    p, q = frac.p, frac.q
    # predecessor a/b: p b - q a = 1 with b maximal <= Q
    inv = pow(p, -1, q)                    # b = p^{-1} mod q satisfies p b = 1 mod q
    b = inv + ((Q - inv) // q) * q
    a = (p * b - 1) // q
    # successor c/d: q c - p d = 1 with d maximal <= Q
    d0 = (-inv) % q
    d = d0 + ((Q - d0) // q) * q
    c = (p * d + 1) // q
    return (a, b), (c, d)


def arcs_cover(j: int) -> bool:
    """True iff the level-j arcs cover (0, 1] with shared endpoints only."""
    arcs = level_dissection(j)
    Q = level_denominator_bound(j)
    if Q == 1:
        return True
    pieces = sorted((a.interval for a in arcs if a.fraction.q > 1))
    wrap = next(a.interval for a in arcs if a.fraction.q == 1)
    if pieces[0][0] != wrap[1] - 1 or pieces[-1][1] != wrap[0]:
        return False
    return all(pieces[i][1] == pieces[i + 1][0] for i in range(len(pieces) - 1))


# =============================================================================
# DISJOINTNESS OF THE j-INDEPENDENT INTERVALS
# =============================================================================
def tilde_disjointness(fractions: Sequence[FareyFraction], radius: Fraction = TILDE_RADIUS) -> bool:
    """
    True iff every two fractions with q <= q' <= 2q have tilde intervals that
    are disjoint or identical.

    Candidates for p/q are found by bisection on the sorted values: an overlap
    with a partner of denominator >= q needs |p/q - p'/q'| <= 2 radius / q^2.
    """
    ordered = sorted(set(fractions))
    values = [f.value for f in ordered]
    r = Fraction(radius)
    for f in ordered:
        reach = 2 * r / (f.q * f.q)
        lo = bisect.bisect_left(values, f.value - reach)
        hi = bisect.bisect_right(values, f.value + reach)
        for g in ordered[lo:hi]:
            if g is f or not (f.q <= g.q <= 2 * f.q):
                continue
            gap = abs(f.value - g.value)
            if gap <= r / (f.q * f.q) + r / (g.q * g.q):
                logger.info("Tilde intervals of %s and %s overlap", f, g)
                return False
    return True
