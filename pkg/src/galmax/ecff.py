"""Elliptic curves y^2 = x^3 + ax + b: exact arithmetic over prime fields
and over the rationals, plus the exhaustive family counts used by the
statistics harness.

Counting is Legendre-symbol based (O(p) per curve), with a quadratic
character table per prime; family scans over all coefficient pairs mod p are
vectorized to O(p^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

from . import nt
from .errors import BadReductionError, InvalidInputError, ResourceCapError, SingularCurveError

FAMILY_SCAN_P_CAP = 2000


def discriminant(a, b):
    """Delta = -16(4a^3 + 27b^2), in whatever exact ring a and b live in."""
    return -16 * (4 * a * a * a + 27 * b * b)


@dataclass(frozen=True)
class ShortWeierstrass:
    """y^2 = x^3 + ax + b over Q (Fraction coefficients) or a number field."""

    a: object
    b: object
    delta: object

    @property
    def is_rational(self) -> bool:
        return isinstance(self.a, (int, Fraction))


def validate(a, b) -> ShortWeierstrass:
    """Build a curve, rejecting singular coefficient pairs."""
    delta = discriminant(a, b)
    if not delta:
        raise SingularCurveError(delta=delta)
    return ShortWeierstrass(a, b, delta)


@dataclass(frozen=True)
class LongWeierstrass:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6."""

    a1: object
    a2: object
    a3: object
    a4: object
    a6: object

    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    def c_invariants(self):
        b2, b4, b6, _ = self.b_invariants()
        c4 = b2 * b2 - 24 * b4
        c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6
        return c4, c6

    def disc(self):
        b2, b4, b6, b8 = self.b_invariants()
        return -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def j_invariant(self):
        c4, _ = self.c_invariants()
        d = self.disc()
        if not d:
            raise SingularCurveError(delta=d)
        return _divide(c4 * c4 * c4, d)


def weierstrass_normalize(L: LongWeierstrass) -> ShortWeierstrass:
    """Complete the square and cube: a short model with the same j-invariant.

    For a genuinely long model the discriminant changes by the 12th power
    6^12, so the class of Delta modulo 12th powers (all that downstream
    certificates use) is unchanged.  Already-short input passes through.
    """
    if not L.a1 and not L.a2 and not L.a3:
        return validate(L.a4, L.a6)
    c4, c6 = L.c_invariants()
    a = -27 * c4
    b = -54 * c6
    return validate(a, b)


def _divide(num, den):
    if isinstance(num, int) and isinstance(den, int):
        return Fraction(num, den)
    if isinstance(num, Fraction) or isinstance(den, Fraction):
        return Fraction(num) / Fraction(den)
    return num * den.inverse() if hasattr(den, "inverse") else num / den


# ---------------------------------------------------------------------------
# prime-field machinery


def _check_p(p: int):
    if p < 5:
        raise InvalidInputError(f"prime fields require p >= 5, got {p}")


@lru_cache(maxsize=64)
def quadratic_character_table(p: int) -> np.ndarray:
    """chi[v] = legendre(v, p) as an int8 array of length p."""
    chi = np.full(p, -1, dtype=np.int8)
    chi[0] = 0
    squares = (np.arange(1, (p - 1) // 2 + 1, dtype=np.int64) ** 2) % p
    chi[squares] = 1
    chi.setflags(write=False)
    return chi


def point_count(p: int, a: int, b: int) -> tuple[int, int]:
    """(#E(F_p), trace a_p) by the character sum N = p + 1 + sum chi(x^3+ax+b)."""
    _check_p(p)
    a, b = a % p, b % p
    if discriminant(a, b) % p == 0:
        raise BadReductionError(f"singular reduction at p={p}")
    chi = quadratic_character_table(p)
    x = np.arange(p, dtype=np.int64)
    vals = (x * x % p * x + a * x + b) % p
    s = int(chi[vals].sum())
    N = p + 1 + s
    ap = p + 1 - N
    assert ap * ap <= 4 * p, "Hasse bound violated"
    return N, ap


def cubic_type(p: int, a: int, b: int) -> tuple[int, ...]:
    """Splitting pattern of x^3 + ax + b over F_p: (3), (2,1) or (1,1,1).

    With p not dividing the discriminant the cubic is separable, so the root
    count in {0, 1, 3} determines the pattern.
    """
    _check_p(p)
    a, b = a % p, b % p
    if discriminant(a, b) % p == 0:
        raise BadReductionError(f"singular reduction at p={p}")
    x = np.arange(p, dtype=np.int64)
    roots = int(((x * x % p * x + a * x + b) % p == 0).sum())
    return {0: (3,), 1: (2, 1), 3: (1, 1, 1)}[roots]


def psi3_type(p: int, a: int, b: int) -> tuple[tuple[int, ...], bool]:
    """Factor-degree pattern of the 3-division polynomial, plus whether some
    root carries a rational 3-torsion point (x0^3 + a x0 + b a square).

    psi3 = 3x^4 + 6ax^2 + 12bx - a^2; its roots are the x-coordinates of the
    four order-3 subgroups, distinct when p does not divide 3*Delta.
    """
    _check_p(p)
    a, b = a % p, b % p
    if (3 * discriminant(a, b)) % p == 0:
        raise BadReductionError(f"p={p} divides 3*Delta")
    chi = quadratic_character_table(p)
    x = np.arange(p, dtype=np.int64)
    x2 = x * x % p
    vals = (3 * x2 % p * x2 + 6 * a * x2 + 12 * b * x + (p - a * a % p)) % p
    root_list = x[vals == 0]
    n_roots = int(root_list.size)
    has_point = False
    for x0 in root_list.tolist():
        if chi[(x0 * x0 % p * x0 + a * x0 + b) % p] == 1:
            has_point = True
            break
    if n_roots == 4:
        return (1, 1, 1, 1), has_point
    if n_roots == 2:
        return (2, 1, 1), has_point
    if n_roots == 1:
        return (3, 1), has_point
    if n_roots != 0:
        raise AssertionError("separable quartic cannot have exactly 3 roots")
    # rootless: either irreducible or a product of two irreducible quadratics;
    # all factors have degree dividing 2 iff x^(p^2) = x mod psi3
    inv3 = pow(3, -1, p)
    mod_poly = [(-a * a) * inv3 % p, 12 * b * inv3 % p, 6 * a * inv3 % p, 0, 1]
    xp2 = nt.x_pow_mod(p * p, mod_poly, p)
    if xp2 == [0, 1, 0, 0]:
        return (2, 2), False
    return (4,), False


# ---------------------------------------------------------------------------
# family scans over all (r, s) in F_p^2


def _root_count_grid(p: int) -> np.ndarray:
    """count[r, s] = number of roots of x^3 + rx + s, for all pairs at once."""
    if p > FAMILY_SCAN_P_CAP:
        raise ResourceCapError(f"family scan at p={p} exceeds cap {FAMILY_SCAN_P_CAP}")
    counts = np.zeros(p * p, dtype=np.int32)
    r = np.arange(p, dtype=np.int64)
    for x in range(p):
        x3 = x * x % p * x % p
        s = (-(x3 + r * x)) % p
        np.add.at(counts, r * p + s, 1)
    return counts.reshape(p, p)


def _delta_nonzero_grid(p: int) -> np.ndarray:
    r = np.arange(p, dtype=np.int64)[:, None]
    s = np.arange(p, dtype=np.int64)[None, :]
    return (4 * (r * r % p) * r + 27 * s * s) % p != 0


def singular_pair_count(p: int) -> int:
    """#{(r, s): Delta_{r,s} = 0} = p for p >= 5 (parametrized by the double
    root: (r, s) = (-3t^2, 2t^3))."""
    _check_p(p)
    return int((~_delta_nonzero_grid(p)).sum())


def omega_counts_mod2(p: int) -> dict[tuple[int, ...], int]:
    """Exact count of nonsingular (r, s) by splitting pattern of the cubic."""
    _check_p(p)
    counts = _root_count_grid(p)
    good = _delta_nonzero_grid(p)
    return {
        (1, 1, 1): int(((counts == 3) & good).sum()),
        (2, 1): int(((counts == 1) & good).sum()),
        (3,): int(((counts == 0) & good).sum()),
    }


def omega_count(p: int, pattern: tuple[int, ...]) -> int:
    """|Omega_C(p)| for the mod-2 class with the given splitting pattern."""
    table = omega_counts_mod2(p)
    if tuple(pattern) not in table:
        raise InvalidInputError(f"unknown mod-2 pattern {pattern}")
    return table[tuple(pattern)]


def trace_histogram(p: int, m: int) -> dict[int, int]:
    """Counts of a_p mod m over all nonsingular (r, s) in F_p^2.

    Exploits the twist orbit: for fixed (r, s) with rs != 0 the p-1 pairs
    (u^2 r, u^3 s) are exactly the isomorphism class and its quadratic twist,
    with a_p equal to chi(u) * a_p(r, s).  One point count per orbit brings
    the scan to O(p^2) total.
    """
    _check_p(p)
    if p > FAMILY_SCAN_P_CAP:
        raise ResourceCapError(f"family scan at p={p} exceeds cap {FAMILY_SCAN_P_CAP}")
    if m < 1:
        raise InvalidInputError("modulus must be >= 1")
    chi = quadratic_character_table(p)
    hist: dict[int, int] = {t: 0 for t in range(m)}
    visited = np.zeros((p, p), dtype=bool)
    u = np.arange(1, p, dtype=np.int64)
    u2 = u * u % p
    u3 = u2 * u % p
    n_square = (p - 1) // 2

    # j = 0 and j = 1728 columns: count each curve directly
    for s0 in range(1, p):
        if not visited[0, s0]:
            _, ap = point_count(p, 0, s0)
            hist[ap % m] += 1
            visited[0, s0] = True
    for r0 in range(1, p):
        if not visited[r0, 0]:
            _, ap = point_count(p, r0, 0)
            hist[ap % m] += 1
            visited[r0, 0] = True

    for r0 in range(1, p):
        row = visited[r0]
        for s0 in range(1, p):
            if row[s0]:
                continue
            if (4 * r0 * r0 * r0 + 27 * s0 * s0) % p == 0:
                visited[r0, s0] = True
                continue
            rr = u2 * r0 % p
            ss = u3 * s0 % p
            visited[rr, ss] = True
            _, ap = point_count(p, r0, s0)
            hist[ap % m] += n_square
            hist[(-ap) % m] += (p - 1) - n_square
    return hist


def weil_count(r: int, gamma: int, p: int) -> tuple[int, float]:
    """#{(a, b): Delta_{a,b} nonzero and equal to gamma * c^r for some unit c},
    together with the normalized deviation |count - p^2/r| / p^(3/2)."""
    _check_p(p)
    if (p - 1) % r != 0:
        raise InvalidInputError(f"need p = 1 mod r, got p={p}, r={r}")
    gamma %= p
    if gamma == 0:
        raise InvalidInputError("gamma must be a unit")
    if p > FAMILY_SCAN_P_CAP:
        raise ResourceCapError(f"family scan at p={p} exceeds cap {FAMILY_SCAN_P_CAP}")
    u = np.arange(1, p, dtype=np.int64)
    targets = np.zeros(p, dtype=bool)
    powers = np.ones(p - 1, dtype=np.int64)
    base = u.copy()
    e = r
    while e:
        if e & 1:
            powers = powers * base % p
        base = base * base % p
        e >>= 1
    targets[gamma * powers % p] = True
    a = np.arange(p, dtype=np.int64)[:, None]
    b = np.arange(p, dtype=np.int64)[None, :]
    delta = (-16 * (4 * (a * a % p) * a + 27 * b * b)) % p
    count = int(targets[delta].sum())
    deviation = abs(count - p * p / r) / p**1.5
    return count, deviation


def batch_curve_data(p: int, A: np.ndarray, B: np.ndarray):
    """Traces and splitting data for many curves at one prime, in O(p * n).

    Returns (ap, cubic_roots, psi3_roots, psi3_point_flag) arrays; callers
    must pre-filter curves with p | Delta.  Rootless quartics still need the
    per-curve irreducibility split (see rootless_quartic_pattern).
    """
    A = np.asarray(A, dtype=np.int64) % p
    B = np.asarray(B, dtype=np.int64) % p
    chi = quadratic_character_table(p)
    ap = np.zeros(A.shape, dtype=np.int64)
    cubic_roots = np.zeros(A.shape, dtype=np.int16)
    psi3_roots = np.zeros(A.shape, dtype=np.int16)
    psi3_flag = np.zeros(A.shape, dtype=bool)
    A2 = A * A % p
    for x in range(p):
        x2 = x * x % p
        x3 = x2 * x % p
        cub = (x3 + A * x + B) % p
        cv = chi[cub]
        ap -= cv
        is_root = cub == 0
        cubic_roots += is_root
        quart = (3 * x2 * x2 + 6 * A * x2 + 12 * B * x - A2) % p
        q_root = quart == 0
        psi3_roots += q_root
        psi3_flag |= q_root & (cv == 1)
    return ap, cubic_roots, psi3_roots, psi3_flag


def rootless_quartic_pattern(p: int, a: int, b: int) -> tuple[int, ...]:
    """(2, 2) or (4,) for a rootless 3-division quartic."""
    inv3 = pow(3, -1, p)
    mod_poly = [(-a * a) * inv3 % p, 12 * b * inv3 % p, 6 * a * inv3 % p, 0, 1]
    xp2 = nt.x_pow_mod(p * p, mod_poly, p)
    return (2, 2) if xp2 == [0, 1, 0, 0] else (4,)


CUBIC_PATTERN_BY_ROOTS = {0: (3,), 1: (2, 1), 3: (1, 1, 1)}
PSI3_PATTERN_BY_ROOTS = {1: (3, 1), 2: (2, 1, 1), 4: (1, 1, 1, 1)}


# ---------------------------------------------------------------------------
# j-invariants, heights, complex multiplication screen


def j_invariant(curve: ShortWeierstrass):
    """j = -1728 (4a)^3 / Delta, exact in the curve's base ring."""
    a = curve.a
    num = -1728 * 64 * a * a * a
    return _divide(num, curve.delta)


def height_logj(curve: ShortWeierstrass) -> float:
    """Logarithmic height of j for rational curves: log max(|num|, |den|)."""
    j = j_invariant(curve)
    if isinstance(j, Fraction):
        return math.log(max(abs(j.numerator), abs(j.denominator), 1))
    # power-basis element: crude height from the coefficient fractions
    coeffs = getattr(j, "coeffs", None)
    if coeffs is None:
        raise InvalidInputError("height supported for rational or power-basis j")
    m = max(max(abs(c.numerator), c.denominator) for c in coeffs)
    return math.log(max(m, 1))


# The thirteen rational j-invariants of curves with complex multiplication
# (orders of class number one; see Silverman, Advanced Topics in the
# Arithmetic of Elliptic Curves, Appendix A §3).
CM_J_INVARIANTS = {
    0: -3,
    54000: -12,
    -12288000: -27,
    1728: -4,
    287496: -16,
    -3375: -7,
    16581375: -28,
    8000: -8,
    -32768: -11,
    -884736: -19,
    -884736000: -43,
    -147197952000: -67,
    -262537412640768000: -163,
}


@dataclass(frozen=True)
class CMScreenResult:
    status: str  # "definitely-cm" | "not-cm-rational-j" | "unknown"
    j: object
    note: str = ""

    def to_json(self):
        return {"status": self.status, "j": str(self.j), "note": self.note}


def cm_screen(curve: ShortWeierstrass, moment_samples: Iterable[tuple[int, int]] = ()) -> CMScreenResult:
    """Flag curves whose j-invariant is one of the thirteen rational CM values.

    Non-rational j cannot be settled against the rational list; the verdict is
    then "unknown", optionally annotated with normalized trace moments from
    supplied (norm, a_p) samples (the fourth moment tends to 3 for CM curves
    and 2 otherwise).
    """
    j = j_invariant(curve)
    rational_j = None
    if isinstance(j, Fraction):
        if j.denominator == 1:
            rational_j = j.numerator
        else:
            return CMScreenResult("not-cm-rational-j", j, "non-integral j is never CM")
    elif hasattr(j, "as_rational"):
        rat = j.as_rational()
        if rat is not None and rat.denominator == 1:
            rational_j = rat.numerator
    if rational_j is not None:
        if rational_j in CM_J_INVARIANTS:
            return CMScreenResult("definitely-cm", j, f"CM discriminant {CM_J_INVARIANTS[rational_j]}")
        return CMScreenResult("not-cm-rational-j", j, "integral j not on the class-number-one list")
    samples = [(n, ap) for (n, ap) in moment_samples if n > 0]
    note = "j not rational; CM status undetermined"
    if samples:
        m2 = sum(ap * ap / n for n, ap in samples) / len(samples)
        m4 = sum((ap * ap / n) ** 2 for n, ap in samples) / len(samples)
        guess = "CM-like" if abs(m4 - 3) < abs(m4 - 2) else "non-CM-like"
        note += f"; normalized trace moments m2={m2:.2f}, m4={m4:.2f} ({guess})"
    return CMScreenResult("unknown", j, note)
