"""Monogenic number fields k = Q[x]/(f): power-basis arithmetic, degree-one
primes, and one-sided certificates that roots of a discriminant do not lie in
the cyclotomic closure of k.

The certificates rest on one fact: if the r-th root of Delta lies in
k^cyc = k * Q^cyc, the residue symbol of Delta at a degree-one prime (p, c)
is determined by p modulo a conductor supported on the primes dividing
2 * 3 * disc(f) * Norm(Delta).  Any incoherence with that shape (two primes
over the same p disagreeing, or every candidate character refuted) certifies
that the root is NOT cyclotomic.  The certificates never assert the positive
direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np
import sympy

from . import nt
from .errors import BadReductionError, InvalidInputError
from .verdict import Verdict, certified, inconclusive

_X = sympy.symbols("x")

CANDIDATE_CHARACTER_CAP = 4096
FACTOR_DIGIT_CAP = 70


class MonogenicField:
    """Q[x]/(f) for a monic irreducible integer polynomial f of degree >= 2."""

    def __init__(self, coeffs: Iterable[int]):
        coeffs = tuple(int(c) for c in coeffs)
        if len(coeffs) < 3 or coeffs[-1] != 1:
            raise InvalidInputError("need a monic integer polynomial of degree >= 2 (little-endian, leading 1)")
        self.coeffs = coeffs
        self.degree = len(coeffs) - 1
        poly = sympy.Poly(list(reversed(coeffs)), _X)
        if not poly.is_irreducible:
            raise InvalidInputError(f"{poly.as_expr()} is reducible over Q")
        self.disc_f = int(sympy.discriminant(poly))
        if self.disc_f == 0:
            raise InvalidInputError("polynomial has vanishing discriminant")
        self._poly = poly
        # reduction table: x^k mod f for k = d .. 2d-2, as integer rows
        d = self.degree
        rows = []
        rows.append([-c for c in coeffs[:d]])  # x^d
        for _ in range(d - 2):
            prev = rows[-1]
            shifted = [0] + prev[:-1]
            shifted = [s + prev[-1] * r for s, r in zip(shifted, rows[0])]
            rows.append(shifted)
        self._reduction_rows = rows

    def __eq__(self, other):
        return isinstance(other, MonogenicField) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"MonogenicField({self._poly.as_expr()})"

    def elem(self, coeffs) -> "FieldElem":
        coeffs = [Fraction(c) for c in coeffs]
        if len(coeffs) > self.degree:
            raise InvalidInputError("coefficient list longer than the field degree")
        coeffs += [Fraction(0)] * (self.degree - len(coeffs))
        return FieldElem(self, tuple(coeffs))

    def alpha(self) -> "FieldElem":
        return self.elem([0, 1])

    def zero(self) -> "FieldElem":
        return self.elem([])

    def one(self) -> "FieldElem":
        return self.elem([1])


@dataclass(frozen=True)
class FieldElem:
    """Element of a monogenic field in the power basis, exact rationals."""

    field: MonogenicField
    coeffs: tuple[Fraction, ...]

    def _check(self, other):
        if self.field != other.field:
            raise InvalidInputError("elements of different fields")

    def __add__(self, other):
        other = self._coerce(other)
        return FieldElem(self.field, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        other = self._coerce(other)
        return FieldElem(self.field, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return FieldElem(self.field, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        other = self._coerce(other)
        d = self.field.degree
        prod = [Fraction(0)] * (2 * d - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] += a * b
        out = prod[:d]
        for k in range(d, 2 * d - 1):
            c = prod[k]
            if c:
                row = self.field._reduction_rows[k - d]
                for j in range(d):
                    out[j] += c * row[j]
        return FieldElem(self.field, tuple(out))

    __rmul__ = __mul__
    __radd__ = __add__

    def __rsub__(self, other):
        return self._coerce(other) - self

    def _coerce(self, other):
        if isinstance(other, FieldElem):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.elem([other])
        return NotImplemented

    def __bool__(self):
        return any(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def as_rational(self) -> Fraction | None:
        if any(self.coeffs[1:]):
            return None
        return self.coeffs[0]

    def as_sympy(self):
        return sum(sympy.Rational(c.numerator, c.denominator) * _X**i for i, c in enumerate(self.coeffs))

    def inverse(self) -> "FieldElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero field element")
        g = sympy.Poly(self.as_sympy(), _X, domain="QQ")
        f = self.field._poly
        s, _, h = sympy.gcdex(g, f)
        if sympy.degree(h, _X) != 0:
            raise InvalidInputError("element not invertible (reducible modulus?)")
        inv = (s / h).as_poly(_X, domain="QQ")
        coeffs = [Fraction(0)] * self.field.degree
        for (i,), c in inv.terms():
            coeffs[i] = Fraction(int(sympy.numer(c)), int(sympy.denom(c)))
        return FieldElem(self.field, tuple(coeffs))

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def norm(self) -> Fraction:
        """Field norm: the resultant of f with the representing polynomial."""
        if self.is_zero():
            return Fraction(0)
        res = sympy.resultant(self.field._poly.as_expr(), self.as_sympy(), _X)
        res = sympy.Rational(res)
        return Fraction(int(sympy.numer(res)), int(sympy.denom(res)))

    def denominator_lcm(self) -> int:
        return math.lcm(*(c.denominator for c in self.coeffs))

    def __repr__(self):
        return f"FieldElem({list(self.coeffs)})"


class DegreeOnePrime(NamedTuple):
    """A degree-one prime (p, c) of Z[alpha]: f(c) = 0 mod p, p coprime to
    disc(f), with residue field F_p via alpha -> c."""

    p: int
    c: int


def degree_one_primes(
    K: MonogenicField,
    bound: int,
    congruence_filter: tuple[int, int] | None = None,
) -> list[DegreeOnePrime]:
    """All degree-one primes (p, c) with p <= bound, p coprime to disc(f),
    optionally restricted to p = d mod m."""
    if bound < 2:
        raise InvalidInputError("bound must be >= 2")
    out = []
    disc = abs(K.disc_f)
    for p in nt.primes_up_to(bound):
        if disc % p == 0:
            continue
        if congruence_filter is not None:
            d, m = congruence_filter
            if p % m != d % m:
                continue
        c = np.arange(p, dtype=np.int64)
        vals = np.zeros(p, dtype=np.int64)
        for coeff in reversed(K.coeffs):
            vals = (vals * c + coeff % p) % p
        for root in np.nonzero(vals == 0)[0].tolist():
            out.append(DegreeOnePrime(p, int(root)))
    return out


def reduce_elem(x: FieldElem, P: DegreeOnePrime) -> int:
    """Image of x in the residue field F_p of (p, c)."""
    p, c = P
    total = 0
    for i, coeff in enumerate(x.coeffs):
        if coeff.denominator % p == 0:
            raise BadReductionError(f"denominator divisible by p={p}")
        total += coeff.numerator * pow(coeff.denominator, -1, p) * pow(c, i, p)
    return total % p


# ---------------------------------------------------------------------------
# certificates


def _integerize_power_class(delta: FieldElem, r: int) -> FieldElem:
    """Multiply by an r-th power of a rational to land in Z[alpha] (this does
    not change the class of delta modulo r-th powers)."""
    t = delta.denominator_lcm()
    return delta * Fraction(t**r)


def _support_primes(K: MonogenicField, n: int) -> list[int] | None:
    """Odd primes dividing disc(f) * n; None when factoring is hopeless."""
    targets = abs(K.disc_f) * abs(n)
    if targets == 0:
        return None
    if len(str(targets)) > FACTOR_DIGIT_CAP:
        return None
    return sorted(q for q in nt.factorint(targets) if q != 2)


def sqrt_cyclotomic_certificate(
    delta: FieldElem,
    K: MonogenicField | None = None,
    prime_budget: int = 10**4,
    modulus_M: int | None = None,
) -> Verdict:
    """Certify sqrt(delta) not in k^cyc, by quadratic symbol incoherence.

    If sqrt(delta) were cyclotomic, p -> legendre(delta mod (p,c), p) would
    agree with a Kronecker symbol (D/p) for some fundamental discriminant D
    supported on the primes of the conductor bound.  The certificate refutes
    every candidate D (including the trivial one) at explicit degree-one
    primes, or finds two primes over one p with different symbols.  Failure
    to refute is reported as inconclusive, never as containment.
    """
    if K is None:
        K = delta.field
    if delta.is_zero():
        raise InvalidInputError("delta must be nonzero")
    d0 = _integerize_power_class(delta, 2)
    n = int(d0.norm())
    if modulus_M is not None:
        support = sorted(q for q in nt.factorint(modulus_M) if q != 2)
    else:
        support = _support_primes(K, n)
    if support is None:
        return inconclusive(reason="norm too large to factor for a conductor bound")
    candidates = _fundamental_discriminants(support)
    if len(candidates) > CANDIDATE_CHARACTER_CAP:
        return inconclusive(reason=f"too many candidate characters ({len(candidates)})")
    alive = {D: None for D in candidates}
    trivial_alive = True
    witnesses: list[dict] = []
    sym_by_p: dict[int, int] = {}
    bad = 2 * abs(K.disc_f) * abs(n)
    for P in degree_one_primes(K, prime_budget):
        if bad % P.p == 0:
            continue
        v = reduce_elem(d0, P)
        if v == 0:
            continue
        s = nt.legendre(v, P.p)
        prev = sym_by_p.get(P.p)
        if prev is not None and prev != s:
            witnesses.append({"kind": "same-norm incoherence", "p": P.p, "symbols": [prev, s]})
            return certified(*witnesses, mechanism="two degree-one primes over one p disagree")
        sym_by_p[P.p] = s
        if trivial_alive and s == -1:
            trivial_alive = False
            witnesses.append({"kind": "trivial character refuted", "p": P.p, "c": P.c, "symbol": s})
        for D in [D for D, w in alive.items() if w is None]:
            if nt.kronecker(D, P.p) != s:
                alive[D] = (P.p, P.c, s)
                witnesses.append({"kind": "character refuted", "D": D, "p": P.p, "c": P.c, "symbol": s})
        if not trivial_alive and all(w is not None for w in alive.values()):
            return certified(*witnesses, mechanism="all candidate quadratic characters refuted")
    survivors = [D for D, w in alive.items() if w is None] + (["trivial"] if trivial_alive else [])
    return inconclusive(
        surviving_characters=[str(s) for s in survivors],
        primes_scanned=len(sym_by_p),
        note="symbols consistent with a cyclotomic character within budget",
    )


def _fundamental_discriminants(support_odd_primes: list[int]) -> list[int]:
    """Nontrivial fundamental discriminants with prime support in the given
    odd primes and 2."""
    base = [1]
    for q in support_odd_primes:
        q_star = q if q % 4 == 1 else -q
        base = base + [b * q_star for b in base]
    out = []
    for b in base:
        for two_part in (1, -4, 8, -8):
            D = b * two_part
            if D != 1:
                out.append(D)
    return out


def cbrt_cyclotomic_certificate(
    delta: FieldElem,
    K: MonogenicField | None = None,
    prime_budget: int = 10**4,
    modulus_M: int | None = None,
) -> Verdict:
    """Certify the cube-root condition: either mu_3 is not in k (odd degree),
    or cbrt(delta) is not in k^cyc.

    Cube-ness of delta at degree-one primes p = 1 mod 3 would be a function
    of p modulo a bounded conductor if cbrt(delta) were cyclotomic.  Two
    primes over the same p with different cube-ness certify incoherence; for
    quadratic fields (where mu_3 in k forces k = Q(sqrt(-3)) up to the
    split condition) single cubic Dirichlet characters are also refuted.
    """
    if K is None:
        K = delta.field
    if delta.is_zero():
        raise InvalidInputError("delta must be nonzero")
    if K.degree % 2 == 1:
        return certified(
            {"kind": "degree parity", "degree": K.degree},
            mechanism="odd-degree fields contain no primitive cube root of unity",
        )
    d0 = _integerize_power_class(delta, 3)
    n = int(d0.norm())
    if modulus_M is not None:
        support = sorted(q for q in nt.factorint(modulus_M) if q not in (2, 3))
    else:
        support = _support_primes(K, 3 * n)
        if support is not None:
            support = [q for q in support if q != 3]
    use_characters = K.degree == 2 and support is not None
    cubic_mods = [q for q in (support or []) if q % 3 == 1] + [9]
    if use_characters:
        dlogs = {q: _dlog_table_mod(q) for q in cubic_mods}
        import itertools

        exps = [e for e in itertools.product(range(3), repeat=len(cubic_mods)) if any(e)]
        if len(exps) > CANDIDATE_CHARACTER_CAP:
            use_characters = False
        alive: dict[tuple, object] = {e: None for e in exps} if use_characters else {}
    else:
        alive = {}
    trivial_alive = True
    witnesses: list[dict] = []
    cube_by_p: dict[int, bool] = {}
    bad = 6 * abs(K.disc_f) * abs(n)
    for P in degree_one_primes(K, prime_budget, congruence_filter=(1, 3)):
        if bad % P.p == 0:
            continue
        v = reduce_elem(d0, P)
        if v == 0:
            continue
        is_cube = pow(v, (P.p - 1) // 3, P.p) == 1
        prev = cube_by_p.get(P.p)
        if prev is not None and prev != is_cube:
            witnesses.append({"kind": "same-norm incoherence", "p": P.p, "cube_flags": [prev, is_cube]})
            return certified(*witnesses, mechanism="two degree-one primes over one p disagree on cube-ness")
        cube_by_p[P.p] = is_cube
        if trivial_alive and not is_cube:
            trivial_alive = False
            witnesses.append({"kind": "trivial character refuted", "p": P.p, "c": P.c})
        if use_characters:
            for e in [e for e, w in alive.items() if w is None]:
                val = 0
                skip = False
                for q, eq in zip(cubic_mods, e):
                    if P.p % q == 0:
                        skip = True
                        break
                    val = (val + eq * dlogs[q][P.p % q]) % 3
                if skip:
                    continue
                if (val == 0) != is_cube:
                    alive[e] = (P.p, P.c)
                    witnesses.append({"kind": "character refuted", "exponents": list(e), "p": P.p})
            if not trivial_alive and all(w is not None for w in alive.values()):
                return certified(*witnesses, mechanism="all candidate cubic characters refuted")
    survivors = [str(e) for e, w in alive.items() if w is None] + (["trivial"] if trivial_alive else [])
    return inconclusive(
        surviving_characters=survivors,
        primes_scanned=len(cube_by_p),
        note="cube residues consistent with a cyclotomic character within budget",
    )


@lru_cache(maxsize=128)
def _dlog_table_mod(q: int) -> dict[int, int]:
    """x -> (discrete log of x mod q) mod 3, for the smallest primitive root.

    Defined for q = 9 and primes q = 1 mod 3 (where cube classes are proper).
    """
    if q == 9:
        gens = [2]
        order = 6
    else:
        order = q - 1
        gens = [g for g in range(2, q) if _is_primitive_root(g, q)][:1]
    g = gens[0]
    table = {}
    x = 1
    for k in range(order):
        table[x] = k % 3
        x = x * g % q
    return table


def _is_primitive_root(g: int, q: int) -> bool:
    order = q - 1
    for pf in nt.factorint(order):
        if pow(g, order // pf, q) == 1:
            return False
    return True


# ---------------------------------------------------------------------------
# roots of unity and cyclotomic intersection


def mu_n_membership(K: MonogenicField, n: int, prime_budget: int = 300) -> Verdict:
    """Is mu_n contained in k?  certified absence or consistent presence.

    phi(n) must divide the degree for containment; otherwise any degree-one
    prime p with p != 1 mod n (and p coprime to n disc f) is a witness of
    absence, since the residue field of a degree-one prime would have to
    contain n-th roots of unity.
    """
    if n < 2:
        raise InvalidInputError("n must be >= 2")
    phi = nt.euler_phi(n)
    if K.degree % phi != 0:
        return certified(
            {"kind": "degree argument", "phi": phi, "degree": K.degree},
            statement=f"mu_{n} not contained: phi({n}) = {phi} does not divide {K.degree}",
        )
    for P in degree_one_primes(K, prime_budget):
        if (n * K.disc_f) % P.p == 0:
            continue
        if P.p % n != 1:
            return certified(
                {"kind": "witness prime", "p": P.p, "c": P.c, "residue": P.p % n},
                statement=f"mu_{n} not contained: degree-one prime {P.p} is not 1 mod {n}",
            )
    return inconclusive(
        note=f"all degree-one primes up to {prime_budget} are 1 mod {n}; consistent with mu_{n} in k"
    )


def cyclotomic_intersection_certificate(K: MonogenicField, prime_budget: int = 200) -> Verdict:
    """Certify k intersect Q^cyc = Q for odd prime degree fields.

    A prime-degree field has no intermediate subfields, so a nontrivial
    cyclotomic intersection forces k itself to be abelian, hence cyclic of
    odd prime order, which makes disc(f) a square and every unramified
    Frobenius factor pattern equal-degree.  A nonsquare discriminant or an
    unequal-degree pattern therefore certifies the trivial intersection.
    """
    d = K.degree
    if d == 2 or not _is_prime(d):
        return inconclusive(note="certificate applies to odd prime degrees only")
    if K.disc_f < 0 or not nt.is_perfect_square(K.disc_f):
        return certified(
            {"kind": "nonsquare discriminant", "disc": K.disc_f},
            statement="Galois closure is non-abelian, so no subfield lies in Q^cyc",
        )
    for p in nt.primes_up_to(prime_budget):
        if K.disc_f % p == 0:
            continue
        degs = nt.factor_degrees_mod_p(list(K.coeffs), p)
        if len(set(degs)) > 1:
            return certified(
                {"kind": "unequal factor pattern", "p": p, "pattern": degs},
                statement="Frobenius cycle type rules out a cyclic (abelian) Galois group",
            )
    return inconclusive(note="consistent with an abelian (cyclotomic) field; not certified")


def _is_prime(x: int) -> bool:
    if x < 2:
        return False
    return all(x % p for p in range(2, math.isqrt(x) + 1))
