"""Small number-theory helpers used throughout the package."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import sympy


def primes_up_to(bound: int) -> list[int]:
    """All primes p <= bound, ascending."""
    if bound < 2:
        return []
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(bound) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


def legendre(a: int, p: int) -> int:
    """Quadratic residue symbol (a/p) in {-1, 0, 1} for odd prime p."""
    a %= p
    if a == 0:
        return 0
    r = pow(a, (p - 1) // 2, p)
    return 1 if r == 1 else -1


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for n >= 1."""
    if n == 0:
        return 1 if d in (1, -1) else 0
    if n < 0:
        raise ValueError("kronecker defined here for n >= 1 only")
    result = 1
    # split off the 2-part of n
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        if d % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    dd = d % n
    if dd == 0:
        return 0
    return result * int(sympy.jacobi_symbol(dd, n))


def is_perfect_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def factorint(n: int) -> dict[int, int]:
    """Prime factorization of |n| (delegates to sympy)."""
    return {int(p): int(e) for p, e in sympy.factorint(abs(n)).items()}


def unit_residues(m: int) -> list[int]:
    return [u for u in range(m) if math.gcd(u, m) == 1]


def euler_phi(m: int) -> int:
    return len(unit_residues(m)) if m < 10**4 else int(sympy.totient(m))


def poly_mulmod(f: list[int], g: list[int], mod_poly: list[int], p: int) -> list[int]:
    """Product of f and g modulo (mod_poly, p); mod_poly monic, little-endian."""
    prod = [0] * (len(f) + len(g) - 1)
    for i, fi in enumerate(f):
        if fi:
            for j, gj in enumerate(g):
                prod[i + j] = (prod[i + j] + fi * gj) % p
    d = len(mod_poly) - 1
    for i in range(len(prod) - 1, d - 1, -1):
        c = prod[i]
        if c:
            shift = i - d
            for j in range(d):
                prod[shift + j] = (prod[shift + j] - c * mod_poly[j]) % p
            prod[i] = 0
    out = [c % p for c in prod[:d]]
    return out + [0] * (d - len(out))


def x_pow_mod(e: int, mod_poly: list[int], p: int) -> list[int]:
    """x^e modulo (mod_poly, p)."""
    d = len(mod_poly) - 1
    result = [1] + [0] * (d - 1)
    base = ([0, 1] + [0] * (d - 2))[:d]
    if d == 1:
        base = [(-mod_poly[0]) % p]
    while e:
        if e & 1:
            result = poly_mulmod(result, base, mod_poly, p)
        base = poly_mulmod(base, base, mod_poly, p)
        e >>= 1
    return result


def poly_gcd_mod_p(f: list[int], g: list[int], p: int) -> list[int]:
    """Monic gcd of two polynomials over F_p (little-endian)."""

    def trim(h):
        while h and h[-1] % p == 0:
            h = h[:-1]
        return [c % p for c in h]

    f, g = trim(f), trim(g)
    while g:
        inv = pow(g[-1], -1, p)
        g = [c * inv % p for c in g]
        while len(f) >= len(g):
            if not f:
                break
            c = f[-1]
            shift = len(f) - len(g)
            f = [(fi - c * g[i - shift]) % p if i >= shift else fi for i, fi in enumerate(f)]
            f = trim(f)
        f, g = g, f
    if not f:
        return []
    inv = pow(f[-1], -1, p)
    return [c * inv % p for c in f]


def factor_degrees_mod_p(coeffs: list[int], p: int) -> list[int]:
    """Degrees of the irreducible factors of a squarefree monic poly mod p.

    Distinct-degree factorization: gcd with x^(p^i) - x peels off the product
    of all degree-i factors.
    """
    f = [c % p for c in coeffs]
    degrees = []
    i = 1
    while len(f) - 1 >= 1:
        d = len(f) - 1
        if i > d:
            break
        xpi = x_pow_mod(p**i, f, p)
        xpi_minus_x = list(xpi)
        if len(xpi_minus_x) < 2:
            xpi_minus_x = xpi_minus_x + [0] * (2 - len(xpi_minus_x))
        xpi_minus_x[1] = (xpi_minus_x[1] - 1) % p
        g = poly_gcd_mod_p(f, xpi_minus_x, p)
        if len(g) - 1 >= 1:
            degrees.extend([i] * ((len(g) - 1) // i))
            f = poly_divexact_mod_p(f, g, p)
        i += 1
    if len(f) - 1 >= 1:
        degrees.append(len(f) - 1)
    return sorted(degrees, reverse=True)


def poly_divexact_mod_p(f: list[int], g: list[int], p: int) -> list[int]:
    """Exact quotient f / g over F_p (g monic, assumed to divide f)."""
    f = [c % p for c in f]
    out = [0] * (len(f) - len(g) + 1)
    while f and len(f) >= len(g):
        c = f[-1]
        k = len(f) - len(g)
        out[k] = c
        f = [(fi - c * g[i - k]) % p if i >= k else fi for i, fi in enumerate(f)]
        while f and f[-1] == 0:
            f.pop()
    return out


def rational_roots_of_monic_cubic(a: Fraction | int, b: Fraction | int) -> list[Fraction]:
    """Rational roots of x^3 + a*x + b with rational a, b."""
    a, b = Fraction(a), Fraction(b)
    # clear denominators: x = y/t turns the cubic into a monic integer one
    t = math.lcm(a.denominator, b.denominator)
    # y^3 + (a t^2) y + (b t^3) = 0 with y = t x; coefficients are integers
    A = a * t * t
    B = b * t * t * t
    assert A.denominator == 1 and B.denominator == 1
    A, B = int(A), int(B)
    if B == 0:
        roots = {Fraction(0)}
        roots.update(Fraction(r, t) for r in _integer_roots_quadratic(A))
        return sorted(roots)
    cands = set()
    for d in sympy.divisors(abs(B)):
        for y in (d, -d):
            if y * y * y + A * y + B == 0:
                cands.add(Fraction(y, t))
    return sorted(cands)


def _integer_roots_quadratic(A: int) -> list[int]:
    # integer roots of y^2 + A = 0
    if A > 0:
        return []
    if A == 0:
        return [0]
    r = math.isqrt(-A)
    return [r, -r] if r * r == -A else []
