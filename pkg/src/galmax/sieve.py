"""Box scans, equidistribution reports, and the large-sieve bound evaluator.

Boxes are sup-norm boxes of short Weierstrass coefficients.  Scans batch the
per-prime work across every curve in the box (one pass over x in F_p updates
traces and splitting data for all curves at once), which keeps a full
Serre-criterion scan over tens of thousands of curves in the minutes range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator

import numpy as np

from . import certify, ecff, modgroup, nt
from .errors import InvalidInputError, ResourceCapError

BOX_X_CAP = 400
SERRE_SCAN_X_CAP = 200


@dataclass(frozen=True)
class BoxSpec:
    """Sup-norm box: integer pairs (a, b) with max(|a|, |b|) <= x, Delta != 0.

    Over a monogenic field the box ranges over power-basis coefficient
    vectors with every coordinate bounded by x.
    """

    x: int
    field: object | None = None


def enumerate_box(spec: BoxSpec | int) -> Iterator:
    """Yield the nonsingular coefficient pairs of the box."""
    if not isinstance(spec, BoxSpec):
        spec = BoxSpec(int(spec))
    x = spec.x
    if x < 0:
        raise InvalidInputError("box bound must be >= 0")
    if spec.field is None:
        if x > BOX_X_CAP:
            raise ResourceCapError(f"box bound {x} exceeds cap {BOX_X_CAP}")
        for a in range(-x, x + 1):
            for b in range(-x, x + 1):
                if ecff.discriminant(a, b) != 0:
                    yield (a, b)
        return
    K = spec.field
    if (2 * x + 1) ** (2 * K.degree) > 10**6:
        raise ResourceCapError("field box too large")
    rng = range(-x, x + 1)
    for avec in product(rng, repeat=K.degree):
        a = K.elem(list(avec))
        for bvec in product(rng, repeat=K.degree):
            b = K.elem(list(bvec))
            if not ecff.discriminant(a, b).is_zero():
                yield (a, b)


def box_count(x: int) -> int:
    """|box(x)| over Z: (2x+1)^2 minus the singular pairs (-3t^2, 2t^3)."""
    total = (2 * x + 1) ** 2
    singular = 0
    t = 0
    while 3 * t * t <= x and 2 * t * t * t <= x:
        singular += 1 if t == 0 else 2
        t += 1
    return total - singular


# ---------------------------------------------------------------------------
# batched signature collection over a box


def batch_signatures(pairs: list[tuple[int, int]], prime_bound: int) -> list[list[certify.FrobSignature]]:
    """Frobenius signatures for every curve in the list, batched per prime."""
    n = len(pairs)
    A = np.array([p[0] for p in pairs], dtype=np.int64)
    B = np.array([p[1] for p in pairs], dtype=np.int64)
    deltas = np.array([ecff.discriminant(int(a), int(b)) for a, b in pairs], dtype=object)
    sigs: list[list[certify.FrobSignature]] = [[] for _ in range(n)]
    for p in nt.primes_up_to(prime_bound):
        if p < 5:
            continue
        good = np.array([int(d % p) != 0 for d in deltas])
        if not good.any():
            continue
        idx = np.nonzero(good)[0]
        ap, croots, qroots, qflag = ecff.batch_curve_data(p, A[idx], B[idx])
        rootless = np.nonzero(qroots == 0)[0]
        split22 = {}
        if rootless.size:
            flags = batch_rootless_split(p, (A[idx][rootless] % p), (B[idx][rootless] % p))
            split22 = {int(rootless[k]): bool(flags[k]) for k in range(rootless.size)}
        for k in range(idx.size):
            nr = int(qroots[k])
            if nr == 0:
                pat = (2, 2) if split22[k] else (4,)
            else:
                pat = ecff.PSI3_PATTERN_BY_ROOTS[nr]
            sigs[int(idx[k])].append(
                certify.FrobSignature(
                    norm=p,
                    ap=int(ap[k]),
                    p=p,
                    cubic_pattern=ecff.CUBIC_PATTERN_BY_ROOTS[int(croots[k])],
                    psi3_pattern=pat,
                    has_3pt=bool(qflag[k]),
                )
            )
    return sigs


def batch_rootless_split(p: int, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """For rootless 3-division quartics: True where the pattern is (2, 2).

    Vectorized computation of x^(p^2) modulo each monic quartic
    x^4 + 2a x^2 + 4b x - a^2/3 across all curves at once.
    """
    n = A.shape[0]
    inv3 = pow(3, -1, p)
    # mod_poly rows: [c0, c1, c2, 0] with monic degree 4 implied
    c0 = (-(A * A) * inv3) % p
    c1 = (12 * B * inv3) % p
    c2 = (6 * A * inv3) % p
    zeros = np.zeros(n, dtype=np.int64)
    mod_tail = np.stack([c0, c1, c2, zeros], axis=1)  # coefficients of x^0..x^3

    def mulmod(f, g):
        # f, g: (n, 4) -> product mod (x^4 + tail), all mod p
        conv = np.zeros((n, 7), dtype=np.int64)
        for i in range(4):
            for j in range(4):
                conv[:, i + j] = (conv[:, i + j] + f[:, i] * g[:, j]) % p
        for deg in (6, 5, 4):
            c = conv[:, deg]
            # x^deg = x^(deg-4) * (-tail)
            for j in range(4):
                conv[:, deg - 4 + j] = (conv[:, deg - 4 + j] - c * mod_tail[:, j]) % p
            conv[:, deg] = 0
        return conv[:, :4] % p

    result = np.zeros((n, 4), dtype=np.int64)
    result[:, 0] = 1
    base = np.zeros((n, 4), dtype=np.int64)
    base[:, 1] = 1
    e = p * p
    while e:
        if e & 1:
            result = mulmod(result, base)
        base = mulmod(base, base)
        e >>= 1
    is_x = (result[:, 1] == 1) & (result[:, 0] == 0) & (result[:, 2] == 0) & (result[:, 3] == 0)
    return is_x


# ---------------------------------------------------------------------------
# density scans


@dataclass
class ScanRow:
    x: int
    total: int
    failures: int

    @property
    def proportion(self) -> float:
        return self.failures / self.total if self.total else 0.0

    def to_json(self):
        return {"x": self.x, "total": self.total, "failures": self.failures, "proportion": self.proportion}


@dataclass
class ScanReport:
    check: str
    rows: list[ScanRow]
    params: dict
    caveats: list[str] = dc_field(default_factory=list)

    @property
    def nonincreasing(self) -> bool:
        props = [r.proportion for r in self.rows]
        return all(b <= a + 1e-12 for a, b in zip(props, props[1:]))

    def to_json(self):
        return {
            "check": self.check,
            "params": self.params,
            "rows": [r.to_json() for r in self.rows],
            "nonincreasing_trend": self.nonincreasing,
            "caveats": self.caveats,
        }


def density_scan(
    xs: Iterable[int],
    check: str = "serre",
    params: certify.CertParams | None = None,
    ell: int = 5,
) -> ScanReport:
    """Proportion of box curves failing the chosen certification check.

    checks: "serre" (full Serre criterion), "mod-ell" (single prime l),
    "disc-square" (discriminant a perfect square : exact arithmetic count).
    The asymptotic decay exponents are NOT reproducible at desk scale; the
    report only exhibits the trend.
    """
    xs = [int(x) for x in xs]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise InvalidInputError("xs must be strictly increasing")
    if params is None:
        params = certify.CertParams(prime_bound=500, l_max=13)
    rows = []
    for x in xs:
        if check == "serre" and x > SERRE_SCAN_X_CAP:
            raise ResourceCapError(f"serre scan bound {x} exceeds cap {SERRE_SCAN_X_CAP}")
        pairs = list(enumerate_box(x))
        if not pairs:
            rows.append(ScanRow(x, 0, 0))
            continue
        if check == "disc-square":
            failures = sum(1 for a, b in pairs if _is_square(ecff.discriminant(a, b)))
        elif check == "serre":
            failures = _serre_failures(pairs, params)
        elif check == "mod-ell":
            failures = _mod_ell_failures(pairs, params, ell)
        else:
            raise InvalidInputError(f"unknown check {check!r}")
        rows.append(ScanRow(x, len(pairs), failures))
    caveats = [
        "desk-scale trend check only; asymptotic exponents are out of reach at these box sizes",
    ]
    return ScanReport(check=check, rows=rows, params={"prime_bound": params.prime_bound, "l_max": params.l_max, "ell": ell}, caveats=caveats)


def _is_square(n) -> bool:
    return n >= 0 and math.isqrt(int(n)) ** 2 == int(n)


def _serre_failures(pairs, params) -> int:
    sigs_by_curve = batch_signatures(pairs, params.prime_bound)
    failures = 0
    for (a, b), sigs in zip(pairs, sigs_by_curve):
        verdict = certify.serre_verdict_from_signatures(a, b, sigs, params)
        if not verdict.is_certified and not verdict.is_obstruction:
            failures += 1
        elif verdict.is_obstruction:
            failures += 1
    return failures


def _mod_ell_failures(pairs, params, ell) -> int:
    sigs_by_curve = batch_signatures(pairs, params.prime_bound)
    return sum(1 for sigs in sigs_by_curve if not certify.certify_mod_ell(sigs, ell).is_certified)


# ---------------------------------------------------------------------------
# equidistribution report


@dataclass
class OmegaRow:
    p: int
    pattern: tuple
    observed: int
    frequency: float
    predicted: float
    deviation_sqrtp: float
    tolerance: float  # m^5 / sqrt(p) with safety factor 1; hard failure at 3x

    @property
    def within_tolerance(self) -> bool:
        return self.deviation_sqrtp <= self.tolerance * math.sqrt(self.p)

    @property
    def hard_fail(self) -> bool:
        return self.deviation_sqrtp > 3 * self.tolerance * math.sqrt(self.p)

    def to_json(self):
        return {
            "p": self.p,
            "pattern": list(self.pattern),
            "observed": self.observed,
            "frequency": self.frequency,
            "predicted": self.predicted,
            "deviation_times_sqrt_p": self.deviation_sqrtp,
            "tolerance": self.tolerance,
            "within_tolerance": self.within_tolerance,
        }


def omega_report(p_list: Iterable[int], m: int = 2) -> list[OmegaRow]:
    """Observed vs predicted class frequencies for the mod-2 splitting scan.

    Predictions are |C| / |SL2(Z/2)| = (1/6, 1/2, 1/3) for the three
    conjugacy classes, read off the group engine rather than hard-coded.
    """
    if m != 2:
        raise InvalidInputError("omega reports are implemented for m = 2")
    classes = modgroup.conjugacy_classes(2, "GL2", det_filter=1)
    sl2_order = modgroup.sl2_order(2)
    pattern_of_class = {}
    from .subgroups import PATTERN2

    for cl in classes:
        pattern_of_class[PATTERN2[cl.representative.code()]] = cl.size
    rows = []
    for p in sorted(set(int(p) for p in p_list)):
        counts = ecff.omega_counts_mod2(p)
        for pattern in sorted(pattern_of_class, reverse=True):
            predicted = pattern_of_class[pattern] / sl2_order
            freq = counts[pattern] / p**2
            rows.append(
                OmegaRow(
                    p=p,
                    pattern=pattern,
                    observed=counts[pattern],
                    frequency=freq,
                    predicted=predicted,
                    deviation_sqrtp=abs(freq - predicted) * math.sqrt(p),
                    tolerance=m**5 / math.sqrt(p),
                )
            )
    return rows


# ---------------------------------------------------------------------------
# large sieve bound


def sieve_bound(
    omega: dict[int, Fraction],
    Q: int,
    x: float | None = None,
    degree: int = 1,
    rank: int = 2,
) -> tuple[Fraction, float | None]:
    """Exact L(Q) and the sieve bound shape (x^(degree*rank) + Q^(2*rank)) / L(Q).

    L(Q) sums, over squarefree q <= Q supported on the given primes, the
    products of omega_p / (1 - omega_p).  The implied constant of the bound
    is reported as 1: shape only, not a certified inequality.
    """
    if Q < 1:
        raise InvalidInputError("Q must be >= 1")
    ratios = {}
    for p, w in omega.items():
        w = Fraction(w)
        if not (0 <= w < 1):
            raise InvalidInputError(f"omega_{p} = {w} outside [0, 1)")
        if w > 0:
            ratios[int(p)] = w / (1 - w)
    total = Fraction(0)
    primes = sorted(ratios)

    def expand(i: int, prod_val: int, prod_ratio: Fraction):
        nonlocal total
        total += prod_ratio
        for j in range(i, len(primes)):
            q = primes[j]
            if prod_val * q > Q:
                continue
            expand(j + 1, prod_val * q, prod_ratio * ratios[q])

    expand(0, 1, Fraction(1))
    if x is None:
        return total, None
    bound = (x ** (degree * rank) + Q ** (2 * rank)) / float(total)
    return total, bound
