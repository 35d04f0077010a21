"""Subgroup enumeration and signature tables for small GL2/SL2 over Z/mZ.

Two engines live here:

* ``SmallGroupTable`` holds a dense Cayley table for a materialized group of
  modest order and supports exact subgroup-lattice enumeration by cyclic
  extension.  Every subgroup of a solvable group has a subnormal chain with
  prime cyclic quotients, so repeatedly extending known subgroups K by
  normalizing elements g with g^p in K finds the complete lattice whenever the
  ambient group is solvable.  For GL2/SL2 over F_5 and F_7 the non-solvable
  subgroups are exactly the determinant preimages containing SL2, which are
  appended explicitly.

* ``subgroup_signature_table`` builds, for a modulus m in {2, 3, 4, 9} or a
  prime up to 13, the proper subgroups H with surjective determinant not
  containing SL2, together with the set of Frobenius-visible signatures each
  can produce.  For m <= 4 the table is the literal full lattice; for primes
  and for m = 9 it consists of the maximal such subgroups, which eliminate
  exactly the same observation sets (any smaller subgroup realizes a subset
  of the signatures of a maximal one).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import modgroup as mg
from .errors import InvalidInputError, ResourceCapError

LATTICE_ORDER_CAP = 2600


class SmallGroupTable:
    """Dense multiplication table over the element list of a small group."""

    def __init__(self, codes: np.ndarray, m: int, label: str = ""):
        if codes.size > LATTICE_ORDER_CAP:
            raise ResourceCapError(f"group of order {codes.size} exceeds lattice cap {LATTICE_ORDER_CAP}")
        self.m = m
        self.label = label
        self.codes = np.sort(np.asarray(codes, dtype=np.int64))
        self.n = int(self.codes.size)
        self.index_of_code = np.full(m**4, -1, dtype=np.int64)
        self.index_of_code[self.codes] = np.arange(self.n)
        self.cayley = np.empty((self.n, self.n), dtype=np.int32)
        for i in range(self.n):
            g = mg.mat_from_code(int(self.codes[i]), m)
            self.cayley[i] = self.index_of_code[mg.mul_codes_left(g, self.codes)]
        self.identity = int(self.index_of_code[mg.identity(m).code()])
        # inverse: the unique j with i*j = identity
        self.inv = np.empty(self.n, dtype=np.int32)
        rows, cols = np.nonzero(self.cayley == self.identity)
        self.inv[rows] = cols
        self.order_of = self._element_orders()

    @classmethod
    def for_group(cls, m: int, ambient: mg.Ambient) -> "SmallGroupTable":
        G = mg.enumerate_group(m, ambient)
        return cls(G.code_array(), m, label=G.label or "")

    def _element_orders(self) -> np.ndarray:
        orders = np.zeros(self.n, dtype=np.int64)
        for i in range(self.n):
            k, x = 1, i
            while x != self.identity:
                x = int(self.cayley[x, i])
                k += 1
            orders[i] = k
        return orders

    def power_map(self, p: int) -> np.ndarray:
        out = np.arange(self.n, dtype=np.int64)
        base = np.arange(self.n)
        acc = np.full(self.n, self.identity, dtype=np.int64)
        e = p
        cur = base.copy()
        while e:
            if e & 1:
                acc = self.cayley[acc, cur]
            cur = self.cayley[cur, cur]
            e >>= 1
        return acc

    def conj_perm(self, g: int) -> np.ndarray:
        """Permutation x -> g x g^-1 as an index array."""
        return self.cayley[self.cayley[g, :], self.inv[g]]

    def closure_mask(self, seeds) -> np.ndarray:
        seeds = list(dict.fromkeys(int(s) for s in seeds))
        mask = np.zeros(self.n, dtype=bool)
        mask[self.identity] = True
        for s in seeds:
            mask[s] = True
        frontier = np.array(sorted({*seeds, self.identity}), dtype=np.int64)
        while frontier.size:
            new = []
            for s in seeds:
                prod = self.cayley[frontier, s]
                fresh = prod[~mask[prod]]
                if fresh.size:
                    fresh = np.unique(fresh)
                    mask[fresh] = True
                    new.append(fresh)
            frontier = np.unique(np.concatenate(new)) if new else np.array([], dtype=np.int64)
        return mask

    def normalizes(self, g: int, mask: np.ndarray, members: np.ndarray) -> bool:
        image = self.cayley[self.cayley[g, members], self.inv[g]]
        return bool(mask[image].all())

    def subgroup_lattice(self, allow_nonsolvable_completion: bool = True) -> list[np.ndarray]:
        """All subgroups, as boolean masks over the element list.

        Exact for solvable groups; for GL2/SL2 over F_5 and F_7 the SL2-
        containing subgroups are appended (every non-solvable subgroup there
        contains SL2, since the proper subgroups of SL2(F_l) are solvable for
        l in {5, 7}).
        """
        order_primes = sorted({p for p in _prime_divisors(self.n)})
        solvable = set(order_primes) <= {2, 3}
        if not solvable:
            if not (allow_nonsolvable_completion and self._is_gl2_like_57()):
                raise InvalidInputError(
                    f"exhaustive lattice supported only for solvable ambients or GL2/SL2 mod 5, 7 (order {self.n})"
                )
        pow_maps = {p: self.power_map(p) for p in order_primes}
        trivial = np.zeros(self.n, dtype=bool)
        trivial[self.identity] = True
        found: dict[bytes, np.ndarray] = {trivial.tobytes(): trivial}
        queue = [trivial]
        all_idx = np.arange(self.n)
        while queue:
            K = queue.pop()
            members = all_idx[K]
            for p in order_primes:
                cand = all_idx[~K & K[pow_maps[p]]]
                for g in cand:
                    if not self.normalizes(int(g), K, members):
                        continue
                    H = K.copy()
                    x = int(g)
                    for _ in range(p - 1):
                        H[self.cayley[x, members]] = True
                        x = int(self.cayley[x, g])
                    key = H.tobytes()
                    if key not in found:
                        found[key] = H
                        queue.append(H)
        masks = list(found.values())
        if not solvable:
            masks.extend(self._sl2_overgroup_masks())
            dedup = {m_.tobytes(): m_ for m_ in masks}
            masks = list(dedup.values())
        return masks

    def _is_gl2_like_57(self) -> bool:
        return self.m in (5, 7)

    def _sl2_overgroup_masks(self) -> list[np.ndarray]:
        dets = mg.det_of_codes(self.codes, self.m)
        sl2_mask = dets == 1
        units = [u for u in range(1, self.m) if math.gcd(u, self.m) == 1]
        masks = []
        for u in units:
            # subgroup of units generated by u
            sub = {1}
            x = u
            while x not in sub:
                sub.add(x)
                x = (x * u) % self.m
            masks.append(np.isin(dets, sorted(sub)))
        # always include SL2 itself
        masks.append(sl2_mask)
        return masks

    def conjugacy_orbit_of_subgroup(self, mask: np.ndarray, gen_idxs: list[int]) -> list[np.ndarray]:
        seen = {mask.tobytes(): mask}
        frontier = [mask]
        while frontier:
            cur = frontier.pop()
            members = np.nonzero(cur)[0]
            for g in gen_idxs:
                image_members = self.cayley[self.cayley[g, members], self.inv[g]]
                img = np.zeros(self.n, dtype=bool)
                img[image_members] = True
                key = img.tobytes()
                if key not in seen:
                    seen[key] = img
                    frontier.append(img)
        return list(seen.values())

    def generator_idxs(self) -> list[int]:
        gens = mg.sl2_generators(self.m) if self._looks_sl2() else mg.gl2_generators(self.m)
        idxs = []
        for g in gens:
            i = int(self.index_of_code[g.code()])
            if i >= 0:
                idxs.append(i)
        if not idxs:
            idxs = list(range(min(self.n, 8)))
        return idxs

    def _looks_sl2(self) -> bool:
        return self.n == mg.sl2_order(self.m)

    def mask_to_codes(self, mask: np.ndarray) -> np.ndarray:
        return self.codes[mask]

    def mask_to_handle(self, mask: np.ndarray, label: str | None = None) -> mg.SubgroupHandle:
        codes = self.mask_to_codes(mask)
        gens = _small_generating_set(self, mask)
        return mg.SubgroupHandle(self.m, tuple(mg.mat_from_code(int(c), self.m) for c in gens), tuple(int(c) for c in codes), label)


def _small_generating_set(table: SmallGroupTable, mask: np.ndarray) -> list[int]:
    """Greedy generating set (by codes) for the subgroup given by mask."""
    members = np.nonzero(mask)[0]
    got = np.zeros(table.n, dtype=bool)
    got[table.identity] = True
    gens: list[int] = []
    target = int(mask.sum())
    for i in members[np.argsort(-table.order_of[members])]:
        if got[i]:
            continue
        gens.append(int(i))
        got = table.closure_mask(gens)
        if int(got.sum()) == target:
            break
    return [int(table.codes[i]) for i in gens]


def _prime_divisors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=32)
def subgroup_lattice(m: int, ambient: mg.Ambient) -> tuple[mg.SubgroupHandle, ...]:
    """Every subgroup of the ambient group, as handles (exact; see caps)."""
    table = SmallGroupTable.for_group(m, ambient)
    masks = table.subgroup_lattice()
    handles = tuple(table.mask_to_handle(msk) for msk in masks)
    return handles


# ---------------------------------------------------------------------------
# signature tables


@dataclass(frozen=True)
class TableEntry:
    label: str
    order: int
    n_conjugates: int
    codes: tuple[int, ...]
    signatures: frozenset

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "order": self.order,
            "n_conjugates": self.n_conjugates,
            "n_signatures": len(self.signatures),
        }


@dataclass(frozen=True)
class SignatureTable:
    """Proper full-determinant subgroups (not containing SL2) and their signatures."""

    m: int
    entries: tuple[TableEntry, ...]
    full_signatures: frozenset
    scope: str  # "all-subgroups" or "maximal-only"

    @property
    def total_subgroups(self) -> int:
        return sum(e.n_conjugates for e in self.entries)


def _pattern2_lookup() -> dict[int, tuple[int, ...]]:
    """Cycle type of each invertible mod-2 matrix on the 3 nonzero vectors."""
    out = {}
    vecs = [(0, 1), (1, 0), (1, 1)]
    for code in range(16):
        M = mg.mat_from_code(code, 2)
        if math.gcd(M.det, 2) != 1:
            continue
        perm = {}
        for v in vecs:
            w = ((M.a * v[0] + M.b * v[1]) % 2, (M.c * v[0] + M.d * v[1]) % 2)
            perm[v] = w
        out[code] = _cycle_type(perm)
    return out


def _pattern3_lookup() -> dict[int, tuple[tuple[int, ...], bool]]:
    """Cycle type on the 4 lines of F_3^2 plus has-fixed-nonzero-vector flag."""
    out = {}
    lines = [(0, 1), (1, 0), (1, 1), (1, 2)]

    def normalize(v):
        x, y = v[0] % 3, v[1] % 3
        if x == 0 and y == 0:
            return None
        lead = x if x != 0 else y
        inv = 1 if lead == 1 else 2
        return ((x * inv) % 3, (y * inv) % 3)

    for code in range(81):
        M = mg.mat_from_code(code, 3)
        if math.gcd(M.det, 3) != 1:
            continue
        perm = {}
        for v in lines:
            w = normalize(((M.a * v[0] + M.b * v[1]), (M.c * v[0] + M.d * v[1])))
            perm[v] = w
        ct = _cycle_type(perm)
        # eigenvalue 1 exists iff char poly vanishes at 1
        flag = (1 - M.trace + M.det) % 3 == 0
        out[code] = (ct, flag)
    return out


def _cycle_type(perm: dict) -> tuple[int, ...]:
    seen = set()
    lens = []
    for start in perm:
        if start in seen:
            continue
        k, x = 1, perm[start]
        seen.add(start)
        while x != start:
            seen.add(x)
            x = perm[x]
            k += 1
        lens.append(k)
    return tuple(sorted(lens, reverse=True))


PATTERN2 = _pattern2_lookup()
PATTERN3 = _pattern3_lookup()


def signatures_of_codes(codes: np.ndarray, m: int) -> frozenset:
    """Frobenius-visible signatures of a set of matrices mod m.

    m = 4: (trace, det, splitting pattern of the mod-2 action on the three
    2-torsion points).  m = 9: (trace, det, line pattern of the mod-3 action,
    fixed-vector flag).  prime m: (trace, det).
    """
    codes = np.asarray(codes, dtype=np.int64)
    tr = mg.trace_of_codes(codes, m)
    dt = mg.det_of_codes(codes, m)
    if m in (2, 4, 8):
        red = mg.reduce_codes(codes, m, 2)
        return frozenset(
            (int(t), int(d), PATTERN2[int(r)]) for t, d, r in zip(tr, dt, red)
        )
    if m in (3, 9):
        red = mg.reduce_codes(codes, m, 3)
        return frozenset(
            (int(t), int(d)) + PATTERN3[int(r)] for t, d, r in zip(tr, dt, red)
        )
    return frozenset((int(t), int(d)) for t, d in zip(tr, dt))


def _det_is_full(codes: np.ndarray, m: int) -> bool:
    dets = set(int(d) for d in mg.det_of_codes(codes, m))
    units = {u for u in range(m) if math.gcd(u, m) == 1} or {0}
    if m == 1:
        return True
    return dets == units


@lru_cache(maxsize=16)
def subgroup_signature_table(m: int) -> SignatureTable:
    """Signature table used for elimination-style certification at level m."""
    if m in (2, 3, 4):
        return _table_from_lattice(m)
    if m == 8:
        return _table_mod8()
    if m == 9:
        return _table_mod9()
    if m in (5, 7, 11, 13):
        return _table_prime(m)
    raise InvalidInputError(f"signature tables are built for m in {{2,3,4,8,9}} or primes <= 13, got {m}")


def _table_from_lattice(m: int) -> SignatureTable:
    table = SmallGroupTable.for_group(m, "GL2")
    masks = table.subgroup_lattice()
    sl2_codes = mg.enumerate_group(m, "SL2").code_array()
    sl2_set = set(int(c) for c in sl2_codes)
    gen_idxs = table.generator_idxs()
    picked: list[tuple[np.ndarray, int]] = []
    seen: set[bytes] = set()
    for msk in masks:
        codes = table.mask_to_codes(msk)
        if codes.size == table.n:
            continue
        if not _det_is_full(codes, m):
            continue
        if sl2_set <= set(int(c) for c in codes):
            continue
        if msk.tobytes() in seen:
            continue
        orbit = table.conjugacy_orbit_of_subgroup(msk, gen_idxs)
        for om in orbit:
            seen.add(om.tobytes())
        picked.append((msk, len(orbit)))
    entries = []
    for k, (msk, n_conj) in enumerate(picked):
        codes = table.mask_to_codes(msk)
        entries.append(
            TableEntry(
                label=f"H{k}(order {codes.size})",
                order=int(codes.size),
                n_conjugates=n_conj,
                codes=tuple(int(c) for c in codes),
                signatures=signatures_of_codes(codes, m),
            )
        )
    entries.sort(key=lambda e: (-e.order, e.label))
    full = signatures_of_codes(mg.enumerate_group(m, "GL2").code_array(), m)
    return SignatureTable(m, tuple(entries), full, scope="all-subgroups")


# -- prime level: Borel, Cartan normalizers, octahedral preimage -------------


def _prime_table_masks(ell: int) -> list[tuple[str, np.ndarray]]:
    G = mg.enumerate_group(ell, "GL2")
    codes = G.code_array()
    a, b, c, d = mg.decode(codes, ell)
    out = []
    out.append(("borel", codes[c == 0]))
    split = ((b == 0) & (c == 0)) | ((a == 0) & (d == 0))
    out.append(("split-cartan-normalizer", codes[split]))
    eps = _least_nonresidue(ell)
    inner = (a == d) & (b == (eps * c) % ell)
    outer = (d == (ell - a) % ell) & (b == (-eps * c) % ell)
    out.append(("nonsplit-cartan-normalizer", codes[inner | outer]))
    oct_codes = _octahedral_preimage(ell)
    if oct_codes is not None:
        out.append(("octahedral", oct_codes))
    return out


def _least_nonresidue(ell: int) -> int:
    for x in range(2, ell):
        if pow(x, (ell - 1) // 2, ell) == ell - 1:
            return x
    raise InvalidInputError(f"{ell} is not an odd prime")


def _proj_canon(codes: np.ndarray, ell: int) -> np.ndarray:
    """Canonical code of the projective class: scale so the first nonzero of
    (a, b, c, d) equals 1."""
    a, b, c, d = mg.decode(codes, ell)
    lead = np.where(a != 0, a, np.where(b != 0, b, np.where(c != 0, c, d)))
    inv_table = np.array([0] + [pow(x, -1, ell) for x in range(1, ell)], dtype=np.int64)
    s = inv_table[lead]
    return mg.encode((a * s) % ell, (b * s) % ell, (c * s) % ell, (d * s) % ell, ell)


def _octahedral_preimage(ell: int) -> np.ndarray | None:
    """Full preimage in GL2(F_ell) of an S4 inside PGL2, when its determinant
    image is all the units (that is the only case a full-det subgroup can sit
    inside it)."""
    G = mg.enumerate_group(ell, "GL2")
    codes = G.code_array()
    proj = _proj_canon(codes, ell)
    # s has projective order 4 (t^2/d = 2), searched over a fixed seed
    s = None
    for cand in codes:
        M = mg.mat_from_code(int(cand), ell)
        u = (M.trace * M.trace * pow(M.det, -1, ell)) % ell
        if u == 2 % ell:
            s = int(cand)
            break
    if s is None:
        return None
    for cand in codes:
        M = mg.mat_from_code(int(cand), ell)
        u = (M.trace * M.trace * pow(M.det, -1, ell)) % ell
        if u != 1:
            continue
        group = _proj_closure(ell, [s, int(cand)], cap=25)
        if group is None or len(group) != 24:
            continue
        profile = _proj_order_profile(ell, group)
        if profile == {1: 1, 2: 9, 3: 8, 4: 6}:
            mask = np.isin(proj, np.fromiter(group, dtype=np.int64))
            pre = codes[mask]
            if _det_is_full(pre, ell):
                return pre
            return None
    return None


def _proj_closure(ell: int, seed_codes: list[int], cap: int) -> set[int] | None:
    canon = lambda code: int(_proj_canon(np.array([code], dtype=np.int64), ell)[0])
    seeds = [canon(c) for c in seed_codes]
    group = {canon(mg.identity(ell).code())}
    frontier = list(dict.fromkeys(seeds))
    group.update(frontier)
    while frontier:
        new = []
        for x in list(group):
            Mx = mg.mat_from_code(x, ell)
            for s in seeds:
                y = canon(Mx.mul(mg.mat_from_code(s, ell)).code())
                if y not in group:
                    group.add(y)
                    new.append(y)
                    if len(group) > cap:
                        return None
        frontier = new
    return group


def _proj_order_profile(ell: int, group: set[int]) -> dict[int, int]:
    prof: dict[int, int] = {}
    ident = int(_proj_canon(np.array([mg.identity(ell).code()]), ell)[0])
    for code in group:
        M = mg.mat_from_code(code, ell)
        x, k = M, 1
        while int(_proj_canon(np.array([x.code()]), ell)[0]) != ident:
            x = x.mul(M)
            k += 1
        prof[k] = prof.get(k, 0) + 1
    return prof


def _table_prime(ell: int) -> SignatureTable:
    entries = []
    for label, codes in _prime_table_masks(ell):
        if not _det_is_full(codes, ell):
            continue
        n_conj = {"borel": ell + 1, "split-cartan-normalizer": ell * (ell + 1) // 2,
                  "nonsplit-cartan-normalizer": ell * (ell - 1) // 2}.get(label, 0)
        entries.append(
            TableEntry(
                label=label,
                order=int(codes.size),
                n_conjugates=n_conj,
                codes=tuple(int(c) for c in codes),
                signatures=signatures_of_codes(codes, ell),
            )
        )
    full = signatures_of_codes(mg.enumerate_group(ell, "GL2").code_array(), ell)
    return SignatureTable(ell, tuple(entries), full, scope="maximal-only")


# -- m = 8: mod-4 preimages plus the sign/determinant couplings --------------


def _table_mod8() -> SignatureTable:
    """Maximal full-det subgroups of GL2(Z/8) not containing SL2(Z/8).

    A maximal such subgroup either has a proper mod-4 image (then it is the
    preimage of a maximal entry of the level-4 table) or reduces onto a group
    containing SL2(Z/4); exhaustive enumeration of the 24587 subgroups of
    GL2(Z/8) shows the latter are exactly the two couplings
    {g : eps(g mod 2) = chi_D(det g)} for D = 8 and D = -8 (the quadratic
    characters of conductor exactly 8).  That enumeration is pinned by a
    slow test rather than rerun here.
    """
    from . import nt

    G = mg.enumerate_group(8, "GL2")
    codes = G.code_array()
    tr = mg.trace_of_codes(codes, 8)
    dt = mg.det_of_codes(codes, 8)
    red2 = mg.reduce_codes(codes, 8, 2)
    eps = np.array([1 if PATTERN2.get(int(r), (1,)) != (2, 1) else -1 for r in red2])
    entries: list[TableEntry] = []
    for D in (8, -8):
        chi = np.array([nt.kronecker(D, int(d)) for d in dt])
        sel = eps == chi
        member = codes[sel]
        assert _det_is_full(member, 8)
        entries.append(
            TableEntry(
                label=f"sign-det coupling D={D}",
                order=int(member.size),
                n_conjugates=1,
                codes=tuple(int(c) for c in member),
                signatures=signatures_of_codes(member, 8),
            )
        )
    table4 = subgroup_signature_table(4)
    maximal4 = _maximal_entries(table4.entries)
    red4 = mg.reduce_codes(codes, 8, 4)
    for e in maximal4:
        sel = np.isin(red4, np.fromiter(e.codes, dtype=np.int64))
        member = codes[sel]
        entries.append(
            TableEntry(
                label=f"preimage of level-4 {e.label}",
                order=int(member.size),
                n_conjugates=e.n_conjugates,
                codes=tuple(int(c) for c in member),
                signatures=signatures_of_codes(member, 8),
            )
        )
    full = signatures_of_codes(codes, 8)
    return SignatureTable(8, tuple(entries), full, scope="maximal-only")


def _maximal_entries(entries: tuple[TableEntry, ...]) -> list[TableEntry]:
    sets = [set(e.codes) for e in entries]
    out = []
    for i, e in enumerate(entries):
        if any(i != j and sets[i] < sets[j] for j in range(len(entries))):
            continue
        out.append(e)
    return out


# -- m = 9: maximal full-det subgroups not containing SL2 --------------------


def _table_mod9() -> SignatureTable:
    masks = _maximal_candidates_mod9()
    G = mg.enumerate_group(9, "GL2")
    codes9 = G.code_array()
    sl2_set = set(int(c) for c in mg.enumerate_group(9, "SL2").code_array())
    picked = []
    for label, member_codes in masks:
        if not _det_is_full(member_codes, 9):
            continue
        if sl2_set <= set(int(c) for c in member_codes):
            continue
        picked.append((label, member_codes))
    # drop entries contained in a larger one
    final = []
    sets = [set(int(c) for c in mc) for _, mc in picked]
    for i, (label, mc) in enumerate(picked):
        if any(i != j and sets[i] < sets[j] for j in range(len(picked))):
            continue
        final.append((label, mc))
    entries = tuple(
        TableEntry(
            label=label,
            order=int(mc.size),
            n_conjugates=0,
            codes=tuple(int(c) for c in mc),
            signatures=signatures_of_codes(mc, 9),
        )
        for label, mc in final
    )
    full = signatures_of_codes(codes9, 9)
    return SignatureTable(9, entries, full, scope="maximal-only")


def _maximal_candidates_mod9() -> list[tuple[str, np.ndarray]]:
    """Maximal-subgroup candidates of GL2(Z/9).

    Case (a): preimages of the maximal subgroups of GL2(F_3).
    Case (b): subgroups meeting the mod-3 kernel K = I + 3*M2(F_3) in a
    maximal invariant subspace and surjecting mod 3; these are preimages of
    complements in the corresponding quotient.  Together these cover every
    maximal subgroup: a maximal M either contains K (case a) or M.K = G with
    M intersecting K in a maximal submodule (case b).
    """
    G = mg.enumerate_group(9, "GL2")
    codes = G.code_array()
    red3 = mg.reduce_codes(codes, 9, 3)
    out: list[tuple[str, np.ndarray]] = []

    # case (a), deduplicated by conjugacy (preimages of conjugates are conjugate)
    t3 = SmallGroupTable.for_group(3, "GL2")
    lattice3 = t3.subgroup_lattice()
    maximal3 = _maximal_masks(lattice3)
    gen_idxs3 = t3.generator_idxs()
    claimed: set[bytes] = set()
    k = 0
    for msk in maximal3:
        if msk.tobytes() in claimed:
            continue
        for om in t3.conjugacy_orbit_of_subgroup(msk, gen_idxs3):
            claimed.add(om.tobytes())
        member_codes3 = set(int(c) for c in t3.mask_to_codes(msk))
        sel = np.isin(red3, np.fromiter(member_codes3, dtype=np.int64))
        out.append((f"pre-mod3-max{k}(order {int(sel.sum())})", codes[sel]))
        k += 1

    # case (b)
    for name, K0_vectors, W_dim in _maximal_invariant_subspaces_mod3():
        for j, member_codes in enumerate(_complement_preimages_mod9(K0_vectors)):
            out.append((f"level9-{name}-complement{j}(order {member_codes.size})", member_codes))
    return out


def _maximal_masks(masks: list[np.ndarray]) -> list[np.ndarray]:
    proper = [m_ for m_ in masks if m_.sum() < max(x.sum() for x in masks)]
    result = []
    for i, mi in enumerate(proper):
        si = set(np.nonzero(mi)[0].tolist())
        if any(si < set(np.nonzero(mj)[0].tolist()) for j, mj in enumerate(proper) if j != i):
            continue
        result.append(mi)
    return result


def _maximal_invariant_subspaces_mod3():
    """Maximal GL2(F3)-invariant subspaces of M2(F3) under conjugation."""
    # enumerate all subspaces of F_3^4 (vectors = matrices (a,b,c,d))
    vectors = [(a, b, c, d) for a in range(3) for b in range(3) for c in range(3) for d in range(3)]
    all_subspaces: set[frozenset] = {frozenset({(0, 0, 0, 0)})}
    frontier = [frozenset({(0, 0, 0, 0)})]
    while frontier:
        S = frontier.pop()
        for v in vectors:
            if v in S:
                continue
            span = set()
            for w in S:
                for c in range(3):
                    span.add(tuple((w[i] + c * v[i]) % 3 for i in range(4)))
            span = frozenset(span)
            if span not in all_subspaces:
                all_subspaces.add(span)
                frontier.append(span)
    gens = mg.gl2_generators(3)
    invariant = []
    for S in all_subspaces:
        if len(S) == 81:
            continue
        ok = True
        for g in gens:
            gi = g.inv()
            for v in S:
                if _conj_vec(g, gi, v) not in S:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            invariant.append(S)
    maximal = []
    for S in invariant:
        if any(S < T for T in invariant if T is not S):
            continue
        maximal.append(S)
    named = []
    for S in maximal:
        dim = round(math.log(len(S), 3))
        name = f"dim{dim}"
        named.append((name, sorted(S), 4 - dim))
    return named


def _conj_vec(g: mg.MatModM, gi: mg.MatModM, v: tuple) -> tuple:
    a, b, c, d = v
    # g * v
    xa = (g.a * a + g.b * c) % 3
    xb = (g.a * b + g.b * d) % 3
    xc = (g.c * a + g.d * c) % 3
    xd = (g.c * b + g.d * d) % 3
    # (g v) * g^-1
    ya = (xa * gi.a + xb * gi.c) % 3
    yb = (xa * gi.b + xb * gi.d) % 3
    yc = (xc * gi.a + xd * gi.c) % 3
    yd = (xc * gi.b + xd * gi.d) % 3
    return (ya, yb, yc, yd)


def _complement_preimages_mod9(K0_vectors: list[tuple]) -> list[np.ndarray]:
    """Subgroups M of GL2(Z/9) with M mod 3 full and M meeting the mod-3
    kernel exactly in I + 3*K0, found as complements in G/(I + 3*K0)."""
    G = mg.enumerate_group(9, "GL2")
    codes = G.code_array()
    K0_codes = np.array(
        sorted(mg.encode(
            np.array([(1 + 3 * v[0]) % 9 for v in K0_vectors]),
            np.array([(3 * v[1]) % 9 for v in K0_vectors]),
            np.array([(3 * v[2]) % 9 for v in K0_vectors]),
            np.array([(1 + 3 * v[3]) % 9 for v in K0_vectors]),
            9,
        ).tolist()),
        dtype=np.int64,
    )
    # coset key: minimal code in g * K0
    key_of_code = np.full(9**4, -1, dtype=np.int64)
    stack = []
    for k_code in K0_codes:
        k = mg.mat_from_code(int(k_code), 9)
        stack.append(mg.mul_codes(codes, k))
    keys = np.minimum.reduce(stack)
    key_of_code[codes] = keys
    rep_codes = np.unique(keys)
    nq = rep_codes.size
    rep_index = {int(c): i for i, c in enumerate(rep_codes)}
    # quotient Cayley table via representative products
    qt = _QuotientTable(rep_codes, key_of_code, m=9)
    # W = image of the full mod-3 kernel
    full_kernel = codes[np.all(
        np.stack(mg.decode(mg.reduce_codes(codes, 9, 3), 3)) == np.array([1, 0, 0, 1])[:, None],
        axis=0,
    )]
    W_mask = np.zeros(nq, dtype=bool)
    W_mask[[rep_index[int(key_of_code[c])] for c in full_kernel]] = True
    w_size = int(W_mask.sum())
    target = nq // w_size
    # Sylow 2-subgroup of the quotient
    P = _sylow2(qt)
    out_masks: list[np.ndarray] = []
    seen: set[bytes] = set()
    order3 = np.nonzero(qt.order_of == 3)[0]
    p_idx = np.nonzero(P)[0].tolist()
    for t in order3.tolist():
        C = qt.closure_mask(p_idx + [t])
        if int(C.sum()) != target:
            continue
        if int((C & W_mask).sum()) != 1:
            continue
        key = C.tobytes()
        if key in seen:
            continue
        seen.add(key)
        out_masks.append(C)
    # conjugacy dedup inside the quotient
    final_masks = []
    claimed: set[bytes] = set()
    for C in out_masks:
        if C.tobytes() in claimed:
            continue
        orbit = qt.conjugacy_orbit(C)
        for om in orbit:
            claimed.add(om.tobytes())
        final_masks.append(C)
    # pull back to GL2(Z/9)
    result = []
    for C in final_masks:
        keys_in_C = set(int(rep_codes[i]) for i in np.nonzero(C)[0])
        sel = np.isin(key_of_code[codes], np.fromiter(keys_in_C, dtype=np.int64))
        result.append(codes[sel])
    return result


class _QuotientTable:
    """Cayley table of G/K0 given coset keys (minimal member codes)."""

    def __init__(self, rep_codes: np.ndarray, key_of_code: np.ndarray, m: int):
        self.m = m
        self.rep_codes = rep_codes
        self.n = int(rep_codes.size)
        index_of_key = {int(c): i for i, c in enumerate(rep_codes)}
        self.cayley = np.empty((self.n, self.n), dtype=np.int32)
        for i in range(self.n):
            g = mg.mat_from_code(int(rep_codes[i]), m)
            prods = mg.mul_codes_left(g, rep_codes)
            self.cayley[i] = [index_of_key[int(key_of_code[p])] for p in prods]
        ident_key = int(key_of_code[mg.identity(m).code()])
        self.identity = index_of_key[ident_key]
        self.inv = np.empty(self.n, dtype=np.int32)
        rows, cols = np.nonzero(self.cayley == self.identity)
        self.inv[rows] = cols
        self.order_of = self._orders()

    def _orders(self):
        orders = np.zeros(self.n, dtype=np.int64)
        for i in range(self.n):
            k, x = 1, i
            while x != self.identity:
                x = int(self.cayley[x, i])
                k += 1
            orders[i] = k
        return orders

    def closure_mask(self, seeds: list[int]) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.identity] = True
        seeds = list(dict.fromkeys(int(s) for s in seeds))
        for s in seeds:
            mask[s] = True
        frontier = np.array(sorted({*seeds, self.identity}), dtype=np.int64)
        while frontier.size:
            new = []
            for s in seeds:
                prod = self.cayley[frontier, s]
                fresh = prod[~mask[prod]]
                if fresh.size:
                    fresh = np.unique(fresh)
                    mask[fresh] = True
                    new.append(fresh)
            frontier = np.unique(np.concatenate(new)) if new else np.array([], dtype=np.int64)
        return mask

    def conjugacy_orbit(self, mask: np.ndarray) -> list[np.ndarray]:
        seen = {mask.tobytes(): mask}
        frontier = [mask]
        while frontier:
            cur = frontier.pop()
            members = np.nonzero(cur)[0]
            for g in range(self.n):
                image = self.cayley[self.cayley[g, members], self.inv[g]]
                img = np.zeros(self.n, dtype=bool)
                img[image] = True
                key = img.tobytes()
                if key not in seen:
                    seen[key] = img
                    frontier.append(img)
        return list(seen.values())


def _sylow2(qt: _QuotientTable) -> np.ndarray:
    """A Sylow 2-subgroup of the quotient, grown through normalizers."""
    two_part = 1
    n = qt.n
    while n % 2 == 0:
        two_part *= 2
        n //= 2
    mask = np.zeros(qt.n, dtype=bool)
    mask[qt.identity] = True
    gens: list[int] = []
    while int(mask.sum()) < two_part:
        members = np.nonzero(mask)[0]
        grown = False
        for g in np.nonzero(_is_2_power(qt.order_of))[0].tolist():
            if mask[g]:
                continue
            image = qt.cayley[qt.cayley[g, members], qt.inv[g]]
            if not mask[image].all():
                continue
            cand = qt.closure_mask(gens + [g])
            sz = int(cand.sum())
            if sz & (sz - 1) == 0:
                gens.append(g)
                mask = cand
                grown = True
                break
        if not grown:
            raise RuntimeError("sylow 2-subgroup construction stalled")
    return mask


def _is_2_power(arr: np.ndarray) -> np.ndarray:
    return (arr & (arr - 1)) == 0
