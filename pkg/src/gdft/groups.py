"""Finite groups stored as dense multiplication tables.

Every group is a table over element indices ``0 .. order-1`` with index 0
the identity.  ``mult[a, b]`` is the index of ``a * b``.

Element order contract
----------------------
Groups built from generators (permutation groups and every named family
except direct products) list their elements in breadth-first order from the
identity, where the children of ``g`` are ``g * s`` for the generators ``s``
taken in the order given.  Permutations compose right-to-left:
``(a * b)[i] = a[b[i]]``.  A direct product ``A x B`` lists ``(a, b)`` at
index ``a * |B| + b``.  Input vectors over a group use this order, so they
are portable between runs.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Sequence

import numpy as np

ORDER_CAP = 5000
SEARCH_CAP = 512


class GroupError(ValueError):
    pass


class CapExceeded(GroupError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    mult: np.ndarray
    inv: np.ndarray
    label: str = "G"
    family: tuple | None = None
    generators: tuple[int, ...] = ()
    # BFS spanning tree: g == word_parent[g] * generators[word_gen[g]]
    word_parent: np.ndarray | None = field(default=None, repr=False)
    word_gen: np.ndarray | None = field(default=None, repr=False)
    elements: tuple | None = field(default=None, repr=False)
    factors: tuple = field(default=(), repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return int(self.mult.shape[0])

    identity = 0

    @cached_property
    def key(self) -> str:
        """Content hash of the multiplication table."""
        return hashlib.sha1(np.ascontiguousarray(self.mult, dtype=np.int32).tobytes()).hexdigest()[:16]

    @cached_property
    def conj(self) -> np.ndarray:
        """``conj[g, h]`` is the index of ``g h g^-1``."""
        return self.mult[self.mult, self.inv[:, None]]

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != 0:
            x = self.mult[x, g]
            k += 1
        return k

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mult, self.mult.T))

    @cached_property
    def cyclic_generator(self) -> int | None:
        """An element of full order, or None if the group is not cyclic."""
        if self.order == 1:
            return 0
        if not self.is_abelian:
            return None
        for g in range(1, self.order):
            if self.element_order(g) == self.order:
                return g
        return None

    def check(self, sample: int = 20000, seed: int = 0) -> None:
        """Raise GroupError unless the table satisfies the group axioms.

        Associativity is checked on every triple up to order 256 and on a
        random sample of triples above that.
        """
        n = self.order
        m = self.mult
        ar = np.arange(n)
        if not (np.array_equal(m[0], ar) and np.array_equal(m[:, 0], ar)):
            raise GroupError("index 0 is not the identity")
        srt = np.sort(m, axis=1)
        if not (np.all(srt == ar) and np.all(np.sort(m, axis=0) == ar[:, None])):
            raise GroupError("multiplication table is not a Latin square")
        if not np.all(m[ar, self.inv] == 0):
            raise GroupError("inverse table is wrong")
        if n <= 256:
            for a in range(n):
                # (a b) c == a (b c) for all b, c
                if not np.array_equal(m[m[a]], m[a][m]):
                    raise GroupError(f"associativity fails at a={a}")
        else:
            rng = np.random.default_rng(seed)
            a, b, c = rng.integers(0, n, size=(3, sample))
            if not np.array_equal(m[m[a, b], c], m[a, m[b, c]]):
                raise GroupError("associativity fails on sampled triple")

    def __repr__(self) -> str:
        return f"FiniteGroup({self.label}, order={self.order})"


# ---------------------------------------------------------------------------
# construction


def _closure(identity: Hashable, gens: Sequence[Hashable],
             mul: Callable[[Hashable, Hashable], Hashable], cap: int):
    elements = [identity]
    index = {identity: 0}
    parent, gen = [-1], [-1]
    right = []
    i = 0
    while i < len(elements):
        g = elements[i]
        row = []
        for si, s in enumerate(gens):
            h = mul(g, s)
            j = index.get(h)
            if j is None:
                if len(elements) >= cap:
                    raise CapExceeded(f"group too large (order exceeds cap {cap})")
                j = len(elements)
                index[h] = j
                elements.append(h)
                parent.append(i)
                gen.append(si)
            row.append(j)
        right.append(row)
        i += 1
    right = np.asarray(right, dtype=np.int64).reshape(len(elements), len(gens))
    return elements, right, np.asarray(parent), np.asarray(gen)


def _table_from_right_mult(right: np.ndarray, parent: np.ndarray, gen: np.ndarray) -> np.ndarray:
    n = right.shape[0]
    mult = np.empty((n, n), dtype=np.int64)
    mult[:, 0] = np.arange(n)
    # BFS order: parents are always filled before children
    for b in range(1, n):
        mult[:, b] = right[mult[:, parent[b]], gen[b]]
    return mult


def _inverse(mult: np.ndarray) -> np.ndarray:
    return np.argmax(mult == 0, axis=1)


def group_from_callable(identity, gens, mul, *, label="G", family=None,
                        cap: int = ORDER_CAP) -> FiniteGroup:
    """Close ``gens`` under ``mul`` and return the table group."""
    gens = [g for g in gens]
    elements, right, parent, gen = _closure(identity, gens, mul, cap)
    mult = _table_from_right_mult(right, parent, gen)
    index = {e: i for i, e in enumerate(elements)}
    gen_idx = tuple(index[g] for g in gens)
    return FiniteGroup(mult=mult, inv=_inverse(mult), label=label, family=family,
                       generators=gen_idx, word_parent=parent, word_gen=gen,
                       elements=tuple(elements))


def _compose(a: tuple, b: tuple) -> tuple:
    return tuple(a[i] for i in b)


def group_from_generators(degree: int, generators: Sequence[Sequence[int]], *,
                          label: str | None = None, family=None,
                          cap: int = ORDER_CAP) -> FiniteGroup:
    """Permutation group on ``{0..degree-1}`` generated by ``generators``.

    >>> group_from_generators(3, [[1, 2, 0], [1, 0, 2]]).order
    6
    """
    if degree < 1:
        raise GroupError("degree must be positive")
    gens = []
    for p in generators:
        p = tuple(int(x) for x in p)
        if sorted(p) != list(range(degree)):
            raise GroupError(f"not a permutation of {degree} points: {list(p)}")
        gens.append(p)
    return group_from_callable(tuple(range(degree)), gens, _compose,
                               label=label or f"Perm({degree})", family=family, cap=cap)


def direct_product(A: FiniteGroup, B: FiniteGroup, label: str | None = None) -> FiniteGroup:
    na, nb = A.order, B.order
    if na * nb > ORDER_CAP:
        raise CapExceeded(f"group too large (order {na * nb} exceeds cap {ORDER_CAP})")
    ia = np.repeat(np.arange(na), nb)
    ib = np.tile(np.arange(nb), na)
    mult = A.mult[ia[:, None], ia[None, :]] * nb + B.mult[ib[:, None], ib[None, :]]
    inv = A.inv[ia] * nb + B.inv[ib]
    return FiniteGroup(mult=mult, inv=inv, label=label or f"{A.label}x{B.label}",
                       family=("direct_product",), factors=(A, B))


def _is_prime_power(n: int) -> bool:
    p = next(q for q in range(2, n + 1) if n % q == 0)
    while n % p == 0:
        n //= p
    return n == 1


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % q for q in range(2, math.isqrt(n) + 1))


_QUAT = {  # unit products: (sign, unit) with units 1, i, j, k
    (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
    (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
    (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
    (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
}

FAMILIES = ("cyclic", "dihedral", "symmetric", "alternating", "quaternion8",
            "heisenberg_p", "sl2", "direct_product")


def group_from_named_family(name: str, parameter: int | None = None, *,
                            factors: Sequence[FiniteGroup] = ()) -> FiniteGroup:
    """Build a group from a named family.

    Element orders: ``cyclic`` lists ``k`` at index ``k``; ``dihedral n``
    (order ``2n``) lists ``r^k s^j`` in BFS order over generators ``r, s``;
    ``symmetric`` uses adjacent transpositions as generators and
    ``alternating`` the 3-cycles ``(0 1 i)``; ``heisenberg_p`` is the group of
    upper unitriangular 3x3 matrices over F_p, generated by the two
    elementary matrices; ``sl2`` is SL(2, p) generated by
    ``[[1,1],[0,1]]`` and ``[[0,-1],[1,0]]``.  ``direct_product`` takes its
    factors from ``factors``.
    """
    n = parameter
    if name == "cyclic":
        if n is None or n < 1:
            raise GroupError("cyclic needs n >= 1")
        if n > ORDER_CAP:
            raise CapExceeded(f"group too large (order {n} exceeds cap {ORDER_CAP})")
        idx = np.arange(n)
        mult = (idx[:, None] + idx[None, :]) % n
        return FiniteGroup(mult=mult, inv=(-idx) % n, label=f"C{n}", family=("cyclic", n),
                           generators=(1 % n,) if n > 1 else (),
                           word_parent=np.r_[-1, idx[:-1]], word_gen=np.r_[-1, np.zeros(n - 1, int)])
    if name == "dihedral":
        if n is None or n < 1:
            raise GroupError("dihedral needs n >= 1")

        def mul(a, b):
            return ((a[0] + (b[0] if a[1] == 0 else -b[0])) % n, (a[1] + b[1]) % 2)

        return group_from_callable((0, 0), [(1 % n, 0), (0, 1)], mul, label=f"D{n}",
                                   family=("dihedral", n))
    if name == "symmetric":
        if n is None or n < 1:
            raise GroupError("symmetric needs n >= 1")
        gens = []
        for i in range(n - 1):
            p = list(range(n))
            p[i], p[i + 1] = p[i + 1], p[i]
            gens.append(p)
        return group_from_generators(n, gens, label=f"S{n}", family=("symmetric", n))
    if name == "alternating":
        if n is None or n < 1:
            raise GroupError("alternating needs n >= 1")
        gens = []
        for i in range(2, n):
            p = list(range(n))
            p[0], p[1], p[i] = 1, i, 0
            gens.append(p)
        return group_from_generators(n, gens, label=f"A{n}", family=("alternating", n))
    if name == "quaternion8":

        def mul(a, b):
            s, u = _QUAT[(a[1], b[1])]
            return (a[0] * b[0] * s, u)

        return group_from_callable((1, 0), [(1, 1), (1, 2)], mul, label="Q8",
                                   family=("quaternion8",))
    if name == "heisenberg_p":
        if n is None or not _is_prime(n):
            raise GroupError("heisenberg_p needs a prime p")
        if n ** 3 > ORDER_CAP:
            raise CapExceeded(f"group too large (order {n ** 3} exceeds cap {ORDER_CAP})")
        p = n

        def mul(a, b):
            return ((a[0] + b[0]) % p, (a[1] + b[1]) % p, (a[2] + b[2] + a[0] * b[1]) % p)

        return group_from_callable((0, 0, 0), [(1, 0, 0), (0, 1, 0)], mul,
                                   label=f"Heis({p})", family=("heisenberg_p", p))
    if name == "sl2":
        if n is None or not _is_prime(n):
            raise GroupError("sl2 needs a prime p")
        p = n

        def mul(a, b):
            return ((a[0] * b[0] + a[1] * b[2]) % p, (a[0] * b[1] + a[1] * b[3]) % p,
                    (a[2] * b[0] + a[3] * b[2]) % p, (a[2] * b[1] + a[3] * b[3]) % p)

        return group_from_callable((1, 0, 0, 1), [(1, 1, 0, 1), (0, p - 1, 1, 0)], mul,
                                   label=f"SL(2,{p})", family=("sl2", p))
    if name == "direct_product":
        if len(factors) < 2:
            raise GroupError("direct_product needs at least two factors")
        G = factors[0]
        for F in factors[1:]:
            G = direct_product(G, F)
        return G
    raise GroupError(f"unknown group family {name!r}")


# ---------------------------------------------------------------------------
# subgroups


@dataclass(frozen=True, eq=False)
class Subgroup:
    parent: FiniteGroup
    elements: tuple[int, ...]
    generators: tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return len(self.elements)

    @cached_property
    def mask(self) -> int:
        m = 0
        for g in self.elements:
            m |= 1 << g
        return m

    @cached_property
    def member(self) -> np.ndarray:
        out = np.zeros(self.parent.order, dtype=bool)
        out[list(self.elements)] = True
        return out

    @cached_property
    def index_of(self) -> np.ndarray:
        """Parent index -> local index (or -1)."""
        out = np.full(self.parent.order, -1, dtype=np.int64)
        out[list(self.elements)] = np.arange(self.order)
        return out

    def __eq__(self, other) -> bool:
        return (isinstance(other, Subgroup) and other.parent is self.parent
                and other.elements == self.elements)

    def __hash__(self) -> int:
        return hash((id(self.parent), self.elements))

    def __contains__(self, g: int) -> bool:
        return bool(self.member[g])

    def issubset(self, other: "Subgroup") -> bool:
        return self.mask & other.mask == self.mask

    def as_group(self, label: str | None = None) -> FiniteGroup:
        """The subgroup as a standalone table group, elements in ascending parent order."""
        key = ("as_group", self.elements)
        cache = self.parent._cache
        if key not in cache:
            el = np.asarray(self.elements)
            sub = self.parent.mult[np.ix_(el, el)]
            local = self.index_of[sub]
            cache[key] = FiniteGroup(mult=local, inv=self.index_of[self.parent.inv[el]],
                                     label=label or f"{self.parent.label}[{self.order}]")
        return cache[key]

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order} of {self.parent.label})"


def _close(G: FiniteGroup, gens: Sequence[int], start: Sequence[int] = ()) -> np.ndarray:
    """Elements of the subgroup generated by ``gens``.

    ``start`` may list the elements of a subgroup already inside the
    result.  The result is grown one right coset of that subgroup at a time:
    a union of right cosets ``S r`` is closed under left multiplication by
    ``S``, so it is enough to close the coset representatives under right
    multiplication by the generators.
    """
    gens = [int(g) for g in gens if g]
    base = np.asarray(sorted(set(int(x) for x in start) | {0}), dtype=np.int64)
    inside = np.zeros(G.order, dtype=bool)
    if not start:
        # seed with the cyclic subgroup of the first generator
        x, cyc = 0, [0]
        if gens:
            while True:
                x = int(G.mult[x, gens[0]])
                if x == 0:
                    break
                cyc.append(x)
        base = np.asarray(cyc, dtype=np.int64)
    inside[base] = True
    reps = [0]
    i = 0
    while i < len(reps):
        r = reps[i]
        i += 1
        for g in gens:
            y = int(G.mult[r, g])
            if not inside[y]:
                inside[G.mult[base, y]] = True
                reps.append(y)
    return np.flatnonzero(inside)


def subgroup_generated(G: FiniteGroup, gens: Sequence[int]) -> Subgroup:
    gens = tuple(int(g) for g in gens)
    return Subgroup(G, tuple(int(x) for x in _close(G, gens)), gens)


def subgroup_from_elements(G: FiniteGroup, elements: Sequence[int]) -> Subgroup:
    """Wrap an element list, checking closure."""
    els = tuple(sorted(set(int(x) for x in elements)))
    if not els or els[0] != 0:
        raise GroupError("subgroup must contain the identity")
    S = Subgroup(G, els, els)
    sub = G.mult[np.ix_(els, els)]
    if not np.all(S.member[sub]) or not np.all(S.member[G.inv[list(els)]]):
        raise GroupError("element set is not closed under multiplication")
    return S


def all_subgroups(G: FiniteGroup, max_index: int | None = None,
                  cap: int = SEARCH_CAP) -> list[Subgroup]:
    """Every subgroup of ``G``, sorted by (order, elements).

    Cyclic subgroups are joined with cyclic subgroups until nothing new
    appears; every subgroup is a join of cyclic ones, so this is complete.
    """
    if G.order > cap:
        raise CapExceeded(f"subgroup search cap {cap} exceeded by order {G.order}")
    if "subgroups" not in G._cache:
        found: dict[bytes, Subgroup] = {}
        cyclic: list[Subgroup] = []
        for g in range(G.order):
            S = subgroup_generated(G, [g] if g else [])
            k = S.member.tobytes()
            if k not in found:
                found[k] = S
                cyclic.append(S)
        # joins of prime-power cyclic subgroups already reach every subgroup
        pp = [C for C in cyclic if C.order > 1 and _is_prime_power(C.order)]
        queue = list(pp)
        while queue:
            S = queue.pop()
            for C in pp:
                c = C.generators[0]
                if S.member[c]:
                    continue
                gens = S.generators + (c,)
                J = Subgroup(G, tuple(int(x) for x in _close(G, gens, S.elements)), gens)
                k = J.member.tobytes()
                if k not in found:
                    found[k] = J
                    queue.append(J)
        G._cache["subgroups"] = sorted(found.values(), key=lambda s: (s.order, s.elements))
    subs = G._cache["subgroups"]
    if max_index is not None:
        subs = [s for s in subs if G.order // s.order <= max_index]
    return list(subs)


def is_normal(G: FiniteGroup, S: Subgroup) -> bool:
    gens = list(S.generators) or list(S.elements)
    return bool(np.all(S.member[G.conj[:, gens]]))


def normal_subgroups(G: FiniteGroup) -> list[Subgroup]:
    return [S for S in all_subgroups(G) if is_normal(G, S)]


def coset_reps(G: FiniteGroup, H: Subgroup, side: str = "right") -> list[int]:
    """Smallest element of each coset, ascending; the identity represents ``H``.

    ``side="right"`` gives cosets ``H g``; ``side="left"`` gives ``g H``.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    seen = np.zeros(G.order, dtype=bool)
    el = list(H.elements)
    reps = []
    for g in range(G.order):
        if seen[g]:
            continue
        reps.append(g)
        seen[G.mult[el, g] if side == "right" else G.mult[g, el]] = True
    return reps


@dataclass(frozen=True, eq=False)
class QuotientMap:
    parent: FiniteGroup
    normal: Subgroup
    quotient: FiniteGroup
    projection: np.ndarray
    section: tuple[int, ...]


def quotient(G: FiniteGroup, N: Subgroup) -> QuotientMap:
    if not is_normal(G, N):
        raise GroupError("subgroup is not normal")
    reps = coset_reps(G, N, side="left")
    proj = np.empty(G.order, dtype=np.int64)
    el = list(N.elements)
    for q, g in enumerate(reps):
        proj[G.mult[g, el]] = q
    r = np.asarray(reps)
    table = proj[G.mult[np.ix_(r, r)]]
    Q = FiniteGroup(mult=table, inv=_inverse(table), label=f"{G.label}/{N.order}")
    return QuotientMap(G, N, Q, proj, tuple(reps))


# ---------------------------------------------------------------------------
# triple search and translate covers


@dataclass(frozen=True)
class BaseCase:
    pass


@dataclass(frozen=True)
class PrimeIndexCase:
    N: Subgroup
    p: int


@dataclass(frozen=True)
class TripleCase:
    N: Subgroup
    H: Subgroup
    K: Subgroup

    @property
    def hk_order(self) -> int:
        return self.H.order * self.K.order // self.N.order


def maximal_normal_subgroups(G: FiniteGroup) -> list[Subgroup]:
    proper = [N for N in normal_subgroups(G) if N.order < G.order]
    return [N for N in proper
            if not any(M.order > N.order and N.issubset(M) for M in proper)]


def _best_pair(G: FiniteGroup, N: Subgroup, subs: list[Subgroup]):
    over = [S for S in subs if S.order < G.order and N.issubset(S)]
    # H must be strictly larger than N, otherwise HK = N and nothing is gained
    over.sort(key=lambda s: -s.order)
    best, best_key = None, None
    for H in over:
        for K in over:
            if K.order > H.order or H.order == N.order:
                continue
            size = H.order * K.order // N.order
            if best_key is not None and size < best_key[0]:
                break
            if H.mask & K.mask != N.mask:
                continue
            key = (size, K.order, tuple(-x for x in H.elements), tuple(-x for x in K.elements))
            if best_key is None or key > best_key:
                best, best_key = (H, K), key
    return best, best_key


def find_triple(G: FiniteGroup, mode: str = "auto"):
    """Pick the reduction for ``G``.

    ``mode="auto"`` looks at maximal normal subgroups.  If one of them has a
    quotient that is not of prime order, the largest such ``N`` (ties by
    element list) is used and the best ``H, K`` over it returned; otherwise
    the largest maximal normal subgroup gives a prime-index case.
    ``mode="prime"`` insists on a prime-index case, ``mode="triple"`` searches
    every proper normal subgroup for the largest ``|HK|``.

    ``H, K`` are proper, contain ``N``, meet exactly in ``N``, ``H != N``, and maximise
    ``|H||K|/|N|``, then ``min(|H|, |K|)``, then the element lists
    lexicographically.  ``H`` is the larger of the two.
    """
    if G.order < 2:
        return BaseCase()
    maximal = maximal_normal_subgroups(G)
    bylex = lambda s: (-s.order, s.elements)
    if mode == "prime":
        prime = sorted((N for N in maximal if _is_prime(G.order // N.order)), key=bylex)
        if not prime:
            raise GroupError(f"{G.label} has no normal subgroup of prime index")
        return PrimeIndexCase(prime[0], G.order // prime[0].order)
    subs = all_subgroups(G)
    if mode == "auto":
        nonprime = sorted((N for N in maximal if not _is_prime(G.order // N.order)), key=bylex)
        if not nonprime:
            N = sorted(maximal, key=bylex)[0]
            return PrimeIndexCase(N, G.order // N.order)
        candidates = nonprime[:1]
    elif mode == "triple":
        candidates = sorted((N for N in normal_subgroups(G) if N.order < G.order), key=bylex)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    best, best_key = None, None
    for N in candidates:
        pair, key = _best_pair(G, N, subs)
        if pair is None:
            continue
        key = (key[0], N.order) + key[1:]
        if best_key is None or key > best_key:
            best, best_key = TripleCase(N, *pair), key
    if best is None:
        raise GroupError(f"no qualifying (N, H, K) triple in {G.label}; use the naive DFT")
    return best


def translate_cover(G: FiniteGroup, S: Sequence[int]) -> list[int]:
    """Greedy right translates ``g`` with ``union S*g == G``.

    Each step takes the ``g`` covering the most new elements (smallest
    index on ties), so ``S = G`` gives just the identity.
    """
    S = np.unique(np.asarray(list(S), dtype=np.int64))
    if S.size == 0:
        raise GroupError("translate_cover needs a nonempty set")
    sets = G.mult[S, :]
    covered = np.zeros(G.order, dtype=bool)
    chosen = []
    while not covered.all():
        gain = (~covered[sets]).sum(axis=0)
        g = int(np.argmax(gain))
        chosen.append(g)
        covered[sets[:, g]] = True
    bound = math.ceil(G.order / S.size * (math.log(G.order) + 1))
    if len(chosen) > bound:
        raise GroupError(f"greedy cover used {len(chosen)} translates, above the bound {bound}")
    return chosen
