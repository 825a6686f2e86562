"""Unitary irreducible representations, adapted bases and Clifford data.

Irreps are stored as stacks of matrices indexed by group element.  Sets are
kept in a canonical order: by dimension, then by character table, with the
character values compared in descending lexicographic order (so the
trivial irrep comes first).
"""
from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .groups import FiniteGroup, Subgroup

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-9
SPLIT_TOL = 1e-7
RETRIES = 5


class IrrepError(RuntimeError):
    pass


@dataclass(eq=False)
class Irrep:
    dim: int
    matrices: np.ndarray  # (order, dim, dim)
    id: int = -1

    @cached_property
    def character(self) -> np.ndarray:
        return np.trace(self.matrices, axis1=1, axis2=2)

    @cached_property
    def inverse_matrices(self) -> np.ndarray:
        # unitary: rho(g^-1) = rho(g)^*
        return np.conj(np.swapaxes(self.matrices, 1, 2))

    def __call__(self, g: int) -> np.ndarray:
        return self.matrices[g]


@dataclass(eq=False)
class IrrepSet:
    group: FiniteGroup
    irreps: list[Irrep]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(r.dim for r in self.irreps)

    @property
    def total_entries(self) -> int:
        return sum(d * d for d in self.dims)

    def __len__(self) -> int:
        return len(self.irreps)

    def __iter__(self):
        return iter(self.irreps)

    def __getitem__(self, k: int) -> Irrep:
        return self.irreps[k]

    @cached_property
    def characters(self) -> np.ndarray:
        return np.array([r.character for r in self.irreps])

    def block_of(self, g: int):
        """``(+)_rho rho(g)`` as a list of blocks."""
        return [r.matrices[g] for r in self.irreps]

    def validate(self, tol: float = RESIDUAL_TOL, exhaustive_limit: int = 128, seed: int = 0) -> None:
        """Raise IrrepError unless this is a complete set of unitary irreps."""
        G = self.group
        n = G.order
        if sum(d * d for d in self.dims) != n:
            raise IrrepError(f"sum of squared dims {sum(d * d for d in self.dims)} != |G| = {n}")
        if n <= exhaustive_limit:
            a, b = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
            a, b = a.ravel(), b.ravel()
        else:
            rng = np.random.default_rng(seed)
            a, b = rng.integers(0, n, size=(2, 4 * n))
        for r in self.irreps:
            m = r.matrices
            hom = np.linalg.norm(m[a] @ m[b] - m[G.mult[a, b]], axis=(1, 2)).max()
            uni = np.linalg.norm(m @ r.inverse_matrices - np.eye(r.dim), axis=(1, 2)).max()
            if hom > tol * r.dim or uni > tol * r.dim:
                raise IrrepError(f"irrep {r.id}: homomorphism {hom:.2e}, unitarity {uni:.2e}")
        gram = self.characters.conj() @ self.characters.T / n
        if np.abs(gram - np.eye(len(self))).max() > 1e-8:
            raise IrrepError("characters are not orthonormal")


# ---------------------------------------------------------------------------
# constructions


def _from_generator_images(G: FiniteGroup, images: list[np.ndarray]) -> np.ndarray:
    d = images[0].shape[0] if images else 1
    mats = np.empty((G.order, d, d), dtype=np.complex128)
    mats[0] = np.eye(d)
    for g in range(1, G.order):
        mats[g] = mats[G.word_parent[g]] @ images[G.word_gen[g]]
    return mats


def _cyclic_irreps(G: FiniteGroup) -> list[np.ndarray]:
    n = G.order
    g0 = G.cyclic_generator
    expo = np.empty(n, dtype=np.int64)
    x = 0
    for k in range(n):
        expo[x] = k
        x = G.mult[x, g0]
    j = np.arange(n)
    chars = np.exp(2j * np.pi * np.outer(j, expo) / n)
    return [c.reshape(n, 1, 1) for c in chars]


def _dihedral_irreps(G: FiniteGroup) -> list[np.ndarray]:
    n = G.family[1]
    one = np.eye(1)
    imgs = [(one, one), (one, -one)]
    if n % 2 == 0:
        imgs += [(-one, one), (-one, -one)]
    out = [_from_generator_images(G, list(p)) for p in imgs]
    s = np.array([[1.0, 0.0], [0.0, -1.0]])
    for k in range(1, (n - 1) // 2 + 1):
        t = 2 * np.pi * k / n
        r = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
        out.append(_from_generator_images(G, [r, s]))
    return out


def _partitions(n: int, largest: int | None = None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def _standard_tableaux(shape: tuple[int, ...]) -> list[tuple[tuple[int, int], ...]]:
    """Standard Young tableaux as tuples ``pos[v] = (row, col)`` for v = 0..n-1."""
    n = sum(shape)
    out = []

    def rec(rows: list[int], pos: list):
        v = len(pos)
        if v == n:
            out.append(tuple(pos))
            return
        for r in range(len(shape)):
            c = rows[r]
            if c < shape[r] and (r == 0 or rows[r - 1] > c):
                rows[r] += 1
                pos.append((r, c))
                rec(rows, pos)
                pos.pop()
                rows[r] -= 1

    rec([0] * len(shape), [])
    return out


def young_orthogonal_form(shape: tuple[int, ...]) -> list[np.ndarray]:
    """Matrices of the adjacent transpositions ``(k, k+1)``, k = 0..n-2."""
    n = sum(shape)
    tabs = _standard_tableaux(shape)
    index = {t: i for i, t in enumerate(tabs)}
    d = len(tabs)
    gens = []
    for k in range(n - 1):
        m = np.zeros((d, d))
        for i, t in enumerate(tabs):
            (r1, c1), (r2, c2) = t[k], t[k + 1]
            if r1 == r2:
                m[i, i] = 1.0
            elif c1 == c2:
                m[i, i] = -1.0
            else:
                dist = (c2 - r2) - (c1 - r1)
                swapped = list(t)
                swapped[k], swapped[k + 1] = t[k + 1], t[k]
                j = index[tuple(swapped)]
                m[i, i] = 1.0 / dist
                m[j, i] = math.sqrt(1.0 - 1.0 / dist ** 2)
        gens.append(m)
    return gens


def _symmetric_irreps(G: FiniteGroup) -> list[np.ndarray]:
    n = G.family[1]
    if n < 2:
        return [np.ones((G.order, 1, 1), dtype=np.complex128)]
    return [_from_generator_images(G, young_orthogonal_form(lam)) for lam in _partitions(n)]


def _product_irreps(G: FiniteGroup, seed: int) -> list[np.ndarray]:
    A, B = G.factors
    ia = np.repeat(np.arange(A.order), B.order)
    ib = np.tile(np.arange(B.order), A.order)
    out = []
    for ra in compute_irreps(A, seed):
        for rb in compute_irreps(B, seed):
            ma, mb = ra.matrices[ia], rb.matrices[ib]
            out.append(np.einsum("gij,gkl->gikjl", ma, mb).reshape(G.order, ra.dim * rb.dim, -1))
    return out


def _regular_splitting(G: FiniteGroup, seed: int) -> list[np.ndarray]:
    """Split the regular representation with a random Hermitian commutant element.

    ``B[x, y] = c[x^-1 y]`` commutes with the left regular action, so the
    eigenspaces of ``B + B^*`` are invariant; for generic ``c`` each one
    carries a single irrep.
    """
    n = G.order
    rng = np.random.default_rng(seed)
    ar = np.arange(n)
    left_inv = G.mult[G.inv]  # left_inv[g, x] = g^-1 x
    for attempt in range(RETRIES):
        c = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(n)
        B = c[G.mult[G.inv[:, None], ar[None, :]]]
        w, V = np.linalg.eigh(B + B.conj().T)
        scale = max(1.0, float(np.abs(w).max()))
        gaps = np.diff(w) / scale
        if np.any((gaps > 1e-9) & (gaps < 1e-6)):
            logger.debug("near-degenerate eigenvalue gap, retrying (attempt %d)", attempt)
            continue
        cuts = np.flatnonzero(gaps >= 1e-6) + 1
        clusters = np.split(ar, cuts)
        reps, seen, ok = [], [], True
        for cl in clusters:
            Vc = V[:, cl]
            P = Vc @ Vc.conj().T
            chi = P[ar[None, :], left_inv].sum(axis=1)
            if abs(np.vdot(chi, chi).real / n - 1) > SPLIT_TOL * 10:
                ok = False
                break
            if any(np.abs(chi - s).max() < 1e-6 for s in seen):
                continue
            seen.append(chi)
            reps.append(Vc)
        if not ok or sum(v.shape[1] ** 2 for v in reps) != n:
            logger.debug("splitting produced a reducible block, retrying (attempt %d)", attempt)
            continue
        out = []
        for Vc in reps:
            # rho(g) = Vc^* L(g) Vc with (L(g) v)[x] = v[g^-1 x]
            out.append(np.einsum("xi,gxj->gij", Vc.conj(), Vc[left_inv]))
        return out
    raise IrrepError(f"regular representation splitting failed for {G.label} after {RETRIES} attempts")


def _canonical(G: FiniteGroup, mats: list[np.ndarray]) -> IrrepSet:
    def key(m):
        chi = np.trace(m, axis1=1, axis2=2)
        re = np.round(chi.real, 8) + 0.0
        im = np.round(chi.imag, 8) + 0.0
        return (m.shape[1], tuple(zip(-re, -im)))

    mats = sorted(mats, key=key)
    return IrrepSet(G, [Irrep(m.shape[1], np.ascontiguousarray(m, dtype=np.complex128), i)
                        for i, m in enumerate(mats)])


_MEMO: dict[tuple[str, int], IrrepSet] = {}


def _cache_path(G: FiniteGroup, seed: int) -> Path | None:
    root = os.environ.get("GDFT_CACHE_DIR")
    if not root:
        return None
    return Path(root) / f"irreps_{G.key}_{seed}.json"


def save_irreps(irreps: IrrepSet, path: str | os.PathLike) -> None:
    """Write an irrep set as JSON with row-major ``[re, im]`` matrices per element."""
    obj = {"group": irreps.group.key, "order": irreps.group.order,
           "irreps": [{"id": r.id, "dim": r.dim,
                       "matrices": np.stack([r.matrices.real, r.matrices.imag], -1).tolist()}
                      for r in irreps]}
    Path(path).write_text(json.dumps(obj))


def load_irreps(G: FiniteGroup, path: str | os.PathLike) -> IrrepSet:
    obj = json.loads(Path(path).read_text())
    if obj["group"] != G.key:
        raise IrrepError("irrep cache belongs to a different group")
    out = []
    for e in obj["irreps"]:
        a = np.asarray(e["matrices"], dtype=float).reshape(G.order, e["dim"], e["dim"], 2)
        out.append(Irrep(e["dim"], a[..., 0] + 1j * a[..., 1], e["id"]))
    return IrrepSet(G, out)


def compute_irreps(G: FiniteGroup, seed: int = 0, validate: bool = True) -> IrrepSet:
    """A complete set of unitary irreps of ``G`` in canonical order.

    Cyclic groups use characters, dihedral groups rotation matrices,
    symmetric groups Young's orthogonal form and direct products tensor
    products of factor irreps.  Anything else goes through regular
    representation splitting.
    """
    memo_key = (G.key, seed)
    if memo_key in _MEMO:
        cached = _MEMO[memo_key]
        return cached if cached.group is G else IrrepSet(G, cached.irreps)
    path = _cache_path(G, seed)
    if path is not None and path.exists():
        result = load_irreps(G, path)
    else:
        if G.order > 512 and G.cyclic_generator is None and (G.family or ("",))[0] not in (
                "dihedral", "symmetric", "direct_product"):
            raise IrrepError(f"generic irrep construction is capped at order 512 ({G.label})")
        fam = (G.family or ("",))[0]
        if G.cyclic_generator is not None:
            mats = _cyclic_irreps(G)
        elif fam == "dihedral":
            mats = _dihedral_irreps(G)
        elif fam == "symmetric":
            mats = _symmetric_irreps(G)
        elif fam == "direct_product":
            mats = _product_irreps(G, seed)
        else:
            mats = _regular_splitting(G, seed)
        result = _canonical(G, mats)
        if validate:
            result.validate()
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            save_irreps(result, path)
    _MEMO[memo_key] = result
    return result


# ---------------------------------------------------------------------------
# equivalence


def irrep_equivalence(a: Irrep, b: Irrep, seed: int = 0) -> np.ndarray | None:
    """Unitary ``T`` with ``a(g) = T b(g) T^*`` for all g, or None."""
    if a.dim != b.dim or np.abs(a.character - b.character).max() > 1e-8:
        return None
    rng = np.random.default_rng(seed)
    for _ in range(RETRIES):
        X = rng.standard_normal((a.dim, b.dim)) + 1j * rng.standard_normal((a.dim, b.dim))
        T = np.einsum("gij,jk,glk->il", a.matrices, X, b.matrices.conj())
        c = np.trace(T @ T.conj().T).real / a.dim
        if c > 1e-8:
            return T / math.sqrt(c)
    return None


# ---------------------------------------------------------------------------
# restriction plans


@dataclass(eq=False)
class RestrictionPlan:
    """Adapted bases for restricting ``big`` to a subgroup.

    ``layouts[k]`` lists ``(small id, copy, row offset)`` slots, copy-major:
    all first copies in small-irrep order, then all second copies, and so
    on.  ``basis_change[k] @ rho(h) @ basis_change[k]^*`` is block diagonal
    in that layout for ``h`` in the subgroup.
    """

    big: IrrepSet
    small: IrrepSet
    subgroup: Subgroup
    layouts: list[list[tuple[int, int, int]]]
    basis_change: list[np.ndarray]
    is_identity: list[bool]
    multiplicity: np.ndarray  # (len(big), len(small))

    @property
    def S(self) -> list[np.ndarray]:
        """Per big irrep, the unitary taking the adapted basis back: ``rho(h) = S (+)sigma(h) S^*``."""
        return [B.conj().T for B in self.basis_change]

    def adapted(self) -> IrrepSet:
        """``big`` rewritten in the adapted basis."""
        out = []
        for r, B, ident in zip(self.big.irreps, self.basis_change, self.is_identity):
            m = r.matrices if ident else B @ r.matrices @ B.conj().T
            out.append(Irrep(r.dim, m, r.id))
        return IrrepSet(self.big.group, out)

    def lift(self, small_blocks: list[np.ndarray]) -> list[np.ndarray]:
        """Copy small-irrep blocks into the big-irrep slots (adapted basis)."""
        out = []
        for r, lay in zip(self.big.irreps, self.layouts):
            m = np.zeros((r.dim, r.dim), dtype=np.complex128)
            for sid, _, off in lay:
                d = self.small.irreps[sid].dim
                m[off:off + d, off:off + d] = small_blocks[sid]
            out.append(m)
        return out

    def max_residual(self) -> float:
        worst = 0.0
        el = list(self.subgroup.elements)
        for r, B, lay in zip(self.big.irreps, self.basis_change, self.layouts):
            conj = B @ r.matrices[el] @ B.conj().T
            target = np.zeros_like(conj)
            for sid, _, off in lay:
                d = self.small.irreps[sid].dim
                target[:, off:off + d, off:off + d] = self.small.irreps[sid].matrices
            worst = max(worst, float(np.abs(conj - target).max()))
        return worst


def _phase_fix(V: np.ndarray) -> np.ndarray:
    for c in range(V.shape[1]):
        col = V[:, c]
        i = int(np.argmax(np.abs(col) > 1e-8))
        V[:, c] = col * (abs(col[i]) / col[i])
    return V


def restriction_plan(big: IrrepSet, H: Subgroup, small: IrrepSet,
                     inner: RestrictionPlan | None = None, tol: float = 1e-7) -> RestrictionPlan:
    """Adapted bases for ``big`` restricted to ``H``.

    ``small`` is an irrep set of ``H.as_group()``.  With ``inner`` (a plan
    restricting ``small`` further to a subgroup of ``H``) the small irreps
    are first rewritten in the inner adapted basis, so the result is adapted
    to the whole chain.
    """
    if inner is not None:
        small = inner.adapted()
    el = list(H.elements)
    nh = H.order
    layouts, changes, ident, mult = [], [], [], np.zeros((len(big), len(small)), dtype=np.int64)
    # multiplicities from characters; only constituents with m > 0 are decomposed
    chi_big = np.stack([np.trace(r.matrices[el], axis1=1, axis2=2) for r in big.irreps])
    expected = np.rint((chi_big @ small.characters.conj().T).real / nh).astype(np.int64)
    for k, rho in enumerate(big.irreps):
        mh = rho.matrices[el]
        copies = []
        for s, sig in enumerate(small.irreps):
            if expected[k, s] == 0:
                copies.append(None)
                continue
            ds = sig.dim
            P = (ds / nh) * np.einsum("h,hij->ij", sig.matrices[:, 0, 0].conj(), mh)
            P = (P + P.conj().T) / 2
            w, V = np.linalg.eigh(P)
            V1 = _phase_fix(V[:, w > 0.5].copy())
            m = V1.shape[1]
            if m != expected[k, s]:
                raise IrrepError(f"projector rank {m} disagrees with character multiplicity {expected[k, s]}")
            mult[k, s] = m
            if m == 0:
                copies.append(None)
                continue
            # w_{c,j} = P_{j0} v_c with P_{j0} = ds/|H| sum conj(sigma(h)[j,0]) rho(h)
            W = (ds / nh) * np.einsum("hj,hab,bc->cja", sig.matrices[:, :, 0].conj(), mh, V1)
            copies.append(W.reshape(m, ds, rho.dim))
        if int((mult[k] * np.array(small.dims)).sum()) != rho.dim:
            raise IrrepError(f"restriction of irrep {k} does not decompose (dimension mismatch)")
        cols, lay, off = [], [], 0
        for c in range(int(mult[k].max())):
            for s, W in enumerate(copies):
                if W is not None and c < W.shape[0]:
                    cols.extend(W[c])
                    lay.append((s, c, off))
                    off += small.irreps[s].dim
        U = np.array(cols).T
        if np.allclose(U, np.eye(rho.dim), atol=1e-12):
            U = np.eye(rho.dim, dtype=np.complex128)
            ident.append(True)
        else:
            ident.append(False)
        layouts.append(lay)
        changes.append(U.conj().T)
    plan = RestrictionPlan(big, small, H, layouts, changes, ident, mult)
    res = plan.max_residual()
    if res > tol:
        raise IrrepError(f"restriction block residual {res:.2e} exceeds {tol:.0e}")
    return plan


def relative_subgroup(H: Subgroup, N: Subgroup) -> Subgroup:
    """``N`` (a subgroup of the same parent, inside ``H``) as a subgroup of ``H.as_group()``."""
    if not N.issubset(H):
        raise ValueError("N is not contained in H")
    Hg = H.as_group()
    return Subgroup(Hg, tuple(int(x) for x in H.index_of[list(N.elements)]))


# ---------------------------------------------------------------------------
# Clifford theory


@dataclass(eq=False)
class CliffordData:
    """How ``irr(H)`` restricts to a normal subgroup ``N``.

    ``orbits[l]`` lists irr(N) ids of one H-orbit (ascending).  For each
    ``sigma`` in irr(H): ``orbit_of[sigma]``, ``e[sigma]`` (multiplicity)
    and ``d[sigma]`` (dimension of the irr(N) constituents).
    ``S[l]`` is the list of sigma with ``orbit_of[sigma] == l``.
    """

    H: FiniteGroup
    N: Subgroup
    orbits: list[list[int]]
    orbit_of: list[int]
    e: list[int]
    d: list[int]
    S: list[list[int]]
    dims: list[int]

    @property
    def index(self) -> int:
        return self.H.order // self.N.order

    def check(self) -> None:
        for s, dim in enumerate(self.dims):
            if dim != self.d[s] * self.e[s] * len(self.orbits[self.orbit_of[s]]):
                raise IrrepError(f"dim(sigma_{s}) != d e |O|")
        for l, members in enumerate(self.S):
            total = sum(self.dims[s] * self.e[s] // self.d[s] for s in members)
            if total != self.index or any((self.dims[s] * self.e[s]) % self.d[s] for s in members):
                raise IrrepError(f"orbit {l}: sum dim*e/d = {total} != |H/N| = {self.index}")


def clifford_data(H: FiniteGroup, N: Subgroup, irrH: IrrepSet, irrN: IrrepSet,
                  plan: RestrictionPlan) -> CliffordData:
    """Orbits of H on irr(N) and the restriction pattern of each irr(H).

    ``N`` is a subgroup of ``H`` (the table group) and ``plan`` restricts
    ``irrH`` to it.
    """
    Nel = list(N.elements)
    conj = H.conj[:, Nel]  # (|H|, |N|): h n h^-1 as H indices
    local = N.index_of
    chars = irrN.characters
    nN = len(irrN)
    parent = list(range(nN))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for h in range(H.order):
        moved = chars[:, local[conj[h]]]
        for a in range(nN):
            match = np.flatnonzero(np.abs(chars - moved[a]).max(axis=1) < 1e-6)
            if match.size != 1:
                raise IrrepError("conjugated character does not match a unique irr(N)")
            ra, rb = find(a), find(int(match[0]))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for a in range(nN):
        groups.setdefault(find(a), []).append(a)
    orbits = sorted(groups.values(), key=lambda o: o[0])
    where = {a: l for l, o in enumerate(orbits) for a in o}
    orbit_of, e, d = [], [], []
    for s, lay in enumerate(plan.layouts):
        present = sorted({sid for sid, _, _ in lay})
        ls = {where[x] for x in present}
        if len(ls) != 1:
            raise IrrepError(f"restriction of irr(H)[{s}] mixes orbits {sorted(ls)}")
        l = ls.pop()
        if present != orbits[l]:
            raise IrrepError(f"restriction of irr(H)[{s}] misses part of its orbit")
        mults = {int(plan.multiplicity[s, x]) for x in present}
        if len(mults) != 1:
            raise IrrepError("unequal multiplicities inside one orbit")
        orbit_of.append(l)
        e.append(mults.pop())
        d.append(irrN.irreps[present[0]].dim)
    S = [[s for s in range(len(irrH)) if orbit_of[s] == l] for l in range(len(orbits))]
    cd = CliffordData(H, N, orbits, orbit_of, e, d, S, list(irrH.dims))
    cd.check()
    return cd
