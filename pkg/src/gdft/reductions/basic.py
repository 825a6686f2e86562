"""Single-subgroup and prime-index reductions, and full DFTs from supported ones."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..dft import BlockDiagonal, OpCounter, coeffs_of, counted_matmul
from ..groups import FiniteGroup, GroupError, Subgroup, _is_prime, coset_reps, is_normal, translate_cover
from ..reps import IrrepSet, RestrictionPlan

# recurse(local_coeffs, counter) -> BlockDiagonal over the subgroup's irreps
Recurse = Callable[[np.ndarray, OpCounter], BlockDiagonal]


def _acc(F: list[np.ndarray] | None, T: list[np.ndarray], counter: OpCounter | None):
    if F is None:
        return [t.copy() for t in T]
    if counter is not None:
        counter.count(add=sum(t.size for t in T))
    for f, t in zip(F, T):
        f += t
    return F


def _blockmul(A: list[np.ndarray], B: list[np.ndarray], counter) -> list[np.ndarray]:
    return [counted_matmul(a, b, counter) for a, b in zip(A, B)]


def _from_adapted(F: list[np.ndarray], plan: RestrictionPlan, counter) -> list[np.ndarray]:
    """``B^* F B`` per block, skipping identity basis changes."""
    out = []
    for f, B, ident in zip(F, plan.basis_change, plan.is_identity):
        if ident:
            out.append(f)
        else:
            out.append(counted_matmul(counted_matmul(B.conj().T, f, counter), B, counter))
    return out


class SingleSubgroupReduction:
    """``G``-DFT from ``[G:H]`` many ``H``-DFTs.

    Works in the ``H``-adapted basis, where lifting an ``H``-DFT is a copy,
    and changes basis once at the end.
    """

    def __init__(self, G: FiniteGroup, H: Subgroup, plan: RestrictionPlan):
        self.G, self.H, self.plan = G, H, plan
        self.reps = coset_reps(G, H, side="right")
        self.Hel = np.asarray(H.elements)
        adapted = plan.adapted()
        self.rho_x = [adapted.block_of(x) for x in self.reps]

    def __call__(self, alpha, recurse: Recurse, counter: OpCounter | None = None) -> BlockDiagonal:
        c = coeffs_of(alpha)
        F = None
        for x, rx in zip(self.reps, self.rho_x):
            a = c[self.G.mult[self.Hel, x]]
            if not a.any():
                continue
            if counter is not None:
                counter.call("H-DFT")
            s = recurse(a, counter)
            lifted = self.plan.lift(s.blocks)
            F = _acc(F, lifted if x == 0 else _blockmul(lifted, rx, counter), counter)
        if F is None:
            return BlockDiagonal.zeros(self.plan.big.dims)
        return BlockDiagonal(_from_adapted(F, self.plan, counter))


def single_subgroup_dft(alpha, G: FiniteGroup, H: Subgroup, plan: RestrictionPlan,
                        recurse: Recurse, counter: OpCounter | None = None) -> BlockDiagonal:
    """``sum_x lift(s_x) (+)rho(x)`` over right coset reps ``x`` of ``H``."""
    return SingleSubgroupReduction(G, H, plan)(alpha, recurse, counter)


class PrimeIndexReduction:
    """``G``-DFT from ``p`` many ``N``-DFTs for ``N`` normal of prime index ``p``.

    With ``t`` the smallest element outside ``N``, the cosets are ``N t^j``
    and the lifted pieces are combined by Horner's rule in ``t``.
    """

    def __init__(self, G: FiniteGroup, N: Subgroup, plan: RestrictionPlan):
        p, rem = divmod(G.order, N.order)
        if rem or not _is_prime(p):
            raise GroupError(f"index {G.order / N.order:g} is not prime")
        if not is_normal(G, N):
            raise GroupError("subgroup is not normal")
        self.G, self.N, self.plan, self.p = G, N, plan, p
        self.t = int(np.flatnonzero(~N.member)[0])
        powers = [0]
        for _ in range(p - 1):
            powers.append(int(G.mult[powers[-1], self.t]))
        self.powers = powers
        self.Nel = np.asarray(N.elements)
        self.rho_t = plan.adapted().block_of(self.t)

    def __call__(self, alpha, recurse: Recurse, counter: OpCounter | None = None) -> BlockDiagonal:
        c = coeffs_of(alpha)
        pieces = [c[self.G.mult[self.Nel, tj]] for tj in self.powers]
        nonzero = [j for j, a in enumerate(pieces) if a.any()]
        if not nonzero:
            return BlockDiagonal.zeros(self.plan.big.dims)
        F = None
        for j in range(nonzero[-1], -1, -1):
            if F is not None:
                F = _blockmul(F, self.rho_t, counter)
            if pieces[j].any():
                if counter is not None:
                    counter.call("N-DFT")
                F = _acc(F, self.plan.lift(recurse(pieces[j], counter).blocks), counter)
        return BlockDiagonal(_from_adapted(F, self.plan, counter))


def prime_index_dft(alpha, G: FiniteGroup, N: Subgroup, plan: RestrictionPlan,
                    recurse: Recurse, counter: OpCounter | None = None) -> BlockDiagonal:
    return PrimeIndexReduction(G, N, plan)(alpha, recurse, counter)


def supported_dft_to_full(alpha, S: Sequence[int], supported_dft: Callable[[np.ndarray, OpCounter], BlockDiagonal],
                          irreps: IrrepSet, counter: OpCounter | None = None,
                          cover: Sequence[int] | None = None) -> BlockDiagonal:
    """Full ``G``-DFT from a DFT that only accepts inputs supported on ``S``.

    For each translate ``g`` of the cover, the part of ``alpha`` on
    ``S g`` not claimed by an earlier translate is shifted back onto ``S``,
    transformed, and multiplied by ``(+)rho(g)``.
    """
    G = irreps.group
    c = coeffs_of(alpha)
    S = np.unique(np.asarray(list(S), dtype=np.int64))
    if cover is None:
        cover = translate_cover(G, S)
    taken = np.zeros(G.order, dtype=bool)
    F = None
    for g in cover:
        dest = G.mult[S, g]
        fresh = ~taken[dest]
        taken[dest] = True
        beta = np.zeros(G.order, dtype=np.complex128)
        beta[S[fresh]] = c[dest[fresh]]
        if not beta.any():
            continue
        if counter is not None:
            counter.call("repetition")
        D = supported_dft(beta, counter).blocks
        F = _acc(F, D if g == 0 else _blockmul(D, irreps.block_of(g), counter), counter)
    if not taken.all():
        raise GroupError("translates do not cover the group")
    if F is None:
        return BlockDiagonal.zeros(irreps.dims)
    return BlockDiagonal(F)
