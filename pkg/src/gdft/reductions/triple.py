"""Triple-subgroup reduction: ``G``-DFT from ``H``-, ``N``- and ``K``-DFTs.

``N`` is normal in ``H``, ``K`` contains ``N``, and ``HK`` is a large
subset of ``G``.  Inputs supported on ``HK`` are transformed by

1. one ``H``-DFT per right coset ``N y`` of ``N`` in ``K``;
2. a sparse rewrite of each ``H``-DFT into scalars indexed by
   ``(label, n)``, via inverse ``N``-DFTs;
3. one ``K``-DFT per label over the function ``n y -> scalar``;
4. a fixed linear lift of the resulting intermediate representation to
   the ``G``-DFT, applied as a few dense block products.

Translates of ``HK`` then cover the whole group.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import _kernels
from ..dft import BlockDiagonal, OpCounter, coeffs_of, counted_matmul, inverse_dft
from ..groups import FiniteGroup, GroupError, Subgroup, TripleCase, coset_reps, translate_cover
from ..reps import CliffordData, IrrepError, IrrepSet, RestrictionPlan, clifford_data, relative_subgroup, restriction_plan
from .basic import Recurse, supported_dft_to_full
from .labeling import Labeling, ParentMatrix, build_labeling, build_target_format

LIFT_TOL = 1e-6


class SupportError(ValueError):
    pass


# ---------------------------------------------------------------------------
# sparse rewrite


def _slot_blocks(M: np.ndarray, cd: CliffordData, s: int, i: int, j: int) -> list[np.ndarray]:
    d = cd.d[s]
    O = cd.orbits[cd.orbit_of[s]]
    return [M[i * d:(i + 1) * d, (j * len(O) + k) * d:(j * len(O) + k + 1) * d] for k in range(len(O))]


def sparse_rewrite(M: BlockDiagonal, cd: CliffordData, lab: Labeling, irrN: IrrepSet,
                   counter: OpCounter | None = None) -> np.ndarray:
    """Scalars ``P[u, n]`` with ``sum_n (M_n (x) J) sigma(n) = M^sigma``.

    ``M`` is an ``H``-DFT in the ``N``-adapted basis.  Row ``u`` follows
    ``lab.used``; ``M_n^sigma[i, j] = P[label(sigma, i, j), n]``.
    One inverse ``N``-DFT is spent per used label, restricted to the irr(N)
    touched by that label.
    """
    row_of = {int(u): k for k, u in enumerate(lab.used)}
    targets: list[list[np.ndarray | None]] = [[None] * len(irrN) for _ in lab.used]
    for s, blk in enumerate(M.blocks):
        O = cd.orbits[cd.orbit_of[s]]
        height, e = lab.maps[s].shape
        for i in range(height):
            for j in range(e):
                row = targets[row_of[lab(s, i, j)]]
                for lam, piece in zip(O, _slot_blocks(blk, cd, s, i, j)):
                    if row[lam] is not None:
                        raise GroupError("two sources share a label and an N-irrep")
                    row[lam] = piece
    P = np.zeros((len(lab.used), irrN.group.order), dtype=np.complex128)
    for k, row in enumerate(targets):
        active = [lam for lam, b in enumerate(row) if b is not None]
        blocks = [b if b is not None else np.zeros((d, d)) for b, d in zip(row, irrN.dims)]
        if counter is not None:
            counter.call("inverse N-DFT")
        P[k] = inverse_dft(BlockDiagonal(blocks), irrN, counter, active=active)
    return P


def reconstruct_from_rewrite(P: np.ndarray, cd: CliffordData, lab: Labeling, irrH_adapted: IrrepSet,
                             N_in_H: Subgroup) -> BlockDiagonal:
    """``sum_n (M_n^sigma (x) J^sigma) sigma(n)``, the inverse of :func:`sparse_rewrite`."""
    row_of = {int(u): k for k, u in enumerate(lab.used)}
    out = []
    for s, sig in enumerate(irrH_adapted.irreps):
        d = cd.d[s]
        O = len(cd.orbits[cd.orbit_of[s]])
        J = np.kron(np.ones((1, O)), np.eye(d))
        rows = np.vectorize(lambda u: row_of[int(u)])(lab.maps[s])  # (height, e)
        acc = np.zeros((sig.dim, sig.dim), dtype=np.complex128)
        for t, n in enumerate(N_in_H.elements):
            Mn = P[rows, t]
            acc += np.kron(Mn, J) @ sig.matrices[n]
        out.append(acc)
    return BlockDiagonal(out)


# ---------------------------------------------------------------------------
# lift


@dataclass
class _LiftBlock:
    """One dense product ``Y = IR_(b, tau) @ X`` of the lift."""

    level: int
    block: int
    tau: int
    gather: np.ndarray   # (side, side) row into the padded IR array; the last row is zero
    X: np.ndarray        # (side * d_tau, w)
    src: np.ndarray      # flat indices into Y that land somewhere
    dest: np.ndarray     # flat destination in the concatenated output

    @property
    def a(self) -> int:
        return self.X.shape[0]

    @property
    def w(self) -> int:
        return self.X.shape[1]


@dataclass
class LiftPlan:
    """The fixed linear map from an intermediate representation to a ``G``-DFT.

    ``S[k]`` and ``T_inv[k]`` are the outer basis changes for irrep ``k`` of
    ``G`` (``H``-adapted on the left, ``K``-adapted on the right).
    """

    dims: tuple[int, ...]
    blocks: list[_LiftBlock]
    S: list[np.ndarray]
    T_inv: list[np.ndarray]
    S_identity: list[bool]
    T_identity: list[bool]
    probe_residual: float = 0.0

    @property
    def sum_a2(self) -> int:
        return sum(b.a ** 2 for b in self.blocks)

    @property
    def sum_aw(self) -> int:
        return sum(b.a * b.w for b in self.blocks)

    def apply(self, IR: "IntermediateRep", counter: OpCounter | None = None) -> BlockDiagonal:
        offsets = np.concatenate([[0], np.cumsum([d * d for d in self.dims])])
        flat = np.zeros(int(offsets[-1]), dtype=np.complex128)
        padded = [np.concatenate([T, np.zeros((1,) + T.shape[1:], dtype=T.dtype)]) for T in IR.T]
        for lb in self.blocks:
            dt = padded[lb.tau].shape[1]
            s = lb.gather.shape[0]
            A = padded[lb.tau][lb.gather]            # (s, s, dt, dt): [x, y', c, c']
            A = A.transpose(0, 2, 1, 3).reshape(s * dt, s * dt)
            Y = counted_matmul(A, lb.X, counter)
            _kernels.scatter_add(flat, lb.dest, Y.reshape(-1)[lb.src])
            if counter is not None:
                counter.count(add=int(lb.src.size))
        out = []
        for k, d in enumerate(self.dims):
            B = flat[offsets[k]:offsets[k + 1]].reshape(d, d)
            if not self.S_identity[k]:
                B = counted_matmul(self.S[k], B, counter)
            if not self.T_identity[k]:
                B = counted_matmul(B, self.T_inv[k], counter)
            out.append(B)
        return BlockDiagonal(out)


def build_lift_plan(planGH: RestrictionPlan, planGK: RestrictionPlan, cd: CliffordData,
                    lab: Labeling, probe: bool = True, seed: int = 0) -> LiftPlan:
    """Precompute the lift.

    ``planGH`` restricts irr(G) to ``H`` with small irreps in the
    ``N``-adapted basis (the ones ``cd`` describes); ``planGK`` restricts
    irr(G) to ``K``.  With ``Z = S^* T`` the output block for ``(sigma_p,
    tau_q)`` of irrep ``rho`` is

        sum_j,c'  Zfold[j, r, c'] * Q_{label(sigma, i, j)}[c', c]

    at row ``(i, r)``, column ``c``, where ``Zfold`` sums ``Z`` over the
    orbit members of each copy of sigma.
    """
    irrG = planGH.big
    dimsK = planGK.small.dims
    fmt = lab.fmt
    offsets = np.concatenate([[0], np.cumsum([d * d for d in irrG.dims])])
    # per (level, block, tau): X columns and destination lists
    cols: dict[tuple[int, int, int], list[tuple[np.ndarray, np.ndarray]]] = {}
    S_list, T_inv = planGH.S, planGK.basis_change
    for k, rho in enumerate(irrG.irreps):
        Z = planGH.basis_change[k] @ planGK.S[k]
        for sp, _, offp in planGH.layouts[k]:
            d = cd.d[sp]
            O = len(cd.orbits[cd.orbit_of[sp]])
            e = cd.e[sp]
            height = cd.dims[sp] // d
            lev = lab.level[sp]
            side = 1 << lev
            for tq, _, offq in planGK.layouts[k]:
                dt = dimsK[tq]
                Zpq = Z[offp:offp + cd.dims[sp], offq:offq + dt].reshape(e, O, d, dt)
                Zfold = Zpq.sum(axis=1)  # (e, d, dt)
                for j in range(e):
                    b, y = lab.block_and_col(sp, j)
                    for r in range(d):
                        col = np.zeros(side * dt, dtype=np.complex128)
                        col[y * dt:(y + 1) * dt] = Zfold[j, r]
                        # Y[(x, c), this column] -> out_rho[offp + x*d + r, offq + c]
                        dest = np.full((side, dt), -1, dtype=np.int64)
                        x = np.arange(height)[:, None]
                        c = np.arange(dt)[None, :]
                        dest[:height] = offsets[k] + (offp + x * d + r) * rho.dim + offq + c
                        cols.setdefault((lev, b, tq), []).append((col, dest.ravel()))
    blocks = []
    for (lev, b, tq), entries in sorted(cols.items()):
        side = 1 << lev
        # merge columns that are identical up to destination (same sigma column pattern)
        X = np.stack([c for c, _ in entries], axis=1)
        D = np.stack([dst for _, dst in entries], axis=1)  # (side*dt, w)
        Dflat = D.ravel()
        keep = np.flatnonzero(Dflat >= 0)
        base = fmt.block_offsets[lev][b]
        labels = base + np.arange(side * side).reshape(side, side)
        pos = np.searchsorted(lab.used, labels)
        pos = np.minimum(pos, len(lab.used) - 1)
        gather = np.where(lab.used[pos] == labels, pos, len(lab.used))
        blocks.append(_LiftBlock(lev, b, tq, gather, X, keep, Dflat[keep]))
    plan = LiftPlan(tuple(irrG.dims), blocks, S_list, T_inv,
                    list(planGH.is_identity), list(planGK.is_identity))
    if probe:
        plan.probe_residual = _probe(plan, planGH, planGK, cd, lab, seed)
        if plan.probe_residual > LIFT_TOL:
            raise IrrepError(f"lift probe residual {plan.probe_residual:.2e} exceeds {LIFT_TOL:g}")
    return plan


def _probe(plan: LiftPlan, planGH: RestrictionPlan, planGK: RestrictionPlan, cd: CliffordData,
           lab: Labeling, seed: int) -> float:
    """Compare the lift with the dense formula on one random summand."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(len(lab.used)) + 1j * rng.standard_normal(len(lab.used))
    irrK = planGK.small
    kk = int(rng.integers(irrK.group.order))
    IR = IntermediateRep([v[:, None, None] * t.matrices[kk].T[None] for t in irrK.irreps], lab)
    got = plan.apply(IR)
    row_of = {int(u): i for i, u in enumerate(lab.used)}
    worst = 0.0
    for k, rho in enumerate(planGH.big.irreps):
        left = np.zeros((rho.dim, rho.dim), dtype=np.complex128)
        for sp, _, offp in planGH.layouts[k]:
            d = cd.d[sp]
            O = len(cd.orbits[cd.orbit_of[sp]])
            Msig = v[np.vectorize(lambda u: row_of[int(u)])(lab.maps[sp])]
            J = np.kron(np.ones((1, O)), np.eye(d))
            left[offp:offp + cd.dims[sp], offp:offp + cd.dims[sp]] = np.kron(Msig, J)
        right = np.zeros((rho.dim, rho.dim), dtype=np.complex128)
        for tq, _, offq in planGK.layouts[k]:
            dt = irrK.dims[tq]
            right[offq:offq + dt, offq:offq + dt] = irrK.irreps[tq].matrices[kk]
        Z = planGH.basis_change[k] @ planGK.S[k]
        want = planGH.S[k] @ left @ Z @ right @ planGK.basis_change[k]
        worst = max(worst, float(np.abs(want - got.blocks[k]).max()))
    return worst


# ---------------------------------------------------------------------------
# intermediate representation


@dataclass
class IntermediateRep:
    """Per irr(K) ``tau``: array ``T[tau][u] = sum_{n,y} P_{n,y}[u] tau(n y)^T``.

    ``u`` runs over ``lab.used``.
    """

    T: list[np.ndarray]
    lab: Labeling
    calls: Counter = field(default_factory=Counter)

    def parent_matrix(self, tau: int, c: int, cp: int) -> ParentMatrix:
        """Entries ``[c, c']`` of every label, laid out in the target format."""
        flat = np.zeros(self.lab.fmt.r, dtype=np.complex128)
        flat[self.lab.used] = self.T[tau][:, c, cp]
        return ParentMatrix.from_labels(self.lab.fmt, flat)


class TripleReduction:
    """Everything precomputable for one ``(G, N, H, K)``.

    ``irrH`` and ``irrK`` are the irrep sets the recursive ``H``- and
    ``K``-DFTs return; ``irrN`` is the irrep set of ``N``.
    """

    def __init__(self, irrG: IrrepSet, case: TripleCase, irrH: IrrepSet, irrK: IrrepSet,
                 irrN: IrrepSet, probe: bool = True):
        G = irrG.group
        self.G, self.case = G, case
        N, H, K = case.N, case.H, case.K
        if not (N.issubset(H) and N.issubset(K)):
            raise GroupError("N must lie in both H and K")
        if set(H.elements) & set(K.elements) != set(N.elements):
            raise GroupError("H and K must intersect exactly in N")
        self.N_in_H = relative_subgroup(H, N)
        self.planHN = restriction_plan(irrH, self.N_in_H, irrN)
        self.irrH_adapted = self.planHN.adapted()
        self.irrN = irrN
        self.cd = clifford_data(H.as_group(), self.N_in_H, self.irrH_adapted, irrN, self.planHN)
        self.fmt = build_target_format(self.cd.index)
        self.lab = build_labeling(self.cd, self.fmt)
        self.planGH = restriction_plan(irrG, H, irrH, inner=self.planHN)
        self.planGK = restriction_plan(irrG, K, irrK)
        self.lift = build_lift_plan(self.planGH, self.planGK, self.cd, self.lab, probe=probe)
        self.Y = coset_reps(K.as_group(), relative_subgroup(K, N), side="right")
        self.Y = [int(K.elements[y]) for y in self.Y]
        self.Hel = np.asarray(H.elements)
        self.Nel = np.asarray(N.elements)
        self.K = K
        hk = np.zeros(G.order, dtype=bool)
        hk[G.mult[np.ix_(self.Hel, np.asarray(K.elements))].ravel()] = True
        self.HK = np.flatnonzero(hk)
        self.hk_mask = hk
        self.cover = translate_cover(G, self.HK)
        self.last_calls: list[Counter] = []
        row_of = {int(u): k for k, u in enumerate(self.lab.used)}
        active: list[set[int]] = [set() for _ in self.lab.used]
        for s, M in enumerate(self.lab.maps):
            for u in M.ravel():
                active[row_of[int(u)]].update(self.cd.orbits[self.cd.orbit_of[s]])
        self.label_active = [sorted(a) for a in active]

    def _adapt(self, M: BlockDiagonal, counter) -> BlockDiagonal:
        out = []
        for b, B, ident in zip(M.blocks, self.planHN.basis_change, self.planHN.is_identity):
            out.append(b if ident else counted_matmul(counted_matmul(B, b, counter), B.conj().T, counter))
        return BlockDiagonal(out)

    def intermediate(self, alpha, recurse_H: Recurse, recurse_K: Recurse,
                     counter: OpCounter | None = None) -> IntermediateRep:
        c = coeffs_of(alpha)
        bad = np.flatnonzero((c != 0) & ~self.hk_mask)
        if bad.size:
            raise SupportError(f"input not supported on HK; offending elements {bad[:10].tolist()}")
        G = self.G
        nU = len(self.lab.used)
        beta = np.zeros((nU, self.K.order), dtype=np.complex128)
        Kidx = self.K.index_of
        calls: Counter = Counter()
        for y in self.Y:
            a = c[G.mult[self.Hel, y]]
            if not a.any():
                continue
            calls["H-DFT"] += 1
            calls["inverse N-DFT"] += nU
            if counter is not None:
                counter.call("H-DFT")
            M = self._adapt(recurse_H(a, counter), counter)
            P = sparse_rewrite(M, self.cd, self.lab, self.irrN, counter)
            beta[:, Kidx[G.mult[self.Nel, y]]] = P
        T = [np.zeros((nU, t.dim, t.dim), dtype=np.complex128) for t in self.planGK.small.irreps]
        for u in range(nU):
            if not beta[u].any():
                continue
            calls["K-DFT"] += 1
            if counter is not None:
                counter.call("K-DFT")
            Q = recurse_K(beta[u], counter)
            for t, q in enumerate(Q.blocks):
                T[t][u] = q.T
        return IntermediateRep(T, self.lab, calls)

    def supported(self, alpha, recurse_H: Recurse, recurse_K: Recurse,
                  counter: OpCounter | None = None) -> BlockDiagonal:
        """``G``-DFT of an input supported on ``HK``."""
        IR = self.intermediate(alpha, recurse_H, recurse_K, counter)
        self.last_calls.append(IR.calls)
        return self.lift.apply(IR, counter)

    def __call__(self, alpha, recurse_H: Recurse, recurse_K: Recurse,
                 counter: OpCounter | None = None) -> BlockDiagonal:
        """Full ``G``-DFT; ``last_calls`` then holds one call tally per repetition."""
        self.last_calls = []
        fn: Callable = lambda b, ctr: self.supported(b, recurse_H, recurse_K, ctr)
        return supported_dft_to_full(alpha, self.HK, fn, self.planGH.big, counter, cover=self.cover)

    def label_inverse_costs(self) -> tuple[int, int]:
        """Counted (mul, add) of the inverse ``N``-DFTs of one sparse rewrite."""
        n = self.irrN.group.order
        mul = add = 0
        for s_active in self.label_active:
            dims = [self.irrN.dims[l] for l in s_active]
            mul += sum(n * (d * d + 1) for d in dims)
            add += sum(n * (d * d - 1) for d in dims) + n * max(len(dims) - 1, 0)
        return mul, add


def intermediate_rep(alpha, red: TripleReduction, recurse_H: Recurse, recurse_K: Recurse,
                     counter: OpCounter | None = None) -> IntermediateRep:
    return red.intermediate(alpha, recurse_H, recurse_K, counter)


def lift_to_g_dft(IR: IntermediateRep, plan: LiftPlan, counter: OpCounter | None = None) -> BlockDiagonal:
    return plan.apply(IR, counter)


def triple_subgroup_dft(alpha, red: TripleReduction, recurse_H: Recurse, recurse_K: Recurse,
                        counter: OpCounter | None = None) -> BlockDiagonal:
    return red(alpha, recurse_H, recurse_K, counter)
