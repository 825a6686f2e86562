"""Group algebra elements, the naive DFT and its inverse, and operation counting."""
from __future__ import annotations

import threading
from collections import Counter, defaultdict
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from . import _kernels
from .groups import FiniteGroup

if TYPE_CHECKING:
    from .reps import IrrepSet


class DimensionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# operation counting


class OpCounter:
    """Counts complex multiplications and additions.

    Counts are attributed to every tag on the current scope stack, so a
    tag's total includes its nested scopes.  ``calls`` records how many
    sub-transforms each stage requested.
    """

    def __init__(self):
        self.mul = 0
        self.add = 0
        self.tags: dict[str, list[int]] = defaultdict(lambda: [0, 0])
        self.calls: Counter = Counter()
        self.events: list[dict] = []
        self._lock = threading.Lock()
        self._local = threading.local()

    @property
    def _stack(self) -> list[str]:
        if not hasattr(self._local, "stack"):
            self._local.stack = []
        return self._local.stack

    def count(self, mul: int = 0, add: int = 0) -> None:
        if mul < 0 or add < 0:
            raise ValueError("operation counts are nonnegative")
        with self._lock:
            self.mul += mul
            self.add += add
            for tag in set(self._stack):
                self.tags[tag][0] += mul
                self.tags[tag][1] += add

    def call(self, name: str, n: int = 1) -> None:
        with self._lock:
            self.calls[name] += n

    @contextmanager
    def scope(self, tag: str):
        self._stack.append(tag)
        try:
            yield self
        finally:
            self._stack.pop()

    def merge(self, other: "OpCounter") -> None:
        with self._lock:
            self.mul += other.mul
            self.add += other.add
            for t, (m, a) in other.tags.items():
                self.tags[t][0] += m
                self.tags[t][1] += a
            self.calls.update(other.calls)
            self.events.extend(other.events)

    @property
    def total(self) -> int:
        return self.mul + self.add

    def __repr__(self) -> str:
        return f"OpCounter(mul={self.mul}, add={self.add})"


def counted_matmul(A: np.ndarray, B: np.ndarray, counter: OpCounter | None) -> np.ndarray:
    """``A @ B`` with the classical count (n*k*m mults, n*(k-1)*m adds)."""
    n, k = A.shape
    m = B.shape[1]
    if counter is not None:
        counter.count(mul=n * k * m, add=n * max(k - 1, 0) * m)
    return A @ B


# ---------------------------------------------------------------------------
# data types


@dataclass
class GroupAlgebraElement:
    group: FiniteGroup
    coeffs: np.ndarray
    support: tuple[int, ...] | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != (self.group.order,):
            raise DimensionError(f"need {self.group.order} coefficients, got {self.coeffs.shape}")
        if self.support is not None:
            self.support = tuple(sorted(int(s) for s in self.support))
            if set(self.support) != set(np.flatnonzero(self.coeffs).tolist()):
                raise ValueError("support must list exactly the nonzero coefficients")

    @classmethod
    def delta(cls, group: FiniteGroup, g: int = 0) -> "GroupAlgebraElement":
        c = np.zeros(group.order, dtype=np.complex128)
        c[g] = 1
        return cls(group, c, (g,))

    @classmethod
    def random(cls, group: FiniteGroup, rng: np.random.Generator | int = 0,
               support: Sequence[int] | None = None) -> "GroupAlgebraElement":
        rng = np.random.default_rng(rng)
        c = rng.standard_normal(group.order) + 1j * rng.standard_normal(group.order)
        if support is not None:
            mask = np.zeros(group.order, dtype=bool)
            mask[list(support)] = True
            c[~mask] = 0
        return cls(group, c)

    @property
    def norm1(self) -> float:
        return float(np.abs(self.coeffs).sum())


def coeffs_of(alpha) -> np.ndarray:
    if isinstance(alpha, GroupAlgebraElement):
        return alpha.coeffs
    return np.asarray(alpha, dtype=np.complex128)


@dataclass
class BlockDiagonal:
    """One square complex block per irrep, in canonical irrep order."""

    blocks: list[np.ndarray]
    ids: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        self.blocks = [np.asarray(b, dtype=np.complex128) for b in self.blocks]
        if self.ids is None:
            self.ids = tuple(range(len(self.blocks)))
        for b in self.blocks:
            if b.ndim != 2 or b.shape[0] != b.shape[1]:
                raise DimensionError(f"blocks must be square, got {b.shape}")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.shape[0] for b in self.blocks)

    @property
    def size(self) -> int:
        return sum(d * d for d in self.dims)

    @classmethod
    def zeros(cls, dims: Iterable[int]) -> "BlockDiagonal":
        return cls([np.zeros((d, d), dtype=np.complex128) for d in dims])

    @classmethod
    def identity(cls, dims: Iterable[int]) -> "BlockDiagonal":
        return cls([np.eye(d, dtype=np.complex128) for d in dims])

    def _check(self, other: "BlockDiagonal") -> None:
        if self.dims != other.dims:
            raise DimensionError(f"block layouts differ: {self.dims} vs {other.dims}")

    def __add__(self, other: "BlockDiagonal") -> "BlockDiagonal":
        self._check(other)
        return BlockDiagonal([a + b for a, b in zip(self.blocks, other.blocks)], self.ids)

    def __matmul__(self, other: "BlockDiagonal") -> "BlockDiagonal":
        self._check(other)
        return BlockDiagonal([a @ b for a, b in zip(self.blocks, other.blocks)], self.ids)

    def residuals(self, other: "BlockDiagonal") -> np.ndarray:
        """Frobenius norm of the difference, per block."""
        self._check(other)
        return np.array([np.linalg.norm(a - b) for a, b in zip(self.blocks, other.blocks)])

    def to_json(self) -> dict:
        return {"blocks": [{"id": int(i), "dim": int(b.shape[0]),
                            "data": np.stack([b.real, b.imag], axis=-1).tolist()}
                           for i, b in zip(self.ids, self.blocks)]}

    @classmethod
    def from_json(cls, obj: dict) -> "BlockDiagonal":
        blocks, ids = [], []
        for entry in obj["blocks"]:
            arr = np.asarray(entry["data"], dtype=float).reshape(entry["dim"], entry["dim"], 2)
            blocks.append(arr[..., 0] + 1j * arr[..., 1])
            ids.append(int(entry["id"]))
        return cls(blocks, tuple(ids))


# ---------------------------------------------------------------------------
# transforms


def naive_dft(alpha, irreps: "IrrepSet", counter: OpCounter | None = None) -> BlockDiagonal:
    """Sum ``alpha_g rho(g)`` for every irrep; zero coefficients are skipped."""
    c = coeffs_of(alpha)
    if c.shape != (irreps.group.order,):
        raise DimensionError(f"input has {c.shape[0]} coefficients, group order is {irreps.group.order}")
    nnz = int(np.count_nonzero(c))
    blocks = []
    for rho in irreps.irreps:
        blocks.append(_kernels.dft_accumulate(c, rho.matrices))
    if counter is not None:
        s = irreps.total_entries
        counter.count(mul=nnz * s, add=max(nnz - 1, 0) * s)
    return BlockDiagonal(blocks)


def inverse_dft(M: BlockDiagonal, irreps: "IrrepSet", counter: OpCounter | None = None,
                active: Sequence[int] | None = None) -> np.ndarray:
    """Fourier inversion ``alpha_g = 1/|G| sum dim(rho) tr(rho(g^-1) M^rho)``.

    ``active`` restricts the sum to the listed irreps; the other blocks are
    taken to be structurally zero and cost nothing.
    """
    if M.dims != irreps.dims:
        raise DimensionError(f"blocks {M.dims} do not match irreps {irreps.dims}")
    n = irreps.group.order
    idx = range(len(irreps.irreps)) if active is None else active
    out = np.zeros(n, dtype=np.complex128)
    mul = add = 0
    for k in idx:
        rho = irreps.irreps[k]
        out += (rho.dim / n) * _kernels.trace_products(rho.inverse_matrices, M.blocks[k])
        mul += n * (rho.dim ** 2 + 1)
        add += n * (rho.dim ** 2 - 1)
    add += n * max(len(idx) - 1, 0)
    if counter is not None:
        counter.count(mul=mul, add=add)
    return out


def convolve(alpha, beta, counter: OpCounter | None = None,
             group: FiniteGroup | None = None) -> np.ndarray:
    """``(alpha * beta)_g = sum_h alpha_h beta_{h^-1 g}``."""
    if isinstance(alpha, GroupAlgebraElement) and isinstance(beta, GroupAlgebraElement):
        if alpha.group is not beta.group:
            raise ValueError("group mismatch")
        group = alpha.group
    if group is None:
        raise ValueError("convolve needs a group")
    a, b = coeffs_of(alpha), coeffs_of(beta)
    if a.shape != (group.order,) or b.shape != (group.order,):
        raise DimensionError("coefficient length does not match group order")
    out = np.zeros(group.order, dtype=np.complex128)
    nz = np.flatnonzero(a)
    for h in nz:
        out[group.mult[h]] += a[h] * b
    if counter is not None:
        counter.count(mul=nz.size * group.order, add=nz.size * group.order)
    return out


def vec_row(B: np.ndarray) -> np.ndarray:
    """Row-major vectorisation, the convention under which vec(ABC) = (A kron C^T) vec(B)."""
    return np.asarray(B).reshape(-1)


def vec_kron_apply(A: np.ndarray, B: np.ndarray, C: np.ndarray, counter: OpCounter | None = None,
                   via_kron: bool = False) -> np.ndarray:
    """The product ``A B C``.

    With ``via_kron`` the result is formed as ``(A kron C^T) vec(B)``;
    otherwise the cheaper bracketing of the two matrix products is used.
    """
    A, B, C = (np.atleast_2d(np.asarray(x, dtype=np.complex128)) for x in (A, B, C))
    if A.shape[1] != B.shape[0] or B.shape[1] != C.shape[0]:
        raise DimensionError(f"shapes do not compose: {A.shape}, {B.shape}, {C.shape}")
    n1, n2 = A.shape
    n3, n4 = C.shape
    if via_kron:
        K = np.kron(A, C.T)
        if counter is not None:
            counter.count(mul=K.size, add=n1 * n4 * max(n2 * n3 - 1, 0))
        return (K @ vec_row(B)).reshape(n1, n4)
    left = n1 * n2 * n3 + n1 * n3 * n4
    right = n2 * n3 * n4 + n1 * n2 * n4
    if left <= right:
        return counted_matmul(counted_matmul(A, B, counter), C, counter)
    return counted_matmul(A, counted_matmul(B, C, counter), counter)
