"""Packing the sparse rewrite's scalar coordinates into a small target format.

The target format holds ``counts[i]`` square blocks of side ``2**i`` for
``i = 0..levels``.  Entries are addressed by ``(level, block, row, col)``
and numbered consecutively (label ids), level by level, block by block,
row-major inside a block.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, log2

import numpy as np

from ..reps import CliffordData


class LabelingError(RuntimeError):
    pass


def _ceil_log2(x: int) -> int:
    return 0 if x <= 1 else int(ceil(log2(x)))


@dataclass(frozen=True)
class TargetFormat:
    m: int
    counts: tuple[int, ...]

    @property
    def levels(self) -> int:
        return len(self.counts) - 1

    def side(self, level: int) -> int:
        return 1 << level

    @property
    def r(self) -> int:
        """Total number of scalar entries."""
        return sum(c * 4 ** i for i, c in enumerate(self.counts))

    @property
    def block_offsets(self) -> list[list[int]]:
        """``block_offsets[i][b]``: label id of entry (0, 0) of block ``b`` at level ``i``."""
        out, pos = [], 0
        for i, c in enumerate(self.counts):
            out.append([pos + b * 4 ** i for b in range(c)])
            pos += c * 4 ** i
        return out

    def label(self, level: int, block: int, row: int, col: int) -> int:
        s = 1 << level
        if not (0 <= block < self.counts[level] and 0 <= row < s and 0 <= col < s):
            raise LabelingError(f"coordinate {(level, block, row, col)} outside the format")
        return self.block_offsets[level][block] + row * s + col

    def coordinate(self, label: int) -> tuple[int, int, int, int]:
        for i, c in enumerate(self.counts):
            n = c * 4 ** i
            if label < n:
                b, rest = divmod(label, 4 ** i)
                return (i, b, *divmod(rest, 1 << i))
            label -= n
        raise LabelingError("label outside the format")


def build_target_format(m: int) -> TargetFormat:
    """``ceil(2m / 4**i)`` blocks of side ``2**i`` below the top level, two at the top."""
    if m < 1:
        raise ValueError("m must be positive")
    top = _ceil_log2(m)
    counts = [-(-2 * m // 4 ** i) for i in range(top)] + [2]
    return TargetFormat(m, tuple(counts))


@dataclass
class Labeling:
    """Injective map ``(sigma, i, j) -> label id`` for each orbit.

    ``maps[sigma]`` is an int array of shape ``(height, e)`` with
    ``height = dim(sigma) / d(sigma)``.  Column ``j`` of sigma sits at
    ``(level[sigma], column[sigma][j])`` of the format.
    """

    fmt: TargetFormat
    cd: CliffordData
    maps: list[np.ndarray]
    level: list[int]
    columns: list[list[int]]
    used: np.ndarray = field(init=False)

    def __post_init__(self):
        self.used = np.unique(np.concatenate([m.ravel() for m in self.maps]))

    def __call__(self, sigma: int, i: int, j: int) -> int:
        return int(self.maps[sigma][i, j])

    def block_and_col(self, sigma: int, j: int) -> tuple[int, int]:
        return divmod(self.columns[sigma][j], 1 << self.level[sigma])


def build_labeling(cd: CliffordData, fmt: TargetFormat) -> Labeling:
    """Greedy column packing, restarted for every orbit.

    Sources are walked in irr(H) order and by column; a column of height
    ``w`` goes to the level ``i`` with ``2**(i-1) < w <= 2**i`` at the first
    free column there.
    """
    maps: list[np.ndarray | None] = [None] * len(cd.dims)
    level = [0] * len(cd.dims)
    columns: list[list[int]] = [[] for _ in cd.dims]
    for members in cd.S:
        free = [0] * len(fmt.counts)
        for s in members:
            height = cd.dims[s] // cd.d[s]
            e = cd.e[s]
            if e > height:
                raise LabelingError(f"sigma {s} has more columns ({e}) than rows ({height})")
            lev = _ceil_log2(height)
            if lev > fmt.levels:
                raise LabelingError(f"height {height} exceeds the largest block side")
            side = 1 << lev
            M = np.empty((height, e), dtype=np.int64)
            for j in range(e):
                col = free[lev]
                free[lev] += 1
                if col >= fmt.counts[lev] * side:
                    raise LabelingError(f"level {lev} out of columns")
                b, c = divmod(col, side)
                columns[s].append(col)
                for i in range(height):
                    M[i, j] = fmt.label(lev, b, i, c)
            maps[s] = M
            level[s] = lev
    lab = Labeling(fmt, cd, maps, level, columns)
    for members in cd.S:
        ids = np.concatenate([maps[s].ravel() for s in members])
        if np.unique(ids).size != ids.size:
            raise LabelingError("labeling is not injective within an orbit")
    bound = 2 * fmt.m * (_ceil_log2(fmt.m) + 3)
    if lab.used.size > bound:
        raise LabelingError(f"{lab.used.size} labels in use exceeds 2m(ceil(log2 m)+3) = {bound}")
    return lab


@dataclass
class ParentMatrix:
    """Format-shaped view of one ``n``'s scalars: a list of square blocks per level."""

    fmt: TargetFormat
    blocks: list[list[np.ndarray]]

    @classmethod
    def from_labels(cls, fmt: TargetFormat, values: dict[int, complex] | np.ndarray) -> "ParentMatrix":
        flat = np.zeros(fmt.r, dtype=np.complex128)
        if isinstance(values, dict):
            for k, v in values.items():
                flat[k] = v
        else:
            flat[:] = values
        blocks, pos = [], 0
        for i, c in enumerate(fmt.counts):
            s = 1 << i
            blocks.append([flat[pos + b * s * s: pos + (b + 1) * s * s].reshape(s, s) for b in range(c)])
            pos += c * s * s
        return cls(fmt, blocks)
