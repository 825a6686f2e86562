"""Named lists of group specs used by the benchmark command and the test suite."""
from __future__ import annotations

SMOKE = ["symmetric:3", "dihedral:6", "quaternion8"]

CYCLIC_2K = [f"cyclic:{2 ** k}" for k in range(5, 10)]

SMALL_NAMED = [
    "symmetric:3", "symmetric:4", "symmetric:5", "alternating:4", "alternating:5", "quaternion8",
    "heisenberg_p:3", "sl2:5", "cyclic:2*alternating:5", "cyclic:3*symmetric:3",
]

# C_n for n <= 128, D_n of order <= 128, and the named groups above
FULL = [f"cyclic:{n}" for n in range(1, 129)] + [f"dihedral:{n}" for n in range(2, 65)] + SMALL_NAMED

CATALOGS: dict[str, list[str]] = {
    "smoke": SMOKE,
    "cyclic2k": CYCLIC_2K,
    "named": SMALL_NAMED,
    "catalog": FULL,
    "empty": [],
}
