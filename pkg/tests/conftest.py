import functools

import numpy as np
import pytest

from gdft import compute_irreps, group_from_spec


@functools.lru_cache(maxsize=None)
def group(spec: str):
    return group_from_spec(spec)


@functools.lru_cache(maxsize=None)
def irreps(spec: str):
    return compute_irreps(group(spec))


def random_alpha(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def rel_residual(F, ref, alpha) -> float:
    """Largest per-block Frobenius residual, relative to ||alpha||_1."""
    return float(max(F.residuals(ref))) / float(np.abs(alpha).sum())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
