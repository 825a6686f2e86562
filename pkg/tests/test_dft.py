import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gdft.dft import (BlockDiagonal, DimensionError, GroupAlgebraElement, OpCounter, convolve, inverse_dft,
                      naive_dft, vec_kron_apply, vec_row)

from conftest import group, irreps, random_alpha

SPECS = ["cyclic:1", "cyclic:2", "cyclic:7", "dihedral:6", "symmetric:3", "symmetric:4", "quaternion8",
         "alternating:5", "heisenberg_p:3", "cyclic:3*symmetric:3"]


def oracle_dft(alpha, irr):
    # independent summation order: last element first, one block entry at a time
    out = []
    for rho in irr:
        B = np.zeros((rho.dim, rho.dim), dtype=complex)
        for g in reversed(range(len(alpha))):
            for i in range(rho.dim):
                for j in range(rho.dim):
                    B[i, j] += alpha[g] * rho.matrices[g, i, j]
        out.append(B)
    return BlockDiagonal(out)


def test_c2_examples():
    irr = irreps("cyclic:2")
    F = naive_dft(np.array([1, 0]), irr)
    assert [complex(b[0, 0]) for b in F.blocks] == [1, 1]
    F = naive_dft(np.array([0, 1]), irr)
    assert sorted(complex(b[0, 0]).real for b in F.blocks) == [-1, 1]
    F = naive_dft(np.array([3, 5]), irr)
    assert sorted(complex(b[0, 0]).real for b in F.blocks) == [-2, 8]


@pytest.mark.parametrize("spec", ["symmetric:3", "dihedral:6", "quaternion8", "alternating:4"])
def test_matches_oracle(spec):
    irr = irreps(spec)
    a = random_alpha(irr.group.order, 7)
    assert max(naive_dft(a, irr).residuals(oracle_dft(a, irr))) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 5, 8, 12])
def test_cyclic_matches_fft_as_multiset(n):
    G, irr = group(f"cyclic:{n}"), irreps(f"cyclic:{n}")
    a = random_alpha(n, n)
    # map group elements to exponents of a generator
    gen = 1 if n > 1 else 0
    exps = np.zeros(n, dtype=int)
    x = 0
    for k in range(n):
        exps[x] = k
        x = int(G.mult[x, gen])
    seq = np.zeros(n, dtype=complex)
    seq[exps] = a
    fft = np.sort_complex(np.round(np.fft.fft(seq), 9))
    ours = np.sort_complex(np.round(np.array([b[0, 0] for b in naive_dft(a, irr).blocks]), 9))
    assert np.allclose(fft, ours)


def test_inverse_c3_example():
    irr = irreps("cyclic:3")
    F = naive_dft(np.array([0, 1, 0]), irr)
    assert np.allclose(inverse_dft(F, irr), [0, 1, 0])
    assert isinstance(inverse_dft(F, irr), np.ndarray)


@pytest.mark.parametrize("spec", SPECS)
def test_round_trip(spec):
    irr = irreps(spec)
    a = random_alpha(irr.group.order, 1)
    assert np.abs(inverse_dft(naive_dft(a, irr), irr) - a).max() < 1e-10


@pytest.mark.parametrize("spec", SPECS)
def test_delta_identities(spec):
    G, irr = group(spec), irreps(spec)
    F = naive_dft(GroupAlgebraElement.delta(G, 0), irr)
    assert max(F.residuals(BlockDiagonal.identity(irr.dims))) < 1e-12
    g = G.order - 1
    F = naive_dft(GroupAlgebraElement.delta(G, g), irr)
    for rho, b in zip(irr, F.blocks):
        assert np.array_equal(b, rho.matrices[g])


@pytest.mark.parametrize("spec", ["symmetric:3", "quaternion8", "alternating:4", "cyclic:6"])
def test_convolution_theorem(spec):
    G, irr = group(spec), irreps(spec)
    a, b = random_alpha(G.order, 2), random_alpha(G.order, 3)
    lhs = naive_dft(convolve(a, b, group=G), irr)
    rhs = naive_dft(a, irr) @ naive_dft(b, irr)
    assert max(lhs.residuals(rhs)) < 1e-9


def test_convolve_with_identity_delta():
    G = group("symmetric:3")
    a = random_alpha(6, 0)
    assert np.allclose(convolve(GroupAlgebraElement.delta(G, 0), GroupAlgebraElement(G, a)), a)
    with pytest.raises(ValueError):
        convolve(a, a)


def test_op_count_bound():
    for spec in SPECS:
        irr = irreps(spec)
        c = OpCounter()
        naive_dft(random_alpha(irr.group.order, 0), irr, c)
        n = irr.group.order
        assert c.mul == n * n
        assert c.add == (n - 1) * n
        assert c.total <= 2 * n * n


def test_op_count_skips_zeros():
    irr = irreps("alternating:5")
    c = OpCounter()
    naive_dft(GroupAlgebraElement.delta(irr.group, 3), irr, c)
    assert c.mul == 60 and c.add == 0


def test_inverse_active_subset_is_cheaper_and_exact():
    irr = irreps("symmetric:3")
    F = BlockDiagonal([np.zeros((1, 1)), np.zeros((1, 1)), np.arange(4).reshape(2, 2)])
    full, part = OpCounter(), OpCounter()
    a = inverse_dft(F, irr, full)
    b = inverse_dft(F, irr, part, active=[2])
    assert np.allclose(a, b)
    assert part.total < full.total


def test_counter_scopes_and_merge():
    c = OpCounter()
    with c.scope("outer"):
        c.count(2, 1)
        with c.scope("inner"):
            c.count(3, 3)
    c.call("x", 2)
    assert c.tags["outer"] == [5, 4] and c.tags["inner"] == [3, 3]
    d = OpCounter()
    d.merge(c)
    assert (d.mul, d.add, d.calls["x"]) == (5, 4, 2)
    with pytest.raises(ValueError):
        c.count(-1)


def test_vec_kron_apply():
    rng = np.random.default_rng(0)
    A, B, C = rng.standard_normal((2, 3)), rng.standard_normal((3, 4)), rng.standard_normal((4, 5))
    ref = A @ B @ C
    assert np.allclose(vec_kron_apply(A, B, C), ref)
    assert np.allclose(vec_kron_apply(A, B, C, via_kron=True), ref)
    assert np.allclose(np.kron(A, C.T) @ vec_row(B), vec_row(ref))
    c = OpCounter()
    vec_kron_apply(A, B, C, c)
    assert c.mul == min(2 * 3 * 4 + 2 * 4 * 5, 3 * 4 * 5 + 2 * 3 * 5)
    with pytest.raises(DimensionError):
        vec_kron_apply(A, C, B)


def test_block_diagonal_json_round_trip():
    irr = irreps("symmetric:4")
    F = naive_dft(random_alpha(24, 4), irr)
    back = BlockDiagonal.from_json(F.to_json())
    assert back.ids == F.ids and max(back.residuals(F)) == 0
    assert F.size == 24


def test_dimension_checks():
    irr = irreps("symmetric:3")
    with pytest.raises(DimensionError):
        naive_dft(np.zeros(5), irr)
    with pytest.raises(DimensionError):
        BlockDiagonal([np.zeros((2, 3))])
    with pytest.raises(DimensionError):
        BlockDiagonal.zeros([1, 2]) + BlockDiagonal.zeros([2, 1])
    with pytest.raises(ValueError):
        GroupAlgebraElement(group("symmetric:3"), np.ones(6), support=(0,))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SPECS), st.integers(0, 2 ** 32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(spec, seed, s, t):
    irr = irreps(spec)
    n = irr.group.order
    a, b = random_alpha(n, seed), random_alpha(n, seed + 1)
    lhs = naive_dft(s * a + t * b, irr)
    Fa, Fb = naive_dft(a, irr), naive_dft(b, irr)
    rhs = BlockDiagonal([s * x + t * y for x, y in zip(Fa.blocks, Fb.blocks)])
    assert max(lhs.residuals(rhs)) < 1e-9 * (1 + np.abs(a).sum() + np.abs(b).sum())


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SPECS), st.integers(0, 2 ** 32 - 1))
def test_plancherel(spec, seed):
    irr = irreps(spec)
    n = irr.group.order
    a = random_alpha(n, seed)
    F = naive_dft(a, irr)
    energy = sum(d * np.linalg.norm(b) ** 2 for d, b in zip(irr.dims, F.blocks)) / n
    assert np.isclose(energy, np.linalg.norm(a) ** 2)
