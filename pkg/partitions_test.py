from itertools import product

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mubsep.errors import MubsepError, PartitionError
from mubsep.partitions import (
    Bipartition,
    KPartition,
    coarse_grain,
    delta_rho,
    enumerate_bipartitions,
    marginal_product,
    parse_partition,
    separable_delta_oracle,
)
from mubsep.states import bell, random_density, random_separable
from mubsep.tensor_core import DensityMatrix, Shape, kron, permute_matrix, permute_subsystems


def _brute_marginal(mat: np.ndarray, dims, keep) -> np.ndarray:
    """Partial trace by explicit index loops, kept subsystems in increasing order."""
    keep = sorted(keep)
    drop = [k for k in range(len(dims)) if k not in keep]
    kdims = [dims[k] for k in keep]
    out = np.zeros((int(np.prod(kdims)),) * 2, dtype=complex)
    t = mat.reshape(tuple(dims) * 2)
    m = len(dims)
    for row in product(*[range(d) for d in kdims]):
        for col in product(*[range(d) for d in kdims]):
            acc = 0j
            for traced in product(*[range(dims[k]) for k in drop]):
                i, j = [0] * m, [0] * m
                for k, a, b in zip(keep, row, col):
                    i[k], j[k] = a, b
                for k, a in zip(drop, traced):
                    i[k] = j[k] = a
                acc += t[tuple(i) + tuple(j)]
            r = int(np.ravel_multi_index(row, kdims))
            c = int(np.ravel_multi_index(col, kdims))
            out[r, c] = acc
    return out


def _brute_product(rho: DensityMatrix, block) -> np.ndarray:
    dims = rho.shape.dims
    rest = [k for k in range(len(dims)) if k not in block]
    prod_ = kron(_brute_marginal(rho.mat, dims, block), _brute_marginal(rho.mat, dims, rest))
    order = list(block) + rest
    return permute_matrix(prod_, [dims[o] for o in order], np.argsort(order))


def _splits(bps):
    return {frozenset({bp.block, bp.complement}) for bp in bps}


def test_two_party_catalog():
    cat = enumerate_bipartitions(2)
    assert [bp.label() for bp in cat.class_two] == ["12"]
    assert [bp.label() for bp in cat.class_one] == ["1|2"]


def test_four_party_catalog():
    cat = enumerate_bipartitions(4)
    assert cat.class_two[0].is_trivial
    assert [bp.label() for bp in cat.class_two] == ["1234", "12|34", "13|24", "14|23"]
    assert _splits(cat.class_one) == {
        frozenset({(0,), (1, 2, 3)}),
        frozenset({(1,), (0, 2, 3)}),
        frozenset({(2,), (0, 1, 3)}),
        frozenset({(3,), (0, 1, 2)}),
    }


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_catalog_counts_and_parity(n):
    cat = enumerate_bipartitions(n)
    assert len(cat.class_one) == len(cat.class_two) == 2 ** (n - 2)
    assert all(len(bp.block) % 2 == 1 for bp in cat.class_one)
    assert all(len(bp.block) % 2 == 0 for bp in cat.class_two)
    assert len(_splits(cat.class_one) | _splits(cat.class_two)) == 2 ** (n - 1)


@pytest.mark.parametrize("n", [1, 3, 5])
def test_odd_party_count_is_rejected(n):
    with pytest.raises(PartitionError):
        enumerate_bipartitions(n)


def test_bipartition_must_hold_party_zero():
    with pytest.raises(PartitionError):
        Bipartition(4, (1, 2))


def test_marginal_product_trivial_and_product():
    rho = random_density(Shape((2, 3)), seed=1)
    assert_allclose(marginal_product(rho, Bipartition(2, (0, 1))), rho.mat)
    prod_state, _ = random_separable(Shape((2, 3)), 1, seed=2)
    assert_allclose(marginal_product(prod_state, Bipartition(2, (0,))), prod_state.mat, atol=1e-12)


def test_marginal_product_restores_interleaved_pairs():
    phi = bell().mat
    # Bell pairs on (1,3) and (2,4): built in order (1,3,2,4) and moved back
    rho = DensityMatrix(permute_matrix(kron(phi, phi), (2, 2, 2, 2), (0, 2, 1, 3)), Shape((2, 2, 2, 2)))
    assert_allclose(marginal_product(rho, Bipartition(4, (0, 2))), rho.mat, atol=1e-12)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (2, 2, 2, 2), (2, 3, 2, 2)])
def test_marginal_product_matches_loop_partial_trace(dims):
    rho = random_density(Shape(dims), seed=len(dims) * 10 + dims[1])
    for bp in enumerate_bipartitions(len(dims)).class_one + enumerate_bipartitions(len(dims)).class_two[1:]:
        assert_allclose(marginal_product(rho, bp), _brute_product(rho, bp.block), atol=1e-12)


def test_delta_rho_two_parties():
    rho = bell()
    d = delta_rho(rho)
    assert_allclose(d, rho.mat - np.eye(4) / 4, atol=1e-12)
    assert d[0, 0].real == pytest.approx(0.25)


def test_delta_rho_four_parties_matches_expansion():
    rho = random_density(Shape((2, 2, 2, 2)), seed=4)
    expected = rho.mat.copy()
    for block in [(0, 1), (0, 2), (0, 3)]:
        expected += _brute_product(rho, block)
    for block in [(0,), (1,), (2,), (3,)]:
        expected -= _brute_product(rho, block)
    assert_allclose(delta_rho(rho), expected / 4, atol=1e-12)


@pytest.mark.parametrize("dims", [(2, 2), (3, 2), (2, 2, 2, 2)])
def test_delta_rho_vanishes_on_product_states(dims):
    for seed in range(5):
        rho, _ = random_separable(Shape(dims), 1, seed=seed)
        assert np.max(np.abs(delta_rho(rho))) <= 1e-12


def test_delta_rho_traceless_and_hermitian():
    rng = np.random.default_rng(77)
    for m in (2, 4):
        for _ in range(100):
            dims = tuple(int(x) for x in rng.integers(2, 4 if m == 2 else 3, size=m))
            rho = random_density(Shape(dims), seed=rng)
            d = delta_rho(rho)
            assert abs(np.trace(d)) <= 1e-12
            assert np.max(np.abs(d - d.conj().T)) <= 1e-12


def test_oracle_two_term_hand_expansion():
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    out = separable_delta_oracle([0.5, 0.5], [(p0, p0), (p1, p1)])
    assert_allclose(out, np.diag([1, -1, -1, 1]) / 4, atol=1e-15)
    rho = DensityMatrix(0.5 * (kron(p0, p0) + kron(p1, p1)), Shape((2, 2)))
    assert_allclose(delta_rho(rho), out, atol=1e-15)


def test_oracle_single_term_is_zero():
    _, ens = random_separable(Shape((2, 3)), 1, seed=3)
    assert np.max(np.abs(ens.delta())) == 0


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 3), (2, 2, 2, 2), (2, 3, 2, 2)])
def test_oracle_agrees_with_delta_rho(dims):
    rng = np.random.default_rng(sum(dims) * 31)
    for _ in range(100 // len(dims)):
        rho, ens = random_separable(Shape(dims), int(rng.integers(1, 5)), seed=rng)
        assert np.max(np.abs(delta_rho(rho) - ens.delta())) <= 1e-12


def test_oracle_rejects_bad_weights():
    p0 = np.diag([1.0, 0.0])
    with pytest.raises(MubsepError):
        separable_delta_oracle([0.7, 0.7], [(p0, p0), (p0, p0)])
    with pytest.raises(MubsepError):
        separable_delta_oracle([1.0], [(p0, p0), (p0, p0)])


def test_parse_partition_and_label():
    part = parse_partition("1,2|3,4", 4)
    assert part.blocks == ((0, 1), (2, 3))
    assert part.k == 2
    assert part.label() == "1,2|3,4"
    assert parse_partition("3,4|1,2", 4) == part
    assert parse_partition("1|2|3|4", 4).k == 4


@pytest.mark.parametrize("text", ["1,2|2,3", "1,2|3", "1,a|2,3,4", "1,2|3,5"])
def test_parse_partition_rejects_bad_input(text):
    with pytest.raises(PartitionError):
        parse_partition(text, 4)


def test_coarse_grain_singletons_is_identity():
    rho = random_density(Shape((2, 3, 2, 2)), seed=8)
    out = coarse_grain(rho, KPartition(4, ((0,), (1,), (2,), (3,))))
    assert out.shape == rho.shape
    assert_allclose(out.mat, rho.mat, atol=0)


def test_coarse_grain_contiguous_blocks_keep_entries():
    rho = random_density(Shape((2, 2, 2, 2)), seed=9)
    out = coarse_grain(rho, parse_partition("1,2|3,4", 4))
    assert out.shape.dims == (4, 4)
    assert_allclose(out.mat, rho.mat, atol=0)


def test_coarse_grain_interleaved_blocks_reorder():
    rho = random_density(Shape((2, 3, 2, 3)), seed=10)
    out = coarse_grain(rho, parse_partition("1,3|2,4", 4))
    assert out.shape.dims == (4, 9)
    assert_allclose(out.mat, permute_subsystems(rho, (0, 2, 1, 3)).mat, atol=0)
    assert_allclose(np.linalg.eigvalsh(out.mat), np.linalg.eigvalsh(rho.mat), atol=1e-10)


def test_coarse_grain_party_count_mismatch():
    with pytest.raises(PartitionError):
        coarse_grain(bell(), parse_partition("1,2|3,4", 4))
