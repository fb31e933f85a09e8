"""Bipartition classes, the difference operator delta_rho and coarse-graining.

Parties are 0-based. A bipartition is stored by the block that contains
party 0; the trivial split keeps every party in that block.
"""
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import List, Sequence, Tuple

import numpy as np

from .errors import MubsepError, PartitionError, ShapeError
from .tensor_core import DensityMatrix, Shape, kron_all, permute_matrix, trace_out

log = logging.getLogger("mubsep.partitions")


def _require_even(n: int) -> None:
    if n < 2 or n % 2:
        raise PartitionError(f"an even number (>= 2) of parties is required, got {n}")


@dataclass(frozen=True)
class Bipartition:
    parties: int
    block: Tuple[int, ...]

    def __post_init__(self):
        _require_even(self.parties)
        block = tuple(sorted(set(int(p) for p in self.block)))
        if not block or block[0] != 0 or block[-1] >= self.parties:
            raise PartitionError(f"block must contain party 0 and lie in 0..{self.parties - 1}: {self.block}")
        object.__setattr__(self, "block", block)

    @property
    def complement(self) -> Tuple[int, ...]:
        return tuple(p for p in range(self.parties) if p not in self.block)

    @property
    def parity_class(self) -> str:
        return "II" if len(self.block) % 2 == 0 else "I"

    @property
    def is_trivial(self) -> bool:
        return len(self.block) == self.parties

    def label(self) -> str:
        left = "".join(str(p + 1) for p in self.block)
        right = "".join(str(p + 1) for p in self.complement)
        return f"{left}|{right}" if right else left


@dataclass(frozen=True)
class BipartitionCatalog:
    parties: int
    class_one: Tuple[Bipartition, ...]
    class_two: Tuple[Bipartition, ...]


def enumerate_bipartitions(n: int) -> BipartitionCatalog:
    """Odd|odd (class I) and even|even (class II) unordered bipartitions of n parties."""
    _require_even(n)
    one: List[Bipartition] = []
    two: List[Bipartition] = []
    rest = range(1, n)
    for size in range(0, n):
        for extra in combinations(rest, size):
            bp = Bipartition(n, (0,) + extra)
            (two if bp.parity_class == "II" else one).append(bp)
    # trivial split first, then by (size, members)
    two.sort(key=lambda bp: (not bp.is_trivial, len(bp.block), bp.block))
    one.sort(key=lambda bp: (len(bp.block), bp.block))
    return BipartitionCatalog(n, tuple(one), tuple(two))


def marginal_product(rho: DensityMatrix, bp: Bipartition) -> np.ndarray:
    """rho_A (x) rho_Abar, reordered back into the original party order."""
    dims = rho.shape.dims
    if bp.parties != rho.shape.m:
        raise ShapeError(f"bipartition of {bp.parties} parties does not fit shape {rho.shape}")
    if bp.is_trivial:
        return np.array(rho.mat)
    a, abar = bp.block, bp.complement
    prod = np.kron(trace_out(rho.mat, dims, a), trace_out(rho.mat, dims, abar))
    order = a + abar
    return permute_matrix(prod, [dims[o] for o in order], np.argsort(order))


def delta_rho(rho: DensityMatrix) -> np.ndarray:
    """(1/2^(m-2)) (sum over class II products - sum over class I products)."""
    m = rho.shape.m
    catalog = enumerate_bipartitions(m)
    out = np.zeros_like(rho.mat)
    for bp in catalog.class_two:
        out += marginal_product(rho, bp)
    for bp in catalog.class_one:
        out -= marginal_product(rho, bp)
    return out / 2 ** (m - 2)


def _as_matrix(f) -> np.ndarray:
    return f.mat if isinstance(f, DensityMatrix) else np.asarray(f, dtype=np.complex128)


def separable_delta_oracle(weights: Sequence[float], factors: Sequence[Sequence]) -> np.ndarray:
    """Ensemble expansion of delta_rho for a fully separable mixture.

    (1/2^(m-1)) sum_{k,l} p_k p_l (x)_i (rho_k^i - rho_l^i)
    """
    p = np.asarray(weights, dtype=float)
    if len(p) != len(factors) or len(p) == 0:
        raise MubsepError(f"{len(p)} weights for {len(factors)} ensemble terms")
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
        raise MubsepError(f"weights must be a probability vector, sum={p.sum():.15g}")
    mats = [[_as_matrix(f) for f in term] for term in factors]
    dims = [f.shape[0] for f in mats[0]]
    for term in mats:
        if [f.shape[0] for f in term] != dims:
            raise ShapeError(f"ensemble term dims {[f.shape[0] for f in term]} differ from {dims}")
    m = len(dims)
    total = int(np.prod(dims))
    out = np.zeros((total, total), dtype=np.complex128)
    for k, l in combinations(range(len(p)), 2):
        # the (l,k) term is (-1)^m times the (k,l) term
        diff = kron_all(a - b for a, b in zip(mats[k], mats[l]))
        out += p[k] * p[l] * (1 + (-1) ** m) * diff
    return out / 2 ** (m - 1)


@dataclass(frozen=True)
class KPartition:
    parties: int
    blocks: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        blocks = [tuple(sorted(int(p) for p in b)) for b in self.blocks]
        if any(not b for b in blocks):
            raise PartitionError("partition blocks must be nonempty")
        members = [p for b in blocks for p in b]
        if sorted(members) != list(range(self.parties)):
            raise PartitionError(f"blocks {blocks} do not cover parties 0..{self.parties - 1} exactly once")
        blocks.sort(key=lambda b: b[0])
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def k(self) -> int:
        return len(self.blocks)

    def label(self) -> str:
        return "|".join(",".join(str(p + 1) for p in b) for b in self.blocks)


def parse_partition(text: str, parties: int) -> KPartition:
    """Parse the 1-based "1,2|3,4" syntax."""
    try:
        blocks = [tuple(int(x) - 1 for x in part.split(",") if x.strip()) for part in text.split("|")]
    except ValueError as e:
        raise PartitionError(f"bad partition syntax {text!r}: {e}") from e
    return KPartition(parties, tuple(blocks))


def coarse_grain(rho: DensityMatrix, part: KPartition) -> DensityMatrix:
    """Make each block contiguous and merge it into one subsystem."""
    if part.parties != rho.shape.m:
        raise PartitionError(f"partition of {part.parties} parties does not fit shape {rho.shape}")
    order = [p for b in part.blocks for p in b]
    dims = rho.shape.dims
    mat = permute_matrix(rho.mat, dims, order)
    merged = tuple(int(np.prod([dims[p] for p in b])) for b in part.blocks)
    log.debug("coarse_grain partition=%s dims=%s", part.label(), merged)
    return DensityMatrix(mat, Shape(merged))
