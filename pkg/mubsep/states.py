"""Benchmark states, random ensembles and the partial-transpose oracle."""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import MubsepError, PartitionError
from .partitions import separable_delta_oracle
from .tensor_core import DensityMatrix, Shape, hermitian_eigenvalues, kron_all, validate_density

log = logging.getLogger("mubsep.states")


def _check_weight(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise MubsepError(f"mixing weight must be in [0, 1], got {p}")
    return p


def pure_state(vec: np.ndarray, dims: Sequence[int]) -> DensityMatrix:
    vec = np.asarray(vec, dtype=np.complex128).ravel()
    vec = vec / np.linalg.norm(vec)
    return validate_density(np.outer(vec, vec.conj()), Shape(tuple(dims)))


def ghz(n: int, d: int = 2) -> DensityMatrix:
    if n < 2 or d < 2:
        raise MubsepError(f"GHZ needs n >= 2 and d >= 2, got n={n} d={d}")
    vec = np.zeros(d**n, dtype=np.complex128)
    step = sum(d**k for k in range(n))
    vec[np.arange(d) * step] = 1.0
    return pure_state(vec, (d,) * n)


def bell() -> DensityMatrix:
    return ghz(2, 2)


def w_state(n: int) -> DensityMatrix:
    if n < 2:
        raise MubsepError(f"W state needs n >= 2, got {n}")
    vec = np.zeros(2**n, dtype=np.complex128)
    vec[[2**k for k in range(n)]] = 1.0
    return pure_state(vec, (2,) * n)


def isotropic(d: int, p: float) -> DensityMatrix:
    p = _check_weight(p)
    phi = ghz(2, d).mat
    mat = p * phi + (1 - p) * np.eye(d * d) / (d * d)
    return validate_density(mat, Shape((d, d)))


def add_white_noise(rho: DensityMatrix, p: float) -> DensityMatrix:
    p = _check_weight(p)
    total = rho.shape.total
    return validate_density(p * rho.mat + (1 - p) * np.eye(total) / total, rho.shape)


def _haar_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


@dataclass(frozen=True, eq=False)
class SeparableEnsemble:
    weights: np.ndarray
    factors: Tuple[Tuple[DensityMatrix, ...], ...]
    shape: Shape

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.factors) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise MubsepError("ensemble weights must be a probability vector matching the terms")
        for term in self.factors:
            if tuple(f.shape.total for f in term) != self.shape.dims:
                raise MubsepError(f"ensemble factor dims do not match {self.shape}")
        object.__setattr__(self, "weights", w)

    def assemble(self) -> np.ndarray:
        return sum(p * kron_all(f.mat for f in term) for p, term in zip(self.weights, self.factors))

    def delta(self) -> np.ndarray:
        return separable_delta_oracle(self.weights, self.factors)


def random_separable(shape: Shape, terms: int, seed=None) -> Tuple[DensityMatrix, SeparableEnsemble]:
    """Mixture of Haar-random pure product states with uniform-simplex weights."""
    if terms < 1:
        raise MubsepError(f"terms must be >= 1, got {terms}")
    rng = np.random.default_rng(seed)
    factors = []
    for _ in range(terms):
        factors.append(tuple(pure_state(_haar_vector(d, rng), (d,)) for d in shape.dims))
    weights = rng.dirichlet(np.ones(terms))
    weights = weights / weights.sum()
    ens = SeparableEnsemble(weights, tuple(factors), shape)
    return validate_density(ens.assemble(), shape), ens


def random_density(shape: Shape, seed=None, rank: Optional[int] = None) -> DensityMatrix:
    """Ginibre-distributed mixed state of the given rank (full rank by default)."""
    rng = np.random.default_rng(seed)
    total = shape.total
    rank = total if rank is None else int(rank)
    g = rng.normal(size=(total, rank)) + 1j * rng.normal(size=(total, rank))
    mat = g @ g.conj().T
    mat = 0.5 * (mat + mat.conj().T)
    return validate_density(mat / np.real(np.trace(mat)), shape)


def partial_transpose(rho: DensityMatrix, transpose_block: int = 1) -> np.ndarray:
    if rho.shape.m != 2:
        raise PartitionError(f"partial transpose needs a bipartite shape, got {rho.shape}; coarse-grain first")
    if transpose_block not in (0, 1):
        raise PartitionError(f"transpose_block must be 0 or 1, got {transpose_block}")
    da, db = rho.shape.dims
    t = rho.mat.reshape(da, db, da, db)
    axes = (2, 1, 0, 3) if transpose_block == 0 else (0, 3, 2, 1)
    return t.transpose(axes).reshape(da * db, da * db)


def ppt_min_eigenvalue(rho: DensityMatrix, transpose_block: int = 1) -> float:
    """Smallest eigenvalue of the partial transpose; negative means NPT."""
    return float(hermitian_eigenvalues(partial_transpose(rho, transpose_block))[0])
