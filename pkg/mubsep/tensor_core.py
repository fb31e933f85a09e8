"""Dense complex matrix kernels for multipartite states.

Matrices are plain `numpy.ndarray` values (complex128, row-major). Subsystem
indices are 0-based everywhere in the library.
"""
import logging
from dataclasses import dataclass
from functools import reduce
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from .config import Tolerances, resolve
from .errors import InvalidStateError, NotHermitianError, ShapeError

log = logging.getLogger("mubsep.tensor_core")


@dataclass(frozen=True)
class Shape:
    dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ShapeError("shape needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise ShapeError(f"subsystem dimensions must be >= 2: {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def m(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    @property
    def dmin(self) -> int:
        return min(self.dims)

    def permuted(self, perm: Sequence[int]) -> "Shape":
        return Shape(tuple(self.dims[p] for p in perm))

    def __str__(self) -> str:
        return "x".join(str(d) for d in self.dims)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A matrix together with its subsystem shape.

    Instances are built by `validate_density` (or by kernels that preserve the
    invariants); the constructor itself only checks the dimension.
    """

    mat: np.ndarray
    shape: Shape

    def __post_init__(self):
        mat = np.array(self.mat, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ShapeError(f"density matrix must be square, got {mat.shape}")
        if mat.shape[0] != self.shape.total:
            raise ShapeError(f"matrix dimension {mat.shape[0]} does not match shape {self.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))


class DensityCheck(BaseModel):
    ok: bool
    residuals: Dict[str, float]
    failures: Dict[str, float]


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats)


def hermiticity_residual(a: np.ndarray) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def hermitian_eigenvalues(a: np.ndarray, vectors: bool = False, tol: Optional[Tolerances] = None):
    """Ascending eigenvalues of a Hermitian matrix (and eigenvectors when asked)."""
    tol = resolve(tol)
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got {a.shape}")
    res = hermiticity_residual(a)
    if res > tol.hermiticity:
        raise NotHermitianError(f"matrix is not Hermitian: residual={res:.3e}")
    herm = 0.5 * (a + a.conj().T)
    if vectors:
        return np.linalg.eigh(herm)
    return np.linalg.eigvalsh(herm)


def _check_perm(perm: Sequence[int], m: int) -> Tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(m)):
        raise ShapeError(f"not a permutation of {m} subsystems: {perm}")
    return perm


def permute_matrix(mat: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder subsystems so that new subsystem i is old subsystem perm[i]."""
    m = len(dims)
    perm = _check_perm(perm, m)
    total = int(np.prod(dims))
    tensor = np.asarray(mat).reshape(tuple(dims) * 2)
    axes = list(perm) + [m + p for p in perm]
    return tensor.transpose(axes).reshape(total, total)


def permute_subsystems(rho: DensityMatrix, perm: Sequence[int]) -> DensityMatrix:
    perm = _check_perm(perm, rho.shape.m)
    mat = permute_matrix(rho.mat, rho.shape.dims, perm)
    return DensityMatrix(mat, rho.shape.permuted(perm))


def inverse_permutation(perm: Sequence[int]) -> Tuple[int, ...]:
    return tuple(int(i) for i in np.argsort(perm))


def trace_out(mat: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Partial trace over every subsystem not in `keep`, by one index contraction."""
    m = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ShapeError("partial trace needs a nonempty keep set")
    if keep[0] < 0 or keep[-1] >= m:
        raise ShapeError(f"subsystem index out of range for {m} subsystems: {keep}")
    tensor = np.asarray(mat).reshape(tuple(dims) * 2)
    rows = list(range(m))
    cols = [m + j if j in keep else j for j in range(m)]
    out = [rows[j] for j in keep] + [cols[j] for j in keep]
    kept = int(np.prod([dims[j] for j in keep]))
    return np.einsum(tensor, rows + cols, out).reshape(kept, kept)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    keep = sorted(set(int(k) for k in keep))
    mat = trace_out(rho.mat, rho.shape.dims, keep)
    return DensityMatrix(mat, Shape(tuple(rho.shape.dims[j] for j in keep)))


def density_residuals(mat: np.ndarray, shape: Shape) -> Dict[str, float]:
    """Measured residual of every density-matrix invariant."""
    mat = np.asarray(mat, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        return {"shape": float("inf")}
    herm = 0.5 * (mat + mat.conj().T)
    lo = float(hermitian_eigenvalues(herm)[0]) if mat.size else 0.0
    return {
        "hermiticity": hermiticity_residual(mat),
        "trace": float(abs(np.trace(mat) - 1.0)),
        "positivity": max(0.0, -lo),
        "shape": float(abs(mat.shape[0] - shape.total)),
    }


def check_density(mat: np.ndarray, shape: Shape, tol: Optional[Tolerances] = None) -> DensityCheck:
    tol = resolve(tol)
    res = density_residuals(mat, shape)
    limits = {
        "hermiticity": tol.hermiticity,
        "trace": tol.trace,
        "positivity": -tol.eigenvalue_floor,
        "shape": 0.0,
    }
    failures = {k: v for k, v in res.items() if v > limits[k]}
    return DensityCheck(ok=not failures, residuals=res, failures=failures)


def validate_density(mat: np.ndarray, shape: Shape, tol: Optional[Tolerances] = None) -> DensityMatrix:
    """Return a DensityMatrix or raise InvalidStateError naming each failed invariant."""
    check = check_density(mat, shape, tol)
    if not check.ok:
        log.debug("invalid density %s", " ".join(f"{k}={v:.3e}" for k, v in check.failures.items()))
        raise InvalidStateError(check.failures)
    return DensityMatrix(mat, shape)
