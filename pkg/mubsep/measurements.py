"""Measurement families: MUBs, MUMs and GSIC-POVMs.

MUMs and GSIC-POVMs are built from an orthonormal traceless Hermitian operator
basis (generalized Gell-Mann matrices by default) with the simplex
construction:

    MUM  block b:  F_n = F - c F_{n,b} (n < d),  F_d = r F,  P_n = I/d + t F_n
    GSIC:          G_a = F - d(d+1) F_a,         G_last = (d+1) F,  P_a = I/d^2 + t G_a

with (c, r) = (sqrt(d)(sqrt(d)+1), sqrt(d)+1) for the "plus" root and
(sqrt(d)(sqrt(d)-1), 1-sqrt(d)) for the "minus" root.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Union

import numpy as np
from pydantic import BaseModel

from .config import Tolerances, resolve
from .errors import FamilyMismatchError, MubsepError, PositivityError, ShapeError, UnsupportedDimensionError

log = logging.getLogger("mubsep.measurements")

ROOTS = ("plus", "minus")


def _frozen_array(a) -> np.ndarray:
    arr = np.array(a, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


def _check_dim(d: int, what: str) -> int:
    d = int(d)
    if d < 2:
        raise ShapeError(f"{what} needs dimension >= 2, got d={d}")
    return d


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    dim: int
    ops: np.ndarray  # (d^2-1, d, d)

    def __post_init__(self):
        ops = _frozen_array(self.ops)
        d = _check_dim(self.dim, "operator basis")
        if ops.shape != (d * d - 1, d, d):
            raise ShapeError(f"operator basis for d={d} needs shape {(d * d - 1, d, d)}, got {ops.shape}")
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "dim", d)

    def gram(self) -> np.ndarray:
        flat = self.ops.reshape(len(self.ops), -1)
        return flat.conj() @ flat.T


@dataclass(frozen=True, eq=False)
class MubSet:
    """M orthonormal bases; column n of bases[b] is the n-th vector of basis b."""

    dim: int
    bases: np.ndarray  # (M, d, d)

    kind = "mub"

    def __post_init__(self):
        bases = _frozen_array(self.bases)
        d = _check_dim(self.dim, "MUB set")
        if bases.ndim != 3 or bases.shape[1:] != (d, d) or len(bases) == 0:
            raise ShapeError(f"MUB data for d={d} needs shape (M, {d}, {d}), got {bases.shape}")
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "dim", d)

    @property
    def count(self) -> int:
        return len(self.bases)

    def projectors(self) -> np.ndarray:
        vecs = np.swapaxes(self.bases, 1, 2)  # (M, n, d)
        return np.einsum("bni,bnj->bnij", vecs, vecs.conj())

    def outcome_operators(self) -> np.ndarray:
        return self.projectors()


@dataclass(frozen=True, eq=False)
class MumSet:
    dim: int
    kappa: float
    groups: np.ndarray  # (M, d, d, d)
    t: Optional[float] = None

    kind = "mum"

    def __post_init__(self):
        groups = _frozen_array(self.groups)
        d = _check_dim(self.dim, "MUM set")
        if groups.ndim != 4 or groups.shape[1:] != (d, d, d) or len(groups) == 0:
            raise ShapeError(f"MUM data for d={d} needs shape (M, {d}, {d}, {d}), got {groups.shape}")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "kappa", float(self.kappa))

    @property
    def count(self) -> int:
        return len(self.groups)

    def outcome_operators(self) -> np.ndarray:
        return self.groups


@dataclass(frozen=True, eq=False)
class GsicSet:
    dim: int
    a: float
    ops: np.ndarray  # (d^2, d, d)
    t: Optional[float] = None

    kind = "gsic"

    def __post_init__(self):
        ops = _frozen_array(self.ops)
        d = _check_dim(self.dim, "GSIC set")
        if ops.shape != (d * d, d, d):
            raise ShapeError(f"GSIC data for d={d} needs shape {(d * d, d, d)}, got {ops.shape}")
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "a", float(self.a))

    @property
    def count(self) -> int:
        return 1

    def outcome_operators(self) -> np.ndarray:
        return self.ops[None]


Family = Union[MubSet, MumSet, GsicSet]


class FamilyReport(BaseModel):
    kind: str
    dim: int
    residuals: Dict[str, float]
    ok: bool


def gell_mann_basis(d: int) -> OperatorBasis:
    """Generalized Gell-Mann matrices normalized to Tr(F_i F_j) = delta_ij.

    Order: symmetric pairs (j<k), antisymmetric pairs (j<k), then diagonals.
    """
    if d < 2:
        raise ShapeError(f"operator basis needs d >= 2, got {d}")
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    ops = []
    for j, k in pairs:
        f = np.zeros((d, d), dtype=np.complex128)
        f[j, k] = f[k, j] = 1.0
        ops.append(f / np.sqrt(2))
    for j, k in pairs:
        f = np.zeros((d, d), dtype=np.complex128)
        f[j, k] = -1j
        f[k, j] = 1j
        ops.append(f / np.sqrt(2))
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        ops.append(np.diag(diag).astype(np.complex128) / np.sqrt(l * (l + 1)))
    return OperatorBasis(d, np.array(ops))


def basis_residuals(basis: OperatorBasis) -> Dict[str, float]:
    ops = basis.ops
    herm = float(np.max(np.abs(ops - np.conj(np.swapaxes(ops, 1, 2)))))
    traces = float(np.max(np.abs(np.trace(ops, axis1=1, axis2=2))))
    gram = float(np.max(np.abs(basis.gram() - np.eye(len(ops)))))
    return {"hermiticity": herm, "trace": traces, "orthonormality": gram}


def _check_basis(d: int, basis: Optional[OperatorBasis], tol: Tolerances) -> OperatorBasis:
    if basis is None:
        return gell_mann_basis(d)
    if basis.dim != d:
        raise FamilyMismatchError(f"operator basis has d={basis.dim}, expected {d}")
    bad = {k: v for k, v in basis_residuals(basis).items() if v > tol.family}
    if bad:
        raise FamilyMismatchError(f"operator basis is not orthonormal traceless Hermitian: {bad}")
    return basis


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def build_mub_prime(d: int) -> MubSet:
    """Complete set of d+1 MUBs for d = 2 or an odd prime."""
    if not _is_prime(d):
        raise UnsupportedDimensionError(
            f"MUB construction supports prime dimensions only; import a file for d={d}"
        )
    if d == 2:
        s = 1 / np.sqrt(2)
        bases = [
            np.eye(2),
            s * np.array([[1, 1], [1, -1]]),
            s * np.array([[1, 1], [1j, -1j]]),
        ]
        return MubSet(2, np.array(bases, dtype=np.complex128))
    omega = np.exp(2j * np.pi / d)
    j = np.arange(d)
    bases = [np.eye(d, dtype=np.complex128)]
    for k in range(d):
        # column m holds omega^(k j^2 + m j) / sqrt(d)
        expo = (k * j[:, None] ** 2 + j[:, None] * j[None, :]) % d
        bases.append(omega ** expo / np.sqrt(d))
    log.info("build_mub_prime dim=%d count=%d", d, d + 1)
    return MubSet(d, np.array(bases))


def _simplex_coefficients(d: int, root: str):
    if root not in ROOTS:
        raise MubsepError(f"root must be one of {ROOTS}, got {root!r}")
    sd = np.sqrt(d)
    if root == "plus":
        return sd * (sd + 1), sd + 1
    return sd * (sd - 1), 1 - sd


def mum_kappa(d: int, t: float, root: str = "plus") -> float:
    sd = np.sqrt(d)
    r = sd + 1 if root == "plus" else sd - 1
    return float(1 / d + t * t * r * r * (d - 1))


def gsic_parameter(d: int, t: float) -> float:
    return float(1 / d**3 + t * t * (d + 1) ** 2 * (d * d - 1))


def mum_generators(d: int, basis: Optional[OperatorBasis] = None, root: str = "plus") -> np.ndarray:
    """Traceless simplex operators F_n^(b) for all d+1 blocks, shape (d+1, d, d, d)."""
    basis = gell_mann_basis(d) if basis is None else basis
    c, r = _simplex_coefficients(d, root)
    blocks = basis.ops.reshape(d + 1, d - 1, d, d)
    out = np.empty((d + 1, d, d, d), dtype=np.complex128)
    for b, block in enumerate(blocks):
        total = block.sum(axis=0)
        out[b, : d - 1] = total[None] - c * block
        out[b, d - 1] = r * total
    return out


def gsic_generators(d: int, basis: Optional[OperatorBasis] = None) -> np.ndarray:
    basis = gell_mann_basis(d) if basis is None else basis
    total = basis.ops.sum(axis=0)
    out = np.empty((d * d, d, d), dtype=np.complex128)
    out[:-1] = total[None] - d * (d + 1) * basis.ops
    out[-1] = (d + 1) * total
    return out


def _positivity_bound(gens: np.ndarray, base: float, tol: Tolerances) -> float:
    """Largest t > 0 with base*I + t*G PSD for every G, by bisection on t."""
    gens = gens.reshape(-1, gens.shape[-1], gens.shape[-1])
    eye = np.eye(gens.shape[-1])

    def feasible(t: float) -> bool:
        return float(np.linalg.eigvalsh(base * eye + t * gens).min()) >= -tol.positivity

    lo, hi = 0.0, 1.0
    while feasible(hi):
        lo, hi = hi, 2 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return lo


def max_t(d: int, basis: Optional[OperatorBasis] = None, root: str = "plus", tol: Optional[Tolerances] = None) -> float:
    tol = resolve(tol)
    basis = _check_basis(d, basis, tol)
    bound = _positivity_bound(mum_generators(d, basis, root), 1 / d, tol)
    log.debug("max_t dim=%d root=%s t=%.12g", d, root, bound)
    return bound


def gsic_max_t(d: int, basis: Optional[OperatorBasis] = None, tol: Optional[Tolerances] = None) -> float:
    tol = resolve(tol)
    basis = _check_basis(d, basis, tol)
    bound = _positivity_bound(gsic_generators(d, basis), 1 / d**2, tol)
    log.debug("gsic_max_t dim=%d t=%.12g", d, bound)
    return bound


def _require_psd(ops: np.ndarray, what: str, t: float, tol: Tolerances) -> None:
    lo = float(np.linalg.eigvalsh(ops.reshape(-1, ops.shape[-1], ops.shape[-1])).min())
    if lo < tol.eigenvalue_floor:
        raise PositivityError(f"{what} at t={t:.6g} is outside the positivity range: min eigenvalue={lo:.3e}")


def build_mum(
    d: int,
    M: Optional[int] = None,
    t: Optional[float] = None,
    basis: Optional[OperatorBasis] = None,
    root: str = "plus",
    tol: Optional[Tolerances] = None,
) -> MumSet:
    """M mutually unbiased measurements; t defaults to t_frac * max_t."""
    tol = resolve(tol)
    basis = _check_basis(d, basis, tol)
    M = d + 1 if M is None else int(M)
    if not 1 <= M <= d + 1:
        raise FamilyMismatchError(f"MUM count must be in 1..{d + 1}, got {M}")
    if t is None:
        t = tol.t_frac * max_t(d, basis, root, tol)
    t = float(t)
    if t == 0:
        raise PositivityError("simplex scale t must be nonzero")
    gens = mum_generators(d, basis, root)[:M]
    groups = np.eye(d)[None, None] / d + t * gens
    _require_psd(groups, "MUM", t, tol)
    kappa = mum_kappa(d, t, root)
    log.info("build_mum dim=%d count=%d root=%s t=%.9g kappa=%.9g", d, M, root, t, kappa)
    return MumSet(d, kappa, groups, t)


def build_gsic(
    d: int,
    t: Optional[float] = None,
    basis: Optional[OperatorBasis] = None,
    tol: Optional[Tolerances] = None,
) -> GsicSet:
    tol = resolve(tol)
    basis = _check_basis(d, basis, tol)
    if t is None:
        t = tol.t_frac * gsic_max_t(d, basis, tol)
    t = float(t)
    if t == 0:
        raise PositivityError("simplex scale t must be nonzero")
    ops = np.eye(d)[None] / d**2 + t * gsic_generators(d, basis)
    _require_psd(ops, "GSIC", t, tol)
    a = gsic_parameter(d, t)
    log.info("build_gsic dim=%d t=%.9g a=%.9g", d, t, a)
    return GsicSet(d, a, ops, t)


def mub_as_mum(mub: MubSet) -> MumSet:
    return MumSet(mub.dim, 1.0, mub.projectors())


def min_eigenvalue(fam: Family) -> float:
    ops = fam.outcome_operators()
    d = fam.dim
    return float(np.linalg.eigvalsh(ops.reshape(-1, d, d)).min())


def _gram(ops: np.ndarray) -> np.ndarray:
    flat = ops.reshape(len(ops), -1)
    return np.real(flat @ flat.conj().T)


def _operator_residuals(ops: np.ndarray, d: int) -> Dict[str, float]:
    adj = np.conj(np.swapaxes(ops, -1, -2))
    herm = 0.5 * (ops + adj)
    return {
        "hermiticity": float(np.max(np.abs(ops - adj))),
        "positivity": max(0.0, -float(np.linalg.eigvalsh(herm.reshape(-1, d, d)).min())),
    }


def _mub_residuals(fam: MubSet) -> Dict[str, float]:
    d = fam.dim
    V = fam.bases
    inner = np.einsum("bki,bkj->bij", V.conj(), V)
    ortho = float(np.max(np.abs(inner - np.eye(d))))
    unbiased = 0.0
    for b in range(fam.count):
        for b2 in range(b + 1, fam.count):
            sq = np.abs(V[b].conj().T @ V[b2]) ** 2
            unbiased = max(unbiased, float(np.max(np.abs(sq - 1 / d))))
    return {"orthonormality": ortho, "unbiasedness": unbiased}


def _mum_residuals(fam: MumSet) -> Dict[str, float]:
    d, M, k = fam.dim, fam.count, fam.kappa
    groups = fam.groups
    res = _operator_residuals(groups, d)
    res["unit_trace"] = float(np.max(np.abs(np.trace(groups, axis1=2, axis2=3) - 1)))
    res["completeness"] = float(np.max(np.abs(groups.sum(axis=1) - np.eye(d))))
    gram = _gram(groups.reshape(M * d, d, d)).reshape(M, d, M, d)
    expected = np.full((M, d, M, d), 1 / d)
    for b in range(M):
        expected[b, :, b, :] = (1 - k) / (d - 1)
        expected[b, np.arange(d), b, np.arange(d)] = k
    err = np.abs(gram - expected)
    same = np.eye(M, dtype=bool)[:, None, :, None] & np.ones((1, d, 1, d), dtype=bool)
    diag = same & np.eye(d, dtype=bool)[None, :, None, :]
    res["self_overlap"] = float(err[diag].max())
    res["intra_overlap"] = float(err[same & ~diag].max())
    res["cross_overlap"] = float(err[~same].max()) if M > 1 else 0.0
    res["parameter_range"] = max(0.0, k - 1.0, 1 / d - k)
    return res


def _gsic_residuals(fam: GsicSet) -> Dict[str, float]:
    d, a = fam.dim, fam.a
    ops = fam.ops
    res = _operator_residuals(ops, d)
    res["completeness"] = float(np.max(np.abs(ops.sum(axis=0) - np.eye(d))))
    gram = _gram(ops)
    off = ~np.eye(d * d, dtype=bool)
    res["self_overlap"] = float(np.max(np.abs(np.diag(gram) - a)))
    res["cross_overlap"] = float(np.max(np.abs(gram[off] - (1 - d * a) / (d * (d * d - 1)))))
    res["parameter_range"] = max(0.0, a - 1 / d**2, 1 / d**3 - a)
    return res


def validate_family(fam: Family, tol: Optional[Tolerances] = None) -> FamilyReport:
    """Max absolute residual per defining condition; never raises."""
    tol = resolve(tol)
    if isinstance(fam, MubSet):
        res = _mub_residuals(fam)
    elif isinstance(fam, MumSet):
        res = _mum_residuals(fam)
    else:
        res = _gsic_residuals(fam)
    ok = all(v <= tol.family for v in res.values())
    return FamilyReport(kind=fam.kind, dim=fam.dim, residuals=res, ok=ok)


def build_family(
    kind: str,
    d: int,
    count: Optional[int] = None,
    t: Optional[float] = None,
    t_frac: Optional[float] = None,
    root: str = "plus",
    tol: Optional[Tolerances] = None,
) -> Family:
    tol = resolve(tol)
    if kind == "mub":
        mub = build_mub_prime(d)
        if count is not None:
            if not 1 <= count <= d + 1:
                raise FamilyMismatchError(f"MUB count must be in 1..{d + 1}, got {count}")
            mub = MubSet(d, mub.bases[:count])
        return mub
    if kind == "mum":
        if t is None and t_frac is not None:
            t = t_frac * max_t(d, root=root, tol=tol)
        return build_mum(d, count, t, root=root, tol=tol)
    if kind == "gsic":
        if t is None and t_frac is not None:
            t = t_frac * gsic_max_t(d, tol=tol)
        return build_gsic(d, t, tol=tol)
    raise MubsepError(f"unknown measurement type: {kind}")
