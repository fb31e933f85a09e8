"""Separability criteria built on delta_rho and a measurement family per subsystem.

THM1 uses MUBs, THM2 uses MUMs with a common group count, THM3 uses GSIC-POVMs.
For every criterion the left-hand side is a maximum over selection plans of

    sum_b sum_slot f( Tr[(x)_j P_{j,b,sel_j(slot)} delta_rho] )

(f = abs, except THM3 without `absolute`), and the right-hand side is

    min_{a<b} sqrt(c_a - S_a) * sqrt(c_b - S_b)

with c_j the pure-state purity constant and S_j the purity sum of the reduced
state rho^j, over every outcome ("statement" mode) or over the selected slots
only ("proof" mode).
"""
import logging
from dataclasses import dataclass
from functools import lru_cache, reduce
from itertools import combinations, permutations
from math import comb, perm, prod
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.optimize import linear_sum_assignment

from .config import Tolerances, resolve
from .errors import FamilyMismatchError, MubsepError, PartitionError, SearchCapError, SelectionError
from .measurements import Family, GsicSet, MubSet, MumSet
from .partitions import KPartition, coarse_grain, delta_rho
from .tensor_core import DensityMatrix, Shape, trace_out

log = logging.getLogger("mubsep.criteria")

CRITERIA = ("THM1", "THM2", "THM3")
MODES = ("proof", "statement")
POLICIES = ("exhaustive", "greedy", "identity")

ENTANGLED = "ENTANGLED"
NOT_DETECTED = "NOT_DETECTED"

_FAMILY_TYPES = {"THM1": MubSet, "THM2": MumSet, "THM3": GsicSet}


def _criterion(name: str) -> str:
    key = str(name).upper()
    if key not in CRITERIA:
        raise MubsepError(f"unknown criterion {name!r}; expected one of {CRITERIA}")
    return key


def _mode(mode: str) -> str:
    if mode not in MODES:
        raise MubsepError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode


@dataclass(frozen=True)
class SelectionPlan:
    """maps[j][b] lists, slot by slot, the outcome of subsystem j used in group b."""

    maps: Tuple[Tuple[Tuple[int, ...], ...], ...]

    def __post_init__(self):
        maps = tuple(tuple(tuple(int(x) for x in slot_map) for slot_map in sub) for sub in self.maps)
        object.__setattr__(self, "maps", maps)

    @classmethod
    def from_groups(cls, per_group: Sequence[Sequence[Sequence[int]]]) -> "SelectionPlan":
        """Build from per_group[b][j] instead of maps[j][b]."""
        m = len(per_group[0])
        return cls(tuple(tuple(tuple(g[j]) for g in per_group) for j in range(m)))

    @classmethod
    def identity(cls, subsystems: int, groups: int, slots: int) -> "SelectionPlan":
        ident = tuple(range(slots))
        return cls(tuple(tuple(ident for _ in range(groups)) for _ in range(subsystems)))

    @property
    def subsystems(self) -> int:
        return len(self.maps)

    @property
    def groups(self) -> int:
        return len(self.maps[0]) if self.maps else 0

    def group(self, b: int) -> Tuple[np.ndarray, ...]:
        return tuple(np.asarray(sub[b], dtype=np.intp) for sub in self.maps)

    def check(self, outcomes: Sequence[int], groups: int, slots: int) -> None:
        if self.subsystems != len(outcomes):
            raise SelectionError(f"plan covers {self.subsystems} subsystems, expected {len(outcomes)}")
        for j, (sub, n) in enumerate(zip(self.maps, outcomes)):
            if len(sub) != groups:
                raise SelectionError(f"subsystem {j}: plan has {len(sub)} groups, expected {groups}")
            for b, slot_map in enumerate(sub):
                if len(slot_map) != slots or len(set(slot_map)) != slots:
                    raise SelectionError(f"subsystem {j} group {b}: {slot_map} is not an injection of {slots} slots")
                if min(slot_map) < 0 or max(slot_map) >= n:
                    raise SelectionError(f"subsystem {j} group {b}: outcomes {slot_map} out of range 0..{n - 1}")

    def to_list(self) -> List[List[List[int]]]:
        return [[list(slot_map) for slot_map in sub] for sub in self.maps]


@dataclass(frozen=True)
class Layout:
    criterion: str
    groups: int
    slots: int
    outcomes: Tuple[int, ...]


@dataclass(frozen=True)
class Bound:
    value: float
    pair: Tuple[int, int]
    clamped: bool
    purity_sums: Tuple[float, ...]
    constants: Tuple[float, ...]


class CriterionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    criterion: str
    mode: str
    search: str
    lhs: float
    rhs: float
    margin: float
    verdict: str
    threshold: float
    selection: List[List[List[int]]]
    pair: Tuple[int, int]
    purity_sums: List[float]
    constants: List[float]
    clamped: bool = False
    absolute: bool = True
    candidates: int = 0
    partition: Optional[str] = None

    @model_validator(mode="after")
    def _verdict_matches_margin(self):
        expected = ENTANGLED if self.margin > self.threshold else NOT_DETECTED
        if self.verdict != expected:
            raise ValueError(f"verdict {self.verdict} inconsistent with margin {self.margin:.3e}")
        return self


class PurityCheck(BaseModel):
    kind: str
    value: float
    bound: float
    slack: float
    equality: bool
    ok: bool


def layout_for(criterion: str, shape: Shape, families: Sequence[Family]) -> Layout:
    criterion = _criterion(criterion)
    dims = shape.dims
    if len(families) != len(dims):
        raise FamilyMismatchError(f"{len(families)} measurement sets for {len(dims)} subsystems")
    kind = _FAMILY_TYPES[criterion]
    for j, (fam, d) in enumerate(zip(families, dims)):
        if not isinstance(fam, kind):
            raise FamilyMismatchError(f"{criterion} needs {kind.__name__} for subsystem {j}, got {type(fam).__name__}")
        if fam.dim != d:
            raise FamilyMismatchError(f"subsystem {j} has d={d} but its measurement set has d={fam.dim}")
    counts = [fam.count for fam in families]
    if criterion == "THM2" and len(set(counts)) != 1:
        raise FamilyMismatchError(f"THM2 needs a common number of MUM groups, got {counts}")
    if criterion == "THM3":
        return Layout(criterion, 1, min(dims) ** 2, tuple(d * d for d in dims))
    return Layout(criterion, min(counts), min(dims), tuple(dims))


def purity_constants(criterion: str, families: Sequence[Family], groups: int, mode: str) -> np.ndarray:
    """Pure-state value c_j of the purity sum for each subsystem."""
    criterion = _criterion(criterion)
    out = []
    for fam in families:
        d = fam.dim
        if criterion == "THM1":
            used = fam.count if mode == "statement" else groups
            out.append(1 + (used - 1) / d)
        elif criterion == "THM2":
            out.append((groups - 1) / d + fam.kappa)
        else:
            out.append((fam.a * d * d + 1) / (d * (d + 1)))
    return np.array(out)


def expectation_tensors(delta: np.ndarray, dims: Sequence[int], operators: Sequence[np.ndarray], groups: int) -> List[np.ndarray]:
    """T_b[n_1..n_m] = Tr((x)_j P_{j,b,n_j} delta) for b < groups."""
    m = len(dims)
    x = np.asarray(delta).reshape(tuple(dims) * 2)
    rows, cols, outs = list(range(m)), list(range(m, 2 * m)), list(range(2 * m, 3 * m))
    tensors = []
    for b in range(groups):
        args: list = [x, rows + cols]
        for j in range(m):
            args += [operators[j][b], [outs[j], cols[j], rows[j]]]
        tensors.append(np.real(np.einsum(*args, outs, optimize=True)))
    return tensors


def outcome_probabilities(rho: DensityMatrix, families: Sequence[Family]) -> List[np.ndarray]:
    """Tr(P_{b,n} rho^j) for every group and outcome of every subsystem."""
    dims = rho.shape.dims
    probs = []
    for j, fam in enumerate(families):
        reduced = trace_out(rho.mat, dims, [j])
        probs.append(np.real(np.einsum("gnab,ba->gn", fam.outcome_operators(), reduced)))
    return probs


def _terms(tensors: Sequence[np.ndarray], plan: SelectionPlan, absolute: bool) -> np.ndarray:
    vals = np.array([t[plan.group(b)] for b, t in enumerate(tensors)])
    return np.abs(vals) if absolute else vals


def _selected_sums(probs: Sequence[np.ndarray], plan: SelectionPlan) -> np.ndarray:
    return np.array([
        sum(float(np.sum(p[b][np.asarray(sub[b], dtype=np.intp)] ** 2)) for b in range(plan.groups))
        for p, sub in zip(probs, plan.maps)
    ])


def _full_sums(probs: Sequence[np.ndarray]) -> np.ndarray:
    return np.array([float(np.sum(p**2)) for p in probs])


def _pair_products(radicands: np.ndarray) -> Tuple[np.ndarray, List[Tuple[int, int]]]:
    pairs = list(combinations(range(radicands.shape[0]), 2))
    roots = np.sqrt(np.clip(radicands, 0.0, None))
    return np.array([roots[a] * roots[b] for a, b in pairs]), pairs


def bound_from_sums(constants: np.ndarray, sums: np.ndarray, tol: Optional[Tolerances] = None) -> Bound:
    tol = resolve(tol)
    radicands = np.asarray(constants) - np.asarray(sums)
    products, pairs = _pair_products(radicands)
    k = int(np.argmin(products))
    lo = float(radicands.min())
    clamped = lo < 0
    if lo < -tol.identity:
        log.warning("clamped radicand=%.3e constants=%s sums=%s", lo, constants.tolist(), np.asarray(sums).tolist())
    elif clamped:
        log.debug("clamped rounding-level radicand=%.3e", lo)
    return Bound(float(products[k]), pairs[k], clamped, tuple(float(s) for s in sums), tuple(float(c) for c in constants))


@dataclass(frozen=True, eq=False)
class Problem:
    """Everything the selection search needs, computed once per state."""

    layout: Layout
    mode: str
    absolute: bool
    tensors: Tuple[np.ndarray, ...]
    probs: Tuple[np.ndarray, ...]
    constants: np.ndarray

    @property
    def subsystems(self) -> int:
        return len(self.layout.outcomes)

    @property
    def decoupled(self) -> bool:
        # purity sums do not depend on the selection
        return self.mode == "statement" or all(n == self.layout.slots for n in self.layout.outcomes)

    def lhs(self, plan: SelectionPlan) -> float:
        return float(np.sum(_terms(self.tensors, plan, self.absolute)))

    def bound(self, plan: SelectionPlan, tol: Optional[Tolerances] = None) -> Bound:
        sums = _full_sums(self.probs) if self.mode == "statement" else _selected_sums(self.probs, plan)
        return bound_from_sums(self.constants, sums, tol)

    def margin(self, plan: SelectionPlan) -> float:
        return self.lhs(plan) - self.bound(plan).value


def build_problem(
    criterion: str,
    rho: DensityMatrix,
    families: Sequence[Family],
    mode: str = "proof",
    absolute: bool = False,
) -> Problem:
    criterion = _criterion(criterion)
    mode = _mode(mode)
    if rho.shape.m % 2:
        raise PartitionError(f"criteria need an even number of subsystems, got {rho.shape.m}")
    layout = layout_for(criterion, rho.shape, families)
    ops = [fam.outcome_operators() for fam in families]
    delta = delta_rho(rho)
    tensors = expectation_tensors(delta, rho.shape.dims, ops, layout.groups)
    probs = outcome_probabilities(rho, families)
    if mode == "proof":
        probs = [p[: layout.groups] for p in probs]
    constants = purity_constants(criterion, families, layout.groups, mode)
    return Problem(
        layout=layout,
        mode=mode,
        absolute=True if criterion != "THM3" else bool(absolute),
        tensors=tuple(tensors),
        probs=tuple(probs),
        constants=constants,
    )


@dataclass(frozen=True)
class SearchResult:
    plan: SelectionPlan
    lhs: float
    bound: Bound
    candidates: int

    @property
    def margin(self) -> float:
        return self.lhs - self.bound.value


def candidate_count(outcomes: Sequence[int], slots: int) -> int:
    """Selections of one group, up to a common relabeling of the slots."""
    return comb(outcomes[0], slots) * prod(perm(n, slots) for n in outcomes[1:])


@lru_cache(maxsize=64)
def _candidates(outcomes: Tuple[int, ...], slots: int) -> Tuple[np.ndarray, ...]:
    # subsystem 0 takes increasing subsets; relabeling slots leaves every objective unchanged
    options = [np.array(list(combinations(range(outcomes[0]), slots)), dtype=np.intp)]
    options += [np.array(list(permutations(range(n), slots)), dtype=np.intp) for n in outcomes[1:]]
    grids = np.meshgrid(*[np.arange(len(o)) for o in options], indexing="ij")
    out = tuple(o[g.ravel()] for o, g in zip(options, grids))
    for a in out:
        a.setflags(write=False)
    return out


def _group_values(problem: Problem, b: int, cands: Tuple[np.ndarray, ...]) -> np.ndarray:
    vals = problem.tensors[b][cands]
    if problem.absolute:
        vals = np.abs(vals)
    return vals.sum(axis=1)


def _result(problem: Problem, per_group: Sequence[Sequence[Sequence[int]]], candidates: int, tol: Tolerances) -> SearchResult:
    plan = SelectionPlan.from_groups(per_group)
    return SearchResult(plan, problem.lhs(plan), problem.bound(plan, tol), candidates)


def _exhaustive(problem: Problem, cap: int, tol: Tolerances) -> SearchResult:
    lay = problem.layout
    M, s, ns = lay.groups, lay.slots, lay.outcomes
    count = candidate_count(ns, s)
    if problem.decoupled:
        if problem.subsystems == 2:
            per_group = []
            for t in problem.tensors:
                w = np.abs(t) if problem.absolute else t
                rows, cols = linear_sum_assignment(w, maximize=True)
                per_group.append((rows.tolist(), cols.tolist()))
            return _result(problem, per_group, count * M, tol)
        if count * M > cap:
            raise SearchCapError(f"exhaustive search needs {count * M} candidates, cap is {cap}")
        cands = _candidates(ns, s)
        per_group = []
        for b in range(M):
            k = int(np.argmax(_group_values(problem, b, cands)))
            per_group.append([c[k].tolist() for c in cands])
        return _result(problem, per_group, count * M, tol)

    total = count**M
    if total > cap:
        raise SearchCapError(f"exhaustive search needs {total} candidates, cap is {cap}")
    cands = _candidates(ns, s)
    lhs = reduce(np.add.outer, [_group_values(problem, b, cands) for b in range(M)]).ravel()
    sums = []
    for p, c in zip(problem.probs, cands):
        per_b = [np.sum(p[b][c] ** 2, axis=1) for b in range(M)]
        sums.append(reduce(np.add.outer, per_b).ravel())
    radicands = problem.constants[:, None] - np.array(sums)
    products, _ = _pair_products(radicands)
    margins = lhs - products.min(axis=0)
    best = np.unravel_index(int(np.argmax(margins)), (count,) * M)
    per_group = [[c[int(k)].tolist() for c in cands] for k in best]
    return _result(problem, per_group, total, tol)


def _greedy_group(values: np.ndarray, slots: int) -> List[List[int]]:
    vals = np.array(values, dtype=float)
    picks = []
    for _ in range(slots):
        idx = np.unravel_index(int(np.argmax(vals)), vals.shape)
        picks.append([int(i) for i in idx])
        for axis, i in enumerate(idx):
            sl = [slice(None)] * vals.ndim
            sl[axis] = i
            vals[tuple(sl)] = -np.inf
    return [list(col) for col in zip(*picks)]


def _identity_applicable(problem: Problem) -> bool:
    return all(n == problem.layout.slots for n in problem.layout.outcomes)


def _identity(problem: Problem, tol: Tolerances) -> SearchResult:
    lay = problem.layout
    if not _identity_applicable(problem):
        raise SelectionError(f"identity selection needs equal outcome counts, got {lay.outcomes}")
    plan = SelectionPlan.identity(problem.subsystems, lay.groups, lay.slots)
    return SearchResult(plan, problem.lhs(plan), problem.bound(plan, tol), 1)


def _greedy(problem: Problem, tol: Tolerances) -> SearchResult:
    per_group = []
    for t in problem.tensors:
        per_group.append(_greedy_group(np.abs(t) if problem.absolute else t, problem.layout.slots))
    res = _result(problem, per_group, problem.layout.groups, tol)
    if _identity_applicable(problem):
        ident = _identity(problem, tol)
        if ident.margin > res.margin:
            return SearchResult(ident.plan, ident.lhs, ident.bound, res.candidates + 1)
    return res


def search_selections(policy: str, problem: Problem, cap: Optional[int] = None, tol: Optional[Tolerances] = None) -> SearchResult:
    """Best selection plan under a search policy; the result is always a feasible plan."""
    tol = resolve(tol)
    cap = tol.search_cap if cap is None else int(cap)
    if policy == "exhaustive":
        return _exhaustive(problem, cap, tol)
    if policy == "greedy":
        return _greedy(problem, tol)
    if policy == "identity":
        return _identity(problem, tol)
    raise MubsepError(f"unknown search policy {policy!r}; expected one of {POLICIES}")


def _report(criterion: str, problem: Problem, search: str, res: SearchResult, tol: Tolerances, partition: Optional[str] = None) -> CriterionReport:
    margin = res.margin
    verdict = ENTANGLED if margin > tol.verdict else NOT_DETECTED
    return CriterionReport(
        criterion=criterion,
        mode=problem.mode,
        search=search,
        lhs=res.lhs,
        rhs=res.bound.value,
        margin=margin,
        verdict=verdict,
        threshold=tol.verdict,
        selection=res.plan.to_list(),
        pair=res.bound.pair,
        purity_sums=list(res.bound.purity_sums),
        constants=list(res.bound.constants),
        clamped=res.bound.clamped,
        absolute=problem.absolute,
        candidates=res.candidates,
        partition=partition,
    )


def evaluate(
    criterion: str,
    rho: DensityMatrix,
    families: Sequence[Family],
    search: str = "exhaustive",
    mode: str = "proof",
    absolute: bool = False,
    cap: Optional[int] = None,
    tol: Optional[Tolerances] = None,
) -> CriterionReport:
    tol = resolve(tol)
    criterion = _criterion(criterion)
    problem = build_problem(criterion, rho, families, mode, absolute)
    res = search_selections(search, problem, cap, tol)
    report = _report(criterion, problem, search, res, tol)
    log.info(
        "evaluate criterion=%s mode=%s search=%s lhs=%.12g rhs=%.12g margin=%.12g verdict=%s",
        criterion, mode, search, report.lhs, report.rhs, report.margin, report.verdict,
    )
    return report


def _lhs(criterion: str, delta: np.ndarray, shape: Shape, families: Sequence[Family], sel: SelectionPlan, absolute: bool) -> float:
    layout = layout_for(criterion, shape, families)
    sel.check(layout.outcomes, layout.groups, layout.slots)
    tensors = expectation_tensors(delta, shape.dims, [f.outcome_operators() for f in families], layout.groups)
    return float(np.sum(_terms(tensors, sel, absolute)))


def _rhs(criterion: str, rho: DensityMatrix, families: Sequence[Family], sel: SelectionPlan, mode: str, tol: Tolerances) -> Bound:
    mode = _mode(mode)
    layout = layout_for(criterion, rho.shape, families)
    sel.check(layout.outcomes, layout.groups, layout.slots)
    probs = outcome_probabilities(rho, families)
    if mode == "proof":
        probs = [p[: layout.groups] for p in probs]
    constants = purity_constants(criterion, families, layout.groups, mode)
    sums = _full_sums(probs) if mode == "statement" else _selected_sums(probs, sel)
    return bound_from_sums(constants, sums, tol)


def lhs_thm1(delta: np.ndarray, shape: Shape, mubs: Sequence[MubSet], sel: SelectionPlan) -> float:
    return _lhs("THM1", delta, shape, mubs, sel, True)


def rhs_thm1(rho: DensityMatrix, mubs: Sequence[MubSet], sel: SelectionPlan, mode: str = "proof", tol: Optional[Tolerances] = None) -> Bound:
    return _rhs("THM1", rho, mubs, sel, mode, tol)


def evaluate_thm1(rho: DensityMatrix, mubs: Sequence[MubSet], search: str = "exhaustive", mode: str = "proof", cap: Optional[int] = None, tol: Optional[Tolerances] = None) -> CriterionReport:
    return evaluate("THM1", rho, mubs, search, mode, cap=cap, tol=tol)


def lhs_thm2(delta: np.ndarray, shape: Shape, mums: Sequence[MumSet], sel: SelectionPlan) -> float:
    return _lhs("THM2", delta, shape, mums, sel, True)


def rhs_thm2(rho: DensityMatrix, mums: Sequence[MumSet], sel: SelectionPlan, mode: str = "proof", tol: Optional[Tolerances] = None) -> Bound:
    return _rhs("THM2", rho, mums, sel, mode, tol)


def evaluate_thm2(rho: DensityMatrix, mums: Sequence[MumSet], search: str = "exhaustive", mode: str = "proof", cap: Optional[int] = None, tol: Optional[Tolerances] = None) -> CriterionReport:
    return evaluate("THM2", rho, mums, search, mode, cap=cap, tol=tol)


def lhs_thm3(delta: np.ndarray, shape: Shape, gsics: Sequence[GsicSet], sel: SelectionPlan, absolute: bool = False) -> float:
    return _lhs("THM3", delta, shape, gsics, sel, absolute)


def rhs_thm3(rho: DensityMatrix, gsics: Sequence[GsicSet], sel: SelectionPlan, mode: str = "proof", tol: Optional[Tolerances] = None) -> Bound:
    return _rhs("THM3", rho, gsics, sel, mode, tol)


def evaluate_thm3(
    rho: DensityMatrix,
    gsics: Sequence[GsicSet],
    search: str = "exhaustive",
    mode: str = "proof",
    absolute: bool = False,
    cap: Optional[int] = None,
    tol: Optional[Tolerances] = None,
) -> CriterionReport:
    return evaluate("THM3", rho, gsics, search, mode, absolute, cap, tol)


def purity_identity_check(rho: DensityMatrix, fam: Family, tol: Optional[Tolerances] = None) -> PurityCheck:
    """Mixed-state purity bound (MUB, MUM) or identity (GSIC) on one subsystem."""
    tol = resolve(tol)
    if rho.shape.m != 1 or rho.shape.total != fam.dim:
        raise FamilyMismatchError(f"purity check needs a single d={fam.dim} subsystem, got shape {rho.shape}")
    d = fam.dim
    probs = np.real(np.einsum("gnab,ba->gn", fam.outcome_operators(), rho.mat))
    value = float(np.sum(probs**2))
    pur = rho.purity()
    if isinstance(fam, GsicSet):
        a = fam.a
        bound = ((a * d**3 - 1) * pur + d * (1 - a * d)) / (d * (d * d - 1))
        slack = bound - value
        return PurityCheck(kind="gsic", value=value, bound=bound, slack=slack, equality=True, ok=abs(slack) <= tol.identity)
    M = fam.count
    if isinstance(fam, MubSet):
        bound = (M - 1) / d + pur
    else:
        k = fam.kappa
        bound = (M - 1) / d + (1 - k + (k * d - 1) * pur) / (d - 1)
    slack = bound - value
    return PurityCheck(kind=fam.kind, value=value, bound=bound, slack=slack, equality=False, ok=slack >= -tol.identity)


class LadderStep(BaseModel):
    partition: str
    k: int
    report: CriterionReport


class LadderReport(BaseModel):
    steps: List[LadderStep]
    detected_k: Optional[int] = None


def evaluate_ladder(
    rho: DensityMatrix,
    partitions: Sequence[KPartition],
    criterion: str,
    family_for_dim: Callable[[int], Family],
    search: str = "exhaustive",
    mode: str = "proof",
    absolute: bool = False,
    cap: Optional[int] = None,
    tol: Optional[Tolerances] = None,
) -> LadderReport:
    """Walk partitions from finest to coarsest and stop at the first undetected one.

    A detection on a k-partition rules out k-separability with respect to it;
    `detected_k` is the smallest k reached.
    """
    tol = resolve(tol)
    steps: List[LadderStep] = []
    detected: Optional[int] = None
    cache: Dict[int, Family] = {}
    for part in partitions:
        if part.k % 2:
            raise PartitionError(f"partition {part.label()} has an odd number of blocks")
        grained = coarse_grain(rho, part)
        fams = []
        for d in grained.shape.dims:
            if d not in cache:
                cache[d] = family_for_dim(d)
            fams.append(cache[d])
        problem = build_problem(criterion, grained, fams, mode, absolute)
        res = search_selections(search, problem, cap, tol)
        report = _report(_criterion(criterion), problem, search, res, tol, part.label())
        steps.append(LadderStep(partition=part.label(), k=part.k, report=report))
        log.info("ladder partition=%s k=%d margin=%.12g verdict=%s", part.label(), part.k, report.margin, report.verdict)
        if report.verdict != ENTANGLED:
            break
        detected = part.k
    return LadderReport(steps=steps, detected_k=detected)
