"""Noise scans: margin curves over a mixing weight p and the detection threshold."""
import csv
import io
import logging
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel

from .config import Tolerances, resolve
from .criteria import ENTANGLED, CriterionReport
from .errors import MubsepError

log = logging.getLogger("mubsep.sweep")

CSV_HEADER = ("p", "lhs", "rhs", "margin", "verdict")


class ScanRow(BaseModel):
    p: float
    lhs: float
    rhs: float
    margin: float
    verdict: str


class ScanResult(BaseModel):
    rows: List[ScanRow]
    threshold: Optional[float] = None
    bracket: Optional[Tuple[float, float]] = None
    monotone: bool = True


def _row(p: float, report: CriterionReport) -> ScanRow:
    return ScanRow(p=p, lhs=report.lhs, rhs=report.rhs, margin=report.margin, verdict=report.verdict)


def scan_noise(
    report_at: Callable[[float], CriterionReport],
    p_from: float,
    p_to: float,
    steps: int,
    resolution: Optional[float] = None,
    tol: Optional[Tolerances] = None,
) -> ScanResult:
    """Evaluate the grid, then bisect the first NOT_DETECTED -> ENTANGLED step."""
    tol = resolve(tol)
    resolution = tol.threshold_resolution if resolution is None else float(resolution)
    if not 0.0 <= p_from <= p_to <= 1.0:
        raise MubsepError(f"scan range must satisfy 0 <= p_from <= p_to <= 1, got [{p_from}, {p_to}]")
    if p_from == p_to:
        grid = np.array([p_from])
    else:
        if steps < 2:
            raise MubsepError(f"a scan over a range needs steps >= 2, got {steps}")
        grid = np.linspace(p_from, p_to, steps)

    rows = [_row(float(p), report_at(float(p))) for p in grid]
    margins = np.array([r.margin for r in rows])
    monotone = bool(np.all(np.diff(margins) >= -1e-12))
    if not monotone:
        log.warning("non-monotone margin column over p=[%g, %g]; threshold assumes monotonicity", p_from, p_to)

    threshold, bracket = None, None
    for prev, cur in zip(rows, rows[1:]):
        if prev.verdict != ENTANGLED and cur.verdict == ENTANGLED:
            lo, hi = prev.p, cur.p
            while hi - lo > resolution:
                mid = 0.5 * (lo + hi)
                if report_at(mid).verdict == ENTANGLED:
                    hi = mid
                else:
                    lo = mid
            threshold, bracket = 0.5 * (lo + hi), (lo, hi)
            log.info("threshold p=%.6f bracket=[%.6f, %.6f]", threshold, lo, hi)
            break
    return ScanResult(rows=rows, threshold=threshold, bracket=bracket, monotone=monotone)


def write_csv(rows: List[ScanRow], out: Union[str, Path, io.TextIOBase]) -> None:
    """CSV with a dot decimal separator and LF line endings."""
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8", newline="") as f:
            write_csv(rows, f)
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([repr(float(v)) for v in (r.p, r.lhs, r.rhs, r.margin)] + [r.verdict])
