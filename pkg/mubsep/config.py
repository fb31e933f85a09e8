import os
from typing import Optional

from pydantic import BaseModel, ConfigDict

HERMITICITY_TOL = float(os.getenv("MUBSEP_HERMITICITY_TOL", "1e-10"))
TRACE_TOL = float(os.getenv("MUBSEP_TRACE_TOL", "1e-10"))
EIGENVALUE_FLOOR = float(os.getenv("MUBSEP_EIGENVALUE_FLOOR", "-1e-10"))
FAMILY_TOL = float(os.getenv("MUBSEP_FAMILY_TOL", "1e-10"))
POSITIVITY_TOL = float(os.getenv("MUBSEP_POSITIVITY_TOL", "1e-12"))
IDENTITY_TOL = float(os.getenv("MUBSEP_IDENTITY_TOL", "1e-10"))
VERDICT_THRESHOLD = float(os.getenv("MUBSEP_VERDICT_THRESHOLD", "1e-9"))
SEARCH_CAP = int(float(os.getenv("MUBSEP_SEARCH_CAP", "1e6")))
T_FRAC = float(os.getenv("MUBSEP_T_FRAC", "0.9"))
THRESHOLD_RESOLUTION = float(os.getenv("MUBSEP_THRESHOLD_RESOLUTION", "1e-4"))

LOG_LEVEL = os.getenv("MUBSEP_LOG_LEVEL", "WARNING").upper()


class Tolerances(BaseModel):
    """Every numeric tolerance and cap used by validators, searches and verdicts."""

    model_config = ConfigDict(frozen=True)

    hermiticity: float = HERMITICITY_TOL
    trace: float = TRACE_TOL
    eigenvalue_floor: float = EIGENVALUE_FLOOR
    family: float = FAMILY_TOL
    positivity: float = POSITIVITY_TOL
    identity: float = IDENTITY_TOL
    verdict: float = VERDICT_THRESHOLD
    search_cap: int = SEARCH_CAP
    t_frac: float = T_FRAC
    threshold_resolution: float = THRESHOLD_RESOLUTION


TOLERANCES = Tolerances()


def resolve(tol: Optional[Tolerances]) -> Tolerances:
    return TOLERANCES if tol is None else tol
