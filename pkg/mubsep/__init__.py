"""Entanglement certification with MUB, MUM and GSIC-POVM separability criteria."""
from .criteria import (
    ENTANGLED,
    NOT_DETECTED,
    CriterionReport,
    SelectionPlan,
    evaluate,
    evaluate_ladder,
    evaluate_thm1,
    evaluate_thm2,
    evaluate_thm3,
    purity_identity_check,
    search_selections,
)
from .errors import MubsepError
from .measurements import (
    GsicSet,
    MubSet,
    MumSet,
    build_family,
    build_gsic,
    build_mub_prime,
    build_mum,
    gell_mann_basis,
    mub_as_mum,
    validate_family,
)
from .partitions import coarse_grain, delta_rho, enumerate_bipartitions, parse_partition
from .tensor_core import DensityMatrix, Shape, partial_trace, validate_density

__version__ = "0.1.0"
