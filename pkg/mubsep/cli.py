"""Command-line frontend.

Exit codes: 0 not detected / validation passed, 1 validation failed,
2 usage or parse error, 3 entangled.
"""
import argparse
import json
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from .config import LOG_LEVEL, TOLERANCES
from .criteria import ENTANGLED, MODES, POLICIES, evaluate
from .documents import read_document, write_document
from .errors import DocumentError, FamilyMismatchError, MubsepError
from .measurements import MubSet, build_family, min_eigenvalue, mub_as_mum, validate_family
from .partitions import coarse_grain, parse_partition
from .states import add_white_noise, bell, ghz, isotropic, random_density, random_separable, w_state
from .sweep import scan_noise, write_csv
from .tensor_core import DensityMatrix, Shape

log = logging.getLogger("mubsep.cli")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_ENTANGLED = 3

_HANDLER_NAME = "mubsep-cli"


def _configure_logging(level: str) -> None:
    logger = logging.getLogger("mubsep")
    for h in list(logger.handlers):
        if h.get_name() == _HANDLER_NAME:
            logger.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.set_name(_HANDLER_NAME)
    handler.setFormatter(logging.Formatter("[mubsep] %(levelname)s %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level.upper())


def _json_default(o: Any):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, (complex, np.complexfloating)):
        return [float(o.real), float(o.imag)]
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _emit(body: Dict[str, Any]) -> None:
    print(json.dumps(body, ensure_ascii=False, default=_json_default), flush=True)


def _parse_dims(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise MubsepError(f"--dims must be a comma-separated list of integers, got {text!r}") from e


def _require_dims(name: str, dims: Optional[List[int]]) -> List[int]:
    if not dims:
        raise MubsepError(f"--dims is required for family {name}")
    return dims


def _uniform(name: str, dims: List[int]) -> int:
    if len(set(dims)) != 1:
        raise MubsepError(f"family {name} needs equal subsystem dimensions, got {dims}")
    return dims[0]


def _state_ghz(dims, args) -> DensityMatrix:
    dims = _require_dims("ghz", dims)
    return ghz(len(dims), _uniform("ghz", dims))


def _state_w(dims, args) -> DensityMatrix:
    dims = _require_dims("w", dims)
    if _uniform("w", dims) != 2:
        raise MubsepError("family w is defined on qubits only")
    return w_state(len(dims))


def _state_bell(dims, args) -> DensityMatrix:
    if dims and list(dims) != [2, 2]:
        raise MubsepError(f"family bell lives on dims 2,2, got {dims}")
    return bell()


def _state_isotropic(dims, args) -> DensityMatrix:
    dims = _require_dims("isotropic", dims)
    if len(dims) != 2:
        raise MubsepError(f"family isotropic needs two subsystems, got {dims}")
    return isotropic(_uniform("isotropic", dims), 1.0 if args.p is None else args.p)


def _state_random_separable(dims, args) -> DensityMatrix:
    dims = _require_dims("random-separable", dims)
    return random_separable(Shape(tuple(dims)), args.terms, args.seed)[0]


def _state_random(dims, args) -> DensityMatrix:
    dims = _require_dims("random", dims)
    return random_density(Shape(tuple(dims)), args.seed, args.rank)


_STATES_IMPL: Dict[str, Callable[[Optional[List[int]], argparse.Namespace], DensityMatrix]] = {
    "ghz": _state_ghz,
    "w": _state_w,
    "bell": _state_bell,
    "isotropic": _state_isotropic,
    "random-separable": _state_random_separable,
    "random": _state_random,
}


def _family_state(args, p: Optional[float] = None) -> DensityMatrix:
    impl = _STATES_IMPL.get(args.family)
    if impl is None:
        raise MubsepError(f"unknown state family {args.family!r}")
    dims = _parse_dims(args.dims)
    if p is None:
        return impl(dims, args)
    if args.family == "isotropic":
        args = argparse.Namespace(**{**vars(args), "p": p})
        return impl(dims, args)
    return add_white_noise(impl(dims, args), p)


def _load_families(paths: Sequence[str], parts: int, criterion: str) -> list:
    fams = []
    for path in paths:
        fam = read_document(path)
        if isinstance(fam, DensityMatrix):
            raise DocumentError(f"{path} holds a state, not a measurement set")
        report = validate_family(fam)
        if not report.ok:
            bad = {k: v for k, v in report.residuals.items() if v > TOLERANCES.family}
            raise DocumentError(f"{path} fails measurement validation: {bad}")
        fams.append(fam)
    if len(fams) == 1:
        fams = fams * parts
    elif len(fams) != parts:
        raise FamilyMismatchError(f"{len(fams)} measurement files for {parts} parts")
    if criterion.upper() == "THM2":
        fams = [mub_as_mum(f) if isinstance(f, MubSet) else f for f in fams]
    return fams


def _cmd_gen_meas(args) -> int:
    fam = build_family(args.type, args.dim, args.count, args.t, args.t_frac, args.root)
    write_document(fam, args.out)
    item: Dict[str, Any] = {"kind": fam.kind, "dim": fam.dim, "count": fam.count, "out": args.out}
    if fam.kind == "mum":
        item.update(t=fam.t, kappa=fam.kappa)
    elif fam.kind == "gsic":
        item.update(t=fam.t, a=fam.a)
    item["min_eigenvalue"] = min_eigenvalue(fam)
    _emit({"ok": True, "item": item})
    return EXIT_OK


def _cmd_validate_meas(args) -> int:
    fam = read_document(args.file)
    if isinstance(fam, DensityMatrix):
        raise DocumentError(f"{args.file} holds a state, not a measurement set")
    report = validate_family(fam)
    _emit({"ok": report.ok, "item": report.model_dump()})
    return EXIT_OK if report.ok else EXIT_INVALID


def _cmd_certify(args) -> int:
    if args.state:
        rho = read_document(args.state)
        if not isinstance(rho, DensityMatrix):
            raise DocumentError(f"{args.state} is not a state document")
    elif args.family:
        rho = _family_state(args)
    else:
        raise MubsepError("certify needs --state FILE or --family NAME")
    label = None
    if args.partition:
        part = parse_partition(args.partition, rho.shape.m)
        rho = coarse_grain(rho, part)
        label = part.label()
    fams = _load_families(args.meas, rho.shape.m, args.criterion)
    report = evaluate(args.criterion, rho, fams, args.search, args.mode, args.absolute, args.cap)
    if label is not None:
        report = report.model_copy(update={"partition": label})
    _emit({"ok": True, "report": report.model_dump()})
    return EXIT_ENTANGLED if report.verdict == ENTANGLED else EXIT_OK


def _cmd_scan(args) -> int:
    sample = _family_state(args, 1.0)
    fams = _load_families(args.meas, sample.shape.m, args.criterion)

    def report_at(p: float):
        return evaluate(args.criterion, _family_state(args, p), fams, args.search, args.mode, args.absolute, args.cap)

    result = scan_noise(report_at, args.p_from, args.p_to, args.steps, args.resolution)
    write_csv(result.rows, args.out)
    _emit({
        "ok": True,
        "item": {
            "rows": len(result.rows),
            "threshold": result.threshold,
            "bracket": result.bracket,
            "monotone": result.monotone,
            "out": args.out,
        },
    })
    return EXIT_OK


def _cmd_gen_state(args) -> int:
    rho = _family_state(args)
    write_document(rho, args.out)
    _emit({"ok": True, "item": {"family": args.family, "dims": list(rho.shape.dims), "purity": rho.purity(), "out": args.out}})
    return EXIT_OK


_COMMANDS = {
    "gen-meas": _cmd_gen_meas,
    "validate-meas": _cmd_validate_meas,
    "certify": _cmd_certify,
    "scan": _cmd_scan,
    "gen-state": _cmd_gen_state,
}


def _state_options(p: argparse.ArgumentParser, family_required: bool) -> None:
    p.add_argument("--family", required=family_required, choices=sorted(_STATES_IMPL))
    p.add_argument("--dims", help="comma-separated subsystem dimensions, e.g. 2,2")
    p.add_argument("--p", type=float, help="isotropic mixing weight")
    p.add_argument("--terms", type=int, default=2, help="random-separable ensemble size")
    p.add_argument("--seed", type=int)
    p.add_argument("--rank", type=int, help="rank of a random mixed state")


def _criterion_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--criterion", required=True, type=str.lower, choices=["thm1", "thm2", "thm3"])
    p.add_argument("--meas", required=True, nargs="+", help="one file for every part, or one per part")
    p.add_argument("--mode", default="proof", choices=MODES)
    p.add_argument("--search", default="exhaustive", choices=POLICIES)
    p.add_argument("--absolute", action="store_true", help="absolute-value terms for thm3")
    p.add_argument("--cap", type=int, help="maximum exhaustive candidates")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mubsep", description="Entanglement certification with MUB/MUM/GSIC criteria")
    parser.add_argument("--log-level", default=LOG_LEVEL)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-meas", help="build and save a measurement set")
    g.add_argument("--type", required=True, choices=["mub", "mum", "gsic"])
    g.add_argument("--dim", required=True, type=int)
    g.add_argument("--count", type=int)
    scale = g.add_mutually_exclusive_group()
    scale.add_argument("--t", type=float)
    scale.add_argument("--t-frac", type=float)
    g.add_argument("--root", default="plus", choices=["plus", "minus"])
    g.add_argument("--out", required=True)

    v = sub.add_parser("validate-meas", help="check a measurement file")
    v.add_argument("file")

    c = sub.add_parser("certify", help="evaluate a criterion on one state")
    c.add_argument("--state")
    _state_options(c, family_required=False)
    _criterion_options(c)
    c.add_argument("--partition", help='1-based blocks, e.g. "1,2|3,4"')

    s = sub.add_parser("scan", help="sweep the noise weight p and locate the detection threshold")
    _state_options(s, family_required=True)
    _criterion_options(s)
    s.add_argument("--p-from", type=float, required=True)
    s.add_argument("--p-to", type=float, required=True)
    s.add_argument("--steps", type=int, default=11)
    s.add_argument("--resolution", type=float)
    s.add_argument("--out", required=True)

    st = sub.add_parser("gen-state", help="generate and save a benchmark state")
    _state_options(st, family_required=True)
    st.add_argument("--out", required=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.log_level)
    log.info("command=%s", args.command)
    try:
        return _COMMANDS[args.command](args)
    except (MubsepError, ValidationError, OSError) as e:
        log.error("command=%s error=%s", args.command, e)
        _emit({"ok": False, "error": str(e)})
        return EXIT_USAGE
