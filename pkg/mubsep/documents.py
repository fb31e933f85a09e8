"""JSON documents for states and measurement families.

Complex numbers are stored as [re, im] pairs and matrices as lists of rows:

    {"kind": "state", "dims": [2, 2], "params": {}, "data": [[[re, im], ...], ...]}
    {"kind": "mub", "dim": 3, "params": {"M": 4}, "data": [basis, ...]}   # columns are vectors
    {"kind": "mum", "dim": 2, "params": {"M": 3, "t": ..., "kappa": ...}, "data": [[op, ...], ...]}
    {"kind": "gsic", "dim": 2, "params": {"t": ..., "a": ...}, "data": [op, ...]}
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ValidationError, model_validator

from .config import Tolerances
from .errors import DocumentError, InvalidStateError, MubsepError
from .measurements import GsicSet, MubSet, MumSet
from .tensor_core import DensityMatrix, Shape, validate_density

Documentable = Union[DensityMatrix, MubSet, MumSet, GsicSet]


class Document(BaseModel):
    kind: Literal["state", "mub", "mum", "gsic"]
    dim: Optional[int] = None
    dims: Optional[List[int]] = None
    params: Dict[str, Optional[Union[int, float]]] = {}
    data: Any

    @model_validator(mode="after")
    def _needs_dimension(self):
        if self.kind == "state" and not self.dims:
            raise ValueError("state documents need 'dims'")
        if self.kind != "state" and not self.dim:
            raise ValueError(f"{self.kind} documents need 'dim'")
        return self


def encode_complex(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=np.complex128)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def decode_complex(data: Any, shape: tuple) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise DocumentError(f"data is not a regular array of [re, im] pairs: {e}") from e
    if arr.shape != tuple(shape) + (2,):
        raise DocumentError(f"data has shape {arr.shape[:-1]}, expected {tuple(shape)}")
    return arr[..., 0] + 1j * arr[..., 1]


def to_document(obj: Documentable) -> Document:
    if isinstance(obj, DensityMatrix):
        return Document(kind="state", dims=list(obj.shape.dims), data=encode_complex(obj.mat))
    if isinstance(obj, MubSet):
        return Document(kind="mub", dim=obj.dim, params={"M": obj.count}, data=encode_complex(obj.bases))
    if isinstance(obj, MumSet):
        params = {"M": obj.count, "kappa": obj.kappa, "t": obj.t}
        return Document(kind="mum", dim=obj.dim, params=params, data=encode_complex(obj.groups))
    if isinstance(obj, GsicSet):
        return Document(kind="gsic", dim=obj.dim, params={"a": obj.a, "t": obj.t}, data=encode_complex(obj.ops))
    raise DocumentError(f"cannot serialize {type(obj).__name__}")


def _count(doc: Document, data_len: int) -> int:
    m = doc.params.get("M")
    return data_len if m is None else int(m)


def from_document(doc: Document, tol: Optional[Tolerances] = None) -> Documentable:
    """Decode a document; states are re-validated as density matrices."""
    data = doc.data if isinstance(doc.data, list) else []
    if doc.kind == "state":
        shape = Shape(tuple(doc.dims))
        mat = decode_complex(data, (shape.total, shape.total))
        return validate_density(mat, shape, tol)
    d = int(doc.dim)
    if doc.kind == "mub":
        return MubSet(d, decode_complex(data, (_count(doc, len(data)), d, d)))
    if doc.kind == "mum":
        groups = decode_complex(data, (_count(doc, len(data)), d, d, d))
        kappa = doc.params.get("kappa")
        if kappa is None:
            kappa = float(np.real(np.trace(groups[0, 0] @ groups[0, 0])))
        return MumSet(d, kappa, groups, doc.params.get("t"))
    ops = decode_complex(data, (d * d, d, d))
    a = doc.params.get("a")
    if a is None:
        a = float(np.real(np.trace(ops[0] @ ops[0])))
    return GsicSet(d, a, ops, doc.params.get("t"))


def dumps(obj: Documentable) -> str:
    return json.dumps(to_document(obj).model_dump(), ensure_ascii=False)


def loads(text: str, tol: Optional[Tolerances] = None) -> Documentable:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"not valid JSON: {e}") from e
    try:
        doc = Document.model_validate(raw)
    except ValidationError as e:
        raise DocumentError(f"not a mubsep document: {e.errors()[0].get('msg')}") from e
    try:
        return from_document(doc, tol)
    except (DocumentError, InvalidStateError):
        raise
    except MubsepError as e:
        raise DocumentError(str(e)) from e


def write_document(obj: Documentable, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(dumps(obj) + "\n", encoding="utf-8")
    return path


def read_document(path: Union[str, Path], tol: Optional[Tolerances] = None) -> Documentable:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e.strerror or e}") from e
    return loads(text, tol)
