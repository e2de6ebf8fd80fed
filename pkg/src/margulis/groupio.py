"""Group files: a JSON document describing an affine generator set.

Fields: dimension (integer); optional form (row-major symmetric gram
matrix); optional splitting (bases of two complementary subspaces);
generators (list of {label, linear, translation}).  With a splitting
present the form is 3x3 and lives in the coordinates of the first
summand; otherwise it is ambient.  All numbers are decimal and survive
serialize/parse exactly (repr round-trip).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .affine import AffineMap
from .errors import GroupFileError, MargulisError
from .projective import Subspace
from .signform import CaseTwoStructure, QuadraticForm, normalize_form
from .words import GeneratorSet

Structure = Union[QuadraticForm, CaseTwoStructure]


@dataclass(frozen=True)
class GroupFile:
    dimension: int
    generators: GeneratorSet
    form: Optional[np.ndarray]
    splitting: Optional[tuple[np.ndarray, np.ndarray]]
    structure: Optional[Structure]


def _fail(path: str, message: str) -> GroupFileError:
    return GroupFileError(f"{path}: {message}")


def _as_vector(raw, length: int, path: str) -> np.ndarray:
    if not isinstance(raw, list):
        raise _fail(path, f"expected a list of {length} numbers")
    if len(raw) != length:
        raise _fail(path, f"expected {length} numbers, got {len(raw)}")
    out = np.empty(length)
    for k, item in enumerate(raw):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise _fail(f"{path}[{k}]", f"expected a number, got {item!r}")
        out[k] = float(item)
    return out


def _as_matrix(raw, rows: int, cols: int, path: str) -> np.ndarray:
    if not isinstance(raw, list):
        raise _fail(path, f"expected {rows} rows of {cols} numbers")
    if len(raw) != rows:
        raise _fail(path, f"expected {rows} rows, got {len(raw)}")
    return np.vstack([_as_vector(row, cols, f"{path}[{r}]")
                      for r, row in enumerate(raw)])


def _resolve_structure(dimension: int,
                       form: Optional[np.ndarray],
                       splitting: Optional[tuple[np.ndarray, np.ndarray]]
                       ) -> Optional[Structure]:
    if splitting is not None:
        basis1, basis2 = splitting
        gram = form if form is not None else np.diag([1.0, 1.0, -1.0])
        try:
            return CaseTwoStructure(
                v1=Subspace(basis1),
                v2=Subspace(basis2),
                b1=normalize_form(gram),
            )
        except (MargulisError, ValueError) as exc:
            raise _fail("splitting", str(exc)) from exc
    if form is not None:
        try:
            return normalize_form(form)
        except MargulisError as exc:
            raise _fail("form", str(exc)) from exc
    return None


def parse_group_text(text: str) -> GroupFile:
    """Parse a group document, raising GroupFileError with a field path on
    any malformed or inconsistent content."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GroupFileError(f"not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise GroupFileError("top level must be an object")
    unknown = set(payload) - {"dimension", "form", "splitting", "generators"}
    if unknown:
        raise GroupFileError(f"unknown fields {sorted(unknown)}")

    dim = payload.get("dimension")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise _fail("dimension", f"expected a positive integer, got {dim!r}")
    if dim > 16:
        raise _fail("dimension", f"dimension {dim} exceeds the supported cap of 16")

    form = None
    if "form" in payload:
        size = 3 if "splitting" in payload else dim
        form = _as_matrix(payload["form"], size, size, "form")
        if not np.array_equal(form, form.T):
            raise _fail("form", "gram matrix must be symmetric")

    splitting = None
    if "splitting" in payload:
        raw = payload["splitting"]
        if not isinstance(raw, dict) or set(raw) != {"v1", "v2"}:
            raise _fail("splitting", "expected an object with fields v1 and v2")
        parts = []
        for key in ("v1", "v2"):
            vecs = raw[key]
            if not isinstance(vecs, list) or not vecs:
                raise _fail(f"splitting.{key}", "expected a nonempty list of vectors")
            cols = [_as_vector(v, dim, f"splitting.{key}[{i}]")
                    for i, v in enumerate(vecs)]
            parts.append(np.column_stack(cols))
        splitting = (parts[0], parts[1])

    raw_gens = payload.get("generators")
    if not isinstance(raw_gens, list) or not raw_gens:
        raise _fail("generators", "expected a nonempty list")
    items = []
    seen = set()
    for g, raw in enumerate(raw_gens):
        path = f"generators[{g}]"
        if not isinstance(raw, dict):
            raise _fail(path, "expected an object")
        missing = {"label", "linear", "translation"} - set(raw)
        if missing:
            raise _fail(path, f"missing fields {sorted(missing)}")
        label = raw["label"]
        if not isinstance(label, str) or not label:
            raise _fail(f"{path}.label", "expected a nonempty string")
        if label in seen:
            raise _fail(f"{path}.label", f"duplicate label {label!r}")
        seen.add(label)
        linear = _as_matrix(raw["linear"], dim, dim, f"{path}.linear")
        translation = _as_vector(raw["translation"], dim, f"{path}.translation")
        items.append((label, AffineMap(linear, translation)))
    try:
        gens = GeneratorSet.build(items)
    except (MargulisError, ValueError) as exc:
        raise _fail("generators", str(exc)) from exc

    structure = _resolve_structure(dim, form, splitting)
    return GroupFile(dimension=dim, generators=gens, form=form,
                     splitting=splitting, structure=structure)


def parse_group_file(path: str) -> GroupFile:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise GroupFileError(f"cannot read {path}: {exc}") from exc
    return parse_group_text(text)


def _matrix_rows(matrix: np.ndarray) -> list:
    return [[float(x) for x in row] for row in matrix]


def serialize_group(group: GroupFile) -> str:
    """Deterministic JSON for a group file; numbers keep full precision."""
    payload: dict = {"dimension": group.dimension}
    if group.form is not None:
        payload["form"] = _matrix_rows(group.form)
    if group.splitting is not None:
        payload["splitting"] = {
            "v1": _matrix_rows(group.splitting[0].T),
            "v2": _matrix_rows(group.splitting[1].T),
        }
    payload["generators"] = [
        {
            "label": label,
            "linear": _matrix_rows(amap.linear),
            "translation": [float(x) for x in amap.translation],
        }
        for label, amap in zip(group.generators.labels, group.generators.maps)
    ]
    return json.dumps(payload, indent=2) + "\n"


def write_group_file(path: str, group: GroupFile) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(serialize_group(group))


def group_from_parts(gens: GeneratorSet,
                     form: Optional[np.ndarray] = None,
                     splitting: Optional[tuple[np.ndarray, np.ndarray]] = None
                     ) -> GroupFile:
    """Assemble a GroupFile from in-memory parts, resolving the structure
    the same way parsing does."""
    form_arr = None if form is None else np.asarray(form, dtype=float)
    split_arrs = None
    if splitting is not None:
        split_arrs = (np.asarray(splitting[0], dtype=float),
                      np.asarray(splitting[1], dtype=float))
    structure = _resolve_structure(gens.ambient, form_arr, split_arrs)
    return GroupFile(dimension=gens.ambient, generators=gens, form=form_arr,
                     splitting=split_arrs, structure=structure)
