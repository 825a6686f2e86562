"""Reading group specs and coefficient vectors, writing transforms.

Group specs come in three forms:

* JSON objects, ``{"type": "named", "family": "dihedral", "n": 6}``,
  ``{"type": "permutation", "degree": 5, "generators": [[...], ...]}`` or
  ``{"type": "direct_product", "factors": [spec, spec, ...]}``;
* a path to a file holding such an object;
* the short form ``family:n`` (``cyclic:8``, ``quaternion8``), with ``*``
  between factors for direct products (``cyclic:2*alternating:5``).

Coefficient vectors are read from CSV rows ``index,re,im`` (header
optional, missing indices are zero), a JSON list of numbers or ``[re, im]``
pairs, or generated with ``random:SEED`` or ``delta:INDEX``.
"""
from __future__ import annotations

import csv
import io as _io
import json
import os
from pathlib import Path
from typing import Any

import numpy as np

from .dft import BlockDiagonal
from .groups import FiniteGroup, GroupError, direct_product, group_from_generators, group_from_named_family


class SpecError(ValueError):
    """Malformed user input (group spec, coefficient file, plan file)."""


FAMILIES = ("cyclic", "dihedral", "symmetric", "alternating", "quaternion8", "heisenberg_p", "sl2",
            "direct_product")


def group_from_spec(spec: Any) -> FiniteGroup:
    if isinstance(spec, FiniteGroup):
        return spec
    if isinstance(spec, dict):
        return _group_from_obj(spec)
    if not isinstance(spec, str) or not spec.strip():
        raise SpecError(f"cannot read a group spec from {spec!r}")
    text = spec.strip()
    if text.startswith("{"):
        try:
            return _group_from_obj(json.loads(text))
        except json.JSONDecodeError as exc:
            raise SpecError(f"malformed JSON group spec: {exc}") from exc
    if os.path.exists(text):
        try:
            return _group_from_obj(json.loads(Path(text).read_text()))
        except json.JSONDecodeError as exc:
            raise SpecError(f"malformed JSON in {text}: {exc}") from exc
    return _group_from_short(text)


def _group_from_short(text: str) -> FiniteGroup:
    parts = [p.strip() for p in text.split("*")]
    groups = []
    for part in parts:
        name, _, arg = part.partition(":")
        if name not in FAMILIES or name == "direct_product":
            raise SpecError(f"unknown group family {name!r} in {text!r}")
        try:
            n = int(arg) if arg else None
        except ValueError as exc:
            raise SpecError(f"bad parameter {arg!r} in {text!r}") from exc
        groups.append(_named(name, n))
    G = groups[0]
    for F in groups[1:]:
        G = direct_product(G, F)
    return G


def _named(name: str, n: int | None) -> FiniteGroup:
    if name != "quaternion8" and n is None:
        raise SpecError(f"family {name!r} needs a parameter")
    try:
        return group_from_named_family(name, n)
    except GroupError as exc:
        if type(exc) is GroupError:
            raise SpecError(str(exc)) from exc
        raise


def _group_from_obj(obj: Any) -> FiniteGroup:
    if not isinstance(obj, dict) or "type" not in obj:
        raise SpecError("group spec must be an object with a 'type' field")
    kind = obj["type"]
    if kind == "named":
        fam = obj.get("family")
        if fam == "direct_product":
            return _product(obj.get("factors"))
        if fam not in FAMILIES:
            raise SpecError(f"unknown group family {fam!r}")
        n = obj.get("n", obj.get("parameter"))
        if n is not None and not isinstance(n, int):
            raise SpecError("family parameter must be an integer")
        return _named(fam, n)
    if kind == "permutation":
        degree, gens = obj.get("degree"), obj.get("generators")
        if not isinstance(degree, int) or degree < 1 or not isinstance(gens, list):
            raise SpecError("permutation spec needs an integer 'degree' and a list of 'generators'")
        for g in gens:
            if not isinstance(g, list) or sorted(g) != list(range(degree)):
                raise SpecError(f"generator {g!r} is not a permutation of 0..{degree - 1}")
        return group_from_generators(degree, gens, label=obj.get("label", f"Perm({degree})"))
    if kind == "direct_product":
        return _product(obj.get("factors"))
    raise SpecError(f"unknown group spec type {kind!r}")


def _product(factors) -> FiniteGroup:
    if not isinstance(factors, list) or len(factors) < 2:
        raise SpecError("direct_product needs a list of at least two factor specs")
    gs = [group_from_spec(f) for f in factors]
    G = gs[0]
    for F in gs[1:]:
        G = direct_product(G, F)
    return G


def read_alpha(source: str, order: int) -> np.ndarray:
    """Coefficient vector of length ``order`` from a file or generator string."""
    kind, _, arg = source.partition(":")
    if kind == "random" and arg:
        try:
            seed = int(arg)
        except ValueError as exc:
            raise SpecError(f"bad seed in {source!r}") from exc
        rng = np.random.default_rng(seed)
        return rng.standard_normal(order) + 1j * rng.standard_normal(order)
    if kind == "delta" and arg:
        try:
            g = int(arg)
        except ValueError as exc:
            raise SpecError(f"bad index in {source!r}") from exc
        if not 0 <= g < order:
            raise SpecError(f"delta index {g} outside 0..{order - 1}")
        out = np.zeros(order, dtype=np.complex128)
        out[g] = 1
        return out
    path = Path(source)
    if not path.exists():
        raise SpecError(f"no such coefficient file {source!r}")
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("["):
        return _alpha_from_json(text, order)
    return _alpha_from_csv(text, order)


def _alpha_from_json(text: str, order: int) -> np.ndarray:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON coefficients: {exc}") from exc
    if not isinstance(data, list):
        raise SpecError("JSON coefficients must be a list")
    out = np.zeros(len(data), dtype=np.complex128)
    for i, v in enumerate(data):
        if isinstance(v, (int, float)):
            out[i] = v
        elif isinstance(v, list) and len(v) == 2:
            out[i] = complex(v[0], v[1])
        else:
            raise SpecError(f"entry {i} is neither a number nor a [re, im] pair")
    if out.size != order:
        raise SpecError(f"got {out.size} coefficients, group order is {order}")
    return out


def _alpha_from_csv(text: str, order: int) -> np.ndarray:
    out = np.zeros(order, dtype=np.complex128)
    for row in csv.reader(_io.StringIO(text)):
        if not row or not row[0].strip() or row[0].strip().lower() == "index":
            continue
        try:
            i = int(row[0])
            re = float(row[1]) if len(row) > 1 else 0.0
            im = float(row[2]) if len(row) > 2 else 0.0
        except ValueError as exc:
            raise SpecError(f"bad CSV row {row!r}") from exc
        if not 0 <= i < order:
            raise SpecError(f"index {i} outside 0..{order - 1}")
        out[i] = complex(re, im)
    return out


def write_alpha_csv(alpha: np.ndarray, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, v in enumerate(np.asarray(alpha, dtype=np.complex128)):
            w.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def write_blocks(M: BlockDiagonal, path: str | os.PathLike, group: FiniteGroup | None = None) -> None:
    obj = M.to_json()
    if group is not None:
        obj = {"group": group.label, "order": group.order, **obj}
    Path(path).write_text(json.dumps(obj))


def read_blocks(path: str | os.PathLike) -> BlockDiagonal:
    try:
        return BlockDiagonal.from_json(json.loads(Path(path).read_text()))
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise SpecError(f"cannot read block-diagonal JSON from {path}: {exc}") from exc
