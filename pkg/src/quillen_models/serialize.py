"""JSON and CSV formats.  Rationals are written as strings "p/q"."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .freelie import FreeDGL, LieMorphism
from .models import Cell, CellComplexDescription, ModelError, Stage
from .persist import (Barcode, InterleavingCertificate, ModuleMorphism, GradedModule, Grid,
                      PersistenceError, format_value, parse_value)

FORMAT_VERSION = 1


class SchemaError(ValueError):
    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read file: {exc.strerror}", str(path)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                          str(path)) from exc


def _rational(value: Any, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise SchemaError("expected a rational as a string \"p/q\" or an integer", where)
    try:
        x = parse_value(value)
    except PersistenceError as exc:
        raise SchemaError(str(exc), where) from exc
    if not isinstance(x, Fraction):
        raise SchemaError("expected a finite rational", where)
    return x


def _field(obj: Any, key: str, kind, where: str):
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", where)
    if key not in obj:
        raise SchemaError(f"missing field {key!r}", where)
    value = obj[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise SchemaError("expected an integer", f"{where}.{key}")
    if kind in (str, list) and not isinstance(value, kind):
        raise SchemaError(f"expected a {kind.__name__}", f"{where}.{key}")
    return value


def _check_version(data: Any, where: str = "$") -> None:
    v = _field(data, "format_version", int, where)
    if v != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {v}", f"{where}.format_version")


# ---------------------------------------------------------------------------
# cell complexes


def complex_to_json(c: CellComplexDescription) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "name": c.name,
        "stages": [{"value": format_value(st.value),
                    "cells": [{"name": x.name, "dimension": x.dimension, "attach": x.attach}
                              for x in st.cells]}
                   for st in c.stages],
    }


def complex_from_json(data: Any, where: str = "$") -> CellComplexDescription:
    _check_version(data, where)
    name = data.get("name", "")
    if not isinstance(name, str):
        raise SchemaError("expected a string", f"{where}.name")
    stages = _field(data, "stages", list, where)
    out = []
    for i, st in enumerate(stages):
        sw = f"{where}.stages[{i}]"
        value = _rational(_field(st, "value", None, sw), f"{sw}.value")
        cells = []
        for j, cell in enumerate(st.get("cells", []) if isinstance(st, dict) else []):
            cw = f"{sw}.cells[{j}]"
            cname = _field(cell, "name", str, cw)
            dim = _field(cell, "dimension", int, cw)
            attach = cell.get("attach", "0")
            if not isinstance(attach, str):
                raise SchemaError("expected Lie element text", f"{cw}.attach")
            cells.append(Cell(cname, dim, attach))
        out.append(Stage(value, tuple(cells)))
    try:
        return CellComplexDescription(tuple(out), name)
    except ModelError as exc:
        raise SchemaError(str(exc), f"{where}.stages") from exc


def load_complex(path: str | Path) -> CellComplexDescription:
    return complex_from_json(read_json(path), "$")


# ---------------------------------------------------------------------------
# models


def _dgl_json(dgl: FreeDGL) -> dict:
    return {"generators": [{"name": g.name, "degree": g.degree,
                            "d": dgl.algebra.format(dgl.differential_of(g.name))}
                           for g in dgl.generators if g.degree <= dgl.truncation],
            "minimal": dgl.is_minimal()}


def _morphism_json(phi: LieMorphism) -> dict:
    return {g.name: phi.target.algebra.format(phi.image(g.name))
            for g in phi.source.generators if g.degree <= phi.source.truncation}


def model_to_json(model) -> dict:
    stages = []
    for i, (value, dgl) in enumerate(zip(model.free.values, model.stages)):
        entry = {"value": format_value(value), "free": _dgl_json(dgl)}
        if model.minimal is not None:
            mm = model.minimal[i]
            entry["minimal_model"] = {
                **_dgl_json(mm.dgl),
                "cancelled": [list(p) for p in mm.cancelled],
                "projection": _morphism_json(mm.projection),
                "section": _morphism_json(mm.section),
            }
        stages.append(entry)
    return {
        "format_version": FORMAT_VERSION,
        "kind": "persistence_quillen_model",
        "name": model.complex.name,
        "truncation": model.truncation,
        "degree_cutoff": model.cutoff,
        "complex": complex_to_json(model.complex),
        "stages": stages,
        "representatives": [_morphism_json(r) for r in model.representatives],
    }


def model_from_json(data: Any):
    """Rebuild a model from its complex and check the stored stage data."""
    from .pipeline import build_persistence_model

    _check_version(data)
    if data.get("kind") != "persistence_quillen_model":
        raise SchemaError("not a model file", "$.kind")
    N = _field(data, "truncation", int, "$")
    complex = complex_from_json(_field(data, "complex", None, "$"), "$.complex")
    minimal = any("minimal_model" in st for st in data.get("stages", []) if isinstance(st, dict))
    model = build_persistence_model(complex, N, minimal=minimal)
    if model_to_json(model) != data:
        raise SchemaError("stored stages do not match the model rebuilt from the complex",
                          "$.stages")
    return model


# ---------------------------------------------------------------------------
# barcodes and certificates


def barcode_to_json(bc: Barcode, mode: str = "") -> dict:
    return {"format_version": FORMAT_VERSION, "kind": "barcode", "mode": mode,
            "bars": bc.to_json()}


def load_barcode(path: str | Path) -> Barcode:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read file: {exc.strerror}", str(path)) from exc
    try:
        if text.lstrip().startswith("{"):
            data = read_json(path)
            _check_version(data)
            return Barcode.from_json(_field(data, "bars", list, "$"))
        return Barcode.from_csv(text)
    except PersistenceError as exc:
        raise SchemaError(str(exc), str(path)) from exc


def _matrix_json(m) -> list[list[str]]:
    return [[format_value(x) for x in row] for row in m]


def module_to_json(m: GradedModule) -> dict:
    return {"grid": [format_value(v) for v in m.grid.values],
            "dims": [{str(k): v for k, v in sorted(d.items())} for d in m.dims],
            "maps": [{str(k): _matrix_json(v) for k, v in sorted(mm.items())} for mm in m.maps]}


def module_from_json(data: Any, where: str = "$") -> GradedModule:
    grid = [_rational(v, f"{where}.grid") for v in _field(data, "grid", list, where)]
    dims = [{int(k): int(v) for k, v in d.items()} for d in _field(data, "dims", list, where)]
    maps = [{int(k): [[_rational(x, f"{where}.maps") for x in row] for row in v]
             for k, v in mm.items()} for mm in _field(data, "maps", list, where)]
    try:
        return GradedModule(Grid(tuple(grid)), tuple(dims), tuple(maps))
    except PersistenceError as exc:
        raise SchemaError(str(exc), where) from exc


def _morph_samples_json(m: ModuleMorphism) -> dict:
    return {format_value(t): {str(k): _matrix_json(v) for k, v in sorted(s.items())}
            for t, s in sorted(m.samples.items())}


def certificate_to_json(cert: InterleavingCertificate) -> dict:
    return {"format_version": FORMAT_VERSION, "kind": "interleaving_certificate",
            "delta": format_value(cert.delta),
            "source": module_to_json(cert.source), "target": module_to_json(cert.target),
            "f": _morph_samples_json(cert.f), "g": _morph_samples_json(cert.g)}


def certificate_from_json(data: Any) -> InterleavingCertificate:
    _check_version(data)
    delta = _rational(_field(data, "delta", None, "$"), "$.delta")
    X = module_from_json(_field(data, "source", None, "$"), "$.source")
    Y = module_from_json(_field(data, "target", None, "$"), "$.target")

    def samples(key):
        raw = _field(data, key, None, "$")
        return {_rational(t, f"$.{key}"): {int(k): [[_rational(x, f"$.{key}") for x in row]
                                                   for row in v] for k, v in s.items()}
                for t, s in raw.items()}

    try:
        f = ModuleMorphism(X, Y.shift(delta), samples("f"))
        g = ModuleMorphism(Y, X.shift(delta), samples("g"))
    except PersistenceError as exc:
        raise SchemaError(str(exc), "$") from exc
    return InterleavingCertificate(delta, X, Y, f, g)
