"""Scenario files: YAML documents validated against a JSON schema.

Series-valued fields accept a number (constant), an inline list (one value
per step), ``{piecewise: [[start_step, value], ...]}`` or
``{file: path}`` with one value per line (vector/matrix fields: one
comma-separated row per step, matrices flattened row-major).  Paths are
relative to the scenario file.  Series must cover steps 0..horizon.
"""
from __future__ import annotations

import re
from dataclasses import replace
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from .devices import BatteryDevice, HvacDevice, PvDevice
from .grid import GridModel
from .sim import Scenario


class ScenarioError(ValueError):
    kind = "ScenarioError"


class ParseError(ScenarioError):
    kind = "ParseError"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class SchemaError(ScenarioError):
    kind = "SchemaError"

    def __init__(self, path: str, reason: str):
        self.path, self.reason = path, reason
        super().__init__(f"{path}: {reason}")


class SeriesLengthError(ScenarioError):
    kind = "SeriesLengthError"

    def __init__(self, path: str, length: int, required: int):
        self.path, self.length, self.required = path, length, required
        super().__init__(f"{path}: series has {length} entries, horizon needs {required}")


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_unit = {"type": "number", "minimum": 0, "maximum": 1}
_file = {"type": "object", "properties": {"file": {"type": "string"}}, "required": ["file"], "additionalProperties": False}
_piecewise = {
    "type": "object",
    "properties": {
        "piecewise": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "prefixItems": [{"type": "integer", "minimum": 0}, _num], "minItems": 2, "maxItems": 2},
        }
    },
    "required": ["piecewise"],
    "additionalProperties": False,
}
_scalar_series = {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 1}, _file, _piecewise]}
_vector = {"oneOf": [{"type": "array", "items": _num, "minItems": 1}, _file]}
_matrix = {"oneOf": [{"type": "array", "minItems": 1, "items": {"type": "array", "items": _num, "minItems": 1}}, _file]}


def _obj(props: dict, required: list) -> dict:
    return {"type": "object", "properties": props, "required": required, "additionalProperties": False}


SCHEMA = _obj(
    {
        "run": _obj(
            {
                "horizon": {"type": "integer", "minimum": 1},
                "alpha": _pos,
                "epsilon": _nonneg,
                "seed": {"type": "integer", "minimum": 0},
                "comparator_tol": _pos,
                "projection_tol": _pos,
                "projection_max_iter": {"type": "integer", "minimum": 1},
                "constants": _obj({k: _nonneg for k in ("grad_bound", "lipschitz", "diameter", "norm_bound")}, []),
            },
            ["horizon", "alpha", "epsilon"],
        ),
        "grid": _obj(
            {
                "v_min": _num,
                "v_max": _num,
                "voltage_matrix": _matrix,
                "voltage_offset": _vector,
                "substation_weights": _vector,
                "substation_offset": _scalar_series,
                "tracking": _scalar_series,
                "device_weights": {"type": "array", "items": _nonneg},
            },
            ["voltage_matrix", "voltage_offset", "substation_weights", "substation_offset", "tracking"],
        ),
        "devices": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    _obj(
                        {"kind": {"const": "pv"}, "s_rated": _pos, "available_power": _scalar_series,
                         "c1": _nonneg, "c2": _nonneg},
                        ["kind", "s_rated", "available_power"],
                    ),
                    _obj(
                        {"kind": {"const": "battery"}, "s_rated": _pos, "soc": _unit, "soc_target": _unit,
                         "capacity": _pos, "step_duration": _pos, "c1": _nonneg, "c2": _nonneg,
                         "p_min": _num, "p_max": _num, "taper": _unit},
                        ["kind", "s_rated", "soc"],
                    ),
                    _obj(
                        {"kind": {"const": "hvac"}, "p_max": _pos, "cost_on": _scalar_series,
                         "cost_off": _scalar_series, "min_on_steps": {"type": "integer", "minimum": 0},
                         "min_off_steps": {"type": "integer", "minimum": 0}, "initially_on": {"type": "boolean"}},
                        ["kind", "p_max", "cost_on", "cost_off"],
                    ),
                ]
            },
        },
        "output": _obj(
            {
                "directory": {"type": "string"},
                "tables": {"type": "array", "items": {"enum": ["trajectory", "summary", "meta"]}, "uniqueItems": True},
            },
            [],
        ),
    },
    ["run", "grid", "devices"],
)


def _path_of(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    return ".".join(parts) if parts else "<root>"


def _best_error(errors) -> jsonschema.ValidationError:
    # for oneOf failures, report the branch that got furthest
    err = jsonschema.exceptions.best_match(errors)
    while err.context:
        err = jsonschema.exceptions.best_match(err.context)
    return err


def validate_document(doc) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = list(validator.iter_errors(doc))
    if errors:
        # device entries: point at the branch matching the declared kind
        err = errors[0]
        if len(err.absolute_path) >= 2 and err.absolute_path[0] == "devices" and err.validator == "oneOf":
            item = err.instance
            kind = item.get("kind") if isinstance(item, dict) else None
            branches = {"pv": 0, "battery": 1, "hvac": 2}
            if kind in branches:
                sub = jsonschema.Draft202012Validator(SCHEMA["properties"]["devices"]["items"]["oneOf"][branches[kind]])
                sub_errs = list(sub.iter_errors(item))
                if sub_errs:
                    e = _best_error(sub_errs)
                    path = ".".join(str(p) for p in list(err.absolute_path) + list(e.absolute_path))
                    raise SchemaError(path, e.message)
            else:
                raise SchemaError(_path_of(err) + ".kind", f"unknown device kind {kind!r}")
        e = _best_error(errors)
        raise SchemaError(_path_of(e), e.message)
    grid = doc["grid"]
    v_min, v_max = grid.get("v_min", 0.95), grid.get("v_max", 1.05)
    if not v_min < v_max:
        raise SchemaError("grid.v_min", f"v_min ({v_min}) must be below v_max ({v_max})")


def _read_rows(path: Path, where: str) -> np.ndarray:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(where, f"cannot read series file {str(path)!r}: {exc.strerror}") from None
    rows = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            raise ParseError(f"non-numeric entry in {path.name}", line=i, column=1) from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise SchemaError(where, f"series file {path.name} must hold equal-length rows")
    return np.array(rows)


class _Loader:
    def __init__(self, base: Path, horizon: int):
        self.base, self.need = base, horizon + 1

    def _check_len(self, arr: np.ndarray, where: str) -> np.ndarray:
        if len(arr) < self.need:
            raise SeriesLengthError(where, len(arr), self.need)
        return arr[: self.need]

    def scalar(self, spec, where: str) -> np.ndarray | float:
        if isinstance(spec, (int, float)):
            return float(spec)
        if isinstance(spec, list):
            return self._check_len(np.asarray(spec, dtype=float), where)
        if "file" in spec:
            rows = _read_rows(self.base / spec["file"], where)
            if rows.shape[1] != 1:
                raise SchemaError(where, "scalar series file must hold one value per line")
            return self._check_len(rows[:, 0], where)
        pieces = sorted(spec["piecewise"])
        if pieces[0][0] != 0:
            raise SchemaError(where, "piecewise series must start at step 0")
        out = np.empty(self.need)
        for k, (start, value) in enumerate(pieces):
            stop = pieces[k + 1][0] if k + 1 < len(pieces) else self.need
            out[start:stop] = value
        return out

    def vector(self, spec, where: str, size: int) -> np.ndarray:
        if isinstance(spec, list):
            arr = np.asarray(spec, dtype=float)
            if arr.shape != (size,):
                raise SchemaError(where, f"expected {size} entries, got {arr.size}")
            return arr
        rows = self._check_len(_read_rows(self.base / spec["file"], where), where)
        if rows.shape[1] != size:
            raise SchemaError(where, f"expected {size} entries per row, got {rows.shape[1]}")
        return rows

    def matrix(self, spec, where: str, shape: tuple[int, int] | None) -> np.ndarray:
        if isinstance(spec, list):
            if len({len(r) for r in spec}) != 1:
                raise SchemaError(where, "matrix rows differ in length")
            arr = np.asarray(spec, dtype=float)
            if shape is not None and arr.shape != shape:
                raise SchemaError(where, f"expected shape {shape}, got {arr.shape}")
            return arr
        if shape is None:
            raise SchemaError(where, "matrix from file needs voltage_offset to fix the row count")
        rows = self._check_len(_read_rows(self.base / spec["file"], where), where)
        if rows.shape[1] != shape[0] * shape[1]:
            raise SchemaError(where, f"expected {shape[0] * shape[1]} entries per row, got {rows.shape[1]}")
        return rows.reshape(len(rows), *shape)


class _Loader11(yaml.SafeLoader):
    pass


# YAML 1.1 needs a dot in floats; also accept 1e-6 style
_Loader11.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"),
    list("-+0123456789"),
)


def parse_document(text: str):
    try:
        return yaml.load(text, Loader=_Loader11)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ParseError(str(exc.problem or exc.context or "invalid YAML"), line, col) from None
    except yaml.YAMLError as exc:
        raise ParseError(str(exc).splitlines()[0] if str(exc) else "invalid YAML") from None
    except RecursionError:
        raise ParseError("document nests too deeply") from None


def scenario_from_document(doc, base: Path = Path(".")) -> Scenario:
    validate_document(doc)
    try:
        return _build(doc, base)
    except ScenarioError:
        raise
    except (ValueError, TypeError, IndexError) as exc:
        raise SchemaError("<root>", str(exc)) from None


def _build(doc, base: Path) -> Scenario:
    run, grid, devs = doc["run"], doc["grid"], doc["devices"]
    T = int(run["horizon"])
    ld = _Loader(base, T)
    J = len(devs)

    devices = []
    for i, d in enumerate(devs):
        where = f"devices.{i}"
        kind = d["kind"]
        if kind == "pv":
            devices.append(PvDevice(
                d["s_rated"], ld.scalar(d["available_power"], where + ".available_power"),
                d.get("c1", 1.0), d.get("c2", 1.0),
            ))
        elif kind == "battery":
            try:
                devices.append(BatteryDevice(
                    d["s_rated"], d["soc"], d.get("soc_target", 0.5), d.get("capacity", 1.0),
                    d.get("step_duration", 1.0), d.get("c1", 1.0), d.get("c2", 1.0),
                    d.get("p_min"), d.get("p_max"), d.get("taper", 0.05),
                ))
            except ValueError as exc:
                raise SchemaError(where, str(exc)) from None
            lo, hi = devices[-1].limits()
            if lo > hi:
                raise SchemaError(where + ".p_min", f"p_min ({lo}) exceeds p_max ({hi})")
        else:
            on = bool(d.get("initially_on", False))
            devices.append(HvacDevice(
                d["p_max"],
                ld.scalar(d["cost_on"], where + ".cost_on"),
                ld.scalar(d["cost_off"], where + ".cost_off"),
                d.get("min_on_steps", 0), d.get("min_off_steps", 0), last_on=on,
            ))

    off_spec = grid["voltage_offset"]
    if isinstance(off_spec, list):
        offset = np.asarray(off_spec, dtype=float)
    else:
        offset = ld._check_len(_read_rows(base / off_spec["file"], "grid.voltage_offset"), "grid.voltage_offset")
    n_nodes = offset.shape[-1]
    A = ld.matrix(grid["voltage_matrix"], "grid.voltage_matrix", (n_nodes, 2 * J))
    weights = ld.vector(grid["substation_weights"], "grid.substation_weights", 2 * J)
    dw = grid.get("device_weights", [1.0 / J] * J)
    if len(dw) != J:
        raise SchemaError("grid.device_weights", f"expected {J} weights, got {len(dw)}")
    model = GridModel(
        voltage_matrix=A,
        voltage_offset=offset,
        substation_weights=weights,
        substation_offset=ld.scalar(grid["substation_offset"], "grid.substation_offset"),
        tracking_signal=ld.scalar(grid["tracking"], "grid.tracking"),
        device_weights=np.asarray(dw, dtype=float),
        v_min=float(grid.get("v_min", 0.95)),
        v_max=float(grid.get("v_max", 1.05)),
    )
    return Scenario(
        horizon=T,
        step_size=float(run["alpha"]),
        epsilon=float(run["epsilon"]),
        devices=tuple(devices),
        grid=model,
        seed=int(run.get("seed", 0)),
        comparator_tol=float(run.get("comparator_tol", 1e-6)),
        projection_tol=float(run.get("projection_tol", 1e-9)),
        projection_max_iter=int(run.get("projection_max_iter", 10_000)),
        constants_override=run.get("constants"),
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {str(path)!r}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8 (byte offset {exc.start})") from None
    doc = parse_document(text)
    return scenario_from_document(doc, path.parent)


def output_settings(path) -> dict:
    """The ``output`` section of a scenario file (already validated)."""
    doc = parse_document(Path(path).read_text(encoding="utf-8"))
    return dict(doc.get("output") or {})


def with_overrides(scn: Scenario, seed=None, alpha=None, epsilon=None) -> Scenario:
    changes = {}
    if seed is not None:
        changes["seed"] = seed
    if alpha is not None:
        changes["step_size"] = alpha
    if epsilon is not None:
        changes["epsilon"] = epsilon
    return replace(scn, **changes) if changes else scn
