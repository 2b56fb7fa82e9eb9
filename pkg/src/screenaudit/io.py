"""Plain-text persistence: dataset CSV, schema and world JSON, stable JSON reports."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import SchemaError
from .model import Dataset, DiscreteWorld, FeatureSchema

WORLD_FORMAT = "screenaudit.world"
WORLD_VERSION = 1
MISSING = "NA"


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy values, tuples and dataclass-like objects; NaN/inf become null."""
    if hasattr(obj, "to_dict") and not isinstance(obj, type):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)})
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(obj: Any) -> str:
    """JSON text with insertion-ordered keys and a trailing newline, byte-stable across runs."""
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False, ensure_ascii=False) + "\n"


def write_json(path, obj: Any) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _fmt(x: float, integral: bool) -> str:
    if math.isnan(x):
        return MISSING
    if integral and float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def dataset_rows(data: Dataset) -> list[list[str]]:
    s = data.schema
    outs = [o for o in s.outcomes if o in data.outcomes] + [o for o in data.outcomes if o not in s.outcomes]
    rows = [["id", *s.names, s.group, *outs, "weight"]]
    cat = [ft.categorical for ft in s.features]
    for i in range(data.n):
        rows.append([
            data.ids[i],
            *(_fmt(v, c) for v, c in zip(data.X[i], cat)),
            str(int(data.group[i])),
            *(_fmt(data.outcomes[o][i], False) for o in outs),
            _fmt(data.weights[i], True),
        ])
    return rows


def dataset_to_csv(data: Dataset) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(dataset_rows(data))
    return buf.getvalue()


def write_dataset(path, data: Dataset) -> None:
    Path(path).write_text(dataset_to_csv(data), encoding="utf-8")


def read_dataset(path, schema: FeatureSchema) -> Dataset:
    """Read a dataset CSV against ``schema``. ``NA`` or empty outcome cells are censored."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{path}: empty file") from None
    missing = [c for c in (*schema.names, schema.group) if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    col = {name: i for i, name in enumerate(header)}
    body = list(reader)
    for ln, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise SchemaError(f"{path}: row {ln} has {len(row)} fields, header has {len(header)}")

    def num(cell: str, where: str) -> float:
        if cell in ("", MISSING):
            return math.nan
        try:
            return float(cell)
        except ValueError:
            raise SchemaError(f"{path}: {where}: {cell!r} is not a number") from None

    n = len(body)
    X = np.array([[num(r[col[f]], f) for f in schema.names] for r in body], dtype=np.float64).reshape(n, schema.arity)
    group = np.array([num(r[col[schema.group]], schema.group) for r in body])
    if not np.all(np.isin(group, (0.0, 1.0))):
        raise SchemaError(f"{path}: group labels must be 0 or 1")
    outcome_names = [c for c in header if c not in (*schema.names, schema.group, "id", "weight")]
    outcomes = {o: np.array([num(r[col[o]], o) for r in body]) for o in outcome_names}
    weights = np.array([num(r[col["weight"]], "weight") for r in body]) if "weight" in col else None
    ids = tuple(r[col["id"]] for r in body) if "id" in col else None
    full = FeatureSchema(schema.features, schema.group, tuple(outcome_names))
    full.check_rows(X)
    return Dataset(full, X, group.astype(np.int64), outcomes, weights, ids, provenance=str(path))


def write_schema(path, schema: FeatureSchema) -> None:
    write_json(path, schema.to_dict())


def read_schema(path) -> FeatureSchema:
    return FeatureSchema.from_dict(read_json(path))


def world_to_dict(world: DiscreteWorld) -> dict:
    return {
        "format": WORLD_FORMAT,
        "version": WORLD_VERSION,
        "schema": world.schema.to_dict(),
        "p": world.p.tolist(),
        "q": world.q.tolist(),
        "f": world.f.tolist(),
        "g": world.g.tolist(),
    }


def world_from_dict(d: dict) -> DiscreteWorld:
    """Inverse of :func:`world_to_dict`. Tables may also be ``{cell_index: value}`` maps (absent = 0)."""
    if d.get("format") != WORLD_FORMAT:
        raise SchemaError(f"not a world file (format={d.get('format')!r})")
    if d.get("version") != WORLD_VERSION:
        raise SchemaError(f"unsupported world version {d.get('version')!r}")
    schema = FeatureSchema.from_dict(d["schema"])
    m = schema.n_cells

    def table(key):
        v = d[key]
        if isinstance(v, dict):
            arr = np.zeros(m)
            for k, x in v.items():
                arr[int(k)] = float(x)
            return arr
        return np.asarray(v, dtype=np.float64)

    return DiscreteWorld(schema, table("p"), table("q"), table("f"), table("g"))


def write_world(path, world: DiscreteWorld) -> None:
    write_json(path, world_to_dict(world))


def read_world(path) -> DiscreteWorld:
    return world_from_dict(read_json(path))


def write_csv(path, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")
