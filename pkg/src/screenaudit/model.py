"""Domain types shared across the toolkit.

Conventions used everywhere:

* Group labels are integers, ``0`` for the advantaged group and ``1`` for the
  disadvantaged group. The group is a designated column of its own; it is not
  one of the ordinary features in ``FeatureSchema.features``.
* A disparity ``D(v)`` is the advantaged-group average of ``v`` minus the
  disadvantaged-group average, so positive values favour the advantaged group.
* Cells of a discrete feature space are enumerated row-major over feature
  indices (the last feature varies fastest), which fixes the order of every
  mass-weighted sum.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InsufficientDataError, ParameterError, SchemaError

ADVANTAGED = 0
DISADVANTAGED = 1
GROUP_NAMES = ("advantaged", "disadvantaged")
MAX_CELLS = 10**6
SCORE_TAGS = ("true_f", "proxy_g", "bayes_h", "trained_t", "custom")


def _digest(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, default=_jsonable).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not serialisable: {type(obj)!r}")


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str = "categorical"
    cardinality: int | None = None
    low: float = -math.inf
    high: float = math.inf

    def __post_init__(self):
        if self.kind not in ("categorical", "real"):
            raise SchemaError(f"feature {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "categorical":
            if self.cardinality is None or int(self.cardinality) < 1:
                raise SchemaError(f"feature {self.name!r}: categorical needs cardinality >= 1")
            object.__setattr__(self, "cardinality", int(self.cardinality))
        elif not self.low <= self.high:
            raise SchemaError(f"feature {self.name!r}: empty range [{self.low}, {self.high}]")

    @property
    def categorical(self) -> bool:
        return self.kind == "categorical"

    def to_dict(self) -> dict:
        if self.categorical:
            return {"name": self.name, "kind": self.kind, "cardinality": self.cardinality}
        return {
            "name": self.name,
            "kind": self.kind,
            "low": None if math.isinf(self.low) else self.low,
            "high": None if math.isinf(self.high) else self.high,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Feature":
        if d.get("kind", "categorical") == "categorical":
            return cls(d["name"], "categorical", d["cardinality"])
        low = -math.inf if d.get("low") is None else float(d["low"])
        high = math.inf if d.get("high") is None else float(d["high"])
        return cls(d["name"], "real", None, low, high)


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered features, the designated binary group column, and outcome columns."""

    features: tuple[Feature, ...]
    group: str = "group"
    outcomes: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        names = [ft.name for ft in self.features] + [self.group] + list(self.outcomes)
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise SchemaError(f"duplicate column names: {dupes}")
        reserved = {"id", "weight"} & set(names)
        if reserved:
            raise SchemaError(f"reserved column names used: {sorted(reserved)}")

    @property
    def arity(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(ft.name for ft in self.features)

    @property
    def all_categorical(self) -> bool:
        return all(ft.categorical for ft in self.features)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        if not self.all_categorical:
            raise SchemaError("cardinalities are only defined for all-categorical schemas")
        return tuple(ft.cardinality for ft in self.features)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cardinalities, dtype=object))

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"unknown feature {name!r}") from None

    def row_violations(self, X) -> list[str]:
        """Human-readable violations for a matrix of feature rows."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.arity:
            return [f"rows have arity {X.shape[-1] if X.ndim else 0}, schema arity is {self.arity}"]
        out = []
        for j, ft in enumerate(self.features):
            col = X[:, j]
            bad = ~np.isfinite(col)
            if bad.any():
                out.append(f"{ft.name}: non-finite value at row {int(np.argmax(bad))}")
                continue
            if ft.categorical:
                bad = (col < 0) | (col >= ft.cardinality) | (col != np.floor(col))
                if bad.any():
                    i = int(np.argmax(bad))
                    out.append(f"{ft.name}: value {col[i]} at row {i} outside 0..{ft.cardinality - 1}")
            else:
                bad = (col < ft.low) | (col > ft.high)
                if bad.any():
                    i = int(np.argmax(bad))
                    out.append(f"{ft.name}: value {col[i]} at row {i} outside [{ft.low}, {ft.high}]")
        return out

    def check_rows(self, X) -> None:
        problems = self.row_violations(X)
        if problems:
            raise SchemaError("; ".join(problems))

    def to_dict(self) -> dict:
        return {
            "features": [ft.to_dict() for ft in self.features],
            "group": self.group,
            "outcomes": list(self.outcomes),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "FeatureSchema":
        return cls(
            tuple(Feature.from_dict(x) for x in d["features"]),
            d.get("group", "group"),
            tuple(d.get("outcomes", ())),
        )

    def digest(self) -> str:
        return _digest(self.to_dict())


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]
    schema: FeatureSchema = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        self.schema.check_rows(np.array([self.values]))

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)


@dataclass(frozen=True)
class ScoreFunction:
    """Deterministic map from feature rows (and group labels) to real scores.

    ``fn`` receives an ``(n, arity)`` float array and an ``(n,)`` int group
    array. Functions that never read the group should say so with
    ``uses_group=False``; oracles then evaluate them once per cell.
    """

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    tag: str = "custom"
    uses_group: bool = False
    name: str = ""

    def __post_init__(self):
        if self.tag not in SCORE_TAGS:
            raise ParameterError(f"unknown score tag {self.tag!r}")

    def __call__(self, X, group=None) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if group is None:
            group = np.zeros(X.shape[0], dtype=np.int64)
        group = np.asarray(group, dtype=np.int64).reshape(-1)
        out = np.asarray(self.fn(X, group), dtype=np.float64).reshape(-1)
        if out.shape[0] != X.shape[0]:
            raise ParameterError(f"score {self.name or self.tag!r} returned {out.shape[0]} values for {X.shape[0]} rows")
        return out

    @classmethod
    def from_table(cls, table, schema: FeatureSchema, tag: str = "custom", name: str = "") -> "ScoreFunction":
        """Score given by a table over canonical cells of an all-categorical schema."""
        table = _frozen_array(table)
        cards = schema.cardinalities
        if table.shape != (schema.n_cells,):
            raise ParameterError(f"table has shape {table.shape}, expected ({schema.n_cells},)")

        def fn(X, group):
            return table[cell_index(X, cards)]

        return cls(fn, tag=tag, uses_group=False, name=name)

    @classmethod
    def from_reduced_table(cls, table, r: "Representation", schema: FeatureSchema, tag: str = "custom",
                           name: str = "") -> "ScoreFunction":
        """Score u(r(x)) given by a table over the canonical reduced space of ``r``."""
        shape = r.reduced_shape(schema)
        table = _frozen_array(np.asarray(table, dtype=np.float64).reshape(-1))
        if table.shape != (int(np.prod(shape, dtype=np.int64)),):
            raise ParameterError(f"reduced table has {table.shape[0]} entries, reduced space has shape {shape}")

        def fn(X, group):
            return table[r.reduced_index(X, group, schema)]

        return cls(fn, tag=tag, uses_group=r.keep_group, name=name)

    @classmethod
    def constant(cls, c: float, tag: str = "custom") -> "ScoreFunction":
        return cls(lambda X, group: np.full(X.shape[0], float(c)), tag=tag, name=f"const({c})")

    def affine(self, a: float, b: float = 0.0) -> "ScoreFunction":
        return ScoreFunction(lambda X, g: a * self(X, g) + b, tag="custom", uses_group=self.uses_group)


def cell_index(X, cards: Sequence[int]) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X))
    return np.ravel_multi_index(tuple(X.T.astype(np.int64)), tuple(cards))


def enumerate_cells(cards: Sequence[int]) -> np.ndarray:
    """All cells in canonical (row-major) order as an ``(m, d)`` int array."""
    m = int(np.prod(cards, dtype=np.int64)) if len(cards) else 1
    if not cards:
        return np.zeros((1, 0), dtype=np.int64)
    return np.stack(np.unravel_index(np.arange(m), tuple(cards)), axis=1).astype(np.int64)


@dataclass(frozen=True)
class Representation:
    """Reduced representation r(x): retained features, optional coarsening, group access.

    ``coarsen`` maps a feature index to either a bucket table (categorical:
    ``table[value] = bucket``, buckets dense from 0) or ascending cut points
    (real: ``np.digitize`` semantics). Inside the full feature space the image
    of a row keeps each retained coordinate at its bucket's smallest member and
    sets dropped coordinates to a fixed filler, so ``apply`` is idempotent.
    """

    retained: tuple[int, ...]
    coarsen: tuple[tuple[int, tuple[float, ...]], ...] = ()
    keep_group: bool = False

    def __post_init__(self):
        retained = tuple(sorted(set(int(i) for i in self.retained)))
        object.__setattr__(self, "retained", retained)
        raw = dict(self.coarsen) if not isinstance(self.coarsen, Mapping) else self.coarsen
        co = tuple(sorted((int(k), tuple(v)) for k, v in raw.items()))
        for k, _ in co:
            if k not in retained:
                raise ParameterError(f"coarsening given for dropped feature {k}")
        object.__setattr__(self, "coarsen", co)

    @classmethod
    def identity(cls, schema: FeatureSchema) -> "Representation":
        return cls(tuple(range(schema.arity)), (), True)

    @classmethod
    def of(cls, schema: FeatureSchema, names: Sequence[str] | None = None, *, keep_group: bool = False,
           coarsen: Mapping[str, Sequence[float]] | None = None) -> "Representation":
        """Build from feature names; ``names=None`` retains every ordinary feature."""
        idx = range(schema.arity) if names is None else [schema.index(n) for n in names]
        co = {schema.index(k): tuple(v) for k, v in (coarsen or {}).items()}
        return cls(tuple(idx), co, keep_group)

    def without_group(self) -> "Representation":
        return Representation(self.retained, self.coarsen, False)

    def with_group(self) -> "Representation":
        return Representation(self.retained, self.coarsen, True)

    def _coarsening(self, j: int):
        return dict(self.coarsen).get(j)

    def validate(self, schema: FeatureSchema) -> None:
        for j in self.retained:
            if not 0 <= j < schema.arity:
                raise SchemaError(f"retained index {j} outside schema arity {schema.arity}")
            co = self._coarsening(j)
            if co is None:
                continue
            ft = schema.features[j]
            if ft.categorical:
                if len(co) != ft.cardinality:
                    raise ParameterError(f"{ft.name}: bucket table length {len(co)} != cardinality {ft.cardinality}")
                b = sorted(set(int(v) for v in co))
                if b != list(range(len(b))):
                    raise ParameterError(f"{ft.name}: buckets must be dense 0..k-1, got {b}")
            elif list(co) != sorted(co):
                raise ParameterError(f"{ft.name}: cut points must be ascending")

    def n_buckets(self, schema: FeatureSchema, j: int) -> int:
        ft = schema.features[j]
        co = self._coarsening(j)
        if ft.categorical:
            return ft.cardinality if co is None else int(max(co)) + 1
        if co is None:
            raise SchemaError(f"real feature {ft.name!r} has no finite bucket count")
        return len(co) + 1

    def buckets(self, X, schema: FeatureSchema) -> np.ndarray:
        """Bucket ids (categorical/cut real) or raw values (uncut real) per retained feature."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        cols = []
        for j in self.retained:
            col = X[:, j]
            co = self._coarsening(j)
            if co is None:
                cols.append(col)
            elif schema.features[j].categorical:
                cols.append(np.asarray(co, dtype=np.float64)[col.astype(np.int64)])
            else:
                cols.append(np.digitize(col, np.asarray(co, dtype=np.float64)).astype(np.float64))
        if not cols:
            return np.zeros((X.shape[0], 0))
        return np.stack(cols, axis=1)

    def apply(self, X, schema: FeatureSchema) -> np.ndarray:
        """Image of each row in the full feature space (a fixed point of ``apply``)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty_like(X)
        for j, ft in enumerate(schema.features):
            out[:, j] = 0.0 if ft.categorical else min(max(0.0, ft.low), ft.high)
        for k, j in enumerate(self.retained):
            co = self._coarsening(j)
            col = X[:, j]
            if co is None:
                out[:, j] = col
                continue
            ft = schema.features[j]
            if ft.categorical:
                table = np.asarray(co, dtype=np.int64)
                reps = np.array([np.flatnonzero(table == b)[0] for b in range(int(table.max()) + 1)], dtype=np.float64)
                out[:, j] = reps[table[col.astype(np.int64)]]
            else:
                cuts = np.asarray(co, dtype=np.float64)
                first = ft.low if math.isfinite(ft.low) else (cuts[0] - 1.0 if len(cuts) else 0.0)
                reps = np.concatenate([[first], cuts])
                out[:, j] = reps[np.digitize(col, cuts)]
        return out

    def reduced_shape(self, schema: FeatureSchema) -> tuple[int, ...]:
        shape = tuple(self.n_buckets(schema, j) for j in self.retained)
        return shape + ((2,) if self.keep_group else ())

    def reduced_index(self, X, group, schema: FeatureSchema) -> np.ndarray:
        """Index of each row's reduced value in the canonical reduced space."""
        B = self.buckets(X, schema).astype(np.int64)
        if self.keep_group:
            B = np.column_stack([B, np.asarray(group, dtype=np.int64).reshape(-1)])
        shape = self.reduced_shape(schema)
        if not shape:
            return np.zeros(B.shape[0], dtype=np.int64)
        return np.ravel_multi_index(tuple(B.T), shape)

    def to_dict(self) -> dict:
        return {
            "retained": list(self.retained),
            "coarsen": {str(k): list(v) for k, v in self.coarsen},
            "keep_group": self.keep_group,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Representation":
        return cls(tuple(d["retained"]), {int(k): tuple(v) for k, v in d.get("coarsen", {}).items()},
                   bool(d.get("keep_group", False)))


@dataclass(frozen=True, eq=False)
class DiscreteWorld:
    """Finite feature space with group distributions p, q and outcome tables f, g."""

    schema: FeatureSchema
    p: np.ndarray
    q: np.ndarray
    f: np.ndarray
    g: np.ndarray
    unsupported: tuple[int, ...] = ()
    max_cells: int = MAX_CELLS

    def __post_init__(self):
        if not self.schema.all_categorical:
            raise SchemaError("a DiscreteWorld needs an all-categorical schema")
        m = self.schema.n_cells
        if m > self.max_cells:
            raise ParameterError(f"world has {m} cells, cap is {self.max_cells}")
        for name in ("p", "q", "f", "g"):
            arr = _frozen_array(getattr(self, name))
            if arr.shape != (m,):
                raise ParameterError(f"{name} has shape {arr.shape}, expected ({m},)")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "unsupported", tuple(int(i) for i in self.unsupported))

    @property
    def n_cells(self) -> int:
        return self.schema.n_cells

    def cells(self) -> np.ndarray:
        return enumerate_cells(self.schema.cardinalities)

    def cell_index(self, X) -> np.ndarray:
        return cell_index(X, self.schema.cardinalities)

    @property
    def f_score(self) -> ScoreFunction:
        return ScoreFunction.from_table(self.f, self.schema, tag="true_f", name="f")

    @property
    def g_score(self) -> ScoreFunction:
        return ScoreFunction.from_table(self.g, self.schema, tag="proxy_g", name="g")

    def with_tables(self, **changes) -> "DiscreteWorld":
        kw = dict(schema=self.schema, p=self.p, q=self.q, f=self.f, g=self.g,
                  unsupported=self.unsupported, max_cells=self.max_cells)
        kw.update(changes)
        return DiscreteWorld(**kw)

    def digest(self) -> str:
        h = hashlib.sha256(self.schema.digest().encode())
        for arr in (self.p, self.q, self.f, self.g):
            h.update(arr.tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class Violation:
    name: str
    array: str
    detail: str
    value: float | list | None = None


def validate_world(world: DiscreteWorld, tol: float = 1e-12) -> list[Violation]:
    """Every broken DiscreteWorld invariant, one entry per (invariant, array)."""
    out: list[Violation] = []
    for name in ("p", "q"):
        arr = getattr(world, name)
        finite = np.isfinite(arr)
        if not finite.all():
            out.append(Violation("non-finite mass", name, f"{name} has non-finite mass", np.flatnonzero(~finite).tolist()))
            continue
        neg = np.flatnonzero(arr < 0)
        if neg.size:
            out.append(Violation("negative mass", name, f"{name} negative at cells {neg.tolist()}", arr[neg].tolist()))
        total = math.fsum(arr)
        if abs(total - 1.0) > tol:
            out.append(Violation(f"{name} not normalized", name,
                                 f"sum of {name} is {total!r}, deficit {1.0 - total!r}", 1.0 - total))
    for name in ("f", "g"):
        arr = getattr(world, name)
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            out.append(Violation("non-finite score", name, f"{name} non-finite at cells {bad.tolist()}", bad.tolist()))
    return out


def normalize_exact(masses) -> np.ndarray:
    """Scale non-negative masses to sum to 1.0 under exactly-rounded summation."""
    m = np.asarray(masses, dtype=np.float64)
    total = math.fsum(m)
    if total <= 0 or not math.isfinite(total):
        raise ParameterError("masses must have positive finite total")
    p = m / total
    for _ in range(8):
        resid = 1.0 - math.fsum(p)
        if resid == 0.0:
            break
        k = int(np.argmax(p))
        p[k] += resid
    return p


@dataclass(frozen=True, eq=False)
class Dataset:
    """Row-level samples. Censored outcomes are NaN; weights default to 1."""

    schema: FeatureSchema
    X: np.ndarray
    group: np.ndarray
    outcomes: Mapping[str, np.ndarray] = field(default_factory=dict)
    weights: np.ndarray | None = None
    ids: tuple[str, ...] | None = None
    provenance: str = ""

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        if X.size == 0:
            X = X.reshape(0, self.schema.arity)
        n = X.shape[0]
        if X.shape[1] != self.schema.arity:
            raise SchemaError(f"X has {X.shape[1]} columns, schema arity is {self.schema.arity}")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        group = _frozen_array(np.asarray(self.group).reshape(-1), np.int64)
        if group.shape != (n,):
            raise SchemaError(f"group has {group.shape[0]} entries for {n} rows")
        object.__setattr__(self, "group", group)
        outs = {}
        for name, col in dict(self.outcomes).items():
            col = _frozen_array(np.asarray(col, dtype=np.float64).reshape(-1))
            if col.shape != (n,):
                raise SchemaError(f"outcome {name!r} has {col.shape[0]} entries for {n} rows")
            outs[name] = col
        object.__setattr__(self, "outcomes", outs)
        w = np.ones(n) if self.weights is None else np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if w.shape != (n,):
            raise SchemaError(f"weights have {w.shape[0]} entries for {n} rows")
        object.__setattr__(self, "weights", _frozen_array(w))
        if self.ids is None:
            width = len(str(max(n - 1, 0)))
            ids = tuple(f"r{i:0{width}d}" for i in range(n))
        else:
            ids = tuple(str(i) for i in self.ids)
            if len(ids) != n:
                raise SchemaError(f"{len(ids)} ids for {n} rows")
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def outcome(self, name: str) -> np.ndarray:
        try:
            return self.outcomes[name]
        except KeyError:
            raise SchemaError(f"unknown outcome column {name!r}") from None

    def observed(self, name: str) -> np.ndarray:
        return np.isfinite(self.outcome(name))

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.schema.index(name)]

    def group_counts(self) -> tuple[int, int]:
        return int(np.sum(self.group == 0)), int(np.sum(self.group == 1))

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        if rows.dtype == bool:
            rows = np.flatnonzero(rows)
        return Dataset(
            self.schema,
            self.X[rows],
            self.group[rows],
            {k: v[rows] for k, v in self.outcomes.items()},
            self.weights[rows],
            tuple(self.ids[i] for i in rows),
            self.provenance,
        )

    def replace(self, **changes) -> "Dataset":
        kw = dict(schema=self.schema, X=self.X, group=self.group, outcomes=self.outcomes,
                  weights=self.weights, ids=self.ids, provenance=self.provenance)
        kw.update(changes)
        return Dataset(**kw)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.schema.digest().encode())
        for arr in (self.X, self.group, self.weights):
            h.update(np.ascontiguousarray(arr).tobytes())
        for k in sorted(self.outcomes):
            h.update(k.encode())
            h.update(np.ascontiguousarray(self.outcomes[k]).tobytes())
        h.update("\0".join(self.ids).encode())
        return h.hexdigest()[:16]


def validate_dataset(data: Dataset) -> list[str]:
    out = list(data.schema.row_violations(data.X))
    bad = ~np.isin(data.group, (0, 1))
    if bad.any():
        out.append(f"group: label {data.group[np.argmax(bad)]} is not 0 or 1")
    w = data.weights
    if not np.all(np.isfinite(w)):
        out.append("weight: non-finite weight")
    elif np.any(w < 0):
        out.append("weight: negative weight")
    if len(set(data.ids)) != data.n:
        out.append("id: duplicate ids")
    for name, col in data.outcomes.items():
        if np.isinf(col).any():
            out.append(f"{name}: infinite outcome")
    return out


def require_both_groups(data: Dataset, what: str = "this operation") -> None:
    na, nd = data.group_counts()
    if na == 0 or nd == 0:
        raise InsufficientDataError(f"{what} needs rows from both groups (advantaged={na}, disadvantaged={nd})")


def enumerate_world(world: DiscreteWorld, f_column: str = "f", g_column: str = "g") -> Dataset:
    """One row per positive-mass (cell, group), weighted by its mass."""
    cells = world.cells()
    blocks = []
    for grp, mass in ((ADVANTAGED, world.p), (DISADVANTAGED, world.q)):
        idx = np.flatnonzero(mass > 0)
        blocks.append((idx, grp, mass[idx]))
    idx = np.concatenate([b[0] for b in blocks])
    schema = FeatureSchema(world.schema.features, world.schema.group, (f_column, g_column))
    return Dataset(
        schema,
        cells[idx].astype(np.float64),
        np.concatenate([np.full(len(b[0]), b[1]) for b in blocks]),
        {f_column: world.f[idx], g_column: world.g[idx]},
        np.concatenate([b[2] for b in blocks]),
        provenance=f"enumerated world {world.digest()}",
    )


def _cell_mean(cell: np.ndarray, values: np.ndarray, weights: np.ndarray, m: int):
    wsum = np.bincount(cell, weights=weights, minlength=m)
    vsum = np.bincount(cell, weights=weights * values, minlength=m)
    mean = np.zeros(m)
    seen = wsum > 0
    mean[seen] = vsum[seen] / wsum[seen]
    # cells whose observations all agree get that value exactly
    lo = np.full(m, np.inf)
    hi = np.full(m, -np.inf)
    pos = weights > 0
    np.minimum.at(lo, cell[pos], values[pos])
    np.maximum.at(hi, cell[pos], values[pos])
    flat = seen & (lo == hi)
    mean[flat] = lo[flat]
    return mean, seen


def empirical_world(data: Dataset, f_column: str, g_column: str) -> DiscreteWorld:
    """Plug-in world: within-group weighted cell frequencies, pooled cell means of f and g.

    Cells with no weight get mass 0 and score 0 and are listed in
    ``world.unsupported``.
    """
    schema = data.schema
    if not schema.all_categorical:
        raise SchemaError("empirical_world needs all-categorical features")
    require_both_groups(data, "empirical_world")
    fv, gv = data.outcome(f_column), data.outcome(g_column)
    for name, col in ((f_column, fv), (g_column, gv)):
        if not np.all(np.isfinite(col)):
            raise ParameterError(f"column {name!r} has censored rows; empirical_world needs observed values")
    cell = cell_index(data.X, schema.cardinalities)
    return plugin_world(schema, cell, data.group, fv, gv, data.weights)


def plugin_world(schema: FeatureSchema, cell: np.ndarray, group: np.ndarray, fv: np.ndarray, gv: np.ndarray,
                 w: np.ndarray) -> DiscreteWorld:
    """Plug-in world from per-row cell indices; the array-level core of ``empirical_world``."""
    m = schema.n_cells
    masses = []
    for grp in (ADVANTAGED, DISADVANTAGED):
        sel = group == grp
        total = math.fsum(w[sel])
        if total <= 0:
            raise InsufficientDataError(f"{GROUP_NAMES[grp]} group has zero total weight")
        counts = np.bincount(cell[sel], weights=w[sel], minlength=m)
        masses.append(counts / total)
    f_hat, seen = _cell_mean(cell, fv, w, m)
    g_hat, _ = _cell_mean(cell, gv, w, m)
    unsupported = np.flatnonzero(~seen)
    bare_schema = FeatureSchema(schema.features, schema.group, ())
    return DiscreteWorld(bare_schema, masses[0], masses[1], f_hat, g_hat, tuple(unsupported.tolist()))
