"""Decision-time screening: scoring, top-k and quota selection, counterfactual queries."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import Callable, Mapping

import numpy as np

from .errors import ParameterError, SchemaError, SelectionError
from .model import GROUP_NAMES, Dataset, FeatureSchema, ScoreFunction
from .trainer import TrainedScreener

TIE_RULES = ("by_id", "stable_input_order")


@dataclass(frozen=True, eq=False)
class Roster:
    schema: FeatureSchema
    ids: tuple[str, ...]
    X: np.ndarray
    group: np.ndarray
    outcome: np.ndarray | None = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        if len(self.ids) == 0:
            X = X.reshape(0, self.schema.arity)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "group", np.asarray(self.group, dtype=np.int64).reshape(-1))
        if len(set(self.ids)) != len(self.ids):
            raise SchemaError("roster ids must be unique")
        if X.shape[0] != len(self.ids) or self.group.shape[0] != len(self.ids):
            raise SchemaError("roster arrays disagree on the number of candidates")
        if len(self.ids):
            self.schema.check_rows(X)
        if self.outcome is not None:
            object.__setattr__(self, "outcome", np.asarray(self.outcome, dtype=np.float64).reshape(-1))

    @classmethod
    def from_dataset(cls, data: Dataset, outcome: str | None = None) -> "Roster":
        return cls(data.schema, data.ids, data.X, data.group, None if outcome is None else data.outcome(outcome))

    @property
    def n(self) -> int:
        return len(self.ids)

    @cached_property
    def id_rank(self) -> np.ndarray:
        """Lexicographic rank of each candidate id."""
        rank = np.empty(self.n, dtype=np.int64)
        rank[np.argsort(np.array(self.ids, dtype=str), kind="stable")] = np.arange(self.n)
        return rank

    def position(self, candidate_id: str) -> int:
        try:
            return self.ids.index(str(candidate_id))
        except ValueError:
            raise ParameterError(f"unknown candidate {candidate_id!r}") from None


@dataclass(frozen=True, eq=False)
class ScoredRoster:
    roster: Roster
    scores: np.ndarray

    @property
    def ids(self) -> tuple[str, ...]:
        return self.roster.ids

    @property
    def group(self) -> np.ndarray:
        return self.roster.group

    @property
    def n(self) -> int:
        return self.roster.n

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.ids, self.scores.tolist()))

    def transformed(self, fn: Callable[[np.ndarray], np.ndarray]) -> "ScoredRoster":
        return ScoredRoster(self.roster, np.asarray(fn(self.scores), dtype=np.float64))


def _scorer(screener, schema: FeatureSchema) -> ScoreFunction:
    if isinstance(screener, TrainedScreener):
        if screener.schema.features != schema.features:
            raise SchemaError("roster does not conform to the screener's schema")
        return screener.as_score_function()
    if isinstance(screener, ScoreFunction):
        return screener
    raise ParameterError(f"cannot score with {type(screener).__name__}")


def score_roster(screener, roster: Roster) -> ScoredRoster:
    if roster.n == 0:
        return ScoredRoster(roster, np.zeros(0))
    return ScoredRoster(roster, _scorer(screener, roster.schema)(roster.X, roster.group))


@dataclass(frozen=True)
class TieRecord:
    score: float
    tied_ids: tuple[str, ...]
    taken_ids: tuple[str, ...]
    rule: str


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[str, ...]
    k: int
    threshold: float
    group_counts: tuple[int, int]
    group_sizes: tuple[int, int]
    acceptance_rates: tuple[float | None, float | None]
    efficiency: float | None
    efficiency_metric: str
    tie_rule: str
    tie_log: tuple[TieRecord, ...] = ()
    list_thresholds: tuple[float | None, float | None] | None = None
    target_share: float | None = None

    @property
    def disadvantaged_share(self) -> float:
        return self.group_counts[1] / self.k

    def to_dict(self) -> dict:
        d = asdict(self)
        d["selected"] = list(self.selected)
        d["tie_log"] = [asdict(t) for t in self.tie_log]
        return d


def _order(scored: ScoredRoster, tie_rule: str, rows: np.ndarray | None = None) -> np.ndarray:
    """Row positions sorted by score descending, ties resolved by ``tie_rule``."""
    if tie_rule not in TIE_RULES:
        raise ParameterError(f"tie_rule must be one of {TIE_RULES}")
    rows = np.arange(scored.n) if rows is None else np.asarray(rows)
    s = scored.scores[rows]
    if tie_rule == "by_id":
        key = scored.roster.id_rank[rows]
    else:
        key = rows
    return rows[np.lexsort((key, -s))]


def _tie_record(scored: ScoredRoster, pool: np.ndarray, taken: np.ndarray, tie_rule: str) -> list[TieRecord]:
    if len(taken) == 0 or len(taken) == len(pool):
        return []
    cut = scored.scores[taken[-1]]
    tied = pool[scored.scores[pool] == cut]
    if len(tied) < 2 or np.all(np.isin(tied, taken)):
        return []
    taken_tied = [i for i in taken if scored.scores[i] == cut]
    return [TieRecord(float(cut), tuple(scored.ids[i] for i in tied), tuple(scored.ids[i] for i in taken_tied),
                      tie_rule)]


def _efficiency(scored: ScoredRoster, chosen: np.ndarray) -> tuple[float | None, str]:
    if len(chosen) == 0:
        return None, "none selected"
    outcome = scored.roster.outcome
    if outcome is not None and np.all(np.isfinite(outcome[chosen])):
        return float(np.mean(outcome[chosen])), "mean true outcome among selected"
    return float(np.mean(scored.scores[chosen])), "mean predicted score among selected (no true outcomes)"


def _result(scored: ScoredRoster, chosen: np.ndarray, k: int, tie_rule: str, ties, **extra) -> SelectionResult:
    chosen = _order(scored, tie_rule, chosen) if len(chosen) else chosen
    g = scored.group
    counts = tuple(int(np.sum(g[chosen] == grp)) for grp in (0, 1))
    sizes = tuple(int(np.sum(g == grp)) for grp in (0, 1))
    rates = tuple(c / s if s else None for c, s in zip(counts, sizes))
    eff, metric = _efficiency(scored, chosen)
    threshold = float(scored.scores[chosen].min()) if len(chosen) else math.nan
    return SelectionResult(tuple(scored.ids[i] for i in chosen), k, threshold, counts, sizes, rates, eff, metric,
                           tie_rule, tuple(ties), **extra)


def select_top_k(scored: ScoredRoster, k: int, tie_rule: str = "by_id") -> SelectionResult:
    """The ``k`` highest scores. Ties at the cut are resolved by ``tie_rule`` and logged."""
    if not 1 <= k <= scored.n:
        raise SelectionError(f"k={k} outside 1..{scored.n}")
    pool = _order(scored, tie_rule)
    chosen = pool[:k]
    return _result(scored, chosen, k, tie_rule, _tie_record(scored, pool, chosen, tie_rule))


def quota_for(k: int, target_share: float) -> int:
    """Disadvantaged seats: ceil(target_share * k), so the target is met rather than undershot."""
    return min(k, max(0, math.ceil(round(target_share * k, 9))))


def select_with_group_target(scored: ScoredRoster, k: int, target_share: float,
                             tie_rule: str = "by_id") -> SelectionResult:
    """Separate rank lists per group; take the top ``quota_for(k, target_share)`` disadvantaged
    candidates and fill the remaining seats from the advantaged list."""
    if not 0 <= target_share <= 1:
        raise ParameterError(f"target_share must be in [0, 1], got {target_share}")
    if not 1 <= k <= scored.n:
        raise SelectionError(f"k={k} outside 1..{scored.n}")
    n_dis = quota_for(k, target_share)
    n_adv = k - n_dis
    lists = [np.flatnonzero(scored.group == grp) for grp in (0, 1)]
    if len(lists[0]) < n_adv or len(lists[1]) < n_dis:
        raise SelectionError(
            f"infeasible quota: need {n_adv} advantaged and {n_dis} disadvantaged, "
            f"have {len(lists[0])} and {len(lists[1])}")
    chosen, ties, cuts = [], [], []
    for rows, quota in zip(lists, (n_adv, n_dis)):
        pool = _order(scored, tie_rule, rows)
        taken = pool[:quota]
        chosen.append(taken)
        ties += _tie_record(scored, pool, taken, tie_rule)
        cuts.append(float(scored.scores[taken].min()) if quota else None)
    return _result(scored, np.concatenate(chosen), k, tie_rule, ties, list_thresholds=tuple(cuts),
                   target_share=float(target_share))


@dataclass(frozen=True)
class CounterfactualResult:
    candidate: str
    changes: dict
    old_score: float
    new_score: float
    k: int | None = None
    threshold: float | None = None
    selected_before: bool | None = None
    selected_after: bool | None = None

    @property
    def flipped(self) -> bool:
        if self.selected_before is None:
            return False
        return self.selected_before != self.selected_after

    def to_dict(self) -> dict:
        return {**asdict(self), "flipped": self.flipped}


def kth_without(scored: ScoredRoster, k: int, position: int) -> float:
    """k-th highest score among everyone except ``position`` (-inf if fewer than k remain)."""
    others = np.delete(scored.scores, position)
    if k > len(others):
        return -math.inf
    return float(np.sort(others)[::-1][k - 1])


def counterfactual(screener, roster: Roster, candidate_id: str, changes: Mapping[str, float],
                   k: int | None = None) -> CounterfactualResult:
    """Re-score one candidate with some features (or the group) set to new values.

    With ``k`` the rest of ``roster`` is the selection context: the candidate
    is selected iff their score strictly exceeds the k-th highest score of the
    others, and the result reports whether the change flips that.
    """
    score = _scorer(screener, roster.schema)
    i = roster.position(candidate_id)
    x = roster.X[i].copy()
    grp = int(roster.group[i])
    schema = roster.schema
    for name, value in changes.items():
        if name == schema.group:
            if value not in (0, 1):
                raise SchemaError(f"group must be 0 or 1, got {value!r}")
            grp = int(value)
        else:
            x[schema.index(name)] = float(value)
    schema.check_rows(x[None, :])
    old = float(score(roster.X[i:i + 1], roster.group[i:i + 1])[0])
    new = float(score(x[None, :], np.array([grp]))[0])
    if k is None:
        return CounterfactualResult(str(candidate_id), dict(changes), old, new)
    if not 1 <= k <= roster.n:
        raise SelectionError(f"k={k} outside 1..{roster.n}")
    cut = kth_without(score_roster(score, roster), k, i)
    return CounterfactualResult(str(candidate_id), dict(changes), old, new, k, cut, old > cut, new > cut)


@dataclass(frozen=True)
class SliceRate:
    size: int
    selected: int
    rate: float | None  # None marks an empty slice


def group_slices(schema: FeatureSchema) -> dict[str, Callable]:
    return {f"{schema.group}={name}": (lambda X, g, _v=v: g == _v) for v, name in enumerate(GROUP_NAMES)}


def feature_slice(schema: FeatureSchema, name: str, value: float) -> Callable:
    j = schema.index(name)
    return lambda X, g: X[:, j] == value


def acceptance_rates(selection: SelectionResult, roster: Roster,
                     slices: Mapping[str, Callable] | None = None) -> dict[str, SliceRate]:
    """Selected count over slice size for each slice; group slices are always included."""
    picked = set(selection.selected)
    chosen = np.array([i in picked for i in roster.ids], dtype=bool)
    out = {}
    all_slices = {**group_slices(roster.schema), **dict(slices or {})}
    for name, pred in all_slices.items():
        mask = np.asarray(pred(roster.X, roster.group), dtype=bool).reshape(-1)
        if mask.shape != (roster.n,):
            raise ParameterError(f"slice {name!r} is not total over the roster")
        size = int(mask.sum())
        sel = int((mask & chosen).sum())
        out[name] = SliceRate(size, sel, sel / size if size else None)
    return out
