"""Fairness/efficiency tradeoff curves, dominance between screeners, and decile mis-ranking."""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import ParameterError, SelectionError
from .screen import Roster, ScoredRoster, score_roster, select_top_k, select_with_group_target

DEFAULT_GRID = tuple(round(0.01 * i, 2) for i in range(51))
GRID_NOTE = "default grid: disadvantaged share of selected from 0 to 0.5 in steps of 0.01"
METRICS = {
    "share_below_cut": ("share of selected whose true outcome is below {cut}", False),
    "mean_outcome": ("mean true outcome among selected", True),
}


def roster_digest(roster: Roster) -> str:
    h = hashlib.sha256()
    h.update("\0".join(roster.ids).encode())
    for arr in (roster.X, roster.group, roster.outcome if roster.outcome is not None else np.zeros(0)):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class CurvePoint:
    target_share: float
    achieved_share: float | None
    efficiency: float | None
    feasible: bool
    note: str = ""


@dataclass(frozen=True)
class TradeoffCurve:
    variant: str
    k: int
    points: tuple[CurvePoint, ...]
    roster_digest: str
    metric: str
    metric_definition: str
    higher_is_better: bool
    grid_note: str = ""

    def feasible_points(self) -> list[CurvePoint]:
        return [p for p in self.points if p.feasible]

    def at(self, target: float) -> CurvePoint:
        for p in self.points:
            if math.isclose(p.target_share, target, abs_tol=1e-12):
                return p
        raise KeyError(target)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["points"] = [asdict(p) for p in self.points]
        return d

    def csv_rows(self) -> list[list]:
        rows = [["variant", "target_share", "achieved_share", "efficiency", "feasible", "note"]]
        for p in self.points:
            rows.append([self.variant, p.target_share, p.achieved_share, p.efficiency, int(p.feasible), p.note])
        return rows


def _efficiency(outcome: np.ndarray, metric: str, cut: float | None) -> float:
    if metric == "share_below_cut":
        return float(np.mean(outcome < cut))
    return float(np.mean(outcome))


def curve_from_scores(variant: str, scored: ScoredRoster, k: int, targets=DEFAULT_GRID,
                      metric: str = "share_below_cut", cut: float | None = None,
                      tie_rule: str = "by_id") -> TradeoffCurve:
    roster = scored.roster
    if roster.outcome is None or not np.all(np.isfinite(roster.outcome)):
        raise ParameterError("tradeoff curves need a roster with true outcomes for every candidate")
    if metric not in METRICS:
        raise ParameterError(f"metric must be one of {tuple(METRICS)}")
    if metric == "share_below_cut" and cut is None:
        raise ParameterError("share_below_cut needs a cut value")
    targets = sorted(float(t) for t in targets)
    if any(not 0 <= t <= 1 for t in targets):
        raise ParameterError("targets must lie in [0, 1]")
    position = {cid: i for i, cid in enumerate(roster.ids)}
    points = []
    for t in targets:
        try:
            sel = select_with_group_target(scored, k, t, tie_rule)
        except SelectionError as exc:
            points.append(CurvePoint(t, None, None, False, str(exc)))
            continue
        rows = np.fromiter((position[c] for c in sel.selected), dtype=np.int64, count=len(sel.selected))
        points.append(CurvePoint(t, sel.disadvantaged_share, _efficiency(roster.outcome[rows], metric, cut), True))
    definition, higher = METRICS[metric]
    return TradeoffCurve(variant, int(k), tuple(points), roster_digest(roster), metric,
                         definition.format(cut=cut), higher, GRID_NOTE if tuple(targets) == DEFAULT_GRID else "")


def tradeoff_curve(screeners: Mapping[str, object], roster: Roster, k: int, targets=DEFAULT_GRID,
                   metric: str = "share_below_cut", cut: float | None = None,
                   tie_rule: str = "by_id") -> dict[str, TradeoffCurve]:
    """One curve per screener variant: quota selection at every target share.

    Infeasible targets stay in the curve as points marked ``feasible=False``.
    """
    return {name: curve_from_scores(name, score_roster(s, roster), k, targets, metric, cut, tie_rule)
            for name, s in screeners.items()}


def unconstrained_point(scored: ScoredRoster, k: int, metric: str = "share_below_cut",
                        cut: float | None = None) -> CurvePoint:
    """Plain top-k selection expressed as a curve point (target = achieved share)."""
    sel = select_top_k(scored, k)
    position = {cid: i for i, cid in enumerate(scored.ids)}
    rows = np.array([position[c] for c in sel.selected])
    share = sel.disadvantaged_share
    return CurvePoint(share, share, _efficiency(scored.roster.outcome[rows], metric, cut), True, "unconstrained")


@dataclass(frozen=True)
class Dominance:
    weakly_dominates: bool
    reverse_weakly_dominates: bool
    strictly_at: tuple[float, ...]
    incomparable: bool
    compared_targets: tuple[float, ...]
    tolerance: float

    def to_dict(self) -> dict:
        return asdict(self)


def dominance_check(a: TradeoffCurve, b: TradeoffCurve, tolerance: float = 1e-6) -> Dominance:
    """Does ``a`` do at least as well as ``b`` (within ``tolerance``) at every shared feasible target?"""
    if a.metric != b.metric:
        raise ParameterError(f"curves use different metrics ({a.metric} vs {b.metric})")
    ta = {round(p.target_share, 12): p for p in a.points}
    tb = {round(p.target_share, 12): p for p in b.points}
    shared = sorted(set(ta) & set(tb))
    if not shared:
        raise ParameterError("curves share no target values")
    compared, gains = [], []
    for t in shared:
        pa, pb = ta[t], tb[t]
        if not (pa.feasible and pb.feasible):
            continue
        gain = pa.efficiency - pb.efficiency
        gains.append(gain if a.higher_is_better else -gain)
        compared.append(t)
    gains = np.asarray(gains)
    weak = bool(np.all(gains >= -tolerance))
    reverse = bool(np.all(gains <= tolerance))
    strict = tuple(t for t, gn in zip(compared, gains) if gn > tolerance)
    return Dominance(weak, reverse, strict, not weak and not reverse, tuple(compared), float(tolerance))


@dataclass(frozen=True)
class DecileMatrix:
    counts: np.ndarray  # rows: deciles under A, columns: deciles under B (0 = lowest scores)
    n: int
    off_diagonal: float
    label_a: str = "A"
    label_b: str = "B"

    def csv_rows(self) -> list[list]:
        rows = [[f"decile_{self.label_a}", f"decile_{self.label_b}", "count"]]
        for i in range(10):
            for j in range(10):
                rows.append([i + 1, j + 1, int(self.counts[i, j])])
        return rows

    def to_dict(self) -> dict:
        return {"counts": self.counts.tolist(), "n": self.n, "off_diagonal": self.off_diagonal,
                "label_a": self.label_a, "label_b": self.label_b}


def rank_deciles(scores: np.ndarray, ids) -> np.ndarray:
    """Decile 0..9 of each entry by ascending score rank, ties broken by id."""
    n = len(scores)
    id_rank = np.empty(n, dtype=np.int64)
    id_rank[np.array(sorted(range(n), key=lambda i: ids[i]), dtype=np.int64)] = np.arange(n)
    order = np.lexsort((id_rank, scores))
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    return rank * 10 // n


def decile_matrix(screener_a, screener_b, roster: Roster,
                  subpopulation: Callable | np.ndarray | None = None,
                  labels: tuple[str, str] = ("A", "B")) -> DecileMatrix:
    """Cross-tabulate rank deciles of two screeners over a subpopulation."""
    if subpopulation is None:
        mask = np.ones(roster.n, dtype=bool)
    elif callable(subpopulation):
        mask = np.asarray(subpopulation(roster.X, roster.group), dtype=bool)
    else:
        mask = np.asarray(subpopulation, dtype=bool)
    n = int(mask.sum())
    if n < 10:
        raise ParameterError(f"subpopulation has {n} members; deciles need at least 10")
    sa = score_roster(screener_a, roster).scores[mask]
    sb = score_roster(screener_b, roster).scores[mask]
    ids = [cid for cid, m in zip(roster.ids, mask) if m]
    da, db = rank_deciles(sa, ids), rank_deciles(sb, ids)
    counts = np.zeros((10, 10), dtype=np.int64)
    np.add.at(counts, (da, db), 1)
    off = 1.0 - np.trace(counts) / n
    return DecileMatrix(counts, n, float(off), *labels)
