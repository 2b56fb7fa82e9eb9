"""Exact reference computations on discrete worlds.

Everything here enumerates the full cell space, so it is the ground truth that
sampled or trained quantities are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, ParameterError
from .model import ADVANTAGED, DISADVANTAGED, DiscreteWorld, Representation, ScoreFunction

DEFAULT_GROUP_WEIGHTS = (0.5, 0.5)
TIE_POLICY = "score descending, then canonical cell index, then group (advantaged first)"


@dataclass(frozen=True)
class DisparityValue:
    value: float
    tag: str
    world_digest: str

    def __float__(self) -> float:
        return self.value


def evaluate_on_cells(world: DiscreteWorld, v: ScoreFunction) -> tuple[np.ndarray, np.ndarray]:
    """Values of ``v`` on every cell, for an advantaged and a disadvantaged member.

    Raises EvaluationError naming the first cell where ``v`` is not a finite real.
    """
    cells = world.cells()
    m = cells.shape[0]
    try:
        va = v(cells, np.full(m, ADVANTAGED))
        vd = v(cells, np.full(m, DISADVANTAGED)) if v.uses_group else va
    except EvaluationError:
        raise
    except Exception as exc:  # a score function that cannot be evaluated is reported, not propagated raw
        raise EvaluationError(f"score {v.name or v.tag!r} failed on the cell space: {exc}") from exc
    for vals in (va, vd):
        bad = np.flatnonzero(~np.isfinite(vals))
        if bad.size:
            i = int(bad[0])
            raise EvaluationError(f"score {v.name or v.tag!r} is not finite on cell {i} {cells[i].tolist()}", cell=i)
    return va, vd


def disparity(world: DiscreteWorld, v: ScoreFunction) -> DisparityValue:
    """D(v): advantaged average of v minus disadvantaged average.

    Summed with ``math.fsum`` in canonical cell order.
    """
    va, vd = evaluate_on_cells(world, v)
    terms = np.concatenate([world.p * va, -(world.q * vd)])
    return DisparityValue(math.fsum(terms), v.tag, world.digest())


def _check_weights(group_weights) -> tuple[float, float]:
    wp, wq = (float(x) for x in group_weights)
    if wp < 0 or wq < 0 or not (math.isfinite(wp) and math.isfinite(wq)):
        raise ParameterError(f"group weights must be finite and non-negative, got {(wp, wq)}")
    if wp + wq == 0:
        raise ParameterError("group weights are both zero")
    if abs(wp + wq - 1.0) > 1e-12:
        raise ParameterError(f"group weights must sum to 1, got {wp + wq}")
    return wp, wq


def _pooled_units(world: DiscreteWorld, group_weights):
    """Per-(cell, group) pooled masses, as two length-m arrays."""
    wp, wq = _check_weights(group_weights)
    return wp * world.p, wq * world.q


def bayes_table(world: DiscreteWorld, target: ScoreFunction, r: Representation,
                group_weights=DEFAULT_GROUP_WEIGHTS) -> np.ndarray:
    """Pooled conditional mean of ``target`` on each value of the reduced space.

    Reduced values with zero pooled mass take the global pooled mean.
    """
    r.validate(world.schema)
    ma, md = _pooled_units(world, group_weights)
    ta, td = evaluate_on_cells(world, target)
    cells = world.cells()
    m = cells.shape[0]
    shape = r.reduced_shape(world.schema)
    size = int(np.prod(shape, dtype=np.int64)) if shape else 1
    z = np.concatenate([
        r.reduced_index(cells, np.full(m, ADVANTAGED), world.schema),
        r.reduced_index(cells, np.full(m, DISADVANTAGED), world.schema),
    ])
    mass = np.concatenate([ma, md])
    vals = np.concatenate([ta, td])
    den = np.bincount(z, weights=mass, minlength=size)
    num = np.bincount(z, weights=mass * vals, minlength=size)
    total = math.fsum(mass)
    if total <= 0:
        raise ParameterError("pooled population has zero mass")
    global_mean = math.fsum(mass * vals) / total
    h = np.full(size, global_mean)
    pos = den > 0
    h[pos] = num[pos] / den[pos]
    # second pass: add back the weighted mean residual lost to rounding
    corr = np.bincount(z, weights=mass * (vals - h[z]), minlength=size)
    h[pos] += corr[pos] / den[pos]
    return h


def bayes_predictor(world: DiscreteWorld, target: ScoreFunction, r: Representation,
                    group_weights=DEFAULT_GROUP_WEIGHTS) -> ScoreFunction:
    """h∘r: the best predictor of ``target`` from r(x) under the pooled population.

    The pooled population mixes the advantaged distribution with weight
    ``group_weights[0]`` and the disadvantaged one with ``group_weights[1]``.
    When ``r.keep_group`` is set the reduced value includes the group, so h
    conditions on it.
    """
    table = bayes_table(world, target, r, group_weights)
    return ScoreFunction.from_reduced_table(table, r, world.schema, tag="bayes_h", name=f"h[{target.name or target.tag}]")


@dataclass(frozen=True)
class ExactSelection:
    """Result of admitting the top ``capacity_share`` of pooled mass by score."""

    admitted: np.ndarray  # (m, 2): admitted pooled mass per cell, per group
    capacity_share: float
    mean_f: float
    acceptance_rate: tuple[float, float]
    disadvantaged_share: float
    threshold: float
    marginal_unit: tuple[int, int] | None
    tie_policy: str = TIE_POLICY


def enumerate_select(world: DiscreteWorld, score: ScoreFunction, capacity_share: float,
                     group_weights=DEFAULT_GROUP_WEIGHTS) -> ExactSelection:
    """Greedy fill of pooled mass in descending score order, splitting the marginal unit."""
    if not 0 < capacity_share <= 1:
        raise ParameterError(f"capacity_share must be in (0, 1], got {capacity_share}")
    ma, md = _pooled_units(world, group_weights)
    sa, sd = evaluate_on_cells(world, score)
    m = world.n_cells
    cell = np.concatenate([np.arange(m), np.arange(m)])
    grp = np.concatenate([np.zeros(m, dtype=np.int64), np.ones(m, dtype=np.int64)])
    mass = np.concatenate([ma, md])
    s = np.concatenate([sa, sd])
    order = np.lexsort((grp, cell, -s))
    total = math.fsum(mass)
    cap = capacity_share * total
    admitted = np.zeros(2 * m)
    filled = 0.0
    marginal = None
    threshold = float(s[order[0]]) if len(order) else math.nan
    for u in order:
        if mass[u] <= 0:
            continue
        room = cap - filled
        if room <= 0:
            break
        take = mass[u] if mass[u] <= room else room
        admitted[u] = take
        filled += take
        threshold = float(s[u])
        if take < mass[u]:
            marginal = (int(cell[u]), int(grp[u]))
            break
    if capacity_share == 1:
        admitted = mass.copy()
    if (admitted > 0).any():
        threshold = float(s[admitted > 0].min())
    adm = np.stack([admitted[:m], admitted[m:]], axis=1)
    adm_total = math.fsum(admitted)
    f = world.f
    mean_f = math.fsum(np.concatenate([adm[:, 0] * f, adm[:, 1] * f])) / adm_total
    wa, wd = math.fsum(ma), math.fsum(md)
    rates = (math.fsum(adm[:, 0]) / wa if wa > 0 else math.nan,
             math.fsum(adm[:, 1]) / wd if wd > 0 else math.nan)
    return ExactSelection(adm, float(capacity_share), mean_f, rates,
                          math.fsum(adm[:, 1]) / adm_total, threshold, marginal)


def pooled_mean(world: DiscreteWorld, v: ScoreFunction, group_weights=DEFAULT_GROUP_WEIGHTS) -> float:
    ma, md = _pooled_units(world, group_weights)
    va, vd = evaluate_on_cells(world, v)
    return math.fsum(np.concatenate([ma * va, md * vd])) / math.fsum(np.concatenate([ma, md]))
