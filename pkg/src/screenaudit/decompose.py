"""Four-way attribution of a screener's group gap.

For a world with true outcome f, proxy outcome g, representation r, best
predictor h (of g from r(x)) and trained screener t::

    D(t∘r) = D(f) + [D(g) - D(f)] + [D(h∘r) - D(g)] + [D(t∘r) - D(h∘r)]

Each bracket isolates one design choice. h is always recomputed here from the
world, so a caller cannot move mass between the input and training terms by
supplying a non-optimal h.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .model import (Dataset, DiscreteWorld, Representation, ScoreFunction, _digest, cell_index,
                    empirical_world, plugin_world)
from .oracle import DEFAULT_GROUP_WEIGHTS, bayes_predictor, disparity, evaluate_on_cells
from .rng import stream
from .trainer import TrainedScreener

TERMS = ("structural", "outcome_bias", "input_bias", "training_bias")
LABELS = {
    "total": "gap in screener scores, D(t∘r)",
    "structural": "structural disadvantage, D(f)",
    "outcome_bias": "outcome choice, D(g) - D(f)",
    "input_bias": "input choice, D(h∘r) - D(g)",
    "training_bias": "training error, D(t∘r) - D(h∘r)",
}
SIGN_CONVENTION = "positive values mean the advantaged group's average is higher"
BOOTSTRAP_NOTE = ("standard errors come from a seeded within-group nonparametric bootstrap; the population "
                  "terms are defined on distributions, so sample uncertainty is this package's own addition")


@dataclass(frozen=True)
class DecompositionReport:
    total: float
    structural: float
    outcome_bias: float
    input_bias: float
    training_bias: float
    residual: float
    group_weights: tuple[float, float]
    digests: dict = field(default_factory=dict)
    labels: dict = field(default_factory=lambda: dict(LABELS))
    sign_convention: str = SIGN_CONVENTION

    def terms(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in TERMS}

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            **self.terms(),
            "residual": self.residual,
            "group_weights": list(self.group_weights),
            "labels": self.labels,
            "sign_convention": self.sign_convention,
            "digests": self.digests,
        }


def _values_digest(world: DiscreteWorld, v: ScoreFunction) -> str:
    va, vd = evaluate_on_cells(world, v)
    return hashlib.sha256(np.concatenate([va, vd]).tobytes()).hexdigest()[:16]


def _as_score(t, r: Representation) -> ScoreFunction:
    if isinstance(t, TrainedScreener):
        tr = t.representation
        if tr.retained != r.retained or tr.coarsen != r.coarsen:
            raise ParameterError("trained screener's representation retains different features than r")
        return t.as_score_function()
    if isinstance(t, ScoreFunction):
        return t
    raise ParameterError(f"t must be a TrainedScreener or ScoreFunction, got {type(t).__name__}")


def decompose(world: DiscreteWorld, r: Representation, t=None,
              group_weights=DEFAULT_GROUP_WEIGHTS) -> DecompositionReport:
    """Exact decomposition of D(t∘r) on ``world``. ``t=None`` scores with h itself."""
    h = bayes_predictor(world, world.g_score, r, group_weights)
    t_score = h if t is None else _as_score(t, r)
    d_f = disparity(world, world.f_score).value
    d_g = disparity(world, world.g_score).value
    d_h = disparity(world, h).value
    d_t = disparity(world, t_score).value
    terms = (d_f, d_g - d_f, d_h - d_g, d_t - d_h)
    residual = d_t - math.fsum(terms)
    digests = {
        "world": world.digest(),
        "g": _values_digest(world, world.g_score),
        "r": _digest(r.to_dict()),
        "h": _values_digest(world, h),
        "t": _values_digest(world, t_score),
    }
    return DecompositionReport(d_t, *terms, residual, tuple(float(w) for w in group_weights), digests)


@dataclass(frozen=True)
class EmpiricalDecomposition:
    report: DecompositionReport
    standard_errors: dict[str, float]
    n_boot: int
    seed: int
    unsupported_cells: tuple[int, ...]
    note: str = BOOTSTRAP_NOTE

    def to_dict(self) -> dict:
        return {
            **self.report.to_dict(),
            "standard_errors": self.standard_errors,
            "n_boot": self.n_boot,
            "seed": self.seed,
            "unsupported_cells": list(self.unsupported_cells),
            "note": self.note,
        }


def decompose_empirical(data: Dataset, f_col: str, g_col: str, r: Representation, t=None,
                        group_weights=DEFAULT_GROUP_WEIGHTS, n_boot: int = 200,
                        seed: int = 0) -> EmpiricalDecomposition:
    """Decompose on the plug-in world of ``data`` and attach bootstrap standard errors.

    Resample ``b`` draws rows with replacement within each group from the
    stream ``(seed, "bootstrap/b")``; h is re-estimated on every resample
    while t stays fixed.
    """
    world = empirical_world(data, f_col, g_col)
    report = decompose(world, r, t, group_weights)
    keys = ("total",) + TERMS
    se = {k: math.nan for k in keys}
    if n_boot >= 2:
        groups = [np.flatnonzero(data.group == grp) for grp in (0, 1)]
        cell = cell_index(data.X, data.schema.cardinalities)
        fv, gv = data.outcome(f_col), data.outcome(g_col)
        draws = np.empty((n_boot, len(keys)))
        for b in range(n_boot):
            rs = stream(seed, f"bootstrap/{b}")
            rows = np.concatenate([idx[rs.integers(0, len(idx), len(idx))] for idx in groups])
            boot = plugin_world(data.schema, cell[rows], data.group[rows], fv[rows], gv[rows], data.weights[rows])
            rep = decompose(boot, r, t, group_weights)
            draws[b] = [rep.total, *rep.terms().values()]
        se = {k: float(v) for k, v in zip(keys, draws.std(axis=0, ddof=1))}
    return EmpiricalDecomposition(report, se, int(n_boot), int(seed), world.unsupported)
