"""Audit battery for a disclosed screener and its training inputs.

Findings are evidence for a reviewer, never conclusions: each carries the
statistics, the thresholds it was compared with, the seed needed to
reproduce it and a digest of its inputs.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError, ScreenAuditError, SchemaError
from .model import (Dataset, DiscreteWorld, Feature, FeatureSchema, Representation, ScoreFunction,
                    normalize_exact, validate_world)
from .oracle import disparity
from .scenarios import sample_world
from .screen import Roster, score_roster, select_top_k
from .trainer import (Encoding, TrainConfig, TrainedScreener, _fit, holdout_rows, loss_and_gradient, train)

KINDS = ("under_optimization", "outcome_choice", "sample_drift", "simulated_probe")
TAMPER_NOTE = ("only the behaviour of the screener is examined; tampering that leaves no trace in loss or "
               "selection rates is outside what this check can see")
DEFAULT_MARGIN = 0.05
DEFAULT_DRIFT_LIMIT = 0.1
PROBE_SE = 3.0


@dataclass(frozen=True)
class AuditFinding:
    kind: str
    statistics: dict
    thresholds: dict
    verdict: str
    narrative: str
    seed: int | None
    inputs_digest: str
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown finding kind {self.kind!r}")
        if self.verdict not in ("pass", "flag"):
            raise ParameterError(f"verdict must be pass or flag, got {self.verdict!r}")

    @property
    def flagged(self) -> bool:
        return self.verdict == "flag"

    @property
    def filename(self) -> str:
        if self.seed is None:
            return f"{self.kind}.json"
        return f"{self.kind}_seed{self.seed}.json"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "statistics": self.statistics,
            "thresholds": self.thresholds,
            "narrative": self.narrative,
            "seed": self.seed,
            "inputs_digest": self.inputs_digest,
            "details": self.details,
        }


def _inputs_digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(str(p).encode())
        h.update(b"\0")
    return h.hexdigest()[:16]


def _screener_digest(s: TrainedScreener) -> str:
    return hashlib.sha256(np.asarray(s.params, dtype=np.float64).tobytes()).hexdigest()[:16]


# -- under-optimization ----------------------------------------------------------------------

def _holdout_loss(s: TrainedScreener, data: Dataset, rows: np.ndarray, outcome: str) -> float:
    y = data.outcome(outcome)
    rows = rows & np.isfinite(y) & (data.weights > 0)
    if not rows.any():
        raise ParameterError("the submitted holdout split contains no usable rows")
    design = np.column_stack([np.ones(int(rows.sum())), s.encoding.design(data.X[rows], data.group[rows])])
    loss, _ = loss_and_gradient(s.params, design, y[rows], data.weights[rows], s.link)
    return float(loss)


def retrain_audit(submitted: TrainedScreener, data: Dataset, outcome: str, r: Representation,
                  cfg: TrainConfig = TrainConfig(), margin: float = DEFAULT_MARGIN) -> AuditFinding:
    """Re-run training from the disclosed inputs and compare holdout losses.

    The auditor uses ``cfg`` but keeps the submitted screener's holdout split
    (seed and fraction from its metadata) and its variant layout, so both
    screeners are judged on the same unseen rows. Flags when the submitted
    loss exceeds the auditor's by more than ``margin`` (relative).
    """
    if margin < 0:
        raise ParameterError("margin must be >= 0")
    if submitted.schema.features != data.schema.features:
        raise SchemaError("disclosed dataset does not match the submitted screener's schema")
    meta = submitted.metadata
    digest = _inputs_digest(data.digest(), outcome, r.to_dict(), _screener_digest(submitted), cfg, margin)
    thresholds = {"margin": margin}
    try:
        hold = holdout_rows(submitted, data.n)
    except ParameterError as exc:
        return AuditFinding("under_optimization",
                            {"submitted_holdout_loss": None, "auditor_holdout_loss": None, "loss_ratio": None},
                            thresholds, "flag",
                            f"holdout split cannot be rebuilt from the submitted metadata ({exc}); the training "
                            f"claim is not reproducible. {TAMPER_NOTE}", None, digest)
    audit_cfg = TrainConfig(cfg.learning_rate, cfg.iterations, meta.holdout_fraction, meta.seed, submitted.link,
                            cfg.tolerance)
    enc = Encoding(data.schema, r, interactions=submitted.interactions,
                   residualize=submitted.variant == "orthogonalized")
    auditor = _fit(data, outcome, enc, audit_cfg, submitted.variant)
    sub_loss = _holdout_loss(submitted, data, hold, outcome)
    aud_loss = _holdout_loss(auditor, data, hold, outcome)
    ratio = sub_loss / aud_loss if aud_loss > 0 else (1.0 if sub_loss == aud_loss else math.inf)
    flag = sub_loss > aud_loss * (1.0 + margin)
    narrative = (f"on {int(hold.sum())} holdout rows the submitted screener's {submitted.metadata.loss} is "
                 f"{sub_loss:.6g} against {aud_loss:.6g} for a screener retrained from the disclosed inputs "
                 f"(ratio {ratio:.4f}, allowed {1 + margin:.4f}). {TAMPER_NOTE}")
    return AuditFinding("under_optimization",
                        {"submitted_holdout_loss": sub_loss, "auditor_holdout_loss": aud_loss, "loss_ratio": ratio,
                         "n_holdout": int(hold.sum())},
                        thresholds, "flag" if flag else "pass", narrative, int(meta.seed), digest,
                        {"auditor_params": auditor.params.tolist(), "auditor_converged": auditor.metadata.converged})


# -- outcome choice --------------------------------------------------------------------------

def _selection_gap(screener, data: Dataset, k: int, outcome: str) -> tuple[float, float, tuple[float, float]]:
    roster = Roster(data.schema, data.ids, data.X, data.group)
    sel = select_top_k(score_roster(screener, roster), k)
    rates = tuple(float(x) if x is not None else math.nan for x in sel.acceptance_rates)
    chosen = np.isin(np.asarray(data.ids), np.asarray(sel.selected))
    y = data.outcome(outcome)[chosen]
    y = y[np.isfinite(y)]
    eff = float(y.mean()) if y.size else math.nan
    return rates[0] - rates[1], eff, rates


def outcome_choice_audit(data: Dataset, outcomes: Sequence[str], r: Representation, k_share: float,
                         cfg: TrainConfig = TrainConfig(), declared: str | None = None,
                         slack: float = 0.0) -> AuditFinding:
    """Train one screener per candidate outcome and compare the selection gaps they produce.

    The gap is advantaged minus disadvantaged acceptance rate under top-k
    selection with ``k = round(k_share * n)``. The declared outcome (the
    first by default) is flagged when its gap exceeds every alternative's
    by more than ``slack``.
    """
    outcomes = list(outcomes)
    if len(outcomes) < 2:
        raise ParameterError("outcome_choice_audit needs at least two outcome columns")
    declared = outcomes[0] if declared is None else declared
    if declared not in outcomes:
        raise ParameterError(f"declared outcome {declared!r} is not among {outcomes}")
    if not 0 < k_share <= 1:
        raise ParameterError("k_share must be in (0, 1]")
    k = max(1, int(round(k_share * data.n)))
    table = []
    for o in outcomes:
        try:
            s = train(data, o, r, cfg)
            gap, eff, rates = _selection_gap(s, data, k, o)
            table.append({"outcome": o, "gap": gap, "efficiency": eff, "acceptance_rates": list(rates),
                          "error": None})
        except ScreenAuditError as exc:
            table.append({"outcome": o, "gap": None, "efficiency": None, "acceptance_rates": None,
                          "error": f"{exc.code}: {exc}"})
    digest = _inputs_digest(data.digest(), outcomes, r.to_dict(), cfg, k_share, declared, slack)
    gaps = {row["outcome"]: row["gap"] for row in table}
    alternatives = [g for o, g in gaps.items() if o != declared and g is not None]
    stats = {"gaps": gaps, "declared": declared, "k": k}
    thresholds = {"slack": slack}
    if gaps[declared] is None:
        return AuditFinding("outcome_choice", stats, thresholds, "pass",
                            f"the declared outcome {declared!r} could not be trained, so no comparison was made",
                            cfg.seed, digest, {"table": table})
    if not alternatives:
        return AuditFinding("outcome_choice", stats, thresholds, "pass",
                            "no alternative outcome could be trained, so no comparison was made",
                            cfg.seed, digest, {"table": table})
    best_alt = max(alternatives)
    flag = gaps[declared] > best_alt + slack
    stats["largest_alternative_gap"] = best_alt
    narrative = (f"top-{k} selection on a screener for {declared!r} gives an acceptance gap of "
                 f"{gaps[declared]:.4f}; the largest gap among {len(alternatives)} alternative outcome(s) is "
                 f"{best_alt:.4f} (slack {slack})")
    return AuditFinding("outcome_choice", stats, thresholds, "flag" if flag else "pass", narrative, cfg.seed,
                        digest, {"table": table})


# -- training-sample drift -------------------------------------------------------------------

def _wmean(x, w) -> float:
    return float(np.average(x, weights=w)) if w.sum() > 0 else math.nan


def _feature_stats(training: Dataset, universe: Dataset, mask_t, mask_u, j: int) -> dict[str, float]:
    ft = training.schema.features[j]
    xt, wt = training.X[mask_t, j], training.weights[mask_t]
    xu, wu = universe.X[mask_u, j], universe.weights[mask_u]
    if ft.categorical:
        return {f"{ft.name}={v}": _wmean(xt == v, wt) - _wmean(xu == v, wu) for v in range(ft.cardinality)}
    sd = math.sqrt(max(_wmean((xu - _wmean(xu, wu)) ** 2, wu), 0.0))
    diff = _wmean(xt, wt) - _wmean(xu, wu)
    return {f"{ft.name} (mean, universe sd units)": diff / sd if sd > 0 else (0.0 if diff == 0 else math.inf)}


def sample_drift_audit(training: Dataset, universe: Dataset, limit: float = DEFAULT_DRIFT_LIMIT,
                       group_limit: float | None = None) -> AuditFinding:
    """Compare the training sample with the wider pool it was drawn from.

    Categorical features are compared level by level as share differences;
    real features as mean differences in units of the universe standard
    deviation. Both are reported pooled and within each group, alongside the
    difference in disadvantaged share. Any absolute value above its limit
    flags.
    """
    if training.schema.features != universe.schema.features:
        raise SchemaError("training and universe datasets have different feature schemas")
    group_limit = limit if group_limit is None else group_limit
    stats: dict[str, dict] = {}
    scopes = {"pooled": (np.ones(training.n, bool), np.ones(universe.n, bool)),
              "advantaged": (training.group == 0, universe.group == 0),
              "disadvantaged": (training.group == 1, universe.group == 1)}
    for scope, (mt, mu) in scopes.items():
        if not mt.any() or not mu.any():
            stats[scope] = {}
            continue
        row = {}
        for j in range(training.schema.arity):
            row.update(_feature_stats(training, universe, mt, mu, j))
        stats[scope] = row
    share_diff = _wmean(training.group == 1, training.weights) - _wmean(universe.group == 1, universe.weights)
    flagged = [f"{scope}: {name}" for scope, row in stats.items() for name, v in row.items() if abs(v) > limit]
    if abs(share_diff) > group_limit:
        flagged.append("disadvantaged share")
    digest = _inputs_digest(training.digest(), universe.digest(), limit, group_limit)
    narrative = (f"{len(flagged)} statistic(s) exceed their limits" + (f": {', '.join(flagged)}" if flagged else "")
                 + f"; disadvantaged share differs by {share_diff:+.4f}")
    return AuditFinding("sample_drift", {"features": stats, "group_share_difference": share_diff,
                                         "flagged": flagged},
                        {"feature_limit": limit, "group_share_limit": group_limit},
                        "flag" if flagged else "pass", narrative, None, digest)


# -- simulated-data probe --------------------------------------------------------------------

PROBE_SCHEMA = FeatureSchema((Feature("x0", "categorical", 4), Feature("x1", "categorical", 2)))


def probe_world(gap: float = 1.0) -> DiscreteWorld:
    """Probe where the disadvantaged group is shifted towards better cells.

    ``gap=0`` gives p = q, so D(f) = 0.
    """
    cells = np.stack(np.unravel_index(np.arange(PROBE_SCHEMA.n_cells), PROBE_SCHEMA.cardinalities), axis=1)
    f = cells[:, 0] + 0.5 * cells[:, 1]
    base = np.ones(PROBE_SCHEMA.n_cells)
    tilt = np.exp(gap * f)
    return DiscreteWorld(PROBE_SCHEMA, normalize_exact(base / base.sum()), normalize_exact(tilt / tilt.sum()),
                         f, f)


def honest_trainer(cfg: TrainConfig = TrainConfig()) -> Callable[[Dataset], TrainedScreener]:
    def fit(data: Dataset) -> TrainedScreener:
        return train(data, "f_obs", Representation.of(data.schema), cfg)
    return fit


def simulated_probe(trainer: TrainConfig | Callable[[Dataset], object], world: DiscreteWorld | None = None,
                    n: int = 4000, seed: int = 0, k_share: float = 0.3, noise: float = 1.0,
                    allowance: float = PROBE_SE) -> AuditFinding:
    """Feed the trainer data where the disadvantaged group is at least as good, then check who gets selected.

    Flags when the advantaged acceptance rate exceeds the disadvantaged one
    by more than ``allowance`` standard errors of the rate difference.
    """
    world = probe_world() if world is None else world
    problems = validate_world(world)
    if problems:
        raise ParameterError("invalid probe world: " + "; ".join(f"{v.name} ({v.array})" for v in problems))
    d_f = disparity(world, world.f_score).value
    if d_f > 1e-12:
        raise ParameterError(f"probe world must not favour the advantaged group (D(f) = {d_f:.4g} > 0)")
    fit = honest_trainer(trainer) if isinstance(trainer, TrainConfig) else trainer
    data = sample_world(world, n, seed, 0.5, f_noise=noise, g_noise=noise)
    screener = fit(data)
    roster = Roster(data.schema, data.ids, data.X, data.group)
    k = max(1, int(round(k_share * n)))
    sel = select_top_k(score_roster(screener, roster), k)
    ra, rd = (float(x) if x is not None else math.nan for x in sel.acceptance_rates)
    na, nd = sel.group_sizes
    se = math.sqrt(ra * (1 - ra) / max(na, 1) + rd * (1 - rd) / max(nd, 1))
    diff = ra - rd
    flag = diff > allowance * se
    digest = _inputs_digest(world.digest(), n, seed, k_share, noise, allowance)
    narrative = (f"on simulated data with D(f) = {d_f:.4f} (the disadvantaged group is at least as productive) "
                 f"the trained screener accepts {ra:.3f} of the advantaged group and {rd:.3f} of the "
                 f"disadvantaged group; the allowance is {allowance} standard errors ({allowance * se:.4f}). "
                 f"{TAMPER_NOTE}")
    return AuditFinding("simulated_probe",
                        {"advantaged_rate": ra, "disadvantaged_rate": rd, "rate_difference": diff,
                         "standard_error": se, "true_disparity": d_f, "k": k},
                        {"standard_errors": allowance, "allowance": allowance * se},
                        "flag" if flag else "pass", narrative, int(seed), digest)


def penalised(fit: Callable[[Dataset], object], penalty: float) -> Callable[[Dataset], ScoreFunction]:
    """Wrap a trainer so its screener subtracts ``penalty`` from every disadvantaged score."""
    def sabotaged(data: Dataset) -> ScoreFunction:
        s = fit(data)
        inner = s.as_score_function() if isinstance(s, TrainedScreener) else s
        return ScoreFunction(lambda X, g: inner(X, g) - penalty * (g == 1), tag="custom", uses_group=True,
                             name="penalised")
    return sabotaged
