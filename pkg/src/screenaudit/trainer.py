"""Trainer: fits a linear or logistic screener by full-batch gradient descent.

The fitted object is a :class:`TrainedScreener`, i.e. the function t∘r that
is applied at decision time. Three variants are supported:

blind
    the group column is never read.
aware
    the group indicator enters, together with its interaction with every
    encoded feature column (group-specific slopes).
orthogonalized
    every encoded column is residualised by its within-group training mean;
    the group itself is not a predictor, but the stored means are applied at
    scoring time.

Gradient descent runs on internally standardised columns with step
``learning_rate / L``, ``L`` being the smoothness constant of the loss on that
design, and the result is mapped back to raw-scale parameters.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import expit
from scipy.stats import spearmanr

from .errors import InsufficientDataError, ParameterError, SchemaError, TrainingError
from .model import Dataset, FeatureSchema, Representation, ScoreFunction
from .rng import row_hash_uniform, stream

log = logging.getLogger(__name__)

LINKS = ("linear", "logistic")
VARIANTS = ("blind", "aware", "orthogonalized")
LOSS_NAMES = {"linear": "mean squared error", "logistic": "mean log-loss"}
FORMAT = "screenaudit.screener"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1.0
    iterations: int = 5000
    holdout_fraction: float = 0.2
    seed: int = 0
    link: str = "linear"
    tolerance: float = 1e-9

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ParameterError(f"learning_rate must be > 0, got {self.learning_rate}")
        if int(self.iterations) < 1:
            raise ParameterError(f"iterations must be >= 1, got {self.iterations}")
        if not 0 <= self.holdout_fraction <= 0.5:
            raise ParameterError(f"holdout_fraction must be in [0, 0.5], got {self.holdout_fraction}")
        if self.link not in LINKS:
            raise ParameterError(f"link must be one of {LINKS}, got {self.link!r}")
        if not self.tolerance >= 0:
            raise ParameterError("tolerance must be >= 0")


@dataclass(frozen=True)
class TrainMetadata:
    outcome: str
    seed: int | None
    learning_rate: float
    iterations: int
    iterations_run: int
    converged: bool
    gradient_norm: float
    final_train_loss: float
    final_holdout_loss: float | None
    holdout_fraction: float | None
    variant: str
    loss: str
    tolerance: float
    n_train: int
    n_holdout: int
    n_censored_dropped: int


def holdout_mask(n: int, seed: int, fraction: float) -> np.ndarray:
    """Rows reserved for validation: a stable hash of (seed, row index) below ``fraction``."""
    if fraction <= 0:
        return np.zeros(n, dtype=bool)
    return row_hash_uniform(seed, n, "holdout") < fraction


@dataclass(frozen=True, eq=False)
class Encoding:
    """Column layout of the design matrix for one representation and variant."""

    schema: FeatureSchema
    representation: Representation
    interactions: bool = False
    residualize: bool = False
    group_means: np.ndarray | None = None

    @property
    def base_columns(self) -> tuple[str, ...]:
        cols = []
        r, schema = self.representation, self.schema
        for j in r.retained:
            ft = schema.features[j]
            if ft.categorical or r._coarsening(j) is not None:
                cols += [f"{ft.name}={b}" for b in range(1, r.n_buckets(schema, j))]
            else:
                cols.append(ft.name)
        return tuple(cols)

    @property
    def uses_group(self) -> bool:
        return self.residualize or self.representation.keep_group

    @property
    def columns(self) -> tuple[str, ...]:
        base = self.base_columns
        if self.residualize or not self.representation.keep_group:
            return base
        g = self.schema.group
        if self.interactions:
            return base + (g,) + tuple(f"{c}*{g}" for c in base)
        return base + (g,)

    def base_design(self, X) -> np.ndarray:
        r, schema = self.representation, self.schema
        B = r.buckets(X, schema)
        blocks = []
        for k, j in enumerate(r.retained):
            ft = schema.features[j]
            if ft.categorical or r._coarsening(j) is not None:
                nb = r.n_buckets(schema, j)
                b = B[:, k].astype(np.int64)
                blocks.append((b[:, None] == np.arange(1, nb)[None, :]).astype(np.float64))
            else:
                blocks.append(B[:, k:k + 1])
        if not blocks:
            return np.zeros((B.shape[0], 0))
        return np.concatenate(blocks, axis=1)

    def design(self, X, group) -> np.ndarray:
        Z = self.base_design(X)
        group = np.asarray(group, dtype=np.int64).reshape(-1)
        if self.residualize:
            if self.group_means is None:
                raise ParameterError("orthogonalized encoding has no stored group means")
            return Z - self.group_means[group]
        if not self.representation.keep_group:
            return Z
        gcol = group.astype(np.float64)[:, None]
        if self.interactions:
            return np.concatenate([Z, gcol, Z * gcol], axis=1)
        return np.concatenate([Z, gcol], axis=1)


def _with_intercept(Z: np.ndarray) -> np.ndarray:
    return np.concatenate([np.ones((Z.shape[0], 1)), Z], axis=1)


def loss_and_gradient(params, design, y, weights, link: str) -> tuple[float, np.ndarray]:
    """Weighted mean loss and its gradient. ``design`` carries the intercept column."""
    params = np.asarray(params, dtype=np.float64)
    eta = design @ params
    wsum = weights.sum()
    if link == "linear":
        resid = eta - y
        loss = float(np.dot(weights, resid * resid) / wsum)
        grad = 2.0 * (design.T @ (weights * resid)) / wsum
    elif link == "logistic":
        loss = float(np.dot(weights, np.logaddexp(0.0, eta) - y * eta) / wsum)
        grad = design.T @ (weights * (expit(eta) - y)) / wsum
    else:
        raise ParameterError(f"unknown link {link!r}")
    return loss, grad


def _smoothness(design, weights, link: str) -> float:
    gram = (design * weights[:, None]).T @ design / weights.sum()
    lam = float(np.linalg.eigvalsh(gram)[-1])
    return 2.0 * lam if link == "linear" else lam / 4.0


def _descend(Z, y, w, cfg: TrainConfig):
    """Gradient descent on standardised columns; returns raw-scale parameters."""
    mu = (w @ Z) / w.sum() if Z.shape[1] else np.zeros(0)
    sd = np.sqrt(np.maximum((w @ (Z - mu) ** 2) / w.sum(), 0.0)) if Z.shape[1] else np.zeros(0)
    sd = np.where(sd > 1e-12, sd, 1.0)
    S = _with_intercept((Z - mu) / sd)
    step = cfg.learning_rate / max(_smoothness(S, w, cfg.link), 1e-12)
    theta = np.zeros(S.shape[1])
    if cfg.link == "logistic":
        ybar = min(max(float(w @ y / w.sum()), 1e-6), 1 - 1e-6)
        theta[0] = math.log(ybar / (1 - ybar))
    else:
        theta[0] = float(w @ y / w.sum())

    def to_raw(t):
        slopes = t[1:] / sd
        return np.concatenate([[t[0] - float(slopes @ mu)], slopes])

    last_good = theta.copy()
    it = 0
    gnorm = math.inf
    loss = math.nan
    for it in range(1, int(cfg.iterations) + 1):
        loss, grad = loss_and_gradient(theta, S, y, w, cfg.link)
        if not math.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise TrainingError(f"loss became non-finite at iteration {it}", last_params=to_raw(last_good), iteration=it)
        gnorm = float(np.linalg.norm(grad))
        last_good = theta.copy()
        if gnorm <= cfg.tolerance:
            break
        theta = theta - step * grad
    else:
        loss, grad = loss_and_gradient(theta, S, y, w, cfg.link)
        gnorm = float(np.linalg.norm(grad))
        if not math.isfinite(loss):
            raise TrainingError("loss became non-finite", last_params=to_raw(last_good), iteration=it)
    return to_raw(theta), it, gnorm <= cfg.tolerance, gnorm


@dataclass(frozen=True, eq=False)
class TrainedScreener:
    schema: FeatureSchema
    representation: Representation
    link: str
    params: np.ndarray
    variant: str
    metadata: TrainMetadata
    interactions: bool = False
    group_means: np.ndarray | None = None
    columns: tuple[str, ...] = field(default=())

    def __post_init__(self):
        params = np.array(self.params, dtype=np.float64)
        params.setflags(write=False)
        object.__setattr__(self, "params", params)
        if self.group_means is not None:
            gm = np.array(self.group_means, dtype=np.float64)
            gm.setflags(write=False)
            object.__setattr__(self, "group_means", gm)
        cols = self.encoding.columns
        if not self.columns:
            object.__setattr__(self, "columns", cols)
        if len(self.params) != len(cols) + 1:
            raise ParameterError(f"{len(self.params)} parameters for {len(cols)} columns plus intercept")
        if not np.all(np.isfinite(self.params)):
            raise ParameterError("screener parameters must be finite")

    @property
    def encoding(self) -> Encoding:
        return Encoding(self.schema, self.representation, self.interactions,
                        self.variant == "orthogonalized", self.group_means)

    @property
    def uses_group(self) -> bool:
        return self.encoding.uses_group

    def linear_predictor(self, X, group=None) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if group is None:
            if self.uses_group:
                raise ParameterError("this screener reads the group; pass group labels")
            group = np.zeros(X.shape[0], dtype=np.int64)
        Z = self.encoding.design(X, group)
        return self.params[0] + Z @ self.params[1:]

    def score(self, X, group=None) -> np.ndarray:
        eta = self.linear_predictor(X, group)
        return expit(eta) if self.link == "logistic" else eta

    __call__ = score

    def as_score_function(self) -> ScoreFunction:
        return ScoreFunction(lambda X, g: self.score(X, g), tag="trained_t", uses_group=self.uses_group,
                             name=f"t[{self.variant}:{self.metadata.outcome}]")

    def weight(self, column: str) -> float:
        return float(self.params[1 + self.columns.index(column)])

    def with_params(self, params) -> "TrainedScreener":
        return replace(self, params=np.asarray(params, dtype=np.float64))

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "schema_digest": self.schema.digest(),
            "schema": self.schema.to_dict(),
            "representation": self.representation.to_dict(),
            "link": self.link,
            "loss": LOSS_NAMES[self.link],
            "variant": self.variant,
            "interactions": self.interactions,
            "columns": ["intercept", *self.columns],
            "params": [float(v) for v in self.params],
            "group_means": None if self.group_means is None else self.group_means.tolist(),
            "metadata": asdict(self.metadata),
        }

    @classmethod
    def from_dict(cls, d) -> "TrainedScreener":
        if d.get("format") != FORMAT:
            raise SchemaError(f"not a screener artifact (format={d.get('format')!r})")
        if int(d.get("version", -1)) > FORMAT_VERSION:
            raise SchemaError(f"screener format version {d['version']} is newer than supported {FORMAT_VERSION}")
        schema = FeatureSchema.from_dict(d["schema"])
        if schema.digest() != d["schema_digest"]:
            raise SchemaError("schema digest does not match embedded schema")
        meta = dict(d["metadata"])
        return cls(
            schema,
            Representation.from_dict(d["representation"]),
            d["link"],
            np.asarray(d["params"], dtype=np.float64),
            d["variant"],
            TrainMetadata(**meta),
            bool(d.get("interactions", False)),
            None if d.get("group_means") is None else np.asarray(d["group_means"], dtype=np.float64),
            tuple(d["columns"][1:]),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "TrainedScreener":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _check_compatible(schema: FeatureSchema, data: Dataset) -> None:
    if schema.features != data.schema.features or schema.group != data.schema.group:
        raise SchemaError("dataset schema does not match the screener's schema")


def _rows_for(data: Dataset, outcome: str, cfg: TrainConfig):
    y_all = data.outcome(outcome)
    observed = np.isfinite(y_all)
    n_censored = int((~observed).sum())
    if not observed.any():
        raise InsufficientDataError(f"all outcomes in {outcome!r} are censored")
    hold = holdout_mask(data.n, cfg.seed, cfg.holdout_fraction)
    train_rows = observed & ~hold & (data.weights > 0)
    hold_rows = observed & hold
    if train_rows.sum() < 2:
        raise InsufficientDataError(f"fewer than 2 usable training rows for {outcome!r}")
    y = y_all[train_rows]
    if np.all(y == y[0]):
        raise InsufficientDataError(f"constant outcome: every training value of {outcome!r} is {y[0]}")
    if cfg.link == "logistic" and (np.any(y < 0) or np.any(y > 1)):
        raise ParameterError("logistic link needs outcomes in [0, 1]")
    if n_censored:
        log.info("dropped %d censored rows for outcome %r", n_censored, outcome)
    return train_rows, hold_rows, n_censored


def _fit(data: Dataset, outcome: str, enc: Encoding, cfg: TrainConfig, variant: str) -> TrainedScreener:
    enc.representation.validate(data.schema)
    train_rows, hold_rows, n_censored = _rows_for(data, outcome, cfg)
    y_all = data.outcome(outcome)
    if enc.residualize:
        base = enc.base_design(data.X[train_rows])
        g = data.group[train_rows]
        w = data.weights[train_rows]
        means = np.zeros((2, base.shape[1]))
        for grp in (0, 1):
            sel = g == grp
            if w[sel].sum() > 0:
                means[grp] = (w[sel] @ base[sel]) / w[sel].sum()
        enc = Encoding(enc.schema, enc.representation, enc.interactions, True, means)
    Z = enc.design(data.X[train_rows], data.group[train_rows])
    y = y_all[train_rows]
    w = data.weights[train_rows]
    params, its, converged, gnorm = _descend(Z, y, w, cfg)
    train_loss, _ = loss_and_gradient(params, _with_intercept(Z), y, w, cfg.link)
    hold_loss = None
    if hold_rows.any():
        Zh = _with_intercept(enc.design(data.X[hold_rows], data.group[hold_rows]))
        hold_loss, _ = loss_and_gradient(params, Zh, y_all[hold_rows], data.weights[hold_rows], cfg.link)
    meta = TrainMetadata(
        outcome=outcome,
        seed=int(cfg.seed),
        learning_rate=float(cfg.learning_rate),
        iterations=int(cfg.iterations),
        iterations_run=int(its),
        converged=bool(converged),
        gradient_norm=gnorm,
        final_train_loss=float(train_loss),
        final_holdout_loss=None if hold_loss is None else float(hold_loss),
        holdout_fraction=float(cfg.holdout_fraction),
        variant=variant,
        loss=LOSS_NAMES[cfg.link],
        tolerance=float(cfg.tolerance),
        n_train=int(train_rows.sum()),
        n_holdout=int(hold_rows.sum()),
        n_censored_dropped=n_censored,
    )
    return TrainedScreener(data.schema, enc.representation, cfg.link, params, variant, meta,
                           enc.interactions, enc.group_means)


def train(data: Dataset, outcome: str, r: Representation, cfg: TrainConfig = TrainConfig()) -> TrainedScreener:
    """Fit t∘r for ``outcome``. Censored rows are dropped; holdout rows are never read."""
    variant = "aware" if r.keep_group else "blind"
    return _fit(data, outcome, Encoding(data.schema, r), cfg, variant)


def train_variants(data: Dataset, outcome: str, base_r: Representation,
                   cfg: TrainConfig = TrainConfig()) -> dict[str, TrainedScreener]:
    """Blind, aware (group plus group interactions) and orthogonalized screeners, same config."""
    if not data.schema.group:
        raise SchemaError("schema has no group column")
    blind_r = base_r.without_group()
    return {
        "blind": _fit(data, outcome, Encoding(data.schema, blind_r), cfg, "blind"),
        "aware": _fit(data, outcome, Encoding(data.schema, base_r.with_group(), interactions=True), cfg, "aware"),
        "orthogonalized": _fit(data, outcome, Encoding(data.schema, blind_r, residualize=True), cfg,
                               "orthogonalized"),
    }


def random_screener(like: TrainedScreener, seed: int, scale: float = 1.0) -> TrainedScreener:
    """Same layout as ``like`` with i.i.d. normal parameters (a deliberately poor screener)."""
    params = scale * stream(seed, "random_screener").standard_normal(len(like.params))
    meta = replace(like.metadata, final_train_loss=math.nan, final_holdout_loss=None, converged=False)
    return replace(like, params=params, metadata=meta)


@dataclass(frozen=True)
class EvalMetrics:
    n: int
    loss: float
    group_loss: tuple[float, float]
    group_mean_score: tuple[float, float]
    rank_correlation: float


def evaluate(screener: TrainedScreener, data: Dataset, outcome: str | None = None) -> EvalMetrics:
    """Loss, per-group loss and mean score, and Spearman correlation of score with outcome."""
    _check_compatible(screener.schema, data)
    outcome = outcome or screener.metadata.outcome
    y = data.outcome(outcome)
    rows = np.isfinite(y) & (data.weights > 0)
    if not rows.any():
        raise InsufficientDataError("no evaluable (uncensored, positive-weight) rows")
    X, g, w, y = data.X[rows], data.group[rows], data.weights[rows], y[rows]
    design = _with_intercept(screener.encoding.design(X, g))
    loss, _ = loss_and_gradient(screener.params, design, y, w, screener.link)
    s = screener.score(X, g)
    gl, gm = [], []
    for grp in (0, 1):
        sel = g == grp
        if sel.any():
            gl.append(loss_and_gradient(screener.params, design[sel], y[sel], w[sel], screener.link)[0])
            gm.append(float(np.average(s[sel], weights=w[sel])) if w[sel].sum() > 0 else math.nan)
        else:
            gl.append(math.nan)
            gm.append(math.nan)
    if np.ptp(s) == 0 or np.ptp(y) == 0:
        rho = math.nan
    else:
        rho = float(spearmanr(s, y).statistic)
    return EvalMetrics(int(rows.sum()), float(loss), tuple(gl), tuple(gm), rho)


def holdout_rows(screener: TrainedScreener, n: int) -> np.ndarray:
    """Recompute a screener's holdout split from its disclosed metadata."""
    meta = screener.metadata
    if meta.seed is None or meta.holdout_fraction is None:
        raise ParameterError("screener metadata lacks the seed or holdout fraction needed to rebuild its split")
    return holdout_mask(n, meta.seed, meta.holdout_fraction)
