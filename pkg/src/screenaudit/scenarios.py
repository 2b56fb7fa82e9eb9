"""Seeded synthetic scenarios with planted discrimination mechanisms.

Every scenario draws each random variable from its own named stream (see
:mod:`screenaudit.rng`), one value per row in row order. Growing ``n``
therefore appends rows without changing earlier ones, and two scenarios that
share stream names (``structural_admissions`` and ``homogeneous_control``)
see identical draws for shared rows.

All default parameters below are package choices made to exhibit each
mechanism clearly; none are calibrated to real data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import expit, logit

from .errors import ParameterError
from .model import (Dataset, DiscreteWorld, Feature, FeatureSchema, Representation, ScoreFunction,
                    enumerate_cells, normalize_exact)
from .oracle import disparity
from .rng import normals, stream, uniforms

DEFAULTS: dict[str, dict] = {
    "biased_ratings": {
        "group_mix": 0.5, "n": 10000,
        "skill_probs": [0.3, 0.4, 0.3], "experience_probs": [0.5, 0.5],
        "rating_noise": 0.7, "floor_prob": 0.95,
        "base_sales": 1.0, "skill_effect": 1.0, "experience_effect": 0.3, "sales_noise": 0.5,
    },
    "false_arrests": {
        "group_mix": 0.5, "n": 10000,
        "propensity_probs": [0.5, 0.3, 0.2], "arrest_rates": [0.2, 1.0, 2.0],
        "false_arrest_rate": 0.5, "fta_probs": [0.1, 0.25, 0.45], "young_fta_bump": 0.05,
        "young_share": 0.5,
    },
    "structural_admissions": {
        "group_mix": 0.3, "n": 20000,
        "test_shift": -0.6, "grades_shift": -0.3,
        "base_gpa": 3.1, "adv_test": 0.4, "adv_grades": 0.0, "dis_test": 0.0, "dis_grades": 0.4,
        "activities_effect": 0.05, "gpa_noise": 0.3, "gpa_cut": 2.75,
    },
    "homogeneous_control": {
        "group_mix": 0.3, "n": 20000,
        "test_shift": -0.6, "grades_shift": -0.3,
        "base_gpa": 3.1, "adv_test": 0.4, "adv_grades": 0.0, "dis_test": 0.4, "dis_grades": 0.0,
        "activities_effect": 0.05, "gpa_noise": 0.3, "gpa_cut": 2.75,
    },
    "selective_labels": {
        "group_mix": 0.5, "n": 10000,
        "referral_loading": 0.8, "credential_probs": [0.3, 0.4, 0.3],
        "base_productivity": 1.0, "interview_effect": 0.5, "credential_effect": 0.3,
        "productivity_noise": 0.3, "gate_noise": 0.5,
    },
    "judge_release": {
        "group_mix": 0.5, "n": 20000,
        "severity_probs": [0.5, 0.3, 0.2],
        "adv_prior_probs": [0.4, 0.25, 0.15, 0.12, 0.08], "dis_prior_probs": [0.25, 0.22, 0.2, 0.18, 0.15],
        "young_share": 0.5,
        "risk_intercept": -2.0, "prior_coef": 0.55, "severity_coef": 0.1, "young_coef": 0.3,
        "severity_inflation": 5.0, "judge_noise": 0.8, "detention_rate": 0.3,
    },
    "data_entry_outcomes": {
        "group_mix": 0.5, "n": 10000,
        "skill_probs": [0.25, 0.25, 0.25, 0.25], "adv_caregiver": 0.2, "dis_caregiver": 0.6,
        "base_volume": 10.0, "volume_per_skill": 3.0, "volume_noise": 2.0,
        "base_hours": 40.0, "hours_per_skill": 1.0, "caregiver_hours": 8.0, "hours_noise": 2.0,
    },
}
SCENARIOS = tuple(DEFAULTS)
LIMITATIONS = {
    "false_arrests": "every true offence leads to an arrest; under-detection is not modelled",
}


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    n: int | None = None
    seed: int = 0
    group_mix: float | None = None
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in DEFAULTS:
            raise ParameterError(f"unknown scenario {self.name!r}; choose from {SCENARIOS}")
        unknown = set(self.params) - set(DEFAULTS[self.name])
        if unknown:
            raise ParameterError(f"unknown parameters for {self.name}: {sorted(unknown)}")
        if self.resolved("n") < 1:
            raise ParameterError("n must be >= 1")
        if not 0 < self.resolved("group_mix") < 1:
            raise ParameterError("group_mix must be in (0, 1)")
        for key, value in self.all_params().items():
            if key.endswith("noise") and value < 0:
                raise ParameterError(f"{key} must be >= 0")

    def resolved(self, key: str):
        if key == "n" and self.n is not None:
            return int(self.n)
        if key == "group_mix" and self.group_mix is not None:
            return float(self.group_mix)
        return self.params.get(key, DEFAULTS[self.name][key])

    def all_params(self) -> dict:
        return {k: self.resolved(k) for k in DEFAULTS[self.name]}


@dataclass(frozen=True, eq=False)
class Scenario:
    spec: ScenarioSpec
    data: Dataset
    world: DiscreteWorld | None
    notes: dict
    representation: Representation
    outcome: str


def _probs(p) -> np.ndarray:
    return normalize_exact(np.asarray(p, dtype=np.float64))


def scenario_ids(n: int) -> tuple[str, ...]:
    """Row ids that do not change when ``n`` grows."""
    width = max(8, len(str(max(n - 1, 0))))
    return tuple(f"r{i:0{width}d}" for i in range(n))


def _draw_group(seed: int, n: int, mix: float) -> np.ndarray:
    return (uniforms(seed, "group", n) < mix).astype(np.int64)


def _inverse_cdf(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    cum = np.cumsum(probs)
    return np.minimum(np.searchsorted(cum, u * cum[-1], side="right"), len(probs) - 1)


def sample_world(world: DiscreteWorld, n: int, seed: int, mix: float = 0.5, stratified: bool = False,
                 f_noise: float = 0.0, g_noise: float = 0.0, f_column: str = "f_obs",
                 g_column: str = "g_obs") -> Dataset:
    """Draw rows from a world: group, then cell from p or q, then noisy f and g.

    ``stratified=True`` fixes the group counts at ``round(mix * n)``
    disadvantaged rows instead of drawing each label.
    """
    if stratified:
        nd = int(round(mix * n))
        group = np.concatenate([np.zeros(n - nd, dtype=np.int64), np.ones(nd, dtype=np.int64)])
    else:
        group = _draw_group(seed, n, mix)
    u = uniforms(seed, "cell", n)
    cell = np.where(group == 0, _inverse_cdf(world.p, u), _inverse_cdf(world.q, u))
    X = world.cells()[cell].astype(np.float64)
    f = world.f[cell] + f_noise * normals(seed, "f_noise", n)
    g = world.g[cell] + g_noise * normals(seed, "g_noise", n)
    schema = FeatureSchema(world.schema.features, world.schema.group, (f_column, g_column))
    return Dataset(schema, X, group, {f_column: f, g_column: g}, provenance=f"world {world.digest()} seed {seed}")


def random_world(seed: int, n_features: int | None = None, cardinality: int = 2) -> DiscreteWorld:
    """Small world with Dirichlet(1) masses and standard-normal f and g tables."""
    rs = stream(seed, "random_world")
    d = int(rs.integers(1, 5)) if n_features is None else int(n_features)
    schema = FeatureSchema(tuple(Feature(f"x{i}", "categorical", cardinality) for i in range(d)))
    m = schema.n_cells
    p = normalize_exact(rs.dirichlet(np.ones(m)))
    q = normalize_exact(rs.dirichlet(np.ones(m)))
    return DiscreteWorld(schema, p, q, rs.standard_normal(m), rs.standard_normal(m))


def random_representation(seed: int, schema: FeatureSchema) -> Representation:
    rs = stream(seed, "random_representation")
    keep = [j for j in range(schema.arity) if rs.random() < 0.5]
    return Representation(tuple(keep), (), bool(rs.random() < 0.5))


def random_reduced_score(seed: int, r: Representation, schema: FeatureSchema) -> ScoreFunction:
    """Arbitrary function of r(x): a random table over the reduced space."""
    size = int(np.prod(r.reduced_shape(schema), dtype=np.int64))
    table = stream(seed, "random_reduced_score").standard_normal(size)
    return ScoreFunction.from_reduced_table(table, r, schema, tag="trained_t", name="random t")


def _world_from_factors(features, p_factors, q_factors, f_fn, g_fn) -> DiscreteWorld:
    """World whose masses are products of per-feature (possibly conditional) factors."""
    schema = FeatureSchema(tuple(features))
    cells = enumerate_cells(schema.cardinalities)
    p = normalize_exact(p_factors(cells))
    q = normalize_exact(q_factors(cells))
    return DiscreteWorld(schema, p, q, f_fn(cells), g_fn(cells))


def _planted_disparities(world: DiscreteWorld) -> dict:
    return {"D(f)": disparity(world, world.f_score).value, "D(g)": disparity(world, world.g_score).value}


def _notes(spec: ScenarioSpec, **extra) -> dict:
    notes = {
        "scenario": spec.name,
        "seed": spec.seed,
        "n": spec.resolved("n"),
        "parameters": spec.all_params(),
        "parameter_provenance": "package defaults chosen to exhibit the mechanism; not calibrated to any dataset",
        "group_coding": {"0": "advantaged", "1": "disadvantaged"},
    }
    if spec.name in LIMITATIONS:
        notes["limitations"] = LIMITATIONS[spec.name]
    notes.update(extra)
    return notes


# -- world-based scenarios -------------------------------------------------------------------

def _rating_table(noise: float) -> np.ndarray:
    """P(rating | skill) for an informative rater: rating centred on 2 * skill."""
    r = np.arange(5)[None, :]
    s = np.arange(3)[:, None]
    w = np.exp(-((r - 2 * s) ** 2) / (2 * max(noise, 1e-6) ** 2))
    return w / w.sum(axis=1, keepdims=True)


def _biased_ratings_world(P) -> DiscreteWorld:
    skill_p = np.asarray(P["skill_probs"], float)
    exp_p = np.asarray(P["experience_probs"], float)
    informative = _rating_table(P["rating_noise"])
    floor = P["floor_prob"]
    dis_rating = floor * (np.arange(5) == 0) + (1 - floor) / 5.0

    def sales(c):
        return P["base_sales"] + P["skill_effect"] * c[:, 0] + P["experience_effect"] * c[:, 2]

    return _world_from_factors(
        [Feature("skill", "categorical", 3), Feature("rating", "categorical", 5),
         Feature("experience", "categorical", len(exp_p))],
        lambda c: skill_p[c[:, 0]] * informative[c[:, 0], c[:, 1]] * exp_p[c[:, 2]],
        lambda c: skill_p[c[:, 0]] * dis_rating[c[:, 1]] * exp_p[c[:, 2]],
        sales, sales,
    )


def _capped_poisson(rate: float, cap: int) -> np.ndarray:
    k = np.arange(cap + 1)
    pmf = np.exp(-rate) * rate ** k / np.array([math.factorial(i) for i in k], dtype=float)
    pmf[cap] = max(0.0, 1.0 - pmf[:cap].sum())
    return pmf


def _false_arrests_world(P) -> DiscreteWorld:
    prop_p = np.asarray(P["propensity_probs"], float)
    rates = np.asarray(P["arrest_rates"], float)
    inflate = 1.0 / (1.0 - P["false_arrest_rate"])
    adv_arrests = np.stack([_capped_poisson(r, 4) for r in rates])
    dis_arrests = np.stack([_capped_poisson(r * inflate, 4) for r in rates])
    age_p = np.array([P["young_share"], 1 - P["young_share"]])
    fta = np.asarray(P["fta_probs"], float)

    def risk(c):
        return fta[c[:, 0]] + P["young_fta_bump"] * (c[:, 2] == 0)

    return _world_from_factors(
        [Feature("propensity", "categorical", 3), Feature("arrests", "categorical", 5),
         Feature("age", "categorical", 2)],
        lambda c: prop_p[c[:, 0]] * adv_arrests[c[:, 0], c[:, 1]] * age_p[c[:, 2]],
        lambda c: prop_p[c[:, 0]] * dis_arrests[c[:, 0], c[:, 1]] * age_p[c[:, 2]],
        risk, risk,
    )


def _judge_world(P) -> DiscreteWorld:
    sev = np.asarray(P["severity_probs"], float)
    pa, pd = np.asarray(P["adv_prior_probs"], float), np.asarray(P["dis_prior_probs"], float)
    age = np.array([P["young_share"], 1 - P["young_share"]])

    def risk(c):
        return expit(true_risk_logit(P, c))

    return _world_from_factors(
        [Feature("severity", "categorical", 3), Feature("priors", "categorical", 5), Feature("age", "categorical", 2)],
        lambda c: sev[c[:, 0]] * pa[c[:, 1]] * age[c[:, 2]],
        lambda c: sev[c[:, 0]] * pd[c[:, 1]] * age[c[:, 2]],
        risk, risk,
    )


def true_risk_logit(P, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return (P["risk_intercept"] + P["severity_coef"] * X[:, 0] + P["prior_coef"] * X[:, 1]
            + P["young_coef"] * (X[:, 2] == 0))


def _data_entry_world(P) -> DiscreteWorld:
    skill = np.asarray(P["skill_probs"], float)
    ca = np.array([1 - P["adv_caregiver"], P["adv_caregiver"]])
    cd = np.array([1 - P["dis_caregiver"], P["dis_caregiver"]])
    return _world_from_factors(
        [Feature("skill", "categorical", len(skill)), Feature("caregiver", "categorical", 2)],
        lambda c: skill[c[:, 0]] * ca[c[:, 1]],
        lambda c: skill[c[:, 0]] * cd[c[:, 1]],
        lambda c: P["base_volume"] + P["volume_per_skill"] * c[:, 0],
        lambda c: P["base_hours"] + P["hours_per_skill"] * c[:, 0] - P["caregiver_hours"] * c[:, 1],
    )


def _from_world(spec: ScenarioSpec, world: DiscreteWorld, outcomes: dict, provenance: str) -> Dataset:
    n, mix, seed = spec.resolved("n"), spec.resolved("group_mix"), spec.seed
    group = _draw_group(seed, n, mix)
    u = uniforms(seed, "cell", n)
    cell = np.where(group == 0, _inverse_cdf(world.p, u), _inverse_cdf(world.q, u))
    X = world.cells()[cell].astype(np.float64)
    cols = {name: fn(cell, n) for name, fn in outcomes.items()}
    schema = FeatureSchema(world.schema.features, world.schema.group, tuple(cols))
    return Dataset(schema, X, group, cols, ids=scenario_ids(n), provenance=provenance)


def _gen_biased_ratings(spec: ScenarioSpec) -> Scenario:
    P = spec.all_params()
    world = _biased_ratings_world(P)
    data = _from_world(spec, world, {
        "sales": lambda c, n: world.f[c] + P["sales_noise"] * normals(spec.seed, "sales_noise", n),
    }, f"biased_ratings seed {spec.seed}")
    r = Representation.of(world.schema, ["rating", "experience"])
    notes = _notes(spec, latent_features=["skill"], outcome="sales",
                   planted=_planted_disparities(world),
                   mechanism="advantaged ratings centre on 2*skill; disadvantaged ratings sit at 0 with "
                             "probability floor_prob and are otherwise uniform, carrying no skill signal",
                   directional_claims=[
                       "blind representation (rating, experience): input_bias > 0, i.e. adverse to the "
                       "disadvantaged group",
                       "aware screener: rating effects positive for the advantaged group, near zero for the "
                       "disadvantaged group",
                   ])
    return Scenario(spec, data, world, notes, r, "sales")


def _gen_false_arrests(spec: ScenarioSpec) -> Scenario:
    P = spec.all_params()
    world = _false_arrests_world(P)
    data = _from_world(spec, world, {
        "fta": lambda c, n: (uniforms(spec.seed, "fta", n) < world.f[c]).astype(np.float64),
    }, f"false_arrests seed {spec.seed}")
    r = Representation.of(world.schema, ["arrests", "age"])
    notes = _notes(spec, latent_features=["propensity"], outcome="fta",
                   planted=_planted_disparities(world),
                   false_arrest_share_of_disadvantaged_arrests=P["false_arrest_rate"],
                   mechanism="equal offending across groups; disadvantaged arrest counts are Poisson with the "
                             "rate inflated by 1/(1 - false_arrest_rate); FTA depends on true propensity only",
                   directional_claims=[
                       "false_arrest_rate > 0: disadvantaged mean arrests higher",
                       "blind representation (arrests, age): D(h∘r) < 0 for the risk score, i.e. the "
                       "disadvantaged group is scored riskier although D(f) = 0",
                       "representation that keeps the group: D(h∘r) = D(f) exactly (within-group tower "
                       "property)",
                   ])
    return Scenario(spec, data, world, notes, r, "fta")


def _gen_judge_release(spec: ScenarioSpec) -> Scenario:
    P = spec.all_params()
    world = _judge_world(P)
    data = _from_world(spec, world, {
        "fta": lambda c, n: (uniforms(spec.seed, "fta", n) < world.f[c]).astype(np.float64),
    }, f"judge_release seed {spec.seed}")
    r = Representation.of(world.schema)
    notes = _notes(spec, outcome="fta", planted=_planted_disparities(world),
                   mechanism="true FTA log-odds driven mostly by priors; the judge's score inflates the "
                             "severity coefficient by severity_inflation and adds per-defendant normal noise",
                   directional_claims=["machine release rule detains fewer people at the judge's FTA rate"])
    return Scenario(spec, data, world, notes, r, "fta")


def _gen_data_entry(spec: ScenarioSpec) -> Scenario:
    P = spec.all_params()
    world = _data_entry_world(P)
    data = _from_world(spec, world, {
        "volume": lambda c, n: world.f[c] + P["volume_noise"] * normals(spec.seed, "volume_noise", n),
        "hours": lambda c, n: world.g[c] + P["hours_noise"] * normals(spec.seed, "hours_noise", n),
    }, f"data_entry_outcomes seed {spec.seed}")
    r = Representation.of(world.schema)
    notes = _notes(spec, outcome="volume", alternative_outcomes=["hours"], planted=_planted_disparities(world),
                   mechanism="a home-constraint indicator (caregiver), more common in the disadvantaged group, "
                             "lowers hours at work but not volume entered",
                   directional_claims=["selection on predicted hours has a larger group acceptance gap than "
                                       "selection on predicted volume"])
    return Scenario(spec, data, world, notes, r, "volume")


# -- sample-only scenarios -------------------------------------------------------------------

ADMISSIONS_SCHEMA = FeatureSchema(
    (Feature("test", "real"), Feature("grades", "real"), Feature("activities", "categorical", 3)),
    outcomes=("gpa",),
)


def _gen_admissions(spec: ScenarioSpec) -> Scenario:
    P = spec.all_params()
    n, seed = spec.resolved("n"), spec.seed
    group = _draw_group(seed, n, spec.resolved("group_mix"))
    dis = group == 1
    test = normals(seed, "test", n) + P["test_shift"] * dis
    grades = normals(seed, "grades", n) + P["grades_shift"] * dis
    activities = _inverse_cdf(np.array([0.3, 0.4, 0.3]), uniforms(seed, "activities", n)).astype(np.float64)
    b_test = np.where(dis, P["dis_test"], P["adv_test"])
    b_grades = np.where(dis, P["dis_grades"], P["adv_grades"])
    expected = P["base_gpa"] + b_test * test + b_grades * grades + P["activities_effect"] * activities
    gpa = expected + P["gpa_noise"] * normals(seed, "gpa_noise", n)
    data = Dataset(ADMISSIONS_SCHEMA, np.column_stack([test, grades, activities]), group, {"gpa": gpa},
                   ids=scenario_ids(n), provenance=f"{spec.name} seed {seed}")
    notes = _notes(spec, outcome="gpa", efficiency_cut=P["gpa_cut"],
                   coefficients={"advantaged": {"test": P["adv_test"], "grades": P["adv_grades"]},
                                 "disadvantaged": {"test": P["dis_test"], "grades": P["dis_grades"]}},
                   mechanism="disadvantaged feature means shifted down (structural disadvantage); "
                             + ("the two groups share coefficients" if spec.name == "homogeneous_control"
                                else "group-specific coefficients link test and grades to college GPA"),
                   directional_claims=(
                       ["aware screener's tradeoff curve weakly dominates the blind one",
                        "blind vs aware decile disagreement on the disadvantaged group exceeds homogeneous_control"]
                       if spec.name == "structural_admissions" else
                       ["blind and aware screeners rank nearly identically"]))
    return Scenario(spec, data, None, notes, Representation.of(ADMISSIONS_SCHEMA), "gpa")


SELECTIVE_SCHEMA = FeatureSchema(
    (Feature("referral", "real"), Feature("credentials", "categorical", 3)),
    outcomes=("productivity", "productivity_true"),
)


def _gen_selective_labels(spec: ScenarioSpec) -> Scenario:
    P = spec.all_params()
    n, seed = spec.resolved("n"), spec.seed
    group = _draw_group(seed, n, spec.resolved("group_mix"))
    interview = normals(seed, "interview", n)
    load = P["referral_loading"]
    referral = load * interview + math.sqrt(max(0.0, 1 - load * load)) * normals(seed, "referral", n)
    cred = _inverse_cdf(np.asarray(P["credential_probs"], float), uniforms(seed, "credentials", n))
    productivity = (P["base_productivity"] + P["interview_effect"] * interview + P["credential_effect"] * cred
                    + P["productivity_noise"] * normals(seed, "productivity_noise", n))
    gate = interview + P["gate_noise"] * normals(seed, "gate_noise", n)
    hired = np.where(group == 0, gate > 0, interview < 0)
    observed = np.where(hired, productivity, np.nan)
    data = Dataset(SELECTIVE_SCHEMA, np.column_stack([referral, cred.astype(np.float64)]), group,
                   {"productivity": observed, "productivity_true": productivity},
                   ids=scenario_ids(n), provenance=f"selective_labels seed {seed}")
    notes = _notes(spec, outcome="productivity", latent_features=["interview"],
                   ground_truth_columns=["productivity_true"],
                   censoring_rule="advantaged hired iff interview + gate_noise * N(0,1) > 0; disadvantaged hired "
                                  "iff interview < 0; productivity observed only for hired rows",
                   hired_share={"advantaged": float(hired[group == 0].mean()) if (group == 0).any() else None,
                                "disadvantaged": float(hired[group == 1].mean()) if (group == 1).any() else None},
                   directional_claims=[
                       "hired sample vs all applicants: disadvantaged referral mean drops (drift flagged)",
                       "aware screener trained on observed labels understates disadvantaged productivity "
                       "relative to one trained on productivity_true",
                   ])
    return Scenario(spec, data, None, notes, Representation.of(SELECTIVE_SCHEMA), "productivity")


_GENERATORS = {
    "biased_ratings": _gen_biased_ratings,
    "false_arrests": _gen_false_arrests,
    "structural_admissions": _gen_admissions,
    "homogeneous_control": _gen_admissions,
    "selective_labels": _gen_selective_labels,
    "judge_release": _gen_judge_release,
    "data_entry_outcomes": _gen_data_entry,
}


def generate(spec: ScenarioSpec) -> Scenario:
    """Dataset, optional exact world, suggested representation and ground-truth notes."""
    return _GENERATORS[spec.name](spec)


def judge_policy(spec: ScenarioSpec) -> ScoreFunction:
    """The planted judge: true log-odds with severity over-weighted, plus per-defendant noise.

    The noise for the i-th row of an evaluated batch is the i-th draw of the
    ``(seed, "judge_noise")`` stream, so on the scenario dataset row i is
    defendant i.
    """
    if spec.name != "judge_release":
        raise ParameterError(f"judge_policy needs a judge_release spec, got {spec.name!r}")
    P = spec.all_params()
    inflation, noise = P["severity_inflation"], P["judge_noise"]

    def fn(X, group):
        base = true_risk_logit(P, X) + (inflation - 1.0) * P["severity_coef"] * X[:, 0]
        if noise == 0:
            return base
        return base + noise * normals(spec.seed, "judge_noise", X.shape[0])

    return ScoreFunction(fn, tag="custom", uses_group=False, name="judge")


@dataclass(frozen=True)
class ReleaseResult:
    n: int
    judge_detention_rate: float
    judge_fta_rate: float
    machine_detention_rate: float
    machine_fta_rate: float
    reduction: float
    judge_detained: tuple[int, int]
    machine_detained: tuple[int, int]
    group_reduction: tuple[float | None, float | None]
    group_weights: tuple[float, float]
    accounting_residual: float

    def to_dict(self) -> dict:
        from dataclasses import asdict
        return asdict(self)


def release_experiment(data: Dataset, screener, judge: ScoreFunction | np.ndarray,
                       detention_rate: float | None = None, outcome: str = "fta",
                       capacity_sweep=None) -> ReleaseResult:
    """Compare the judge's detentions with a risk-ranked machine rule at equal FTA.

    The judge detains the top ``detention_rate`` share by judge score. The
    machine detains its top-j by predicted risk, with j the smallest sweep
    value whose released-set FTA rate is no higher than the judge's.
    ``reduction = 1 - machine_rate / judge_rate``; per-group reductions,
    weighted by each group's share of judge detentions, add up to it.
    """
    from .screen import Roster, score_roster

    y = data.outcome(outcome)
    if not np.all(np.isfinite(y)):
        raise ParameterError("release_experiment needs ground-truth outcomes for every defendant")
    n = data.n
    if detention_rate is None:
        detention_rate = DEFAULTS["judge_release"]["detention_rate"]
    if not 0 < detention_rate < 1:
        raise ParameterError("detention_rate must be in (0, 1)")
    roster = Roster(data.schema, data.ids, data.X, data.group)
    judge_scores = np.asarray(judge, dtype=np.float64) if isinstance(judge, np.ndarray) else score_roster(judge, roster).scores
    machine_scores = score_roster(screener, roster).scores
    pos = np.arange(n)
    j_order = np.lexsort((pos, -judge_scores))
    m_order = np.lexsort((pos, -machine_scores))
    J = int(round(detention_rate * n))
    if J < 1:
        raise ParameterError("judge detains nobody at this detention rate")
    judge_fta = float(y[j_order[J:]].mean()) if J < n else 0.0
    csum = np.concatenate([[0.0], np.cumsum(y[m_order])])
    total = csum[-1]
    remaining = n - np.arange(n + 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        released_rate = np.where(remaining > 0, (total - csum) / np.maximum(remaining, 1), 0.0)
    if capacity_sweep is None:
        candidates = np.arange(n + 1)
    else:
        candidates = np.unique(np.clip(np.round(np.asarray(capacity_sweep, float) * n).astype(np.int64), 0, n))
    ok = candidates[released_rate[candidates] <= judge_fta + 1e-12]
    M = int(ok.min()) if ok.size else n
    g = data.group
    jd = tuple(int(np.sum(g[j_order[:J]] == grp)) for grp in (0, 1))
    md = tuple(int(np.sum(g[m_order[:M]] == grp)) for grp in (0, 1))
    reduction = 1.0 - M / J
    weights = tuple(jd[i] / J for i in (0, 1))
    group_red = tuple((1.0 - md[i] / jd[i]) if jd[i] else None for i in (0, 1))
    recombined = math.fsum(w * (gr if gr is not None else 0.0) for w, gr in zip(weights, group_red))
    # a group the judge never detains contributes its machine detentions as a pure increase
    extra = math.fsum(md[i] / J for i in (0, 1) if jd[i] == 0)
    residual = reduction - (recombined - extra)
    return ReleaseResult(n, J / n, judge_fta, M / n, float(released_rate[M]), reduction, jd, md, group_red,
                         weights, residual)
