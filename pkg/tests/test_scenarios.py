import numpy as np
import pytest
from scipy.stats import spearmanr

from screenaudit.decompose import decompose
from screenaudit.errors import ParameterError
from screenaudit.model import Dataset, Feature, FeatureSchema, ScoreFunction
from screenaudit.oracle import disparity
from screenaudit.scenarios import (DEFAULTS, SCENARIOS, ScenarioSpec, generate, judge_policy, random_world,
                                   release_experiment, sample_world, true_risk_logit)
from screenaudit.trainer import TrainConfig, train, train_variants


def same_dataset(a: Dataset, b: Dataset) -> bool:
    return a.digest() == b.digest()


class TestSpec:
    def test_unknown_name(self):
        with pytest.raises(ParameterError):
            ScenarioSpec("nope")

    def test_unknown_parameter(self):
        with pytest.raises(ParameterError):
            ScenarioSpec("biased_ratings", params={"bogus": 1})

    @pytest.mark.parametrize("kw", [{"n": 0}, {"group_mix": 1.0}, {"group_mix": 0.0},
                                    {"params": {"sales_noise": -1.0}}])
    def test_invalid_values(self, kw):
        with pytest.raises(ParameterError):
            ScenarioSpec("biased_ratings", **kw)

    def test_defaults_resolved_into_notes(self):
        sc = generate(ScenarioSpec("false_arrests", n=50, seed=3))
        assert sc.notes["parameters"]["false_arrest_rate"] == DEFAULTS["false_arrests"]["false_arrest_rate"]
        assert "not calibrated" in sc.notes["parameter_provenance"]
        assert "limitations" in sc.notes


@pytest.mark.parametrize("name", SCENARIOS)
class TestEveryScenario:
    def test_deterministic(self, name):
        a = generate(ScenarioSpec(name, n=300, seed=5)).data
        b = generate(ScenarioSpec(name, n=300, seed=5)).data
        assert same_dataset(a, b)

    def test_seed_matters(self, name):
        a = generate(ScenarioSpec(name, n=300, seed=5)).data
        b = generate(ScenarioSpec(name, n=300, seed=6)).data
        assert not same_dataset(a, b)

    def test_extension_keeps_earlier_rows(self, name):
        small = generate(ScenarioSpec(name, n=150, seed=2)).data
        big = generate(ScenarioSpec(name, n=400, seed=2)).data
        assert same_dataset(small, big.subset(np.arange(150)))

    def test_notes_list_directional_claims(self, name):
        sc = generate(ScenarioSpec(name, n=100, seed=0))
        assert sc.notes["directional_claims"]
        if sc.world is not None:
            assert sc.notes["planted"]["D(f)"] == disparity(sc.world, sc.world.f_score).value


def test_paired_scenarios_share_inputs():
    a = generate(ScenarioSpec("structural_admissions", seed=4, n=500)).data
    b = generate(ScenarioSpec("homogeneous_control", seed=4, n=500)).data
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.group, b.group)
    assert not np.array_equal(a.outcome("gpa"), b.outcome("gpa"))


class TestFalseArrests:
    def test_zero_rate_collapses(self):
        for seed in range(20):
            d = generate(ScenarioSpec("false_arrests", n=2000, seed=seed,
                                      params={"false_arrest_rate": 0.0})).data
            j = d.schema.index("arrests")
            a, b = d.X[d.group == 0, j], d.X[d.group == 1, j]
            se = np.sqrt(a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b))
            assert abs(a.mean() - b.mean()) <= 3 * se

    def test_directional_claims(self):
        sc = generate(ScenarioSpec("false_arrests", n=4000, seed=0))
        j = sc.data.schema.index("arrests")
        assert sc.data.X[sc.data.group == 1, j].mean() > sc.data.X[sc.data.group == 0, j].mean()
        blind = decompose(sc.world, sc.representation)
        assert abs(blind.structural) < 1e-12 and blind.input_bias < 0
        aware = decompose(sc.world, sc.representation.with_group())
        assert abs(aware.input_bias) < 1e-12


class TestBiasedRatings:
    def test_blind_input_bias_adverse(self):
        sc = generate(ScenarioSpec("biased_ratings", seed=0))
        rep = decompose(sc.world, sc.representation)
        assert abs(rep.structural) < 1e-12 and rep.input_bias > 0

    def test_aware_rating_effects(self):
        sc = generate(ScenarioSpec("biased_ratings", n=20000, seed=1))
        s = train_variants(sc.data, "sales", sc.representation, TrainConfig(seed=1))["aware"]
        adv = s.weight("rating=4")
        dis = adv + s.weight("rating=4*group")
        assert adv > 1.0
        assert abs(dis) < 0.2


class TestSelectiveLabels:
    def test_censoring_and_understatement(self):
        sc = generate(ScenarioSpec("selective_labels", n=20000, seed=0))
        y = sc.data.outcome("productivity")
        assert np.isnan(y).any() and np.isfinite(y).any()
        r = sc.representation.with_group()
        obs = train(sc.data, "productivity", r, TrainConfig())
        full = train(sc.data, "productivity_true", r, TrainConfig())
        dis = sc.data.group == 1
        assert obs.score(sc.data.X[dis], sc.data.group[dis]).mean() < full.score(sc.data.X[dis], sc.data.group[dis]).mean()
        assert obs.metadata.n_censored_dropped == int(np.isnan(y).sum())


class TestDataEntry:
    def test_outcome_bias_positive(self):
        sc = generate(ScenarioSpec("data_entry_outcomes", n=100, seed=0))
        rep = decompose(sc.world, sc.representation)
        assert abs(rep.structural) < 1e-12 and rep.outcome_bias > 0


class TestJudge:
    def test_wrong_scenario(self):
        with pytest.raises(ParameterError):
            judge_policy(ScenarioSpec("biased_ratings"))

    def test_collapse_is_rank_identical(self):
        spec = ScenarioSpec("judge_release", n=3000, seed=0, params={"severity_inflation": 1.0, "judge_noise": 0.0})
        sc = generate(spec)
        judged = judge_policy(spec)(sc.data.X)
        truth = true_risk_logit(spec.all_params(), sc.data.X)
        np.testing.assert_array_equal(np.argsort(judged, kind="stable"), np.argsort(truth, kind="stable"))

    def test_inflated_judge_ranks_worse_than_machine(self):
        for seed in range(20):
            spec = ScenarioSpec("judge_release", n=5000, seed=seed)
            sc = generate(spec)
            truth = sc.world.f[sc.world.cell_index(sc.data.X)]
            machine = train(sc.data, "fta", sc.representation, TrainConfig(link="logistic", seed=seed))
            rho_j = spearmanr(judge_policy(spec)(sc.data.X), truth).statistic
            rho_m = spearmanr(machine.score(sc.data.X), truth).statistic
            assert rho_j < rho_m

    def test_noise_sweep(self):
        reductions = {}
        for noise in (0.0, 0.5, 1.0, 1000.0):
            spec = ScenarioSpec("judge_release", n=20000, seed=0, params={"judge_noise": noise})
            sc = generate(spec)
            machine = train(sc.data, "fta", sc.representation, TrainConfig(link="logistic"))
            reductions[noise] = release_experiment(sc.data, machine, judge_policy(spec)).reduction
        assert reductions[1000.0] == max(reductions.values())


class TestRelease:
    def test_self_comparison_on_monotone_outcomes(self):
        s = FeatureSchema((Feature("v", "real"),))
        v = np.arange(100, dtype=float)
        d = Dataset(s, v[:, None], np.arange(100) % 2, {"fta": (v >= 60).astype(float)})
        judge = ScoreFunction(lambda X, g: X[:, 0])
        res = release_experiment(d, judge, judge, detention_rate=0.3)
        assert res.reduction == 0.0 and res.machine_detention_rate == res.judge_detention_rate

    def test_self_comparison_never_detains_more(self):
        spec = ScenarioSpec("judge_release", n=4000, seed=1)
        sc = generate(spec)
        j = judge_policy(spec)
        res = release_experiment(sc.data, j, j)
        assert 0.0 <= res.reduction < 0.05

    def test_accounting_identity(self):
        spec = ScenarioSpec("judge_release", n=5000, seed=2)
        sc = generate(spec)
        machine = train(sc.data, "fta", sc.representation, TrainConfig(link="logistic"))
        res = release_experiment(sc.data, machine, judge_policy(spec))
        assert res.reduction > 0
        total = sum(w * r for w, r in zip(res.group_weights, res.group_reduction))
        assert abs(total - res.reduction) <= 1e-9
        assert abs(res.accounting_residual) <= 1e-9

    def test_needs_ground_truth(self):
        spec = ScenarioSpec("judge_release", n=100, seed=0)
        sc = generate(spec)
        y = sc.data.outcome("fta").copy()
        y[0] = np.nan
        with pytest.raises(ParameterError):
            release_experiment(sc.data.replace(outcomes={"fta": y}), judge_policy(spec), judge_policy(spec))


def test_sample_world_frequencies():
    w = random_world(3, n_features=2)
    d = sample_world(w, 40000, seed=1, mix=0.5)
    adv = d.group == 0
    freq = np.bincount(w.cell_index(d.X[adv]), minlength=w.n_cells) / adv.sum()
    np.testing.assert_allclose(freq, w.p, atol=0.02)
    assert abs(d.group.mean() - 0.5) < 0.02
