"""Acceptance suite: one test (or a small family) per numbered criterion.

Every test tags itself with ``record_property("criterion", n)``; the conftest
hook prints a PASS/FAIL line per criterion at the end of the run.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from oracles import exact_disparity
from screenaudit.audit import honest_trainer, penalised, retrain_audit, simulated_probe
from screenaudit.cli import SIDECAR, run
from screenaudit.decompose import TERMS, decompose, decompose_empirical
from screenaudit.model import Representation, ScoreFunction
from screenaudit.scenarios import (ScenarioSpec, generate, judge_policy, random_reduced_score,
                                   random_representation, random_world, release_experiment, sample_world)
from screenaudit.screen import Roster, counterfactual, kth_without, score_roster, select_top_k
from screenaudit.tradeoff import DEFAULT_GRID, decile_matrix, dominance_check, tradeoff_curve
from screenaudit.trainer import TrainConfig, loss_and_gradient, random_screener, train, train_variants
from strategies import aware_scores, blind_scores, rosters

pytestmark = pytest.mark.acceptance

SEEDS_10 = range(10)
SEEDS_20 = range(20)


def test_c1_identity_on_random_worlds(record_property):
    record_property("criterion", 1)
    start = time.perf_counter()
    worst = 0.0
    for seed in range(100):
        w = random_world(seed)
        assert w.schema.arity <= 4 and set(w.schema.cardinalities) == {2}
        w = w.with_tables(g=random_world(10_000 + seed, n_features=w.schema.arity).g)
        r = random_representation(seed, w.schema)
        t = random_reduced_score(seed, r, w.schema)
        rep = decompose(w, r, t)
        cells = w.cells().astype(float)
        m = len(cells)
        va, vd = t(cells, np.zeros(m, dtype=np.int64)), t(cells, np.ones(m, dtype=np.int64))
        assert exact_disparity(w.p, w.q, va, vd) == pytest.approx(rep.total, abs=1e-12)
        worst = max(worst, abs(rep.residual), abs(math.fsum(rep.terms().values()) - rep.total))
    elapsed = time.perf_counter() - start
    print(f"criterion 1: max |residual| = {worst:.3e}, {elapsed:.2f}s")
    assert worst <= 1e-9
    assert elapsed < 10.0


def test_c2_collapse_case(record_property):
    record_property("criterion", 2)
    for seed in range(20):
        w = random_world(seed)
        w = w.with_tables(g=w.f)
        rep = decompose(w, Representation.identity(w.schema))
        for term in ("outcome_bias", "input_bias", "training_bias"):
            assert abs(getattr(rep, term)) <= 1e-12, (seed, term)
        assert rep.total == rep.structural


def test_c3_empirical_matches_exact(record_property):
    record_property("criterion", 3)
    worst = 0.0
    for s in SEEDS_10:
        w = random_world(1000 + s)
        r = random_representation(2000 + s, w.schema)
        t = random_reduced_score(3000 + s, r, w.schema)
        data = sample_world(w, 50_000, seed=s, f_noise=0.5, g_noise=0.5)
        emp = decompose_empirical(data, "f_obs", "g_obs", r, t, n_boot=200, seed=s)
        exact = decompose(w, r, t)
        for k in ("total",) + TERMS:
            diff = abs(getattr(emp.report, k) - getattr(exact, k))
            se = emp.standard_errors[k]
            # terms that are identically zero for this r have zero spread
            assert diff <= 3 * se + 1e-12, (s, k, diff, se)
            if se > 0:
                worst = max(worst, diff / se)
    print(f"criterion 3: max |z| = {worst:.2f}")


@pytest.fixture(scope="module")
def admissions_runs():
    """Blind and aware screeners on both admissions worlds, seeds 0..9."""
    runs = {}
    for name in ("structural_admissions", "homogeneous_control"):
        for seed in SEEDS_10:
            sc = generate(ScenarioSpec(name, seed=seed))
            v = train_variants(sc.data, "gpa", sc.representation, TrainConfig(seed=seed))
            runs[name, seed] = (sc, v["blind"], v["aware"])
    return runs


def test_c4_aware_dominates_blind(record_property):
    record_property("criterion", 4)
    start = time.perf_counter()
    for seed in SEEDS_10:
        sc = generate(ScenarioSpec("structural_admissions", seed=seed))
        assert sc.data.n == 20_000
        v = train_variants(sc.data, "gpa", sc.representation, TrainConfig(seed=seed))
        roster = Roster.from_dataset(sc.data, "gpa")
        curves = tradeoff_curve({"blind": v["blind"], "aware": v["aware"]}, roster, sc.data.n // 4,
                                DEFAULT_GRID, cut=sc.notes["efficiency_cut"])
        d = dominance_check(curves["aware"], curves["blind"], tolerance=1e-6)
        assert d.weakly_dominates and len(d.strictly_at) >= 1, seed
        assert d.compared_targets and max(d.compared_targets) <= 0.5
    elapsed = time.perf_counter() - start
    print(f"criterion 4: 10 seeds in {elapsed:.1f}s")
    assert elapsed < 120.0


def test_c5_off_diagonal_mass(record_property, admissions_runs):
    record_property("criterion", 5)
    wins = 0
    for seed in SEEDS_10:
        mass = {}
        for name in ("structural_admissions", "homogeneous_control"):
            sc, blind, aware = admissions_runs[name, seed]
            roster = Roster.from_dataset(sc.data, "gpa")
            m = decile_matrix(blind, aware, roster, lambda X, g: g == 1, ("blind", "aware"))
            mass[name] = m.off_diagonal
        wins += mass["structural_admissions"] > mass["homogeneous_control"]
    assert wins == 10


def test_c6_release_reduction(record_property):
    record_property("criterion", 6)
    for seed in SEEDS_20:
        spec = ScenarioSpec("judge_release", seed=seed)
        sc = generate(spec)
        machine = train(sc.data, "fta", sc.representation, TrainConfig(link="logistic", seed=seed))
        res = release_experiment(sc.data, machine, judge_policy(spec))
        assert res.reduction > 0, seed
        J = round(res.judge_detention_rate * res.n)
        assert sum(res.judge_detained) == J
        recombined = math.fsum(w * r for w, r in zip(res.group_weights, res.group_reduction))
        assert abs(res.reduction - recombined) <= 1e-9
        assert abs(res.accounting_residual) <= 1e-9


def test_c7_retrain_audit(record_property):
    record_property("criterion", 7)
    sc = generate(ScenarioSpec("structural_admissions", n=4000, seed=0))
    flagged_random = passed_honest = 0
    for seed in SEEDS_20:
        honest = train(sc.data, "gpa", sc.representation, TrainConfig(seed=seed))
        passed_honest += retrain_audit(honest, sc.data, "gpa", sc.representation, TrainConfig(), 0.05).verdict == "pass"
        bogus = random_screener(honest, seed)
        flagged_random += retrain_audit(bogus, sc.data, "gpa", sc.representation, TrainConfig(), 0.05).flagged
    assert flagged_random == 20 and passed_honest == 20


def test_c7_simulated_probe(record_property):
    record_property("criterion", 7)
    saboteur = penalised(honest_trainer(), 10.0)
    caught = sum(simulated_probe(saboteur, seed=seed).flagged for seed in SEEDS_20)
    false_flags = sum(simulated_probe(TrainConfig(), seed=seed).flagged for seed in range(50))
    print(f"criterion 7: saboteur flagged {caught}/20, honest false flags {false_flags}/50")
    assert caught == 20
    assert false_flags <= 2


@pytest.mark.parametrize("link", ["linear", "logistic"])
def test_c8_gradients(record_property, link):
    record_property("criterion", 8)
    rng = np.random.default_rng(11)
    Z = np.column_stack([np.ones(300), rng.standard_normal((300, 4))])
    y = rng.random(300) if link == "logistic" else rng.standard_normal(300)
    w = rng.uniform(0.5, 2.0, 300)
    eps = 1e-6
    for _ in range(10):
        theta = rng.standard_normal(5)
        _, g = loss_and_gradient(theta, Z, y, w, link)
        fd = np.array([(loss_and_gradient(theta + eps * e, Z, y, w, link)[0]
                        - loss_and_gradient(theta - eps * e, Z, y, w, link)[0]) / (2 * eps) for e in np.eye(5)])
        assert np.max(np.abs(fd - g) / np.maximum(np.abs(g), 1e-8)) < 1e-5


def test_c8_planted_coefficient(record_property):
    record_property("criterion", 8)
    from screenaudit.model import Dataset, Feature, FeatureSchema
    from screenaudit.trainer import holdout_mask

    rng = np.random.default_rng(5)
    n = 10_000
    x1, x2 = rng.standard_normal(n), rng.standard_normal(n)
    y = 0.7 + 0.3 * x1 + 0.8 * x2 + rng.standard_normal(n)
    schema = FeatureSchema((Feature("x1", "real"), Feature("x2", "real")), outcomes=("y",))
    data = Dataset(schema, np.column_stack([x1, x2]), rng.integers(0, 2, n), {"y": y})
    s = train(data, "y", Representation.of(schema), TrainConfig())
    rows = ~holdout_mask(n, s.metadata.seed, s.metadata.holdout_fraction)
    beta, *_ = np.linalg.lstsq(np.column_stack([np.ones(rows.sum()), x1[rows], x2[rows]]), y[rows], rcond=None)
    assert abs(s.weight("x1") - 0.3) <= 0.03
    assert abs(s.weight("x1") - beta[1]) <= 1e-6


def test_c9_cli_determinism(record_property, tmp_path):
    record_property("criterion", 9)
    base = tmp_path / "inputs"
    assert run(["scenario", "--name", "structural_admissions", "--n", "2000", "--seed", "4",
                "--out", str(base / "sc")]) == 0
    data = ["--data", str(base / "sc/dataset.csv"), "--schema", str(base / "sc/schema.json")]
    assert run(["train", *data, "--outcome", "gpa", "--seed", "4", "--out", str(base / "tr")]) == 0
    scr = ["--screener", str(base / "tr/screener.json")]
    audit_cfg = base / "audit.json"
    audit_cfg.write_text('{"seed": 1, "audits": [{"kind": "simulated_probe", "probe_n": 1000}]}')
    commands = [
        ["scenario", "--name", "judge_release", "--n", "800", "--seed", "3"],
        ["train", *data, "--outcome", "gpa", "--variant", "orthogonalized", "--seed", "3"],
        ["decompose", "--world", "trivial"],
        ["select", *data, *scr, "--k", "100", "--outcome", "gpa"],
        ["counterfactual", *data, *scr, "--candidate", "r00000001", "--set", "group=1", "--k", "100"],
        ["tradeoff", *data, "--outcome", "gpa", "--cut", "2.75", "--seed", "3", "--plot-data"],
        ["audit", "--config", str(audit_cfg)],
        ["release-sim", "--n", "2000", "--seed", "3"],
    ]
    for argv in commands:
        outputs = []
        for rep in ("a", "b"):
            out = tmp_path / argv[0] / rep
            assert run([*argv, "--out", str(out)]) == 0, argv
            outputs.append({p.name: p.read_bytes() for p in sorted(Path(out).iterdir()) if p.name != SIDECAR})
        assert outputs[0] and outputs[0] == outputs[1], argv[0]


# record_property only tags the test item, so sharing it across examples is harmless
CASES = settings(max_examples=1000, suppress_health_check=[HealthCheck.function_scoped_fixture])


@CASES
@given(rosters(), blind_scores(), st.data())
def test_c10_blind_group_flip(record_property, roster, score, data):
    record_property("criterion", 10)
    k = data.draw(st.integers(1, roster.n))
    flip = data.draw(st.lists(st.booleans(), min_size=roster.n, max_size=roster.n))
    group = np.where(flip, 1 - roster.group, roster.group)
    flipped = Roster(roster.schema, roster.ids, roster.X, group)
    a, b = score_roster(score, roster), score_roster(score, flipped)
    np.testing.assert_array_equal(a.scores, b.scores)
    assert select_top_k(a, k).selected == select_top_k(b, k).selected


@CASES
@given(rosters(), blind_scores(), st.data())
def test_c10_monotone_transform(record_property, roster, score, data):
    record_property("criterion", 10)
    k = data.draw(st.integers(1, roster.n))
    a, b = data.draw(st.integers(1, 5)), data.draw(st.integers(-10, 10))
    transforms = [lambda s: a * s + b, lambda s: np.exp(s / 4.0), lambda s: s ** 3]
    base = select_top_k(score_roster(score, roster), k).selected
    for fn in transforms:
        moved = ScoreFunction(lambda X, g, fn=fn: fn(score(X, g)), name="transformed")
        assert select_top_k(score_roster(moved, roster), k).selected == base


@CASES
@given(rosters(), aware_scores(), st.data())
def test_c10_counterfactual_threshold(record_property, roster, score, data):
    record_property("criterion", 10)
    k = data.draw(st.integers(1, roster.n))
    i = data.draw(st.integers(0, roster.n - 1))
    new_a = data.draw(st.integers(0, 3))
    new_g = data.draw(st.integers(0, 1))
    cid = roster.ids[i]
    res = counterfactual(score, roster, cid, {"a": new_a, "group": new_g}, k=k)
    cut = kth_without(score_roster(score, roster), k, i)
    assert res.threshold == cut
    assert res.selected_before == (res.old_score > cut)
    assert res.selected_after == (res.new_score > cut)
    assert res.flipped == ((res.old_score > cut) != (res.new_score > cut))
    # against a full re-selection on the edited roster; an exact tie with the cut is order-dependent
    X = roster.X.copy()
    X[i, 0] = new_a
    g = roster.group.copy()
    g[i] = new_g
    edited = select_top_k(score_roster(score, Roster(roster.schema, roster.ids, X, g)), k).selected
    before = select_top_k(score_roster(score, roster), k).selected
    if res.new_score != cut:
        assert (cid in edited) == res.selected_after
    if res.old_score != cut:
        assert (cid in before) == res.selected_before
