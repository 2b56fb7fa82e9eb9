"""
Diversity targets and screener awareness
========================================

In the structural admissions world test scores predict grades for the
advantaged group and school grades predict them for the disadvantaged
group. A screener allowed to see the group can weigh each signal where it
works. We sweep a target share of disadvantaged admits and track how many
admits fall below a grade cut.
"""

# %%
# Train both screeners

from screenaudit.screen import Roster
from screenaudit.scenarios import ScenarioSpec, generate
from screenaudit.tradeoff import decile_matrix, dominance_check, tradeoff_curve
from screenaudit.trainer import TrainConfig, train_variants

sc = generate(ScenarioSpec("structural_admissions", seed=0))
v = train_variants(sc.data, "gpa", sc.representation, TrainConfig(seed=0))
roster = Roster.from_dataset(sc.data, "gpa")
k = sc.data.n // 4
cut = sc.notes["efficiency_cut"]

# %%
# Sweep the target
# ----------------
# Lower is better: the metric is the share of admits whose grades end up
# below the cut.

curves = tradeoff_curve({"blind": v["blind"], "aware": v["aware"]}, roster, k, cut=cut)
print(f"{'target':>7} {'blind':>8} {'aware':>8}")
for t in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5):
    b, a = curves["blind"].at(t), curves["aware"].at(t)
    print(f"{t:7.2f} {b.efficiency:8.4f} {a.efficiency:8.4f}")

d = dominance_check(curves["aware"], curves["blind"])
print(f"aware weakly dominates blind: {d.weakly_dominates}; strictly better at {len(d.strictly_at)} targets")

# %%
# Who moves?
# ----------
# Rank deciles of disadvantaged applicants under the two screeners. Mass off
# the diagonal means the screeners disagree about who is strong.

for name in ("structural_admissions", "homogeneous_control"):
    s = generate(ScenarioSpec(name, seed=0))
    vv = train_variants(s.data, "gpa", s.representation, TrainConfig(seed=0))
    m = decile_matrix(vv["blind"], vv["aware"], Roster.from_dataset(s.data, "gpa"), lambda X, g: g == 1)
    print(f"{name:<24} off-diagonal mass {m.off_diagonal:.3f}")
