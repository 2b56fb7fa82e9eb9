"""
Releasing more defendants at the same failure rate
==================================================

A simulated judge overweights charge severity and adds idiosyncratic
noise. A risk screener trained on the same defendants is asked to match
the judge's failure-to-appear rate among released defendants with as few
detentions as possible.
"""

# %%

from screenaudit.scenarios import ScenarioSpec, generate, judge_policy, release_experiment
from screenaudit.trainer import TrainConfig, train

spec = ScenarioSpec("judge_release", seed=0)
sc = generate(spec)
machine = train(sc.data, "fta", sc.representation, TrainConfig(link="logistic", seed=0))
res = release_experiment(sc.data, machine, judge_policy(spec))

print(f"judge detains {res.judge_detention_rate:.3f}, released FTA {res.judge_fta_rate:.4f}")
print(f"machine detains {res.machine_detention_rate:.3f}, released FTA {res.machine_fta_rate:.4f}")
print(f"detention reduction {res.reduction:.3f}")
for label, w, r in zip(("advantaged", "disadvantaged"), res.group_weights, res.group_reduction):
    print(f"  {label:<14} share of judge detentions {w:.3f}, reduction {r:.3f}")
print(f"accounting residual {res.accounting_residual:.1e}")

# %%
# Noisier judges
# --------------
# The more noise in the judge's ranking, the more room the screener has.

for noise in (0.0, 0.5, 1.0, 2.0):
    s = ScenarioSpec("judge_release", seed=0, params={"judge_noise": noise})
    d = generate(s)
    m = train(d.data, "fta", d.representation, TrainConfig(link="logistic", seed=0))
    print(f"judge noise {noise:3.1f}: reduction {release_experiment(d.data, m, judge_policy(s)).reduction:.3f}")
