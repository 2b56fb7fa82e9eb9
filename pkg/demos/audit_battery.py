"""
Auditing a trainer
==================

Each check returns a finding with statistics, thresholds and a verdict. A
pass only means this check saw nothing; the narratives spell out what each
one cannot see.
"""

# %%
# Retraining
# ----------
# An auditor who rebuilds the training split can tell an honest fit from
# parameters that were not obtained by minimising the loss.

import numpy as np

from screenaudit.audit import (honest_trainer, outcome_choice_audit, penalised, retrain_audit,
                               sample_drift_audit, simulated_probe)
from screenaudit.scenarios import ScenarioSpec, generate
from screenaudit.trainer import TrainConfig, random_screener, train

sc = generate(ScenarioSpec("structural_admissions", n=4000, seed=0))
honest = train(sc.data, "gpa", sc.representation, TrainConfig(seed=0))
for label, s in (("honest", honest), ("random", random_screener(honest, 1))):
    f = retrain_audit(s, sc.data, "gpa", sc.representation)
    print(f"retrain audit, {label:<7} {f.verdict:<5} loss ratio {f.statistics['loss_ratio']:.3f}")

# %%
# Outcome choice
# --------------
# Hours worked carries a caregiver penalty that sales volume does not.

de = generate(ScenarioSpec("data_entry_outcomes", n=10000, seed=0))
f = outcome_choice_audit(de.data, ["hours", "volume"], de.representation, 0.3)
print(f"outcome choice: {f.verdict}, gaps {f.statistics['gaps']}")

# %%
# Who is in the training data?
# ----------------------------
# Only hired applicants have a productivity label, and the two groups were
# hired by different rules.

sl = generate(ScenarioSpec("selective_labels", n=10000, seed=0))
hired = sl.data.subset(np.isfinite(sl.data.outcome("productivity")))
f = sample_drift_audit(hired, sl.data)
print(f"sample drift: {f.verdict}, flagged {f.statistics['flagged']}")

# %%
# Probing with planted ground truth
# ---------------------------------
# The probe world is built so the disadvantaged group truly scores higher. An
# honest trainer selects them more often; a trainer that quietly docks the
# group does not.

for label, trainer in (("honest", TrainConfig()), ("penalised", penalised(honest_trainer(), 10.0))):
    f = simulated_probe(trainer, seed=0)
    st = f.statistics
    print(f"probe, {label:<9} {f.verdict:<5} advantaged {st['advantaged_rate']:.3f} "
          f"disadvantaged {st['disadvantaged_rate']:.3f}")
