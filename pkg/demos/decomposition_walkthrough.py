"""
Where does a score gap come from?
=================================

Two planted worlds, each with a different mechanism. We split the gap in
screener scores into structural disadvantage, outcome choice, input choice
and training error, first exactly from the world tables and then from a
sample with bootstrap standard errors.
"""

# %%
# Biased ratings
# --------------
# Supervisors rate the disadvantaged group at the floor most of the time, so
# ratings carry little information about their sales. A blind screener on
# (rating, experience) inherits that.

from screenaudit.decompose import LABELS, decompose, decompose_empirical
from screenaudit.scenarios import ScenarioSpec, generate
from screenaudit.trainer import TrainConfig, train


def show(title, rep):
    print(title)
    print(f"  {'total':<14}{rep.total:+.4f}   {LABELS['total']}")
    for name, value in rep.terms().items():
        print(f"  {name:<14}{value:+.4f}   {LABELS[name]}")
    print(f"  residual      {rep.residual:+.1e}")


sc = generate(ScenarioSpec("biased_ratings", n=20000, seed=0))
screener = train(sc.data, "sales", sc.representation, TrainConfig(seed=0))
show("biased_ratings, trained blind screener", decompose(sc.world, sc.representation, screener))

# %%
# Giving the screener the group label
# -----------------------------------
# With the group in r the conditional mean can read ratings differently per
# group, and the input term shrinks.

aware = sc.representation.with_group()
show("biased_ratings, best score given rating, experience and group", decompose(sc.world, aware))

# %%
# False arrests
# -------------
# Here the recorded arrest count is inflated for the disadvantaged group, so
# the same count means lower risk. Positive values favour the advantaged
# group, which for a risk score means the disadvantaged group looks riskier
# when the term is negative.

fa = generate(ScenarioSpec("false_arrests", n=20000, seed=0))
show("false_arrests, best blind score", decompose(fa.world, fa.representation))

# %%
# From a sample
# -------------
# The same split estimated from the generated rows, with a seeded bootstrap.

emp = decompose_empirical(sc.data, "sales", "sales", sc.representation, screener, n_boot=100, seed=0)
for name, value in emp.report.terms().items():
    print(f"  {name:<14}{value:+.4f} ± {emp.standard_errors[name]:.4f}")
