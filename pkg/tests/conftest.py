import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from screenaudit.model import DiscreteWorld, Feature, FeatureSchema

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_acceptance: dict[str, list] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is not None:
        _acceptance.setdefault(str(crit), []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_acceptance, key=int):
        ok = all(_acceptance[crit])
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}")


@pytest.fixture
def trivial_world():
    """Two binary features; p and q mirror each other; g = f."""
    schema = FeatureSchema((Feature("x0", "categorical", 2), Feature("x1", "categorical", 2)))
    p = np.array([0.1, 0.2, 0.3, 0.4])
    q = np.array([0.4, 0.3, 0.2, 0.1])
    f = np.array([0.0, 1.0, 1.0, 2.0])
    return DiscreteWorld(schema, p, q, f, f)
