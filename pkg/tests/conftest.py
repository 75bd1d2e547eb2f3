import math

import numpy as np
import pytest

from bellbench.observables import MeasurementSettings, PartySetting

SQRT2 = math.sqrt(2)
TSIRELSON = 2 * SQRT2


def random_settings(rng: np.random.Generator, n: int) -> MeasurementSettings:
    """Uniform Bloch directions for both settings of every party."""
    parties = []
    for _ in range(n):
        t, tp = np.arccos(rng.uniform(-1, 1, 2))
        p, pp = rng.uniform(-math.pi, math.pi, 2)
        parties.append(PartySetting(t, p, tp, pp))
    return MeasurementSettings(tuple(parties))


def random_xy_settings(rng: np.random.Generator, n: int) -> MeasurementSettings:
    return MeasurementSettings.xy(rng.uniform(-math.pi, math.pi, n), rng.uniform(-math.pi, math.pi, n))


def cdiag(entries) -> np.ndarray:
    """Dense matrix with entries[j] at (row j, column dim-1-j); written independently of linalg."""
    d = len(entries)
    m = np.zeros((d, d), dtype=complex)
    for j, e in enumerate(entries):
        m[j, d - 1 - j] = e
    return m


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_acceptance_lines: list[str] = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
