import math

import numpy as np
import pytest

from qstreak.fields import Envelope
from qstreak.units import wavelength_to_omega

OMEGA_800 = wavelength_to_omega(800.0)
PERIOD_800 = 2 * math.pi / OMEGA_800


@pytest.fixture
def omega():
    return OMEGA_800


@pytest.fixture
def ir_envelope():
    return Envelope("cos2", 8 * PERIOD_800, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA: dict[int, list[tuple[bool, str]]] = {}


def criterion_line(n: int) -> str:
    parts = _CRITERIA[n]
    status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
    return f"criterion {n}: [{status}] " + "; ".join(detail for _, detail in parts)


@pytest.fixture
def criterion():
    """``record(n, ok, detail)`` adds one check to acceptance criterion ``n``."""
    def record(n: int, ok: bool, detail: str) -> bool:
        _CRITERIA.setdefault(n, []).append((bool(ok), detail))
        print(criterion_line(n))
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(criterion_line(n))
