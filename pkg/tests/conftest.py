import functools

import pytest
from hypothesis import HealthCheck, settings

from mevcost import spectral

settings.register_profile("ci", derandomize=True, deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def spectrum(n: int, kind: str) -> spectral.Spectrum:
    """Eigendecompositions are expensive; share them across the session."""
    return spectral.decompose(spectral.build_graph(n, kind))


@pytest.fixture
def acceptance_report():
    def report(criterion: str, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
