import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from driftnet.config import ExperimentConfig  # noqa: E402


@pytest.fixture
def small_config():
    """A deployment small enough for per-test simulation."""
    return ExperimentConfig().with_overrides([
        "n_sensors=8", "steps=150", "repetitions=3", "grid.width=150", "grid.height=150",
        "annealing.iterations=15", "training_steps=40",
    ])


def pytest_terminal_summary(terminalreporter):
    import verdicts

    if verdicts.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(verdicts.LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
