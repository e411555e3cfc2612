import numpy as np
import pytest

from aadcca.synth import SynthConfig, generate

# acceptance results, printed one line per criterion at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_dataset():
    """Short, high-SNR recording used by fast unit tests."""
    return generate(SynthConfig(n_segments=8, segment_len_samples=400, snr_attended=0.01, snr_unattended=0.0025, seed=3))


@pytest.fixture(scope="session")
def high_snr_dataset():
    return generate(SynthConfig(n_segments=60, snr_attended=0.004, snr_unattended=0.001, seed=11))
