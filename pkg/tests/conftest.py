import numpy as np
import pytest

from pwcc.synth import SynthConfig, generate_dataset, load_manifest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def tiny_manifest(tmp_path_factory):
    """A 12-sample 16x16 dataset shared by the slower integration tests."""
    out = tmp_path_factory.mktemp("tiny_ds")
    generate_dataset(SynthConfig(count=12, width=16, height=16, seed=5, split=(0.5, 0.25, 0.25)), str(out))
    return load_manifest(str(out / "manifest.json"))


ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance_report():
    """Record one pass/fail line for an acceptance criterion (printed at the end of the run)."""

    def report(number, title, ok, detail):
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
