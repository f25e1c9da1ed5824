import hypothesis
import numpy as np
import pytest

from convseq import PipelineConfig

hypothesis.settings.register_profile(
    "convseq", deadline=None, max_examples=30, derandomize=True
)
hypothesis.settings.load_profile("convseq")


@pytest.fixture
def small_cfg():
    """64x64 image, 16px cells -> 4x4 region grid; cheap enough for fuzzing."""
    return PipelineConfig(image_width=64, image_height=64, cell_width=16, cell_height=16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE_RESULTS = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.fspath.basename == "test_acceptance.py":
        _ACCEPTANCE_RESULTS.append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_ACCEPTANCE_RESULTS):
        status = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"  {status}  {name}")
