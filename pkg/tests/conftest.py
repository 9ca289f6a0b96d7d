import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from levyheat.grid import Field, GridSpec

settings.register_profile(
    "default", deadline=None, max_examples=30,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


grid_specs = st.builds(
    GridSpec,
    dim=st.sampled_from([1, 2]),
    n=st.sampled_from([8, 16, 32]),
    period=st.sampled_from([0.5, 1.0, 2.0, 3.0]),
)


def random_field(grid: GridSpec, seed: int, real: bool = False, mean_zero: bool = False) -> Field:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(grid.shape)
    if not real:
        v = v + 1j * rng.standard_normal(grid.shape)
    f = Field.physical(grid, v)
    return f.without_mean() if mean_zero else f


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
