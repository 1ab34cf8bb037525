import numpy as np
import pytest

from sscl import Field, burgers, cell_centers, sweep_1d


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # First call JIT-compiles the sweep kernel; keep that out of the
    # per-criterion stopwatches.
    u = Field(np.sin(2 * np.pi * cell_centers(32)))
    sweep_1d(u, 0, burgers().components[0], 1, 0.01)


def sine_field(cells: int, amp: float = 1.0, offset: float = 0.0) -> Field:
    return Field(offset + amp * np.sin(2 * np.pi * cell_centers(cells)))
