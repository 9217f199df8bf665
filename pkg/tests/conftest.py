import sys

import numpy as np
import pytest

from nalin import _kernels as K
from nalin.group import catalog_group
from nalin.reps import irreps_of


@pytest.fixture(scope="session")
def s3():
    return catalog_group("S3")


@pytest.fixture(scope="session")
def s3_irreps(s3):
    return irreps_of(s3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["numpy", "numba"] if K.HAVE_NUMBA else ["numpy"])
def backend(request):
    prev = K.set_backend(request.param)
    yield request.param
    K.set_backend(prev)



def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in list(sys.modules.items())
                if name.endswith("test_acceptance") and hasattr(m, "RESULTS")), None)
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
