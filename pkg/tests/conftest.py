from pathlib import Path

import pytest

from socialties import _graph_kernels as gk
from socialties.temporal_graph import EdgeInstance, SimpleGraphView, build

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile (or load the cached) numba kernels once, off the test clock
    gk.warmup()


@pytest.fixture
def triangle_net():
    """Three actors over four snapshots; actor 0 and 1 keep re-using
    attribute 0, so both end closure; actor 2 shows up once (innocuous).

    Hand trace of the relevant sets (iqr, inclusive, on presence counts):
      s=0: pools are flat -> nothing flagged
      s=1: u0/u1 counts {0: 2, 1: 1, 2: 1} -> q1=1, q3=1.5,
           fence 2.25 -> empty
      s=2: u0 counts {0: 3, 1: 1, 2: 1, 3: 1} -> q1=1, q3=1.5,
           fence 2.25 -> {0}; u1 also carries {4: 1}, so q1=q3=1,
           fence 1 -> {0}; actor 2's pool {4: 1} is flat -> empty
      s=3 (inactive for everyone): sets carry over
    """
    instances = [
        EdgeInstance(0, 1, 0, frozenset({0, 1})),
        EdgeInstance(0, 1, 1, frozenset({0, 2})),
        EdgeInstance(0, 1, 2, frozenset({0, 3})),
        EdgeInstance(1, 2, 2, frozenset({4})),
    ]
    return build(instances, 4)


@pytest.fixture
def p3():
    return SimpleGraphView.from_pairs([(0, 1), (1, 2)])


@pytest.fixture
def data_dir():
    return DATA
