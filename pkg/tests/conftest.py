import time

import pytest

from trendcycle.integrator import integrate
from trendcycle.scenarios import builtin


@pytest.fixture(scope="session")
def runs():
    """Run builtin scenarios on their default grids, once per session.

    Returns a callable: name -> (spec, trajectory, runtime_seconds).
    """
    cache = {}

    def run(name):
        if name not in cache:
            spec = builtin(name)
            t0 = time.perf_counter()
            traj = integrate(spec.params, spec.init, spec.grid)
            cache[name] = (spec, traj, time.perf_counter() - t0)
        return cache[name]

    return run
