import json
import math
from pathlib import Path

import pytest

from fhn_bifurc import FhnParams

FIXTURES = Path(__file__).parent / "fixtures"


def rk4_fixed(rhs, start, t_end, dt):
    """Independent fixed-step classical RK4, used as an integration oracle."""
    x, y = float(start[0]), float(start[1])
    n = int(round(t_end / dt))
    t = 0.0
    for _ in range(n):
        k1x, k1y = rhs(x, y)
        k2x, k2y = rhs(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y)
        k3x, k3y = rhs(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y)
        k4x, k4y = rhs(x + dt * k3x, y + dt * k3y)
        x += dt * (k1x + 2 * k2x + 2 * k3x + k4x) / 6.0
        y += dt * (k1y + 2 * k2y + 2 * k3y + k4y) / 6.0
        t += dt
    return x, y


@pytest.fixture(scope="session")
def rk4_oracle():
    return rk4_fixed


@pytest.fixture(scope="session")
def two_cycle_fixture():
    """Frozen two-nested-cycle configuration (regression fixture)."""
    data = json.loads((FIXTURES / "two_cycle.json").read_text())
    return {
        "params": FhnParams(**data["params"]),
        "s_inner": data["s_inner"],
        "s_outer": data["s_outer"],
        "multiplier_inner": data["multiplier_inner"],
        "multiplier_outer": data["multiplier_outer"],
    }


# the symmetric double-focus configuration used for separatrix-loop tests:
# origin saddle between two foci at +-x, loops at gamma ~ 1.2365
LOOP_PARAMS = FhnParams(a=0.3, b=0.0, c=1.0, gamma=1.25, delta=0.5)
LOOP_PARAMS_ASYM = FhnParams(a=0.3, b=0.05, c=1.0, gamma=1.25, delta=0.5)


@pytest.fixture(scope="session")
def loop_params():
    return LOOP_PARAMS


@pytest.fixture(scope="session")
def loop_params_asym():
    return LOOP_PARAMS_ASYM
