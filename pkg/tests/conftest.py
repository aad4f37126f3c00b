import pytest

from diffctrl.models import BrownianMotion, OrnsteinUhlenbeck
from diffctrl.problems import ProblemSpec, make_cost


@pytest.fixture(scope="session")
def bm_spec():
    """Drifted Brownian motion with quadratic cost, small gamma and r."""
    return ProblemSpec(
        BrownianMotion(mu=0.1, sigma=1.0), make_cost("quadratic"), gamma=0.001
    )


@pytest.fixture(scope="session")
def ou_spec():
    """Mean-reverting model with absolute-value cost."""
    return ProblemSpec(
        OrnsteinUhlenbeck(kappa=1.0, sigma=1.0), make_cost("absolute"), gamma=0.1
    )
