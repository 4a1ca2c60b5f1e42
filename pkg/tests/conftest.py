import numpy as np
import pytest

from causalfair.scm import DiscreteSCM

# Shared hand-written model: every mechanism is asymmetric so all three
# effect components are nonzero and sign-structured.
FIXTURE_P_S = [0.5, 0.5]
FIXTURE_P_Y_S = [[0.7, 0.3], [0.4, 0.6]]
FIXTURE_P_X_YS = [[[0.8, 0.2], [0.5, 0.5]], [[0.6, 0.4], [0.2, 0.8]]]
FIXTURE_P_H_X = [[0.8, 0.2], [0.1, 0.9]]


@pytest.fixture
def fixture_scm() -> DiscreteSCM:
    return DiscreteSCM(
        p_s=FIXTURE_P_S,
        p_y_given_s=FIXTURE_P_Y_S,
        p_x_given_ys=FIXTURE_P_X_YS,
        p_yhat_given_x=FIXTURE_P_H_X,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
