"""Shared fixtures: the canonical first-order loop used across the test suite."""

import pytest

from loopinfo import LoopModel, tf, white
from loopinfo.lti import TF_ONE


@pytest.fixture
def worked_model():
    """Unstable plant 1/(z - 2) under the deadbeat static gain K = -2.

    Closed loop: f_wy = 1 - 2d with the single pole at the origin. With unit
    white noises the rate splits as ln 2 (control) + 0.5 ln 2 (disturbance).
    """
    plant = tf([0.0, 1.0], [1.0, -2.0])
    controller = tf([-2.0])
    return LoopModel(plant, controller, TF_ONE, white(1.0), white(1.0))
