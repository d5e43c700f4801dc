"""
Delay-domain transfer functions and loop closure
================================================

Coefficients are ascending in the unit delay d (so [1.0, -2.0] is 1 - 2d),
which keeps causality checks and loop algebra straightforward: a system is
causal iff its denominator has a nonzero constant term, and strictly proper
iff its numerator starts with a zero.
"""

import numpy as np

from loopinfo import LoopModel, close_loop, freq_response_array, is_stabilizing, tf, white
from loopinfo.lti import TF_ONE

# an unstable first-order plant: one pole at z = 2
plant = tf([0.0, 1.0], [1.0, -2.0])
print("plant num:", plant.num.coeffs, " den:", plant.den.coeffs)
print("plant poles:", plant.poles())

# magnitude response along the unit circle
omegas = np.linspace(-np.pi, np.pi, 9)
mags = np.abs(freq_response_array(plant, omegas))
for w, m in zip(omegas, mags):
    print(f"  |P(e^-jw)| at w = {w:+.3f}: {m:.4f}")

# common factors cancel on construction; the value of the function survives
ratio = tf([1.0, -0.7, 0.1], [1.0, -1.2, 0.35])  # (1-0.5d)(1-0.2d)/(1-0.5d)(1-0.7d)
print("\nreduced num:", ratio.num.coeffs, " den:", ratio.den.coeffs)

# close the loop with the deadbeat gain K = -2: the return difference
# 1 - P*K*H collapses to 1/(1 - 2d), so the sensitivity is 1 - 2d and the
# only closed-loop pole sits at the origin
model = LoopModel(plant, tf([-2.0]), TF_ONE, white(1.0), white(1.0))
cl = close_loop(model)
print("\nsensitivity num:", cl.f_wy.num.coeffs, " den:", cl.f_wy.den.coeffs)
print("closed-loop poles:", cl.closed_loop_poles, " stable:", cl.is_stable)

# a gain that is too soft leaves the loop unstable, and the report names the
# offending pole
soft = LoopModel(plant, tf([-0.1]), TF_ONE, white(1.0), white(1.0))
rep = is_stabilizing(soft)
print("\nK = -0.1 stabilizing?", rep.is_stabilizing, " offenders:", rep.offending_poles)

# hidden unstable cancellation: K = -0.1 (1 - 2d) formally cancels the plant
# pole, which no amount of feedback can fix
sneaky = LoopModel(plant, tf([-0.1, 0.2]), TF_ONE, white(1.0), white(1.0))
rep = is_stabilizing(sneaky)
print("cancelling K stabilizing?", rep.is_stabilizing,
      " cancelled unstable poles:", rep.unstable_cancellations)
