"""
When is the rate formula exact?
===============================

On f = x'diag(m, L)x/2 with A = I, B = -I, the distance to the fixed point
shrinks by the spectral radius of I - alpha Q (Q + rho I)^-1. Here we compare
that, the fitted rate, and the formula over a few penalties.
"""

import math

import numpy as np

import relaxadmm as ra
from relaxadmm.experiments import simulate_rate

m, L = 1.0, 10.0
prob = ra.make_attainability_instance(m, L)
Q = np.diag([m, L])

print(" alpha  rho0   formula    fitted   spectral")
for alpha in (1.0, 1.5, 1.9):
    for rho0 in (0.25, 0.5, 1.0, 2.0, 4.0):
        rho = rho0 * math.sqrt(m * L)
        fitted, _ = simulate_rate(prob, ra.AdmmParams(alpha, rho))
        M = np.eye(2) - alpha * Q @ np.linalg.inv(Q + rho * np.eye(2))
        radius = max(abs(np.linalg.eigvals(M)))
        print(f"{alpha:6.2f} {rho0:5.2f} {ra.tau_a(alpha, rho0, L / m):9.5f} "
              f"{fitted:9.5f} {radius:9.5f}")

# For rho0 >= 1 all three columns agree. Below 1 the stiff mode is damped
# harder than the formula assumes, so this instance converges faster than
# the bound: the formula is still an upper bound but not attained.
