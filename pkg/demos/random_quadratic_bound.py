"""
The rate formula as an upper bound
==================================

Random quadratics with prescribed curvature and constraint conditioning.
The fitted rate never exceeds the formula.
"""

import numpy as np

import relaxadmm as ra
from relaxadmm.experiments import simulate_rate

rng = np.random.default_rng(0)
worst = -1.0
for seed in range(10):
    p = int(rng.integers(2, 11))
    L, kA = rng.uniform(1, 50), rng.uniform(1, 2)
    prob = ra.make_random_quadratic(p, seed, 1.0, L, kA)
    for alpha in (0.5, 1.0, 1.5, 1.9):
        for rho0 in (0.5, 1.0, 2.0):
            rho = rho0 * ra.optimal_rho(prob.conditioning)
            nc = ra.normalize(prob.conditioning, rho)
            fitted, trace = simulate_rate(prob, ra.AdmmParams(alpha, rho))
            cert = ra.certificate(alpha, nc.rho0, nc.kappa)
            assert ra.envelope_holds(trace, cert).all()
            worst = max(worst, fitted - cert.tau)

print(f"largest (fitted - formula) over all runs: {worst:.2e}")
