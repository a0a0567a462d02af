"""
The Monte Carlo oracle
======================

Simulating the age process directly (grow at unit speed, reset at rate
beta by thinning) gives a ground truth that shares no code with the
grid solvers.  The Kolmogorov distance between the empirical law and
the evolved measure lands inside the Dvoretzky-Kiefer-Wolfowitz band,
which at 1e5 paths is just under 0.01.
"""

import numpy as np

from renewalkit import (HazardRate, SignedMeasure, compare_cdf, dkw_band,
                        evolve_measure, ramp_rate, simulate, stationary)

GRID = dict(A_max=30.0, h_a=2e-3)
N = 100_000

rate = HazardRate.constant(1.0, a_star=0.1, A_max=30.0, h_a=2e-3, horizon=13.0)
mu0 = SignedMeasure.dirac(0.5, **GRID)

ens = simulate(mu0, rate, t=1.0, n=N, seed=42)
mu1 = evolve_measure(mu0, rate, 1.0)
print(f"constant rate, t=1: KS(empirical, solver) = "
      f"{compare_cdf(ens, mu1):.4f}  (DKW band {dkw_band(N):.4f})")
print("fraction of paths with no reset:", float(np.mean(ens.resets == 0)),
      "vs exp(-1) =", np.exp(-1.0))

ramp = ramp_rate(2.0, a_star=1.0, beta_min=1.0, A_max=30.0, h_a=2e-3,
                 horizon=3.0)
flat = SignedMeasure.uniform(0.0, 2.0, **GRID)
ens2 = simulate(flat, ramp, t=1.5, n=N, seed=43)
mu2 = evolve_measure(flat, ramp, 1.5)
print(f"ramp rate, t=1.5:   KS(empirical, solver) = "
      f"{compare_cdf(ens2, mu2):.4f}")

# after a long run the law forgets the initial condition
ens3 = simulate(mu0, rate, t=12.0, n=N, seed=44)
print(f"long run, t=12:     KS(empirical, stationary) = "
      f"{compare_cdf(ens3, stationary(rate)):.4f}")
