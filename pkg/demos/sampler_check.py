"""Kolmogorov-Smirnov check of the channel samplers against the analytic CDF.

Draws 10^6 SNR values from the cluster-level (physical) sampler and from the
Poisson-gamma sampler for a few parameter sets and prints the KS statistic
next to the 99% threshold.

    python3 demos/sampler_check.py
"""
from kmu_shadowed import cdf
from kmu_shadowed.montecarlo import (PhysicalModel, ks_statistic, ks_threshold, sample_extended,
                                     sample_physical)

COUNT = 10 ** 6

MODELS = [
    PhysicalModel(1, 0.5, [(0.0, 0.0)], 1.0),                 # Rayleigh
    PhysicalModel(1, 0.5, [(1.5, 0.5)], 0.7),                 # Rician shadowed, heavy shadowing
    PhysicalModel(2, 0.5, [(1.0, 1.0), (1.0, 0.0)], 0.8),
    PhysicalModel(3, 1.0, [(2.0, 0.0), (0.0, 1.0), (0.5, 0.5)], 5.0),
]


def main():
    thr = ks_threshold(COUNT)
    print(f"99% threshold at {COUNT} draws: {thr:.5f}")
    for i, pm in enumerate(MODELS):
        p = pm.to_params(2.0)
        phys = ks_statistic(sample_physical(pm, 2.0, COUNT, seed=i), lambda g: cdf(p, g))
        ext = ks_statistic(sample_extended(p, COUNT, seed=i), lambda g: cdf(p, g))
        print(f"kappa={p.kappa:.3g} mu={p.mu:g} m={p.m:g}: physical {phys:.5f}, "
              f"Poisson-gamma {ext:.5f}")


if __name__ == "__main__":
    main()
