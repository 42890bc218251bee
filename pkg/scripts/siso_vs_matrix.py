"""Compare the two scalar Popov inequalities with the matrix frequency test.

For annihilation-only single-channel plants the matrix condition is
diag(4 lhs_a(w), 4 lhs_a(-w)), so only the first scalar inequality enters it.
Plants that pass the matrix test but fail the second inequality are
stress-tested with many sampled uncertainties.
"""

import argparse

import numpy as np

from qpopov.oracle import consistency_sweep
from qpopov.plant import reduce_annihilation_only
from qpopov.popov import FrequencyResponse, default_grid, popov_plot
from qpopov.systems import random_plant


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--plants", type=int, default=100)
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    counts = {"agree": 0, "matrix only": 0, "scalar only": 0}
    unstable = 0
    for i in range(args.plants):
        plant = random_plant(rng, int(rng.integers(1, 4)), 1, int(rng.integers(1, 3)), annihilation_only=True)
        red = reduce_annihilation_only(plant)
        grid = default_grid(plant, 256)
        resp = FrequencyResponse.compute(plant, grid)
        theta = float(rng.uniform(0.0, 2.0))
        gamma = max(-float(np.min(resp.min_eigs(theta))), 1e-3) * float(rng.uniform(0.5, 1.5))
        matrix = resp.analysis(theta, gamma).certified
        scalar = resp.hurwitz and popov_plot(red, grid, theta, gamma).inside
        if matrix == scalar:
            counts["agree"] += 1
            continue
        counts["matrix only" if matrix else "scalar only"] += 1
        if matrix:
            rep = consistency_sweep(plant, theta, gamma, args.samples, seed=i, analysis=resp.analysis(theta, gamma))
            unstable += sum(not s.hurwitz for s in rep.samples)
    print(counts)
    print(f"unstable samples on matrix-only plants: {unstable}")


if __name__ == "__main__":
    main()
