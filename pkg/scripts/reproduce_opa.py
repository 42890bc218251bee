"""Amplifier example end to end: verdicts over kappa, decay constants, Popov plots.

    python scripts/reproduce_opa.py --out results/opa
"""

import argparse
import json
from pathlib import Path

import numpy as np

from qpopov.certificate import certify
from qpopov.model import dump_plant
from qpopov.oracle import consistency_sweep, mss_check
from qpopov.plant import reduce_annihilation_only
from qpopov.plotting import write_popov_csv, write_popov_svg
from qpopov.popov import FrequencyResponse, default_grid, min_gamma, popov_plot, small_gain_margin
from qpopov.systems import OPA_DELTA, opa_plant


def kappa_sweep(kappas, gamma=2.0):
    rows = []
    for kappa in kappas:
        plant = opa_plant(kappa, gamma)
        resp = FrequencyResponse.compute(plant, default_grid(plant))
        rows.append({
            "kappa": kappa,
            "popov_theta0": resp.analysis(0.0, gamma).certified,
            "popov_theta02": resp.analysis(0.2, gamma).certified,
            "small_gain": small_gain_margin(plant, gamma).certified,
            "reference_delta_stable": mss_check(plant, OPA_DELTA)[0],
        })
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/opa")
    ap.add_argument("--samples", type=int, default=200)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    plant = opa_plant(2.1, 2.0)
    (out / "opa.json").write_text(dump_plant(plant))
    grid = default_grid(plant)
    red = reduce_annihilation_only(plant)
    for theta in (0.0, 0.2):
        plot = popov_plot(red, grid, theta, 2.0)
        stem = out / f"popov_theta{theta:g}"
        write_popov_csv(plot, stem.with_suffix(".csv"))
        write_popov_svg(plot, stem.with_suffix(".svg"))
        print(f"theta={theta:g}: Popov plot {'inside' if plot.inside else 'outside'}")

    cert = certify(plant, 0.2)
    print(f"certificate: lmi {cert.lmi_margin:.4g}, c1 {cert.c1:.4g}, c2 {cert.c2:.4g}, c3 {cert.c3:.4g}")
    for theta in (0.0, 0.2, "search"):
        r = min_gamma(plant, theta, grid=grid)
        print(f"min gamma (theta={theta}): {r.gamma_star:.6g} at theta={r.theta:.4g}")
    rep = consistency_sweep(plant, 0.2, n_samples=args.samples, seed=0)
    print(f"oracle: {sum(not s.hurwitz for s in rep.samples)}/{len(rep.samples)} unstable samples")

    rows = kappa_sweep(np.round(np.linspace(1.5, 5.0, 15), 3).tolist())
    print(f"{'kappa':>6} {'th=0':>6} {'th=0.2':>7} {'s-gain':>7} {'ref-Δ':>6}")
    for r in rows:
        print(f"{r['kappa']:6.3g} {r['popov_theta0']!s:>6} {r['popov_theta02']!s:>7} "
              f"{r['small_gain']!s:>7} {r['reference_delta_stable']!s:>6}")
    (out / "kappa_sweep.json").write_text(json.dumps(rows, indent=2))


if __name__ == "__main__":
    main()
