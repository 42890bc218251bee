"""Command-line interface.

Exit codes: 0 certified / success, 1 error, 2 not certified or not
applicable, 3 oracle found an unstable admissible Delta for a certified
plant (must never happen).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .certificate import certify
from .errors import CertificateInfeasibleError, InfeasibleGammaError, QPopovError
from .model import load_plant, plant_to_dict
from .oracle import consistency_sweep, mss_check
from .plant import reduce_annihilation_only
from .plotting import write_popov_csv, write_popov_svg, write_trajectory_csv
from .popov import (FrequencyResponse, default_grid, min_gamma, popov_plot, search_theta,
                    small_gain_margin)
from .systems import OPA_DELTA, opa_plant

EXIT_OK, EXIT_ERROR, EXIT_NOT_CERTIFIED, EXIT_VIOLATION = 0, 1, 2, 3

# certificates and oracle runs at "--gamma min" use gamma* inflated by this factor,
# since the frequency condition is not strict at gamma* itself
GAMMA_MIN_PAD = 1e-2


def _theta_arg(text):
    if text == "search":
        return text
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError("theta must be >= 0 or 'search'")
    return value


def _gamma_arg(text):
    if text == "min":
        return text
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("gamma must be > 0 or 'min'")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _omega_max_arg(text):
    if text == "auto":
        return None
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("omega max must be > 0 or 'auto'")
    return value


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _finite(x):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def _emit_json(doc, path):
    text = json.dumps(doc, indent=2, default=_json_default)
    if path is None or str(path) == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


class _Context:
    """Plant, grid and resolved (theta, gamma) for one invocation."""

    def __init__(self, args, plant):
        self.args = args
        self.plant = plant
        self.grid = default_grid(plant, args.grid, args.omega_max)
        self.response = FrequencyResponse.compute(plant, self.grid)
        self.gamma_star = None
        self.theta_star = None

    def resolve(self, theta_default="search"):
        args = self.args
        theta = theta_default if args.theta is None else args.theta
        gamma = self.plant.gamma if args.gamma is None else args.gamma
        if gamma == "min":
            res = min_gamma(self.plant, theta, grid=self.grid)
            self.gamma_star = res.gamma_star
            gamma = max(res.gamma_star * (1 + GAMMA_MIN_PAD), 1e-6)
            if theta == "search":
                self.theta_star = res.theta
            theta = res.theta
        if theta == "search":
            theta, _ = search_theta(self.plant, gamma, response=self.response)
            self.theta_star = theta
        return float(theta), float(gamma)


def _add_common(p, samples=False):
    p.add_argument("plant", help="plant JSON file")
    p.add_argument("--theta", type=_theta_arg, default=None, help="Popov multiplier or 'search'")
    p.add_argument("--gamma", type=_gamma_arg, default=None,
                   help="sector bound or 'min' (default: the plant file's gamma)")
    p.add_argument("--grid", type=_positive_int, default=512, help="frequency grid size")
    p.add_argument("--omega-max", type=_omega_max_arg, default=None, help="grid extent or 'auto'")
    p.add_argument("--format", choices=("json", "csv", "svg"), default=None)
    p.add_argument("-o", "--output", default=None, help="output path")
    p.add_argument("--margin", type=float, default=0.0,
                   help="required frequency-condition margin for a certified verdict")
    if samples:
        p.add_argument("--samples", type=_positive_int, default=200)
        p.add_argument("--seed", type=int, default=0)


def cmd_analyze(args) -> int:
    ctx = _Context(args, load_plant(args.plant))
    theta, gamma = ctx.resolve()
    an = ctx.response.analysis(theta, gamma)
    certified = an.certified and an.margin > args.margin
    verdict = "certified-stable" if certified else "not-certified"
    print(f"verdict: {verdict}")
    print(f"A Hurwitz: {an.hurwitz} (spectral abscissa {an.abscissa:.6g})")
    print(f"theta: {theta:.6g}{'  (searched)' if ctx.theta_star is not None else ''}")
    print(f"gamma: {gamma:.6g}" + (f"  (gamma* = {ctx.gamma_star:.6g})" if ctx.gamma_star is not None else ""))
    print(f"margin: {an.margin:.6g}")
    print(f"worst omega: {_finite(an.worst_omega)}")
    if args.output is not None or args.format == "json":
        doc = an.to_dict()
        doc.update(verdict=verdict, gamma_star=ctx.gamma_star, plant=plant_to_dict(ctx.plant))
        _emit_json(doc, args.output)
    return EXIT_OK if certified else EXIT_NOT_CERTIFIED


def cmd_popov_plot(args) -> int:
    plant = load_plant(args.plant)
    red = reduce_annihilation_only(plant)
    if red is None:
        print("popov-plot needs an annihilation-only SISO plant (M2 = N2 = E2 = 0, m = 1)",
              file=sys.stderr)
        return EXIT_NOT_CERTIFIED
    ctx = _Context(args, plant)
    theta, gamma = ctx.resolve()
    plot = popov_plot(red, ctx.grid, theta, gamma)
    out = Path(args.output or "popov_plot.svg")
    written = []
    if args.format in (None, "csv"):
        written.append(write_popov_csv(plot, out.with_suffix(".csv")))
    if args.format in (None, "svg"):
        written.append(write_popov_svg(plot, out.with_suffix(".svg")))
    if args.format == "json":
        _emit_json({"theta": theta, "gamma": gamma, "inside": plot.inside,
                    "omega": plot.omegas.tolist(), "re_g1": plot.x.tolist(),
                    "omega_im_g1": plot.y.tolist()}, out.with_suffix(".json"))
        written.append(out.with_suffix(".json"))
    print(f"theta: {theta:.6g}  gamma: {gamma:.6g}")
    print(f"Popov plot {'inside' if plot.inside else 'outside'} the allowable region")
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK if plot.inside else EXIT_NOT_CERTIFIED


def cmd_certificate(args) -> int:
    ctx = _Context(args, load_plant(args.plant))
    try:
        theta, gamma = ctx.resolve()
    except InfeasibleGammaError as exc:
        print(f"not certifiable: {exc}", file=sys.stderr)
        return EXIT_NOT_CERTIFIED
    an = ctx.response.analysis(theta, gamma)
    try:
        cert = certify(ctx.plant, theta, gamma)
    except CertificateInfeasibleError as exc:
        print(f"certificate infeasible: {exc}", file=sys.stderr)
        print(f"frequency-condition margin {an.margin:.6g} at omega = {_finite(an.worst_omega)} "
              f"(A Hurwitz: {an.hurwitz})", file=sys.stderr)
        return EXIT_NOT_CERTIFIED
    doc = cert.to_dict()
    if ctx.theta_star is not None:
        doc["theta_star"] = ctx.theta_star
    if ctx.gamma_star is not None:
        doc["gamma_star"] = ctx.gamma_star
    out = args.output or "certificate.json"
    _emit_json(doc, out)
    if ctx.theta_star is not None:
        print(f"theta* = {ctx.theta_star:.6g}")
    if ctx.gamma_star is not None:
        print(f"gamma* = {ctx.gamma_star:.6g} (certificate at gamma = {gamma:.6g})")
    print(f"lmi_margin = {cert.lmi_margin:.6g}  mtilde_max_eig = {cert.mtilde_max_eig:.6g}")
    print(f"c1 = {cert.c1:.6g}  c2 = {cert.c2:.6g}  c3 = {cert.c3:.6g}")
    if out != "-":
        print(f"wrote {out}")
    return EXIT_OK


def cmd_min_gamma(args) -> int:
    plant = load_plant(args.plant)
    grid = default_grid(plant, args.grid, args.omega_max)
    theta = "search" if args.theta is None else args.theta
    try:
        res = min_gamma(plant, theta, grid=grid)
    except InfeasibleGammaError as exc:
        print(f"not certifiable: {exc}", file=sys.stderr)
        return EXIT_NOT_CERTIFIED
    print(f"gamma* = {res.gamma_star:.8g}  theta = {res.theta:.6g}"
          + ("  (degenerate: certified at every gamma)" if res.degenerate else ""))
    if args.output is not None or args.format == "json":
        _emit_json(res.to_dict(), args.output)
    return EXIT_OK


def cmd_oracle(args) -> int:
    ctx = _Context(args, load_plant(args.plant))
    try:
        theta, gamma = ctx.resolve()
    except InfeasibleGammaError as exc:
        print(f"not certifiable: {exc}", file=sys.stderr)
        return EXIT_NOT_CERTIFIED
    an = ctx.response.analysis(theta, gamma)
    rep = consistency_sweep(ctx.plant, theta, gamma, args.samples, args.seed,
                            analysis=an, trajectories=args.trajectories)
    out = Path(args.output or "oracle.json")
    doc = rep.to_dict()
    doc["plant"] = plant_to_dict(ctx.plant)
    _emit_json(doc, out)
    unstable = sum(not s.hurwitz for s in rep.samples)
    worst = max(s.abscissa for s in rep.samples)
    print(f"Popov verdict: {an.verdict} (theta = {theta:.6g}, gamma = {gamma:.6g})")
    print(f"{len(rep.samples)} admissible samples, {unstable} unstable, worst abscissa {worst:.6g}")
    if rep.trajectories is not None:
        for s, tr in zip(rep.samples, rep.trajectories):
            write_trajectory_csv(tr.times, tr.traces, out.with_name(f"{out.stem}_traj_{s.index:03d}.csv"))
        print(f"wrote {len(rep.trajectories)} trajectory CSVs next to {out}")
    print(f"wrote {out}")
    if rep.violation:
        print("COUNTEREXAMPLE: certified plant has an unstable admissible Delta", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_demo(args) -> int:
    kappa = args.kappa
    gamma = 2.0
    plant = opa_plant(kappa, gamma)
    grid = default_grid(plant, args.grid)
    resp = FrequencyResponse.compute(plant, grid)
    red = reduce_annihilation_only(plant)
    a1 = complex(red.A1[0, 0])
    print(f"Optical parametric amplifier: kappa = {kappa:g}, gamma = {gamma:g}")
    print(f"  A1 = i - kappa/2 = {a1.real:+.6g}{a1.imag:+.6g}i -> "
          f"{'Hurwitz' if resp.hurwitz else 'not Hurwitz'}")
    sg = small_gain_margin(plant, gamma, grid)
    print(f"  small-gain test: sup|G1| = {sg.hinf_norm / 2:.6g} vs gamma/4 = {gamma / 4:g} -> {sg.verdict}")
    results = {}
    for theta in (0.0, 0.2):
        an = resp.analysis(theta, gamma)
        results[theta] = an
        print(f"  Popov test, theta = {theta:g}: margin {an.margin:.6g} at omega = "
              f"{_finite(an.worst_omega)} -> {an.verdict}")
    for theta in (0.0, 0.2):
        try:
            g = min_gamma(plant, theta, grid=grid).gamma_star
            print(f"  minimal gamma at theta = {theta:g}: {g:.6g}")
        except InfeasibleGammaError:
            print(f"  minimal gamma at theta = {theta:g}: none (not certifiable)")
    hur, ab = mss_check(plant, OPA_DELTA)
    print(f"  reference Delta [[1, i], [-i, 1]]: closed-loop abscissa {ab:.6g} -> "
          f"{'stable' if hur else 'unstable'}")
    rep = consistency_sweep(plant, 0.2, gamma, args.samples, args.seed, analysis=results[0.2])
    unstable = sum(not s.hurwitz for s in rep.samples)
    worst = max(s.abscissa for s in rep.samples)
    print(f"  oracle: {len(rep.samples)} admissible Delta, {unstable} unstable, "
          f"worst abscissa {worst:.6g}")
    popov = "Popov certifies" if results[0.2].certified else "Popov does not certify"
    small = "small-gain also certifies" if sg.certified else "small-gain requires kappa>4"
    print(f"{popov} kappa={kappa:g}; {small}")
    out = Path(args.output or "opa_popov.svg")
    write_popov_svg(popov_plot(red, grid, 0.2, gamma), out.with_suffix(".svg"))
    print(f"wrote {out.with_suffix('.svg')}")
    return EXIT_VIOLATION if rep.violation else EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qpopov", description="Popov robust-stability analysis of uncertain "
                     "linear quantum systems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="Hurwitz check and frequency-condition margin")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("popov-plot", help="write the SISO Popov plot as CSV and SVG")
    _add_common(p)
    p.set_defaults(func=cmd_popov_plot)

    p = sub.add_parser("certificate", help="synthesize and verify the Lyapunov certificate")
    _add_common(p)
    p.set_defaults(func=cmd_certificate)

    p = sub.add_parser("min-gamma", help="smallest certifiable sector bound")
    _add_common(p)
    p.set_defaults(func=cmd_min_gamma)

    p = sub.add_parser("oracle", help="sample admissible Delta and test every closed loop")
    _add_common(p, samples=True)
    p.add_argument("--trajectories", action="store_true", help="also write covariance trajectories")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("demo-opa", help="end-to-end optical parametric amplifier example")
    p.add_argument("--kappa", type=float, default=2.1)
    p.add_argument("--grid", type=_positive_int, default=512)
    p.add_argument("--samples", type=_positive_int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    try:
        return args.func(args)
    except (OSError, QPopovError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
