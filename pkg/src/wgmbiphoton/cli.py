"""Command-line front end. Each subcommand builds a :class:`Scenario` and runs it."""
from __future__ import annotations

import argparse
import json
import sys
import warnings

from .runner import EXIT_INPUT, Scenario, run_scenario


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p):
    p.add_argument("--device", help="device JSON (default: bundled measured device)")
    p.add_argument("--out", required=True, help="output file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--engine", choices=("closed_form", "spectral"), default="closed_form")
    p.add_argument("--rate-unit", choices=("hz", "rad_per_s"), help="override the device file's rate unit")
    p.add_argument("--detuning-hz", type=float, help="pump detuning (ordinary frequency)")


def _detector_args(p):
    p.add_argument("--detector", help="detector JSON (DetectorModel fields)")
    p.add_argument("--peak-counts", type=float, help="scale expected counts so the largest bin holds this many")
    p.add_argument("--pair-rate-scale", type=float, default=1.0)


def build_parser():
    ap = argparse.ArgumentParser(prog="wgmbiphoton", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep-pump", help="pump fields, phase and transmission versus detuning")
    _common(p)
    p.add_argument("--start-hz", type=float)
    p.add_argument("--stop-hz", type=float)
    p.add_argument("--points", type=int, default=2001)

    p = sub.add_parser("state-evolve", help="path probabilities of the closed-system pair state")
    _common(p)
    p.add_argument("--t-max", type=float)
    p.add_argument("--points", type=int, default=1001)
    p.add_argument("--beta-hz", type=float, help="coupling rate (default: signal mode)")
    p.add_argument("--oracle", action="store_true", help="use the matrix-exponential evolution")
    p.add_argument("--phi-beta", type=float, default=0.0)

    p = sub.add_parser("correlations", help="pair-correlation traces")
    _common(p)
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--span", type=float, default=5.0, help="half-width in units of 1/(Gamma_ts + Gamma_ti)")
    p.add_argument("--refine", type=float, default=1.0, help="spectral grid refinement factor")
    p.add_argument("--order", choices=("first", "exact"), default="first")
    p.add_argument("--check", action="store_true", help="fail with exit 3 if the engines disagree")

    p = sub.add_parser("montecarlo", help="sampled coincidence histograms from a trace CSV")
    _common(p)
    p.add_argument("--trace", required=True)
    _detector_args(p)

    p = sub.add_parser("bell", help="CHSH parameter from the closed-form traces")
    _common(p)
    p.add_argument("--angles", help="JSON file with theta1, theta1p, theta2, theta2p")
    p.add_argument("--optimize", action="store_true")
    p.add_argument("--mapping", choices=("linear", "paper_literal"))
    p.add_argument("--n-sims", type=int, default=2500)
    _detector_args(p)

    p = sub.add_parser("fit", help="fit a doublet to a transmission sweep")
    _common(p)
    p.add_argument("--sweep", required=True, help="CSV with detuning_hz, transmission")
    p.add_argument("--coupling", choices=("auto", "under", "over"), default="auto")
    p.add_argument("--omega0", type=float, help="resonance angular frequency for Q factors")
    p.add_argument("--emit-model", help="write the fitted curve to this CSV")

    p = sub.add_parser("regime-sweep", help="oscillation contrast versus beta/Gamma")
    _common(p)
    p.add_argument("--ratios", type=_floats, default=None)

    p = sub.add_parser("detuning-sweep", help="stacked traces over pump detunings")
    _common(p)
    p.add_argument("--detunings-ghz", type=_floats, default=None)
    p.add_argument("--points", type=int, default=2000)

    p = sub.add_parser("run", help="run a scenario JSON file")
    p.add_argument("scenario")
    return ap


_OPTION_KEYS = (
    "start_hz", "stop_hz", "points", "t_max", "beta_hz", "oracle", "phi_beta", "span", "refine",
    "order", "check", "trace", "peak_counts", "pair_rate_scale", "angles", "optimize", "mapping",
    "n_sims", "sweep", "coupling", "omega0", "emit_model", "ratios", "detunings_ghz",
)


def scenario_from_args(args):
    opts = {}
    for k in _OPTION_KEYS:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            opts[k] = v
    detector = {}
    if getattr(args, "detector", None):
        with open(args.detector) as fh:
            detector = json.load(fh)
    return Scenario(
        command=args.command,
        out=args.out,
        device=args.device,
        engine=args.engine,
        seed=args.seed,
        rate_unit=args.rate_unit,
        detuning_hz=args.detuning_hz,
        detector=detector,
        options=opts,
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    warnings.simplefilter("default")
    if args.command == "run":
        try:
            with open(args.scenario) as fh:
                scn = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            sys.stderr.write(f"input error: {exc}\n")
            return EXIT_INPUT
        return run_scenario(scn)
    try:
        scn = scenario_from_args(args)
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"input error [detector]: {exc}\n")
        return EXIT_INPUT
    return run_scenario(scn)


if __name__ == "__main__":
    sys.exit(main())
