"""Command-line entry point: one subcommand per pipeline.

Exit code 0 means every check of the invoked pipeline passed. --json dumps
the full StatReport to stdout for machine consumption.
"""

import argparse
import json
import sys

from critfluct.harness import ExperimentConfig, run_suite, COMMANDS


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="critfluct",
        description="Simulation and verification pipelines for the critical "
                    "exclusion-plus-flip lattice gas",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--n", type=int, default=64)
        p.add_argument("--theta", type=float, default=0.0)
        p.add_argument("--a", type=float, default=0.1)
        p.add_argument("--seed", type=int, default=2024)
        p.add_argument("--replicas", type=int, default=1)
        p.add_argument("--burn-in", type=float, default=None, dest="burn_in")
        p.add_argument("--samples", type=int, default=1000)
        p.add_argument("--sample-interval", type=float, default=None,
                       dest="sample_interval")
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--json", action="store_true", dest="as_json")
        if name == "sde":
            p.add_argument("--dt", type=float, default=1e-3)
            p.add_argument("--t-final", type=float, default=5.0, dest="t_final")
            p.add_argument("--paths", type=int, default=100_000)
        if name == "exact":
            p.add_argument("--probe-samples", type=int, default=100,
                           dest="probe_samples")
        if name == "report":
            p.add_argument("--force", action="store_true")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    kwargs = {
        "command": args.command,
        "n": args.n,
        "theta": args.theta,
        "a": args.a,
        "seed": args.seed,
        "replicas": args.replicas,
        "burn_in": args.burn_in,
        "samples": args.samples,
        "sample_interval": args.sample_interval,
        "out": args.out,
    }
    for name in ("dt", "t_final", "paths", "probe_samples", "force"):
        if hasattr(args, name):
            kwargs[name] = getattr(args, name)
    config = ExperimentConfig(**kwargs)
    report = run_suite(config)

    if args.as_json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print(f"{args.command} [{report.config_hash}]")
        for line in report.lines():
            print(line)
        for key, value in report.results.items():
            if isinstance(value, float):
                print(f"  {key} = {value:.6g}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
