"""Command line entry point: ``catsim <experiment> [flags]``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .circuit import build_step_circuit, invert
from .errors import CatsimError
from .harness import EXPERIMENTS, ExperimentConfig


def _add_common(p: argparse.ArgumentParser, defaults: ExperimentConfig) -> None:
    p.add_argument("--nq", type=int, default=defaults.nq, help="bits per coordinate (N = 2**nq)")
    p.add_argument("--steps", type=int, default=defaults.steps, help="map iterations t")
    p.add_argument("--shots", type=int, default=defaults.shots,
                   help="quantum shots and classical trajectories per protocol")
    p.add_argument("--seed", type=int, default=defaults.seed, help="master seed")
    p.add_argument("--px", type=float, default=defaults.px, help="bit-flip probability per touched bit per gate")
    p.add_argument("--pz", type=float, default=defaults.pz, help="phase-flip probability per touched bit per gate")
    p.add_argument("--initial", default=defaults.initial,
                   help="delta:i,j | uniform | block:i0,j0,w,h | gauss[:i0,j0,sigma]")
    p.add_argument("--coarse", type=int, default=defaults.coarse, help="coarse-graining factor")
    p.add_argument("--phases", choices=("zero", "random"), default=defaults.phases)
    p.add_argument("--repeats", type=int, default=defaults.repeats,
                   help="independent master seeds for the statistical checks")
    p.add_argument("--tv-threshold", type=float, default=defaults.tv_threshold)
    p.add_argument("--epsilon", type=float, default=defaults.epsilon,
                   help="TV target for the resources table")
    p.add_argument("--coherent-cap", type=int, default=defaults.coherent_cap,
                   help="largest nq simulated coherently")
    p.add_argument("--workers", type=int, default=1, help="threads for trajectory sampling")
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default=defaults.fmt)
    p.add_argument("--out", type=Path, default=None, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    base = ExperimentConfig()
    for name in EXPERIMENTS:
        defaults = ExperimentConfig(nq=2, steps=0) if name == "spectrum" else base
        _add_common(sub.add_parser(name), defaults)
    dump = sub.add_parser("dump-circuit", help="list the gates of one cat-map step")
    dump.add_argument("--nq", type=int, default=base.nq)
    dump.add_argument("--inverse", action="store_true", help="dump the inverted step")
    dump.add_argument("--out", type=Path, default=None)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "dump-circuit":
            c = build_step_circuit(args.nq)
            _emit((invert(c) if args.inverse else c).dump(), args.out)
            return 0
        fields = {k: getattr(args, k) for k in ExperimentConfig.__dataclass_fields__}
        cfg = ExperimentConfig(**fields)
        report = EXPERIMENTS[args.command](cfg, workers=args.workers)
    except CatsimError as exc:
        print(f"catsim: error: {exc}", file=sys.stderr)
        return 2
    _emit(report.render(cfg.fmt), args.out)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
