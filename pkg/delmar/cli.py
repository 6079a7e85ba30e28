"""
Command line interface.

Subcommands: ``decompose``, ``synth``, ``metrics``, ``reproducibility``. Library errors
are printed to stderr as ``{"error": {"code": ..., "message": ...}}`` and mapped to exit
status 2 (usage or configuration), 3 (input) or 4 (numerical breakdown).
"""
import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from delmar import __version__
from delmar.admm import MODES
from delmar.config import RunConfig, build_run_config
from delmar.exceptions import BaseDelmarException, InvalidSpec
from delmar.io import RunReport, read_matrix, write_matrix
from delmar.metrics import compare_to_templates, reproducibility_report
from delmar.pipeline import decompose
from delmar.synth import SynthSpec, generate
from delmar.utils import set_logger, stage_timer

logger = logging.getLogger("delmar")

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
USAGE_EXIT_STATUS = 2


def _write_error(code: str, message: str) -> None:
    error = {"error": {"code": code, "message": message}}
    sys.stderr.write(json.dumps(error, sort_keys=True) + "\n")


class JsonArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as a ``usage_error`` object instead of argparse's text."""

    def error(self, message: str) -> None:
        _write_error("usage_error", "{}: {}".format(self.prog, message))
        self.exit(USAGE_EXIT_STATUS)


def _parse_ranks(value: str) -> List[int]:
    try:
        return [int(token) for token in value.split(",") if token.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("ranks must be comma separated integers, got {}".format(value))


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    # Defaults live in RunConfig so that a --config file can supply any of them.
    parser.add_argument("--config", help="json or yaml file with run parameters")
    parser.add_argument("--initial-rank", type=int, help="rank of layer 1 (default min(m, n) / 4)")
    parser.add_argument("--beta", type=float, help="penalty parameter (default 10)")
    parser.add_argument("--eta", type=float, help="multiplier step length (default 1.6)")
    parser.add_argument("--tol", type=float, help="relative residual tolerance (default 1e-5)")
    parser.add_argument("--max-iter", type=int, help="iterations per layer (default 500)")
    parser.add_argument("--max-layers", type=int, help="depth cap (default 8)")
    parser.add_argument("--mode", choices=MODES, help="update mode (default accelerated)")
    parser.add_argument("--seed", type=int, help="initialization seed (default 0)")
    parser.add_argument("--mbp", choices=("0", "1"), help="run backpropagation (default 1)")
    parser.add_argument("--mbp-sweeps", type=int, help="backward sweeps (default 1)")
    parser.add_argument("--threshold", type=float, help="map binarization threshold (default 0)")


def _run_config(args: argparse.Namespace) -> RunConfig:
    return build_run_config(
        args.config,
        {
            "initial_rank": args.initial_rank,
            "beta": args.beta,
            "eta": args.eta,
            "tol": args.tol,
            "max_iter": args.max_iter,
            "max_layers": args.max_layers,
            "mode": args.mode,
            "seed": args.seed,
            "mbp": args.mbp,
            "mbp_sweeps": args.mbp_sweeps,
            "threshold": args.threshold,
        },
    )


def _write_json(data: Dict[str, Any], path: Optional[str]) -> None:
    text = json.dumps(data, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_decompose(args: argparse.Namespace) -> int:
    run_config = _run_config(args)
    timings = {}  # type: Dict[str, float]
    with stage_timer(timings, "read"):
        signal = read_matrix(args.input)
        templates = read_matrix(args.templates) if args.templates else None
    with stage_timer(timings, "decompose"):
        stack, traces = decompose(
            signal,
            run_config.admm,
            initial_rank=run_config.initial_rank,
            max_layers=run_config.max_layers,
            mbp=run_config.mbp,
            mbp_sweeps=run_config.mbp_sweeps,
        )
    similarity = None
    if templates is not None:
        with stage_timer(timings, "metrics"):
            similarity = compare_to_templates(
                stack.layers[-1].y, templates, threshold=run_config.threshold
            )

    os.makedirs(args.out, exist_ok=True)
    with stage_timer(timings, "write"):
        for k, layer in enumerate(stack.layers, start=1):
            write_matrix(os.path.join(args.out, "layer{}_x.dmat".format(k)), layer.x)
            write_matrix(os.path.join(args.out, "layer{}_y.dmat".format(k)), layer.y)
            write_matrix(os.path.join(args.out, "layer{}_z.dmat".format(k)), layer.z)
    report = RunReport.from_run(stack, traces, run_config.to_dict(), timings, similarity)
    report.write(os.path.join(args.out, "report.json"))
    logger.info("Wrote depth %d decomposition to %s", report.depth, args.out)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    if not args.ranks:
        raise InvalidSpec("at least one rank is needed")
    params = {"m": args.m, "n": args.n, "ranks": args.ranks, "seed": args.seed}
    # Spectrum and background flags fall back to the SynthSpec defaults.
    optional = {
        "noise_sigma": args.noise_sigma,
        "background_density": args.density,
        "background_amplitude": args.amplitude,
        "block_overlap": args.block_overlap,
        "lead_gap": args.lead_gap,
        "spread": args.spread,
        "gap": args.gap,
        "scale": args.scale,
    }
    params.update({name: value for name, value in optional.items() if value is not None})
    spec = SynthSpec(**params)
    truth = generate(spec)
    os.makedirs(args.out, exist_ok=True)
    write_matrix(os.path.join(args.out, "signal.dmat"), truth.s)
    write_matrix(os.path.join(args.out, "z_true.dmat"), truth.z_true)
    write_matrix(os.path.join(args.out, "y_true.dmat"), truth.y_true)
    for k, (x, y) in enumerate(zip(truth.x_true, truth.y_levels), start=1):
        write_matrix(os.path.join(args.out, "x{}_true.dmat".format(k)), x)
        write_matrix(os.path.join(args.out, "y{}_true.dmat".format(k)), y)
    _write_json(
        {"spec": spec.to_dict(), "singular_values": [float(v) for v in spec.singular_values()]},
        os.path.join(args.out, "truth.json"),
    )
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    features = read_matrix(args.features)
    templates = read_matrix(args.templates)
    report = compare_to_templates(features, templates, threshold=args.threshold)
    _write_json(report.to_dict(), args.out)
    return 0


def cmd_reproducibility(args: argparse.Namespace) -> int:
    run_config = _run_config(args)
    signal = read_matrix(args.input)
    report = reproducibility_report(
        signal,
        run_config.admm,
        initial_rank=run_config.initial_rank,
        seed=args.split_seed,
        max_layers=run_config.max_layers,
        mbp=run_config.mbp,
        parallel=args.parallel,
    )
    _write_json(report.to_dict(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    # Subparsers inherit the parser class, so their errors are JSON too.
    parser = JsonArgumentParser(
        prog="delmar", description="Deep linear matrix factorization with rank discovery."
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    parser.add_argument("--log-level", choices=LOG_LEVELS, default="WARNING")
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True

    p = subparsers.add_parser("decompose", help="factor a signal matrix into layers")
    p.add_argument("--input", required=True, help="signal matrix (csv or dmat)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--templates", help="reference maps compared to the deepest features")
    _add_solver_flags(p)
    p.set_defaults(handler=cmd_decompose)

    p = subparsers.add_parser("synth", help="generate a synthetic signal with ground truth")
    p.add_argument("--m", type=int, required=True, help="observations")
    p.add_argument("--n", type=int, required=True, help="variables")
    p.add_argument("--ranks", type=_parse_ranks, required=True, help="e.g. 25,6")
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--density", type=float, help="background outlier fraction")
    p.add_argument("--amplitude", type=float, help="background outlier magnitude")
    p.add_argument("--block-overlap", type=float, help="shared fraction of adjacent feature blocks")
    p.add_argument("--lead-gap", type=float, help="deepest lead over its next component")
    p.add_argument("--spread", type=float, help="decay across the rest of the deepest level")
    p.add_argument("--gap", type=float, help="ratio across each level boundary")
    p.add_argument("--scale", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_synth)

    p = subparsers.add_parser("metrics", help="compare feature maps with templates")
    p.add_argument("--features", required=True)
    p.add_argument("--templates", required=True)
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--out", help="json file, stdout when omitted")
    p.set_defaults(handler=cmd_metrics)

    p = subparsers.add_parser("reproducibility", help="split-half reproducibility of features")
    p.add_argument("--input", required=True)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--parallel", action="store_true", help="decompose both halves concurrently")
    p.add_argument("--out", help="json file, stdout when omitted")
    _add_solver_flags(p)
    p.set_defaults(handler=cmd_reproducibility)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    set_logger("delmar", getattr(logging, args.log_level))
    try:
        return args.handler(args)
    except BaseDelmarException as exc:
        _write_error(exc.code, str(exc))
        return exc.exit_status
    except OSError as exc:
        _write_error("io_error", str(exc))
        return 3


if __name__ == "__main__":
    sys.exit(main())
