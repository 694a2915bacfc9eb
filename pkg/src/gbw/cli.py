"""Command-line entry point.

``gbw <command> [flags]`` runs one experiment and writes its artifacts
(trace CSVs, matrices, summary JSON, optional figures) to the output
directory.  Options come from defaults, then the ``[command]`` section of
a config file, then flags; flags win.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import __version__
from .experiments import (
    COMMANDS,
    ConfigError,
    build_config,
    emit,
    load_file_config,
    run,
)

_FLAG_HELP = {
    "n": "matrix dimension",
    "d": "target dimension of the fitted frame",
    "k": "component count (gmm) or eigenvalue-sum cutoff, 0 = all (convexity)",
    "cond": "condition number of the constructed optimum",
    "geometry": "comma list from {ai,bw,gbw}; gbw is the iterate-adapted metric",
    "tol": "solver tolerance",
    "max_iters": "iteration cap",
    "step0": "initial step size",
    "decay": "step-size decay rate",
    "batch": "minibatch size",
    "epochs": "epoch count",
    "samples": "sample count (vectors, matrices, or per-class sizes)",
    "trials": "split or trial count",
    "data": "input data file (labeled vectors or raw sample rows)",
    "group_size": "rows per ingested covariance group",
    "cadence": "re-anchoring cadence for the adapted metric (0 = every step)",
}

# Which tuning flags each command exposes; common flags are added to all.
_COMMAND_FLAGS = {
    "logdet": ("n", "cond", "geometry", "tol", "max_iters", "cadence"),
    "gmm": ("n", "k", "geometry", "samples", "epochs", "batch", "step0", "decay", "data"),
    "pca": ("n", "d", "samples", "trials", "tol", "max_iters", "step0"),
    "metric": ("n", "d", "samples", "tol", "max_iters", "step0"),
    "barycenter": ("n", "samples", "geometry", "tol", "max_iters", "data", "group_size"),
    "distance": ("n", "samples", "geometry", "data", "group_size"),
    "convexity": ("n", "k", "trials"),
}

_COMMAND_HELP = {
    "logdet": "benchmark trust-region solve with a known optimum",
    "gmm": "stochastic mixture fit over SPD component parameters",
    "pca": "orthonormal-frame fit maximizing projected spread",
    "metric": "learn a low-rank distance weighting from labeled sets",
    "barycenter": "weighted mean of an SPD collection",
    "distance": "pairwise distance matrices under the chosen geometries",
    "convexity": "randomized geodesic-convexity sweep",
}

_INT_FLAGS = {"n", "d", "k", "max_iters", "batch", "epochs", "samples", "trials", "group_size", "cadence"}
_FLOAT_FLAGS = {"cond", "tol", "step0", "decay"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbw",
        description="Experiments on the generalized transport geometry of SPD matrices.",
    )
    parser.add_argument("--version", action="version", version=f"gbw {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        p = sub.add_parser(command, help=_COMMAND_HELP[command])
        p.add_argument("--config", help="config file with a [%s] section" % command)
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--no-plots", action="store_true", default=None,
                       dest="no_plots", help="skip figure rendering")
        for flag in _COMMAND_FLAGS[command]:
            kwargs = {"help": _FLAG_HELP[flag], "dest": flag}
            if flag in _INT_FLAGS:
                kwargs["type"] = int
            elif flag in _FLOAT_FLAGS:
                kwargs["type"] = float
            p.add_argument("--" + flag.replace("_", "-"), **kwargs)
    return parser


def _flag_values(args: argparse.Namespace) -> dict:
    skip = {"command", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_values = (
            load_file_config(args.config, args.command) if args.config else {}
        )
        cfg = build_config(args.command, file_values, _flag_values(args))
        start = time.perf_counter()
        bundle = run(cfg)
        wall = time.perf_counter() - start
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        written = emit(bundle, cfg.out, plots=not cfg.no_plots, wall_time_s=wall)
    except OSError as exc:
        print(f"cannot write artifacts: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    if bundle.failed:
        print(f"solver failure: {bundle.failure}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
