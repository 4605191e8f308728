"""Command-line front end: ``pidq pid|bounds|select|discretize|library``.

Reports are JSON objects on standard output. Exit status is 0 on success,
2 on invalid input or arguments, 3 when a solver did not converge (the
values are still printed).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io as pio
from .bounds import DisagreementConfig, performance_range, synergy_bounds
from .discretize import DiscretizeConfig, discretize_table
from .dist import JointDist, entropy, pairwise_marginals
from .errors import PIDQError
from .selection import normalize_pid, select_models, synthetic_library
from .solver import SolverConfig, pid

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _precision(raw: str):
    if raw == "full":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError("precision must be a positive integer or 'full'") from None
    if value < 1:
        raise argparse.ArgumentTypeError("precision must be a positive integer or 'full'")
    return value


def _bins(raw: str):
    if raw == "auto":
        return "auto"
    try:
        value = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError("bins must be 'auto' or an integer >= 2") from None
    if value < 2:
        raise argparse.ArgumentTypeError("bins must be 'auto' or an integer >= 2")
    return value


def _positive_int(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {raw!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {raw!r}")
    return value


def _positive_float(raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {raw!r}") from None
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {raw!r}")
    return value


def _global_flags(parser, suppress: bool) -> None:
    # the same flags are accepted before and after the subcommand; the
    # subcommand copies use SUPPRESS so they do not clobber earlier values
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument("--seed", type=int, help="seed for clustering and solver perturbations (default 0)", **({"default": 0} | kw))
    parser.add_argument(
        "--precision", type=_precision, metavar="N|full",
        help="significant digits in reports (default 6; 'full' for round-trip floats)", **({"default": 6} | kw),
    )
    parser.add_argument("--quiet", action="store_true", help="suppress notes and warnings on stderr", **kw)


def _discretize_flags(parser) -> None:
    g = parser.add_mutually_exclusive_group()
    g.add_argument("--bins", type=_bins, metavar="auto|N", help="histogram bins per feature (default auto)")
    g.add_argument("--clusters", type=_positive_int, metavar="N", help="k-means clusters per modality")


def _solver_flags(parser) -> None:
    parser.add_argument("--tol", type=_positive_float, help="objective tolerance (default 1e-10)")
    parser.add_argument("--max-iters", type=_positive_int, help="iteration cap (default 50000)")
    parser.add_argument("--method", choices=("barrier", "mirror"), default="barrier", help="q* solver")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pidq", description="Partial information decomposition toolkit.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pid", help="decompose a distribution or a sample table")
    _global_flags(p, suppress=True)
    p.add_argument("--input", required=True, help="DistFile (JSON) or SamplesFile (CSV)")
    _discretize_flags(p)
    _solver_flags(p)

    b = sub.add_parser("bounds", help="synergy and accuracy bounds from pairwise marginals")
    _global_flags(b, suppress=True)
    b.add_argument("--marginals", required=True, help="MarginalsFile, or a DistFile to marginalize")
    b.add_argument("--c", type=_positive_float, default=1.0, help="disagreement scale constant (default 1.0)")
    _solver_flags(b)

    s = sub.add_parser("select", help="rank library models for a target dataset")
    _global_flags(s, suppress=True)
    s.add_argument("--target", required=True, help="DistFile (JSON) or SamplesFile (CSV)")
    s.add_argument("--library", required=True, help="library JSON")
    s.add_argument("--top-k", type=_positive_int, default=3)
    _discretize_flags(s)
    _solver_flags(s)

    d = sub.add_parser("discretize", help="turn a sample table into a DistFile")
    _global_flags(d, suppress=True)
    d.add_argument("--input", required=True, help="SamplesFile (CSV)")
    d.add_argument("--output", required=True, help="DistFile to write")
    d.add_argument("--meta", help="sidecar metadata path (default: <output>.meta.json)")
    _discretize_flags(d)

    lib = sub.add_parser("library", help="write the built-in synthetic model library")
    _global_flags(lib, suppress=True)
    lib.add_argument("--output", required=True)
    lib.add_argument("--profiles", type=int, choices=(5, 10), default=10)
    return parser


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _round(obj, digits):
    if isinstance(obj, dict):
        return {k: _round(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, digits) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return x if digits is None else float(f"{x:.{digits}g}")
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _emit(report: dict, args) -> None:
    out = {"schema_version": pio.SCHEMA_VERSION, "command": args.command, **report}
    sys.stdout.write(json.dumps(_round(out, args.precision), indent=2) + "\n")


def _note(args, message: str) -> None:
    if not args.quiet:
        print(f"pidq: {message}", file=sys.stderr)


def _dconfig(args) -> DiscretizeConfig:
    if getattr(args, "clusters", None) is not None:
        return DiscretizeConfig(method="kmeans", bins_or_k=args.clusters, seed=args.seed)
    bins = getattr(args, "bins", None)
    return DiscretizeConfig(method="histogram", bins_or_k="auto" if bins is None else bins, seed=args.seed)


def _sconfig(args) -> SolverConfig:
    kw = {"seed": args.seed, "method": args.method}
    if args.tol is not None:
        kw["tol_obj"] = args.tol
    if args.max_iters is not None:
        kw["max_iters"] = args.max_iters
    return SolverConfig(**kw)


def _load_joint(path, args) -> tuple[JointDist, dict | None]:
    """A DistFile as-is, or a SamplesFile discretized with the command's flags."""
    if pio.looks_like_json(path):
        return pio.read_dist(path), None
    return discretize_table(pio.read_samples(path), _dconfig(args))


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_pid(args) -> int:
    joint, meta = _load_joint(args.input, args)
    result = pid(joint, _sconfig(args))
    report = result.to_dict()
    report["cardinalities"] = list(joint.shape)
    _emit(report, args)
    if not result.converged:
        _note(args, f"solver did not converge within {result.iterations} iterations")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_bounds(args) -> int:
    path = args.marginals
    obj = pio._load_json(path)
    if "p" in obj and "cardinalities" in obj:
        marginals = pairwise_marginals(pio.dist_from_dict(obj, path))
    else:
        marginals = pio.marginals_from_dict(obj, path)
    sb = synergy_bounds(marginals, _sconfig(args), DisagreementConfig(c=args.c))
    py = marginals.py
    h_y = entropy(py)
    known = sb.r + sb.u1 + sb.u2
    notes = list(sb.notes)
    if marginals.has_m12:
        s_lo, s_hi = sb.s_lower, sb.s_upper
    else:
        # I({X1,X2}; Y) <= H(Y) is the only cap on S without p(x1, x2)
        s_lo, s_hi = 0.0, max(h_y - known, 0.0)
        notes.append("performance range uses S in [0, H(Y) - R - U1 - U2]")
    perf = performance_range(sb.r, sb.u1, sb.u2, s_lo, s_hi, h_y, len(py))
    report = {
        "R": sb.r,
        "U1": sb.u1,
        "U2": sb.u2,
        "S_R": sb.s_r_lower,
        "S_U": sb.s_u_lower,
        "S_upper": sb.s_upper,
        "alpha": sb.alpha,
        "min_cmi": sb.min_cmi,
        "I12": sb.i12,
        "coupling_entropy": sb.coupling_entropy,
        "p_lower": perf.p_lower,
        "p_upper": perf.p_upper,
        "p_hat": perf.p_hat,
        "c": args.c,
        "converged": sb.converged,
        "notes": notes,
    }
    _emit(report, args)
    for n in notes:
        _note(args, n)
    return EXIT_OK if sb.converged else EXIT_NOT_CONVERGED


def cmd_select(args) -> int:
    library = pio.read_library(args.library)
    joint, _ = _load_joint(args.target, args)
    result = pid(joint, _sconfig(args))
    profile = normalize_pid(result)
    if profile.degenerate:
        raise PIDQError("target carries no information about its label; its profile is undefined")
    chosen = select_models(profile, library, args.top_k)
    _emit(
        {
            "dataset_id": chosen.dataset_id,
            "similarity": chosen.similarity,
            "models": chosen.models,
            "target_profile": profile.as_array().tolist(),
        },
        args,
    )
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_discretize(args) -> int:
    table = pio.read_samples(args.input)
    config = _dconfig(args)
    joint, meta = discretize_table(table, config)
    meta_path = Path(args.meta) if args.meta else Path(f"{args.output}.meta.json")
    pio.write_dist(args.output, joint)
    pio.write_json_atomic(meta_path, {"schema_version": pio.SCHEMA_VERSION, "method": config.method, **meta})
    if not args.quiet:
        _emit({"output": str(args.output), "meta": str(meta_path), "cardinalities": list(joint.shape), "n": table.n}, args)
    return EXIT_OK


def cmd_library(args) -> int:
    pio.write_library(args.output, synthetic_library(args.profiles))
    if not args.quiet:
        _emit({"output": str(args.output), "profiles": args.profiles}, args)
    return EXIT_OK


COMMANDS = {
    "pid": cmd_pid,
    "bounds": cmd_bounds,
    "select": cmd_select,
    "discretize": cmd_discretize,
    "library": cmd_library,
}


def _configure_logging(quiet: bool) -> None:
    logger = logging.getLogger("pidq")
    for h in list(logger.handlers):
        if getattr(h, "_pidq_cli", False):
            logger.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler._pidq_cli = True
    handler.setFormatter(logging.Formatter("pidq: %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.ERROR if quiet else logging.WARNING)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.quiet)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = COMMANDS[args.command](args)
        for w in caught:
            _note(args, f"warning: {w.message}")
        return code
    except PIDQError as exc:
        print(f"pidq: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"pidq: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
