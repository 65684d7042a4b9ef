"""Command-line front end. Every subcommand writes one JSON document.

Exit codes: 0 success, 1 a verified negative verdict, 2 usage or input
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .battery import VERSION, verify_suite
from .config import TOL_GAP, TOL_ZERO, Tolerances
from .constructions import (
    construct_dense_extremizer,
    kn_zero_diag,
    odd_cycle_matrix,
    path_extremizer,
    zero_diag_ncc_matrix,
    zero_diag_path_extremizer,
)
from .exceptions import NodalCountError, NumericalFailure
from .graph import betti, classify_determinantal, load_graph, spanning_frame
from .magnetic import hessian_stack, morse_verify
from .perturbation import MAX_RESAMPLES, c4_exact_fraction, diag_perturbation_sign_survey, sign_vanishing_entries
from .spectral import check_ncc, eigensystem, load_matrix, nodal_counts, verify_surplus_bounds
from .transversality import SupportSubspace, check_transversality, transversal_repair

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
FAMILIES = ("dense", "path", "zero-path", "kn", "odd-cycle", "generic")
MAX_SEED = 2**64 - 1


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Parsed invocation, embedded in every report."""

    subcommand: str
    seed: int = 0
    tolerances: Tolerances = field(default_factory=Tolerances)
    options: dict = field(default_factory=dict)
    version: str = VERSION

    def to_dict(self) -> dict:
        return {"subcommand": self.subcommand, "seed": self.seed, "tolerances": self.tolerances.to_dict(),
                "options": self.options, "version": self.version}


def _positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be positive and finite, got {text}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not serializable: {type(x).__name__}")


def _clean(x):
    """Replace non-finite floats with ``None`` so the output is strict JSON."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


def dumps(doc) -> str:
    return json.dumps(_clean(doc), indent=2, default=_jsonable, allow_nan=False) + "\n"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-gap", type=_positive, default=TOL_GAP, help="relative eigenvalue gap tolerance")
    common.add_argument("--tol-zero", type=_positive, default=TOL_ZERO, help="relative zero-entry tolerance")
    common.add_argument("--fd-step", type=_positive, default=None,
                        help="finite-difference flux step (default: chosen from the spectral gap)")
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--only", action="append", default=None, help="verify: run only matching checks")

    parser = argparse.ArgumentParser(prog="nodalcount", description="Nodal edge counts of symmetric matrices on graphs.")
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, graph=False, matrix=False):
        p = sub.add_parser(name, help=help_, parents=[common])
        if graph or matrix:
            p.add_argument("--graph", required=True, help="graph JSON file")
        if matrix:
            p.add_argument("--matrix", required=True, help="matrix JSON file")
        return p

    p = add("classify", "determinantal or sub-determinantal", graph=True)
    p.add_argument("--method", choices=("matching", "bruteforce"), default="matching")
    add("betti", "first Betti number", graph=True)
    add("nodal", "NCC report and nodal counts", matrix=True)
    add("ncc", "nodal count condition only", matrix=True)
    p = add("magnetic", "magnetic Hessians and Morse indices", matrix=True)
    p.add_argument("--method", choices=("pert", "fd"), default="pert")
    p = add("construct", "extremal constructions")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--beta", type=int, default=0)
    p.add_argument("--eps", type=_positive, default=None)
    p.add_argument("--delta", type=_positive, default=None)
    p.add_argument("--graph", default=None, help="graph JSON for --family generic")
    p = add("transversality", "transversality test and repair", matrix=True)
    p.add_argument("--space", choices=("sg", "s0g"), default="sg")
    p.add_argument("--repair", action="store_true")
    p.add_argument("--gap", type=_positive, default=None, help="target spacing for split eigenvalues")
    p = add("signing", "sign vanishing eigenvector entries", matrix=True)
    p.add_argument("--max-resamples", type=int, default=MAX_RESAMPLES)
    p.add_argument("--eps0", type=_positive, default=None)
    p = add("survey", "C_4 diagonal-perturbation sign survey")
    p.add_argument("--samples", type=int, default=10**6)
    p = add("verify", "acceptance battery")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timings", action="store_true", help="include per-check runtimes (not deterministic)")
    return parser


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _inputs(args, matrix: bool = False):
    g = load_graph(_read(args.graph))
    if not matrix:
        return g
    return g, load_matrix(_read(args.matrix), g)


def cmd_classify(args, tol):
    v = classify_determinantal(_inputs(args), args.method)
    return v.to_dict(), EXIT_OK


def cmd_betti(args, tol):
    g = _inputs(args)
    return {"n": g.n, "edges": g.n_edges, "beta": betti(g)}, EXIT_OK


def cmd_nodal(args, tol):
    g, a = _inputs(args, True)
    es = eigensystem(a, tol.tol_zero)
    ncc = check_ncc(a, es, tol.tol_gap, tol.tol_zero)
    report = nodal_counts(a, es.vectors, tol.tol_zero)
    out = {"ncc": ncc.to_dict(), "nodal": report.to_dict(), "eigenvalues": es.values}
    code = EXIT_OK
    if ncc.satisfied:
        bounds = verify_surplus_bounds(report, betti(g), g.n)
        out["bounds"] = bounds.to_dict()
        code = EXIT_OK if bounds.passed else EXIT_FAIL
    return out, code


def cmd_ncc(args, tol):
    _, a = _inputs(args, True)
    ncc = check_ncc(a, None, tol.tol_gap, tol.tol_zero)
    return ncc.to_dict(), EXIT_OK if ncc.satisfied else EXIT_FAIL


def cmd_magnetic(args, tol):
    g, a = _inputs(args, True)
    es = eigensystem(a, tol.tol_zero)
    frame = spanning_frame(g)
    stack = hessian_stack(a, es, frame, args.method, tol.tol_hess * (1 + a.norm), tol.fd_step)
    verdict = morse_verify(a, es, frame, nodal_counts(a, es.vectors, tol.tol_zero), stack=stack)
    out = {"frame": {"tree": frame.tree_edges, "cotree": frame.cotree_edges}, "hessians": stack.to_list(),
           "trace_residual": stack.trace_residual(), "morse": verdict.to_dict()}
    return out, EXIT_OK if verdict.passed else EXIT_FAIL


def cmd_construct(args, tol):
    fam, n, beta = args.family, args.n, args.beta
    kw = {"tol_gap": tol.tol_gap, "tol_zero": tol.tol_zero}
    if fam == "generic":
        if args.graph is None:
            raise UsageError("--family generic needs --graph")
        res = zero_diag_ncc_matrix(_inputs(args), seed=args.seed, **kw)
        return res.to_dict(), EXIT_OK if getattr(res, "success", False) else EXIT_FAIL
    if n is None:
        raise UsageError(f"--family {fam} needs --n")
    if fam == "dense":
        res = construct_dense_extremizer(n, beta, seed=args.seed, **kw)
    elif fam == "path":
        res = path_extremizer(n, beta, args.eps, args.delta, **kw)
    elif fam == "zero-path":
        res = zero_diag_path_extremizer(n, beta, args.eps, args.delta, **kw)
    elif fam == "kn":
        res = kn_zero_diag(n, args.eps, **kw)
    else:
        res = odd_cycle_matrix(n, args.eps, **kw)
    return res.to_dict(), EXIT_OK if res.success else EXIT_FAIL


def cmd_transversality(args, tol):
    g, a = _inputs(args, True)
    w = SupportSubspace(args.space, g)
    verdict = check_transversality(a, w, tol.tol_gap)
    out = {"space": w.kind, "verdict": verdict.to_dict()}
    if args.repair:
        rep = transversal_repair(a, w=w, target_gap=args.gap, tol_gap=tol.tol_gap, tol_zero=tol.tol_zero,
                                 seed=args.seed)
        out["repair"] = rep.to_dict()
        out["repair"]["ncc"] = check_ncc(rep.matrix, None, tol.tol_gap, tol.tol_zero).to_dict()
        out["repair"]["total"] = nodal_counts(rep.matrix, rep.basis, tol.tol_zero).total
    return out, EXIT_OK if verdict.transversal else EXIT_FAIL


def cmd_signing(args, tol):
    _, a = _inputs(args, True)
    sb = sign_vanishing_entries(a, seed=args.seed, max_resamples=args.max_resamples, tol_gap=tol.tol_gap,
                                tol_zero=tol.tol_zero, eps0=args.eps0)
    return sb.to_dict(), EXIT_OK


def cmd_survey(args, tol):
    if args.samples <= 0:
        raise UsageError("--samples must be positive")
    res = diag_perturbation_sign_survey(args.samples, seed=args.seed)
    out = res.to_dict()
    out["exact"] = c4_exact_fraction()
    out["error"] = abs(res.fraction - out["exact"])
    return out, EXIT_OK


def cmd_verify(args, tol):
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    try:
        report = verify_suite(args.seed, args.only, tol, args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return report.to_dict(args.timings), EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {
    "classify": cmd_classify,
    "betti": cmd_betti,
    "nodal": cmd_nodal,
    "ncc": cmd_ncc,
    "magnetic": cmd_magnetic,
    "construct": cmd_construct,
    "transversality": cmd_transversality,
    "signing": cmd_signing,
    "survey": cmd_survey,
    "verify": cmd_verify,
}


def _config(args) -> RunConfig:
    skip = {"command", "tol_gap", "tol_zero", "fd_step", "seed", "out"}
    opts = {k: v for k, v in vars(args).items() if k not in skip}
    tol = Tolerances(tol_gap=args.tol_gap, tol_zero=args.tol_zero, fd_step=args.fd_step)
    return RunConfig(args.command, args.seed, tol, opts)


def run_command(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    """Parse ``argv``, run the subcommand and write its JSON report; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.only and args.command != "verify":
        print("error: --only applies to verify", file=stderr)
        return EXIT_USAGE
    config = _config(args)
    try:
        body, code = COMMANDS[args.command](args, config.tolerances)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        body, code = {"error": type(exc).__name__, "message": str(exc)}, EXIT_NUMERIC
    except NodalCountError as exc:
        # malformed or out-of-range input
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_USAGE
    doc = {"config": config.to_dict(), "result": body, "exit_code": code}
    text = dumps(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        stdout.write(text)
    return code


def main() -> None:
    sys.exit(run_command())
