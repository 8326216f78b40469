"""Command-line front end.

Every subcommand writes one JSON document (or CSV for ``defect``) to stdout
or ``--output``.  Floats are printed with 17 significant digits so values
round-trip.  Exit codes: 0 success, 1 usage error, 2 work budget exhausted,
3 invariant violation detected in the output.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics
from .norms import (
    ORACLE_MAX_SUPPORT,
    garling_norm,
    garling_norm_oracle,
    is_minimal,
    lorentz_norm,
    lp_norm,
    minimal_predecessor,
    weak_lorentz_quasinorm,
)
from .operators import apply_signs, extract, parse_map, parse_signs, spread
from .sequences import FiniteSequence, dyadic_blocks, parse_sequence
from .weights import WeightError, diagnostics, make_weight

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class CliConfig:
    command: str
    weight: str = "pow:a=0.5"
    p: float = 1.0
    vector: str | None = None
    horizon: int | None = None
    r_list: list[int] = field(default_factory=list)
    epsilon: float | None = None
    budget: float | None = None
    tol: float | None = None
    seed: int | None = None
    fmt: str = "json"
    output: str | None = None

    @classmethod
    def from_namespace(cls, args) -> "CliConfig":
        command = args.command if args.command != "weights" else f"weights {args.action}"
        return cls(
            command=command,
            weight=args.weight,
            p=args.p,
            vector=getattr(args, "vec", None) or getattr(args, "input", None),
            horizon=getattr(args, "horizon", None),
            r_list=list(getattr(args, "r", []) or []),
            epsilon=getattr(args, "epsilon", None),
            budget=getattr(args, "budget", None),
            tol=getattr(args, "tol", None),
            seed=getattr(args, "seed", None),
            fmt=getattr(args, "format", "json"),
            output=args.output,
        )


# -- serialization ----------------------------------------------------------------
def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with 17 significant digit floats and stable key order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return "[" + _fmt_float(obj.real) + ", " + _fmt_float(obj.imag) + "]"
    return json.dumps(obj)


def _defect_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(asymptotics.DEFECT_COLUMNS) + "\n")
    for row in rows:
        d = row.to_dict()
        buf.write(",".join(str(d[c]) if c == "r" else _fmt_float(d[c])
                           for c in asymptotics.DEFECT_COLUMNS) + "\n")
    return buf.getvalue()


# -- helpers ------------------------------------------------------------------------
def _load_vector(args) -> FiniteSequence:
    if args.vec is not None:
        text = args.vec
    elif args.input is not None:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    else:
        raise UsageError("one of --vec or --input is required")
    try:
        return parse_sequence(text)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"cannot parse vector: {exc}") from exc


def _weight(args):
    try:
        return make_weight(args.weight)
    except WeightError as exc:
        raise UsageError(str(exc)) from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _p_value(text: str) -> float:
    p = float(text)
    if not p >= 1:
        raise argparse.ArgumentTypeError("p must be >= 1")
    return p


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _vector_json(f: FiniteSequence) -> list:
    return [[i, v] for i, v in f.entries()]


# -- subcommands --------------------------------------------------------------------
def cmd_norm(args) -> tuple[object, int]:
    w = _weight(args)
    f = _load_vector(args)
    try:
        if args.signs:
            f = apply_signs(parse_signs(args.signs, f.support), f)
        if args.spread:
            f = spread(parse_map(args.spread), f)
        if args.extract:
            f = extract(parse_map(args.extract), f)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = {"space": args.space, "weight": w.describe(), "p": args.p}
    if args.space == "g":
        out.update(garling_norm(f, w, args.p).to_dict())
    elif args.space == "d":
        out.update(lorentz_norm(f, w, args.p).to_dict())
    elif args.space == "dinf":
        out.update({"value": weak_lorentz_quasinorm(f, w, args.p), "p_power": None,
                    "selection": None, "algorithm": "rearrangement"})
    else:
        out.update({"value": lp_norm(f, args.p), "p_power": None,
                    "selection": None, "algorithm": "direct"})
    out["vector"] = _vector_json(f)
    return out, EXIT_OK


def cmd_weights(args) -> tuple[object, int]:
    w = _weight(args)
    d = diagnostics(w, args.horizon)
    status = EXIT_OK
    if d.ed_sup < 1 or d.reg_sup < 1 - 1e-12:
        status = EXIT_INVARIANT
    out = {"weight": w.describe()}
    out.update(d.to_dict())
    return out, status


def cmd_defect(args) -> tuple[object, int]:
    w = _weight(args)
    rows = asymptotics.symmetry_defect(w, args.p, args.r, budget=args.budget)
    status = EXIT_OK
    for row in rows:
        for msg in row.violations():
            log.error(msg)
            status = EXIT_INVARIANT
        if row.rev_exceeds_f:
            log.warning("r=%d: reversed vector has the larger norm", row.r)
    if args.format == "csv":
        return _defect_csv(rows), status
    return {"weight": w.describe(), "p": args.p, "rows": [r.to_dict() for r in rows]}, status


def cmd_select_lp(args) -> tuple[object, int]:
    w = _weight(args)
    bs = dyadic_blocks(w, args.p)
    try:
        trace = asymptotics.select_lp_subsequence(bs, w, args.p, args.epsilon, args.budget)
    except asymptotics.SelectionInvariantError as exc:
        log.error("%s", exc)
        return {"error": str(exc)}, EXIT_INVARIANT
    report = asymptotics.verify_factorization(trace, w, args.p, args.trials, args.seed)
    out = {"weight": w.describe(), "trace": trace.to_dict(), "factorization": report.to_dict()}
    return out, EXIT_OK if report.passed else EXIT_INVARIANT


def cmd_minimal(args) -> tuple[object, int]:
    w = _weight(args)
    f = _load_vector(args)
    if f.size == 0:
        raise UsageError("minimality needs a nonzero vector")
    minimal, witness = is_minimal(f, w, args.p, args.tol)
    pred = minimal_predecessor(f, w, args.p, args.tol)
    norm = garling_norm(f, w, args.p).value
    pred_norm = garling_norm(pred, w, args.p).value
    status = EXIT_OK
    if abs(pred_norm - norm) > args.tol * norm or not is_minimal(pred, w, args.p, args.tol)[0]:
        status = EXIT_INVARIANT
    return {
        "minimal": minimal,
        "witness": witness,
        "norm": norm,
        "predecessor": _vector_json(pred),
        "predecessor_norm": pred_norm,
    }, status


def random_test_vector(rng: np.random.Generator, max_support: int, max_index: int) -> FiniteSequence:
    """Random sparse vector mixing wide magnitude ranges and repeated values."""
    size = int(rng.integers(1, max_support + 1))
    idx = np.sort(rng.choice(np.arange(1, max_index + 1), size=size, replace=False))
    mode = int(rng.integers(0, 3))
    if mode == 0:
        coefs = rng.uniform(-1.0, 1.0, size)
    elif mode == 1:
        coefs = rng.choice([-1.0, 0.5, 1.0, 2.0], size=size)
    else:
        coefs = np.exp(rng.uniform(-6.0, 6.0, size)) * rng.choice([-1.0, 1.0], size=size)
    coefs[coefs == 0] = 1.0
    return FiniteSequence(idx, coefs)


def cmd_oracle_check(args) -> tuple[object, int]:
    w = _weight(args)
    if not 1 <= args.max_support <= ORACLE_MAX_SUPPORT:
        raise UsageError(f"--max-support must lie in 1..{ORACLE_MAX_SUPPORT}")
    if args.max_index < args.max_support:
        raise UsageError("--max-index must be at least --max-support")
    rng = np.random.default_rng(args.seed)
    worst, failures = 0.0, []
    for t in range(args.trials):
        f = random_test_vector(rng, args.max_support, args.max_index)
        dp = garling_norm(f, w, args.p).value
        oracle = garling_norm_oracle(f, w, args.p)
        err = abs(dp - oracle) / oracle
        worst = max(worst, err)
        if err > args.tol:
            failures.append({"trial": t, "dp": dp, "oracle": oracle, "vector": _vector_json(f)})
    out = {
        "weight": w.describe(),
        "p": args.p,
        "seed": args.seed,
        "trials": args.trials,
        "max_relative_error": worst,
        "failures": failures,
    }
    return out, EXIT_INVARIANT if failures else EXIT_OK


# -- parser -------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="garling", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, vector=False):
        sp.add_argument("--weight", default="pow:a=0.5",
                        help="pow:a=<a> | logpow:a=<a>,b=<b> | table:v1,v2,... | file:<path>")
        sp.add_argument("--p", type=_p_value, default=1.0)
        sp.add_argument("--output", help="write to this file instead of stdout")
        if vector:
            src = sp.add_mutually_exclusive_group()
            src.add_argument("--vec", help='dense "[v1,v2,...]" or sparse \'{"entries":[[i,v],...]}\'')
            src.add_argument("--input", help="file holding a vector in either form")

    sp = sub.add_parser("norm", help="norm of one vector")
    common(sp, vector=True)
    sp.add_argument("--space", choices=["g", "d", "dinf", "lp"], default="g")
    sp.add_argument("--signs", help="alt | flip:i1,i2,...")
    sp.add_argument("--spread", help="identity | affine:a,b | power:k | dyadic | list:i1,...")
    sp.add_argument("--extract", help="same grammar as --spread")
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("weights", help="weight utilities")
    wsub = sp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    diag = wsub.add_parser("diag", help="finite-horizon taxonomy statistics")
    common(diag)
    diag.add_argument("--horizon", type=int, default=4096)
    diag.set_defaults(func=cmd_weights)

    sp = sub.add_parser("defect", help="Garling norm of f^(r) against its reversal")
    common(sp)
    sp.add_argument("--r", type=_int_list, default=[16, 64, 256, 1024, 4096])
    sp.add_argument("--budget", type=_positive, default=None, help="cap on DP cells")
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.set_defaults(func=cmd_defect)

    sp = sub.add_parser("select-lp", help="l_p subsequence of the dyadic blocks")
    common(sp)
    sp.add_argument("--epsilon", type=_positive, default=3.0)
    sp.add_argument("--budget", type=_positive, default=1e9)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, required=True)
    sp.set_defaults(func=cmd_select_lp)

    sp = sub.add_parser("minimal", help="minimality test and minimal predecessor")
    common(sp, vector=True)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.set_defaults(func=cmd_minimal)

    sp = sub.add_parser("oracle-check", help="randomized DP against exhaustive search")
    common(sp)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--max-support", type=int, default=12)
    sp.add_argument("--max-index", type=int, default=40)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.set_defaults(func=cmd_oracle_check)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    log.info("config: %s", CliConfig.from_namespace(args))
    try:
        result, status = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"garling: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except asymptotics.WorkBudgetExceeded as exc:
        print(f"garling: budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    text = result if isinstance(result, str) else dumps(result) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
