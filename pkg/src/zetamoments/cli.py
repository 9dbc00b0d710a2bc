"""Command-line front end.

Exit codes: 0 success (and every audit passed), 1 some audit failed,
2 invalid argument, 3 resource limit, 4 insufficient precision.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .construction import build_alpha_beta, build_params
from .errors import InsufficientPrecision, InvalidArgument, ResourceLimit
from .families import I_X, I_q
from .multiplicative import diagonal_asymptotic, diagonal_sum, load_or_sieve
from .moments import (
    DEFAULT_STEP,
    MomentLab,
    constant_audits,
    report_diagonal,
    report_lemma1,
    report_lemma2,
    report_theorem,
)
from .sylvester import as_fraction, sylvester
from .zeta import zeta_em, zeta_half, zeta_truncated

CACHE_ENV = "ZETAMOMENTS_CACHE"

EXIT_OK, EXIT_AUDIT, EXIT_INVALID, EXIT_RESOURCE, EXIT_PRECISION = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        d = {k: v for k, v in vars(ns).items() if k not in ("func", "command") and v is not None}
        return cls(ns.command, d)

    def as_dict(self) -> dict:
        return {"command": self.command, **{k: str(v) if isinstance(v, Path) else v for k, v in self.values.items()}}


def read_config_file(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment; keys are flag names."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgument(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = val
    return out


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _k_above_one(s: str) -> str:
    try:
        k = as_fraction(s)
    except InvalidArgument as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if k <= 1:
        raise argparse.ArgumentTypeError(f"k must exceed 1, got {s}")
    return s


def _theta(x: float) -> float:
    if not 0.0 < x < 0.45:
        raise InvalidArgument(f"theta must lie in (0, 0.45), got {x}")
    return x


def _emit(text: str, path) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _cache_dir(args):
    return args.cache_dir or os.environ.get(CACHE_ENV) or None


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_sylvester(args) -> int:
    seq = sylvester(args.alpha, args.count)
    w = csv.writer(sys.stdout, lineterminator="\n")
    if args.format == "csv":
        w.writerow(["n", "term", "remainder"])
        for i, (s, r) in enumerate(zip(seq.terms, seq.remainders), 1):
            w.writerow([i, s, str(r)])
    else:
        print(", ".join(str(s) for s in seq.terms))
    return EXIT_OK


def cmd_divisor(args) -> int:
    k = float(as_fraction(args.k))
    if not k > 0:
        raise InvalidArgument("k must be positive")
    table = load_or_sieve(k, args.N, _cache_dir(args))
    if args.diagonal:
        s = diagonal_sum(k, args.N)
        asym = diagonal_asymptotic(k, args.N, args.prime_cutoff)
        print(json.dumps({"k": args.k, "N": args.N, "diagonal_sum": s,
                          "asymptotic": asym.value, "tail_bound": asym.tail_bound}))
        return EXIT_OK
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "d_k"])
    for n in range(1, args.N + 1):
        w.writerow([n, repr(float(table[n]))])
    return EXIT_OK


def cmd_zeta(args) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["t", "re", "im", "abs", "method", "err"])
    for t in args.t:
        if args.method == "truncated":
            if args.T is None:
                raise InvalidArgument("--method truncated needs --T")
            v = zeta_truncated(t, args.T)
        elif args.method == "em":
            v = zeta_em(complex(0.5, t))
        else:
            v = zeta_half(t)
        w.writerow([repr(t), repr(v.value.real), repr(v.value.imag), repr(abs(v.value)), v.method.value, repr(v.err)])
    return EXIT_OK


def cmd_construct(args) -> int:
    params = build_params(args.k, args.T, _theta(args.theta))
    out = params.summary()
    if args.output_dir:
        d = Path(args.output_dir)
        d.mkdir(parents=True, exist_ok=True)
        alpha, beta = build_alpha_beta(params)
        (d / "alpha.csv").write_text(alpha.to_csv())
        (d / "beta.csv").write_text(beta.to_csv())
        out["alpha"] = alpha.summary()
        out["beta"] = beta.summary()
    print(json.dumps(out, indent=2))
    return EXIT_OK


_REPORTS = {
    "verify-lemma2": report_lemma2,
    "verify-diagonal": report_diagonal,
    "verify-lemma1": report_lemma1,
    "verify-theorem": report_theorem,
    "verify": report_theorem,
}


def cmd_verify(args) -> int:
    params = build_params(args.k, args.T, _theta(args.theta))
    lab = MomentLab(params, step=args.step, threads=args.threads)
    rep = _REPORTS[args.command](lab, RunConfig.from_namespace(args).as_dict())
    _emit(rep.to_json() + "\n", args.json)
    if args.csv:
        _emit(rep.audits_csv(), args.csv)
    if not rep.passed:
        for name in rep.failing():
            print(f"audit failed: {name}", file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


def cmd_audit_constants(args) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["name", "lhs", "rhs", "pass", "slack_log"])
    rows = constant_audits(args.k)
    for a in rows:
        w.writerow(a.row())
    return EXIT_OK if all(a.passed for a in rows) else EXIT_AUDIT


def cmd_family(args) -> int:
    if (args.q is None) == (args.X is None):
        raise InvalidArgument("give exactly one of --q and --X")
    m = I_q(args.q, args.k, args.vartheta) if args.q is not None else I_X(args.X, args.k, args.vartheta)
    _emit(m.to_csv(), args.output)
    print(f"total={m.value.real!r}{m.value.imag:+.3e}j diagonal={m.diagonal!r}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zetamoments", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--config", help="key = value file; keys are flag names")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cache-dir", help=f"divisor-table cache (default ${CACHE_ENV})")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sylvester", help="greedy Egyptian-fraction denominators")
    s.add_argument("--alpha", default="1")
    s.add_argument("--count", type=int, default=4)
    s.add_argument("--format", choices=["text", "csv"], default="text")
    s.set_defaults(func=cmd_sylvester)

    s = sub.add_parser("divisor", help="generalised divisor function table")
    s.add_argument("--k", required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--diagonal", action="store_true", help="print sum d_k(n)^2/n and its asymptotic")
    s.add_argument("--prime-cutoff", type=int, default=10_000)
    s.set_defaults(func=cmd_divisor)

    s = sub.add_parser("zeta", help="zeta(1/2 + it)")
    s.add_argument("--t", type=float, nargs="+", required=True)
    s.add_argument("--method", choices=["auto", "em", "truncated"], default="auto")
    s.add_argument("--T", type=float)
    s.set_defaults(func=cmd_zeta)

    s = sub.add_parser("construct", help="parameters and coefficient vectors")
    s.add_argument("--k", type=_k_above_one, required=True)
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--theta", type=float, default=0.3)
    s.add_argument("--output-dir")
    s.set_defaults(func=cmd_construct)

    for name in ("verify-lemma2", "verify-diagonal", "verify-lemma1", "verify-theorem", "verify"):
        s = sub.add_parser(name, help="run a verification and emit a JSON report")
        s.add_argument("--k", type=_k_above_one, required=True)
        s.add_argument("--T", type=float, required=True)
        s.add_argument("--theta", type=float, default=0.3)
        s.add_argument("--step", type=float, default=DEFAULT_STEP)
        s.add_argument("--json", help="report path (default stdout)")
        s.add_argument("--csv", help="audit CSV path")
        s.set_defaults(func=cmd_verify)

    s = sub.add_parser("audit-constants", help="k-dependent constant audits as CSV")
    s.add_argument("--k", type=_k_above_one, required=True)
    s.set_defaults(func=cmd_audit_constants)

    s = sub.add_parser("family", help="twisted first moment over a family (CSV)")
    s.add_argument("--q", type=int)
    s.add_argument("--X", type=float)
    s.add_argument("--k", type=_k_above_one, default="1.5")
    s.add_argument("--vartheta", type=float, default=0.2)
    s.add_argument("--output")
    s.set_defaults(func=cmd_family)
    return p


def _subparsers(parser: argparse.ArgumentParser) -> dict:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def parse_args(argv=None) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    parser = build_parser()
    if known.config:
        conf = read_config_file(known.config)
        # config supplies defaults; explicit flags still win
        top = {a.dest for a in parser._actions}
        parser.set_defaults(**{k: v for k, v in conf.items() if k in top})
        for sp in _subparsers(parser).values():
            dests = {a.dest: a for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in conf.items() if k in dests})
            for k in conf:
                if k in dests:
                    dests[k].required = False
        every = top.union(*({a.dest for a in sp._actions} for sp in _subparsers(parser).values()))
        unknown = set(conf) - every
        if unknown:
            raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
    args = parser.parse_args(argv)
    # string defaults from a config file go through each flag's type
    for sp in [parser, _subparsers(parser)[args.command]]:
        for a in sp._actions:
            v = getattr(args, a.dest, None)
            if isinstance(v, str) and a.type not in (None, str) and a.nargs is None:
                setattr(args, a.dest, a.type(v))
    return args


def main(argv=None) -> int:
    try:
        try:
            args = parse_args(argv)
        except SystemExit as exc:  # argparse usage errors and --help
            return int(exc.code or 0)
        if args.threads < 1:
            raise InvalidArgument("--threads must be >= 1")
        return args.func(args)
    except InvalidArgument as exc:
        print(f"error: invalid argument: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceLimit as exc:
        print(f"error: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InsufficientPrecision as exc:
        print(f"error: insufficient precision: {exc}", file=sys.stderr)
        return EXIT_PRECISION


if __name__ == "__main__":
    sys.exit(main())
