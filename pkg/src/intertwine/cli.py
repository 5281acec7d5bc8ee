"""Command-line front end: ``verify``, ``table`` and ``eval``.

Exit codes are 0 (all checks pass), 1 (some check failed) and 2 (usage or
I/O error). Vector values are comma separated; write ``--z=-1,0`` when the
first component is negative.
"""
from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor
import itertools
import math
import sys

import numpy as np

from . import kernels
from .errors import IntertwineError, QuadratureError, UsageError
from .htype import GroupPoint, build_standard, structure_for
from .kernels import FracOrder
from .verify import csv_header, csv_row, lookup, run_check, to_csv, with_rel_tol

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SCALAR_PARAMS = ("n", "m", "k", "s", "y", "t", "tau", "B", "mu", "rho")
VECTOR_PARAMS = ("z", "sigma", "lam")
KERNELS = ("euclid_ext", "euclid_fundsol", "ghc", "ext_q", "thin_k", "fundsol", "const_c",
           "gamma_ratio")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _vector(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None


def _sign(text: str) -> int:
    v = {"+": 1, "-": -1, "+1": 1, "1": 1, "-1": -1, "plus": 1, "minus": -1}.get(str(text).strip())
    if v is None:
        raise argparse.ArgumentTypeError(f"sign must be + or -, got {text!r}")
    return v


def _add_params(p: argparse.ArgumentParser):
    g = p.add_argument_group("parameters")
    for name in ("n", "m", "k"):
        g.add_argument(f"--{name}", type=int)
    for name in ("s", "y", "t", "tau", "B", "mu", "rho"):
        g.add_argument(f"--{name}", type=float)
    for name in VECTOR_PARAMS:
        g.add_argument(f"--{name}", type=_vector)
    g.add_argument("--sign", type=_sign)
    g.add_argument("--family", choices=("heisenberg", "quaternionic"),
                   help="standard structure; --n is then its index and sets m, k")
    g.add_argument("--method", choices=("derivative", "difference"))
    p.add_argument("--config", help="file of key=value lines; flags override it")
    p.add_argument("--tol", type=float)
    p.add_argument("--quad-rel-tol", type=float)
    p.add_argument("--quad-abs-tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="intertwine", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run one named check")
    v.add_argument("--check", required=True)
    v.add_argument("--json", action="store_true")
    _add_params(v)

    t = sub.add_parser("table", help="run a check over a grid of parameters")
    t.add_argument("--check", required=True)
    t.add_argument("--sweep", action="append", default=[], metavar="KEY=START:STOP:STEP")
    t.add_argument("--out", required=True)
    t.add_argument("--jobs", type=int, default=1)
    _add_params(t)

    e = sub.add_parser("eval", help="evaluate one kernel or constant")
    e.add_argument("--kernel", required=True, choices=KERNELS)
    _add_params(e)
    return parser


# ---------------------------------------------------------------- parameters

def read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for line in lines:
        line = line.split("#", 1)[0]
        for item in line.split():
            key, sep, val = item.partition("=")
            if not sep:
                raise UsageError(f"config entry {item!r} is not key=value")
            out[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    return out


_CONVERTERS = {**{n: int for n in ("n", "m", "k")},
               **{n: float for n in ("s", "y", "t", "tau", "B", "mu", "rho", "tol",
                                     "quad_rel_tol", "quad_abs_tol")},
               **{n: _vector for n in VECTOR_PARAMS}, "sign": _sign,
               "family": str, "method": str}


def merge_config(args: argparse.Namespace):
    """Fill unset flags from ``--config``; command-line values win."""
    if not args.config:
        return
    for key, raw in read_config(args.config).items():
        if key not in _CONVERTERS:
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key, None) is None:
            try:
                setattr(args, key, _CONVERTERS[key](raw))
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {key}: {exc}") from None


def collect_params(args: argparse.Namespace) -> dict:
    params = {n: getattr(args, n) for n in SCALAR_PARAMS + VECTOR_PARAMS + ("sign", "method")}
    if args.family:
        if args.n is None:
            raise UsageError("--family needs --n")
        st = build_standard(args.family, args.n)
        params.update(m=st.m, k=st.k, n=None)
    return {k: v for k, v in params.items() if v is not None}


def _specs(info, args):
    return with_rel_tol(info.spec, info.inner_spec, args.quad_rel_tol, args.quad_abs_tol)


# ---------------------------------------------------------------- commands

def cmd_verify(args) -> int:
    info = lookup(args.check)
    spec, inner = _specs(info, args)
    res = run_check(info.check_id, collect_params(args), spec, args.tol, inner)
    if args.json:
        print(res.to_json())
    else:
        sys.stdout.write(to_csv([csv_header(info), csv_row(res)]))
    if res.note:
        print(res.note, file=sys.stderr)
    return EXIT_PASS if res.passed else EXIT_FAIL


def parse_sweep(text: str) -> tuple[str, list[float]]:
    key, sep, rng = text.partition("=")
    parts = rng.split(":")
    if not sep or len(parts) != 3:
        raise UsageError(f"malformed sweep {text!r}; expected key=start:stop:step")
    if key not in SCALAR_PARAMS:
        raise UsageError(f"cannot sweep {key!r}; sweepable keys: {', '.join(SCALAR_PARAMS)}")
    try:
        start, stop, step = map(float, parts)
    except ValueError:
        raise UsageError(f"malformed sweep {text!r}") from None
    if not step > 0 or stop < start:
        raise UsageError(f"sweep {text!r} is empty")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return key, [round(start + i * step, 12) for i in range(count)]


def _run_row(job):
    check, params, spec, tol, inner = job
    try:
        return csv_row(run_check(check, params, spec, tol, inner)), None
    except UsageError as exc:
        return None, str(exc)


def cmd_table(args) -> int:
    info = lookup(args.check)
    if not args.sweep:
        raise UsageError("table needs at least one --sweep")
    sweeps = [parse_sweep(s) for s in args.sweep]
    base = collect_params(args)
    spec, inner = _specs(info, args)
    jobs = [(info.check_id, {**base, **dict(zip([k for k, _ in sweeps], combo))}, spec, args.tol, inner)
            for combo in itertools.product(*(vals for _, vals in sweeps))]
    try:
        fh = open(args.out, "w", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc}") from None
    with fh:
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                results = list(pool.map(_run_row, jobs))
        else:
            results = [_run_row(j) for j in jobs]
        errors = [e for _, e in results if e]
        if errors:
            raise UsageError(errors[0])
        rows = [r for r, _ in results]
        fh.write(to_csv([csv_header(info)] + rows))
    failed = sum(r[-2] != "true" for r in rows)
    print(f"{len(rows)} rows written to {args.out}, {failed} failed", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_PASS


def _need(p: dict, *names):
    missing = [n for n in names if n not in p]
    if missing:
        raise UsageError(f"missing parameter(s): {', '.join(missing)}")
    return [p[n] for n in names]


def _order(p: dict) -> FracOrder:
    (s,) = _need(p, "s")
    return FracOrder(s, p.get("sign", 1))


def _point(p: dict):
    m, k, z, sigma = _need(p, "m", "k", "z", "sigma")
    return structure_for(m, k), GroupPoint(np.array(z), np.array(sigma))


def evaluate(kernel: str, p: dict) -> float:
    if kernel == "euclid_ext":
        n, z, y, t = _need(p, "n", "z", "y", "t")
        return float(kernels.euclid_ext_kernel(n, _order(p), z, y, t))
    if kernel == "euclid_fundsol":
        n, z, y = _need(p, "n", "z", "y")
        return kernels.euclid_fundsol(n, _order(p), z, y)
    if kernel == "ghc":
        (t,) = _need(p, "t")
        return float(kernels.ghc_heat_kernel(*_point(p), t))
    if kernel == "ext_q":
        y, t = _need(p, "y", "t")
        st, g = _point(p)
        return float(kernels.ext_kernel_q(st, _order(p), g, t, y))
    if kernel == "thin_k":
        (t,) = _need(p, "t")
        st, g = _point(p)
        return float(kernels.thin_kernel_K(st, _order(p), g, t))
    if kernel == "fundsol":
        (y,) = _need(p, "y")
        st, g = _point(p)
        return kernels.fundsol_closed(st, _order(p), g, y)
    if kernel == "const_c":
        m, k = _need(p, "m", "k")
        return kernels.const_C(m, k, _order(p))
    if kernel == "gamma_ratio":
        m, k, s = _need(p, "m", "k", "s")
        return kernels.gamma_ratio(m, k, s)
    raise UsageError(f"unknown kernel {kernel!r}")


def cmd_eval(args) -> int:
    value = evaluate(args.kernel, collect_params(args))
    print(format(value, ".15g"))
    return EXIT_PASS


_COMMANDS = {"verify": cmd_verify, "table": cmd_table, "eval": cmd_eval}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        merge_config(args)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except IntertwineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
