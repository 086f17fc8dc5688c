"""Command-line front end.

    isingtoda diag --regime minus --N 2 --lambda-order 6 --s-order 40
    isingtoda formfactor --n 2 --M 0 --N 1 --s-order 40
    isingtoda offdiag --regime plus --lambda-order 5
    isingtoda verify --suite ansatz-tables

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 computational
failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, fields
from fractions import Fraction

from . import __version__, checks, diagonal, formfactor, offdiag
from .elliptic import EllipticContext
from .errors import IsingTodaError, TruncationExhausted
from .numeric import format_real
from .series import BiSeries, GradedSeries, format_rational

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2, 3

log = logging.getLogger("isingtoda")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    regime: str = "minus"
    N: int = 0
    n: int | None = None
    M: int = 0
    lambda_order: int = 9
    s_order: int = 60
    engine: str = "series"
    format: str = "json"
    output: str | None = None
    threads: int = 1
    suite: tuple = ()
    s_value: float | None = None
    lambda_value: float | None = None
    tol: float = 1e-10
    method: str = "moments"
    fit: bool = False
    timing: bool = True

    def validate(self) -> "RunConfig":
        if self.regime not in diagonal.REGIMES:
            raise UsageError(f"regime must be one of {diagonal.REGIMES}")
        if self.lambda_order < 1:
            raise UsageError("lambda-order must be at least 1")
        if self.s_order < 4:
            raise UsageError("s-order must be at least 4")
        if self.engine not in ("series", "closed"):
            raise UsageError("engine must be series or closed")
        if self.engine == "closed" and self.command != "diag":
            raise UsageError("--engine closed applies to diag only")
        if self.format not in ("json", "csv", "text"):
            raise UsageError("format must be json, csv or text")
        if self.N < 0 or self.M < 0 or (self.n is not None and self.n < 1):
            raise UsageError("need N >= 0, M >= 0, n >= 1")
        if self.command == "formfactor" and self.n is None:
            raise UsageError("formfactor needs --n")
        if self.command == "offdiag" and self.fit and self.n is None:
            raise UsageError("--fit needs --n")
        if self.threads < 1:
            raise UsageError("threads must be positive")
        if self.method not in ("moments", "direct"):
            raise UsageError("method must be moments or direct")
        for name in self.suite:
            if name not in checks.SUITES:
                raise UsageError(f"unknown suite {name!r}; known: {', '.join(checks.SUITES)}")
        return self


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="isingtoda", description="lambda-extended Ising correlations")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--format", choices=("json", "csv", "text"))
        sp.add_argument("--output", help="write to this file instead of stdout")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--s-order", type=int, dest="s_order")
        sp.add_argument("-v", "--verbose", action="store_true")

    d = sub.add_parser("diag", help="diagonal correlation C_N")
    common(d)
    d.add_argument("--regime", choices=diagonal.REGIMES)
    d.add_argument("--N", type=int, dest="N")
    d.add_argument("--lambda-order", type=int, dest="lambda_order")
    d.add_argument("--engine", choices=("series", "closed"))

    f = sub.add_parser("formfactor", help="form factor C^(n)(M, N)")
    common(f)
    f.add_argument("--n", type=int, dest="n")
    f.add_argument("--M", type=int, dest="M")
    f.add_argument("--N", type=int, dest="N")
    f.add_argument("--s-value", type=float, dest="s_value", help="numeric quadrature at this s")
    f.add_argument("--tol", type=float)
    f.add_argument("--method", choices=("moments", "direct"))
    f.add_argument("--engine", choices=("series", "closed"))

    o = sub.add_parser("offdiag", help="C(0,1; lambda): closed form, Ansatz forms and fits")
    common(o)
    o.add_argument("--regime", choices=diagonal.REGIMES)
    o.add_argument("--lambda-order", type=int, dest="lambda_order")
    o.add_argument("--n", type=int, dest="n", help="print the Ansatz for C^(n)(0,1)")
    o.add_argument("--fit", action="store_true", default=None, help="fit the Ansatz to the series oracle")
    o.add_argument("--s-value", type=float, dest="s_value")
    o.add_argument("--lambda-value", type=float, dest="lambda_value")
    o.add_argument("--engine", choices=("series", "closed"))

    v = sub.add_parser("verify", help="run verification suites")
    common(v)
    v.add_argument("--suite", action="append", help="suite name (repeatable); default all")
    v.add_argument("--N", type=int, dest="N", help="largest N for sigma-residual")
    v.add_argument("--no-timing", action="store_false", dest="timing", default=None)
    return p


_INT = {"N", "n", "M", "lambda_order", "s_order", "threads"}
_FLOAT = {"s_value", "lambda_value", "tol"}
_BOOL = {"fit", "timing"}


def _read_config(path: str) -> dict:
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_string("[run]\n" + fh.read())
    out: dict = {}
    for key, raw in parser["run"].items():
        key = key.replace("-", "_")
        raw = raw.strip().strip('"')
        if key == "n_cap":
            key = "N"
        if key in _INT:
            out[key] = int(raw)
        elif key in _FLOAT:
            out[key] = float(raw)
        elif key in _BOOL:
            out[key] = raw.lower() in ("1", "true", "yes", "on")
        elif key == "suite":
            out[key] = tuple(x.strip() for x in raw.split(",") if x.strip())
        else:
            out[key] = raw
    return out


def build_config(argv) -> tuple[RunConfig, bool]:
    ns = _parser().parse_args(argv)
    values: dict = {}
    if ns.config:
        try:
            values.update(_read_config(ns.config))
        except (OSError, ValueError, configparser.Error) as exc:
            raise UsageError(f"bad config file: {exc}") from exc
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        val = getattr(ns, f.name, None)
        if val is not None:
            values[f.name] = tuple(val) if f.name == "suite" else val
    env = os.environ.get("ISING_THREADS")
    if env:
        try:
            values["threads"] = int(env)
        except ValueError as exc:
            raise UsageError("ISING_THREADS must be an integer") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if ns.command == "verify" and "N" not in values:
        values["N"] = 5
    return RunConfig(command=ns.command, **values).validate(), bool(getattr(ns, "verbose", False))


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _series_rows(label: str, ser: GradedSeries) -> list[list[str]]:
    return [[label, str(e), format_rational(c)] for e, c in ser.items()]


def _bi_rows(ser: BiSeries, var: str = "x") -> list[list[str]]:
    rows = []
    for k, c in ser.items():
        rows.extend(_series_rows(f"{var}^{k}", c))
    return rows


def _emit(cfg: RunConfig, obj: dict, rows: list[list[str]], text: str) -> None:
    if cfg.format == "json":
        out = json.dumps(obj, indent=1, sort_keys=False) + "\n"
    elif cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["term", "s_exponent", "coefficient"])
        w.writerows(rows)
        out = buf.getvalue()
    else:
        out = text.rstrip("\n") + "\n"
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_diag(cfg: RunConfig) -> int:
    x_order = cfg.lambda_order + 1
    internal = diagonal.required_s_order(cfg.N, cfg.s_order)
    ctx = EllipticContext(x_order, internal)
    if cfg.engine == "closed":
        elem = diagonal.closed_sequence(cfg.regime, cfg.N)[cfg.N]
        extra = max(0, int(-4 * elem.texp) + 8)
        ser = elem.to_series(EllipticContext(x_order, cfg.s_order + extra))
        closed = elem.pretty()
    else:
        ser = diagonal.diagonal_sequence(cfg.regime, cfg.N, ctx)[cfg.N].series
        closed = None
    if ser.s_order < cfg.s_order:
        raise TruncationExhausted(f"only s^{ser.s_order} provable, asked for s^{cfg.s_order}")
    ser = ser.truncate(x_order=x_order, s_order=cfg.s_order)
    ff = diagonal.lambda_coefficients(ser, cfg.regime, cfg.lambda_order)
    obj = {
        "regime": cfg.regime,
        "N": cfg.N,
        "engine": cfg.engine,
        "lambda_order": cfg.lambda_order,
        "s_order": cfg.s_order,
        "series": ser.to_json_obj(),
        "form_factors": [c.to_json_obj() for c in ff],
    }
    if closed is not None:
        obj["closed_form"] = closed
    text = [f"C{'+' if cfg.regime == 'plus' else '-'}_{cfg.N} in (x, s):"]
    text += [f"  x^{k}: {c.pretty()}" for k, c in ser.items()]
    text += ["lambda coefficients (prefactor removed):"]
    text += [f"  lambda^{n}: {c.pretty()}" for n, c in enumerate(ff) if not c.is_exact_zero()]
    if closed is not None:
        text.append("closed form: " + closed)
    _emit(cfg, obj, _bi_rows(ser), "\n".join(text))
    return EXIT_OK


def cmd_formfactor(cfg: RunConfig) -> int:
    if cfg.s_value is not None:
        r = formfactor.formfactor_numeric(cfg.n, cfg.M, cfg.N, cfg.s_value, tol=cfg.tol)
        obj = {k: r[k] for k in ("s", "n", "M", "N")}
        obj["value"] = format_real(r["value"])
        obj["est_error"] = f"{r['est_error']:.3e}"
        text = f"C^({cfg.n})({cfg.M},{cfg.N}) at s={r['s']}: {obj['value']} (est. error {obj['est_error']})"
        _emit(cfg, obj, [["value", "", obj["value"]]], text)
        return EXIT_OK
    build = formfactor.formfactor_series if cfg.method == "moments" else formfactor.formfactor_series_direct
    ser = build(cfg.n, cfg.M, cfg.N, cfg.s_order)
    obj = {"n": cfg.n, "M": cfg.M, "N": cfg.N, "series": ser.to_json_obj()}
    text = f"C^({cfg.n})({cfg.M},{cfg.N}) = {ser.pretty()}"
    _emit(cfg, obj, _series_rows("s", ser), text)
    return EXIT_OK


def cmd_offdiag(cfg: RunConfig) -> int:
    if cfg.s_value is not None or cfg.lambda_value is not None:
        if cfg.s_value is None or cfg.lambda_value is None:
            raise UsageError("numeric evaluation needs both --s-value and --lambda-value")
        val = offdiag.c01_numeric(cfg.regime, cfg.s_value, cfg.lambda_value)
        obj = {"regime": cfg.regime, "s": cfg.s_value, "lambda": cfg.lambda_value, "value": format_real(val)}
        text = f"C{'+' if cfg.regime == 'plus' else '-'}(0,1; {cfg.lambda_value}) at s={cfg.s_value}: {obj['value']}"
        _emit(cfg, obj, [["value", "", obj["value"]]], text)
        return EXIT_OK
    if cfg.fit:
        z = cfg.n * (cfg.n + 1)
        oracle = formfactor.formfactor_series(cfg.n, 0, 1, max(cfg.s_order, z + 4))
        fit = offdiag.ansatz_fit_from_oracle(cfg.n, oracle)
        obj = fit.to_json_obj()
        obj["zero_condition"] = offdiag.zero_condition_check(fit)["pass"]
        text = f"C^({cfg.n})(0,1) = {fit.kepoly().pretty()}"
        _emit(cfg, obj, [], text)
        return EXIT_OK
    if cfg.n is not None:
        fit = offdiag.table_fit(cfg.n)
        ser = offdiag.ansatz_evaluate(fit, s_order=cfg.s_order)
        obj = fit.to_json_obj()
        obj["series"] = ser.to_json_obj()
        text = f"C^({cfg.n})(0,1) = {fit.kepoly().pretty()}\n  = {ser.pretty()}"
        _emit(cfg, obj, _series_rows("s", ser), text)
        return EXIT_OK
    x_order = cfg.lambda_order + 1
    ctx = EllipticContext(x_order, cfg.s_order + 2)
    ser = offdiag.c01_closed_form(cfg.regime, ctx).truncate(x_order=x_order, s_order=cfg.s_order)
    ff = diagonal.lambda_coefficients(ser, cfg.regime, cfg.lambda_order)
    obj = {
        "regime": cfg.regime,
        "lambda_order": cfg.lambda_order,
        "s_order": cfg.s_order,
        "series": ser.to_json_obj(),
        "form_factors": [c.to_json_obj() for c in ff],
    }
    text = [f"C{'+' if cfg.regime == 'plus' else '-'}(0,1; x) in (x, s):"]
    text += [f"  x^{k}: {c.pretty()}" for k, c in ser.items()]
    text += [f"  lambda^{n}: {c.pretty()}" for n, c in enumerate(ff) if not c.is_exact_zero()]
    _emit(cfg, obj, _bi_rows(ser), "\n".join(text))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    names = list(cfg.suite) or list(checks.SUITES)
    opts = checks.Options(N=cfg.N)
    results = checks.run_suites(names, opts, threads=cfg.threads)
    failed = [r for r in results if not r.ok]
    obj = {
        "suites": names,
        "passed": not failed,
        "checks": [r.to_json_obj(timing=cfg.timing) for r in results],
    }
    rows = [[r.suite, r.name, r.status] for r in results]
    lines = []
    for r in results:
        timing = f" ({r.seconds:.2f}s)" if cfg.timing else ""
        lines.append(f"{r.status.upper():5s} {r.suite} :: {r.name}{timing}" + (f"  [{r.detail}]" if r.detail else ""))
    lines.append(f"{len(results) - len(failed)}/{len(results)} checks ok")
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "check", "status"])
        w.writerows(rows)
        out = buf.getvalue()
        if cfg.output:
            with open(cfg.output, "w", encoding="utf-8") as fh:
                fh.write(out)
        else:
            sys.stdout.write(out)
    else:
        _emit(cfg, obj, [], "\n".join(lines))
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {"diag": cmd_diag, "formfactor": cmd_formfactor, "offdiag": cmd_offdiag, "verify": cmd_verify}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg, verbose = build_config(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    except UsageError as exc:
        print(f"isingtoda: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"isingtoda: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TruncationExhausted as exc:
        print(f"isingtoda: truncation exhausted: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (IsingTodaError, ArithmeticError, ValueError, KeyError) as exc:
        print(f"isingtoda: computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
