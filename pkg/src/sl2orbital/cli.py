"""Command-line front end: eval, verify, table and sums."""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .characters import ComplexValue, parse_character, residue_character, standard_character, twist
from .exp_sums import gamma_factor, gauss_sum, kloosterman
from .local_field import LocalField, ResidueElement, is_odd_prime
from .orbits import c0
from .transform import (
    REGIME_FILTERS,
    THETA_LABELS,
    THETA_PRIME_LABELS,
    EvalReport,
    GridPoint,
    Regime,
    build_pair,
    certification_grid,
    evaluate_point,
    field_representatives,
    reduce_pair,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

CSV_HEADER = (
    "p", "phi_depth", "beta", "theta", "s", "theta_prime", "regime",
    "closed_re", "closed_im", "gamma_re", "gamma_im", "oracle_re", "oracle_im", "abs_error", "pass",
)
TABLE_HEADER = ("ord_s", "theta_prime", "regime", "value_re", "value_im", "normalized_re", "normalized_im")

_LITERAL = re.compile(r"^\s*(-?\d+)\s*(?:\*\s*p\s*\^\s*\(?\s*(-?\d+)\s*\)?)?\s*$")


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    p: int
    precision: int = 24
    tol: float = 1e-8
    phi_depth: int = -1
    epsilon: Optional[int] = None
    output_format: str = "text"

    def __post_init__(self) -> None:
        if not is_odd_prime(self.p):
            raise UsageError(f"p must be an odd prime, got {self.p}")
        if self.precision < 8:
            raise UsageError(f"precision must be at least 8, got {self.precision}")
        if not 0 < self.tol <= 1e-3:
            raise UsageError(f"tolerance must lie in (0, 1e-3], got {self.tol}")

    def field(self) -> LocalField:
        try:
            return LocalField(self.p, self.precision, self.epsilon)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc


def parse_literal(text: str, p: int) -> tuple[int, int]:
    """Parse ``u*p^k`` (or a bare integer ``u``) into a unit u prime to p and an exponent k."""
    m = _LITERAL.match(text)
    if not m:
        raise UsageError(f"cannot parse {text!r}; expected u*p^k")
    unit, exp = int(m.group(1)), int(m.group(2) or 0)
    if unit == 0:
        raise UsageError("the unit part must be nonzero")
    while unit % p == 0:
        unit //= p
        exp += 1
    return unit, exp


# ---------------------------------------------------------------------------
# Serialisation


def _format_float(x: float) -> str:
    if x == 0:
        x = 0.0  # drop the sign of -0.0
    return format(x, ".17g")


def to_jsonable(obj):
    if isinstance(obj, complex):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, Regime):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    obj = to_jsonable(obj)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, list):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def report_dict(report: EvalReport) -> dict:
    return {
        "p": report.p,
        "phi_depth": report.phi_depth,
        "beta": report.beta,
        "theta": report.theta,
        "s": report.s,
        "theta_prime": report.theta_prime,
        "regime": report.regime,
        "value": report.closed_value,
        "gamma": report.gamma,
        "structure": report.structure,
        "oracle": report.oracle_value,
        "abs_error": report.abs_error,
        "pass": report.passed,
    }


def _csv_row(report: EvalReport) -> list[str]:
    def f(x):
        return "" if x is None else _format_float(x)

    oracle = report.oracle_value
    return [
        str(report.p), str(report.phi_depth), report.beta, report.theta, report.s, report.theta_prime,
        report.regime,
        f(report.closed_value.real), f(report.closed_value.imag),
        f(report.gamma.real), f(report.gamma.imag),
        f(None if oracle is None else oracle.real), f(None if oracle is None else oracle.imag),
        f(report.abs_error), "" if report.passed is None else str(report.passed).lower(),
    ]


def _write_csv(header: Sequence[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _complex_text(z: complex) -> str:
    return f"{_format_float(z.real)} {'+' if z.imag >= 0 else '-'} {_format_float(abs(z.imag))}i"


def _report_text(report: EvalReport) -> str:
    lines = [
        f"X* = {report.beta} sqrt({report.theta}), Y = {report.s} sqrt({report.theta_prime}), p = {report.p}",
        f"  regime: {report.regime}",
        f"  gamma: {_complex_text(report.gamma)}",
    ]
    for key, val in report.structure.items():
        shown = _complex_text(val) if isinstance(val, complex) else str(val)
        lines.append(f"  {key}: {shown}")
    lines.append(f"  value: {_complex_text(report.closed_value)}")
    if report.oracle_value is not None:
        lines.append(f"  oracle: {_complex_text(report.oracle_value)}  error {report.abs_error:.3g}")
        lines.append(f"  {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines)


def render_reports(reports: list[EvalReport], fmt: str) -> str:
    if fmt == "json":
        return dumps([report_dict(r) for r in reports]) + "\n"
    if fmt == "csv":
        return _write_csv(CSV_HEADER, [_csv_row(r) for r in reports])
    return "\n".join(_report_text(r) for r in reports) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands


def _config(args) -> Config:
    return Config(args.p, args.precision, args.tol, args.phi_depth, args.epsilon, args.format)


def _point(args, cfg: Config, s_text: str, theta_prime: str) -> GridPoint:
    beta_unit, beta_exp = parse_literal(args.beta, cfg.p)
    s_unit, s_exp = parse_literal(s_text, cfg.p)
    return GridPoint(cfg.p, args.theta, beta_unit, beta_exp, s_unit, s_exp, theta_prime, cfg.phi_depth)


def cmd_eval(args) -> int:
    cfg = _config(args)
    field_ = cfg.field()
    point = _point(args, cfg, args.s, args.thetap)
    report = evaluate_point(point, field_, with_oracle=args.oracle, tol=cfg.tol)
    if report.regime == Regime.CLOSE.value:
        x_star, y = build_pair(point, field_)
        reduced, _, _ = reduce_pair(x_star, y, field_representatives(field_))
        report.structure = {"c0": c0(reduced), **report.structure}
    _emit(render_reports([report], cfg.output_format), args.out)
    return EXIT_FAILURE if report.passed is False else EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config(args)
    field_ = cfg.field()
    points = certification_grid(cfg.p, quick=args.quick, regime_filter=args.regime, field_=field_)
    if args.limit is not None:
        points = points[: args.limit]
    points = [GridPoint(**{**pt.__dict__, "phi_depth": cfg.phi_depth}) for pt in points]
    reports = [evaluate_point(pt, field_, tol=cfg.tol, perturb=args.perturb) for pt in points]
    _emit(render_reports(reports, cfg.output_format), args.out)
    failures = [r for r in reports if not r.passed]
    print(f"verified {len(reports)} points, {len(failures)} failures", file=sys.stderr)
    for r in failures[:10]:
        print(
            f"FAIL p={r.p} theta={r.theta} beta={r.beta} s={r.s} theta'={r.theta_prime} "
            f"regime={r.regime} closed={_complex_text(r.closed_value)} oracle={_complex_text(r.oracle_value)} "
            f"error={r.abs_error:.3g}",
            file=sys.stderr,
        )
    return EXIT_FAILURE if failures else EXIT_OK


def cmd_table(args) -> int:
    cfg = _config(args)
    field_ = cfg.field()
    rows = []
    if args.sweep == "s":
        unit, _ = parse_literal(args.s, cfg.p)
        sweep = [(f"{unit}*p^{k}", tp) for tp in THETA_PRIME_LABELS for k in range(args.s_min, args.s_max + 1)]
    else:
        sweep = [(args.s, tp) for tp in THETA_PRIME_LABELS]
    for s_text, theta_prime in sweep:
        point = _point(args, cfg, s_text, theta_prime)
        report = evaluate_point(point, field_, with_oracle=False)
        _, y = build_pair(point, field_)
        scale = y.abs_disc_inv_sqrt
        value = report.closed_value
        rows.append(
            [str(point.s_exp), theta_prime, report.regime, _format_float(value.real), _format_float(value.imag),
             _format_float(value.real / scale), _format_float(value.imag / scale)]
        )
    if cfg.output_format == "json":
        keys = TABLE_HEADER
        text = dumps([{k: (float(v) if k.endswith(("_re", "_im")) else v) for k, v in zip(keys, row)} for row in rows]) + "\n"
    elif cfg.output_format == "csv":
        text = _write_csv(TABLE_HEADER, rows)
    else:
        text = "\n".join("  ".join(row) for row in [list(TABLE_HEADER)] + rows) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_sums(args) -> int:
    cfg = _config(args)
    field_ = cfg.field()
    p = cfg.p
    phi = twist(standard_character(p, cfg.precision), field_.from_parts(args.b, -1 - cfg.phi_depth))
    if args.which == "gauss":
        value = gauss_sum(field_.uniformizer, phi)
    elif args.which == "kloosterman":
        if args.xi % p == 0:
            raise UsageError("xi must be a unit modulo p")
        chi_bar = parse_character(args.chi).residue_part(p)
        depth_minus_one = twist(phi, field_.uniformizer ** (cfg.phi_depth + 1))
        value = kloosterman(chi_bar, residue_character(depth_minus_one), ResidueElement(args.xi % p, p))
    else:
        chi = parse_character(args.chi)
        if chi.is_trivial():
            raise UsageError("the Gamma-factor needs a nontrivial character")
        value = gamma_factor(chi, phi)
    value = ComplexValue(value)
    if cfg.output_format == "json":
        text = dumps({"which": args.which, "p": p, "value": value}) + "\n"
    elif cfg.output_format == "csv":
        text = _write_csv(("which", "p", "re", "im"), [[args.which, str(p), _format_float(value.real), _format_float(value.imag)]])
    else:
        text = _complex_text(value) + "\n"
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, required=True, help="odd prime")
    common.add_argument("--precision", type=int, default=24, help="p-adic digits carried (>= 8)")
    common.add_argument("--tol", type=float, default=1e-8, help="certification tolerance")
    common.add_argument("--phi-depth", type=int, default=-1, help="depth of the additive character Phi")
    common.add_argument("--epsilon", type=int, default=None, help="unit non-residue to use as eps")
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("--out", metavar="FILE", default=None)

    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("--beta", default="1*p^0", help="beta as u*p^k")
    pair.add_argument("--theta", default="1", choices=THETA_LABELS)

    parser = argparse.ArgumentParser(prog="sl2orbital", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", parents=[common, pair], help="closed-form transform at one point")
    ev.add_argument("--s", default="1*p^0", help="s as u*p^k")
    ev.add_argument("--thetap", default="1", choices=THETA_PRIME_LABELS)
    ev.add_argument("--oracle", action="store_true", help="also evaluate the brute-force oracle")
    ev.set_defaults(func=cmd_eval)

    ve = sub.add_parser("verify", parents=[common], help="oracle against closed form over a grid")
    ve.add_argument("--quick", action="store_true", help="reduced grid")
    ve.add_argument("--regime", choices=tuple(REGIME_FILTERS), default=None)
    ve.add_argument("--perturb", action="store_true", help="flip a Gauss-sum sign (harness self-test)")
    ve.add_argument("--limit", type=int, default=None, help="evaluate only the first N points")
    ve.set_defaults(func=cmd_verify)

    ta = sub.add_parser("table", parents=[common, pair], help="closed-form values along a sweep of Y")
    ta.add_argument("--sweep", choices=("s", "thetap"), default="s")
    ta.add_argument("--s", default="1*p^0", help="s (the unit is kept for an ord(s) sweep)")
    ta.add_argument("--s-min", type=int, default=-3)
    ta.add_argument("--s-max", type=int, default=3)
    ta.set_defaults(func=cmd_table)

    su = sub.add_parser("sums", parents=[common], help="Gauss, Kloosterman and Gamma-factor values")
    su.add_argument("which", choices=("gauss", "kloosterman", "gamma"))
    su.add_argument("--b", type=int, default=1, help="unit twisting Phi")
    su.add_argument("--xi", type=int, default=1, help="Kloosterman parameter")
    su.add_argument("--chi", default="nu-zero", help="character name, e.g. nu-half-sgn-pi")
    su.set_defaults(func=cmd_sums)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sums" and args.which == "gamma" and args.chi == "nu-zero":
        parser.error("sums gamma needs --chi")
    try:
        return args.func(args)
    except ValueError as exc:  # includes UsageError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
