"""Command line: ``genus``, ``qexpand``, ``det`` and ``verify``.

Exit codes: 0 success, 1 a check failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Sequence

import numpy as np

from . import charclass, checks, modular, zeta_det
from .algebra import format_form, parse_form
from .series import TruncSeries


class InputError(Exception):
    pass


def _threads() -> int:
    raw = os.environ.get("GENUSFORGE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"GENUSFORGE_THREADS must be a positive integer, got {raw!r}")
    if n < 1:
        raise InputError("GENUSFORGE_THREADS must be positive")
    return n


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}")


def _fmt_num(x: complex) -> str:
    x = complex(x)
    if x.imag == 0:
        return f"{x.real:.17g}"
    return f"{x.real:.17g}{x.imag:+.17g}j"


def _series_lines(s: TruncSeries, fmt: str, header: str = "") -> List[str]:
    out = [f"# {header}"] if header else []
    if fmt == "csv":
        out.append("exponent_num,exponent_den,coeff_num,coeff_den")
        out += s.csv_rows()
    else:
        out += [f"{s.exponent(k)}: {c}" for k, c in s.items()]
    return out


# --------------------------------------------------------------------------
def cmd_genus(args) -> int:
    try:
        m = charclass.ManifoldData.from_json(_read(args.manifold))
    except (ValueError, KeyError, TypeError) as e:
        raise InputError(f"bad manifold file: {e}")
    cls = charclass.genus_class(args.cls, m.dim, args.q_order)
    try:
        value = charclass.genus_evaluate(cls, m)
    except KeyError as e:
        raise InputError(str(e).strip("'\""))
    if isinstance(value, TruncSeries):
        print("\n".join(_series_lines(value, args.format)))
    else:
        print(value)
    return 0


def cmd_qexpand(args) -> int:
    if args.order < 1:
        raise InputError("--order must be positive")
    if args.series == "e2k":
        if args.k < 1:
            raise InputError("--k must be positive")
        s = modular.eisenstein_q(args.k, args.order, "normalized")
        header = ""
        if args.convention == "paper":
            header = f"coefficients in units of 2 zeta({2 * args.k}) = {modular.zeta_even(args.k) * 2}"
        print("\n".join(_series_lines(s, args.format, header)))
    elif args.series == "eta":
        s = modular.dedekind_eta(args.order)
        print("\n".join(_series_lines(s, args.format)))
    else:
        # E2* = E2 - 3/(pi Im tau) in the normalized convention
        s = modular.eisenstein_q(1, args.order, "normalized")
        extra = "-3/(pi*Im(tau))" if args.convention == "normalized" else "-pi/Im(tau)"
        header = f"holomorphic part; nonholomorphic term {extra}"
        if args.convention == "paper":
            header += f"; coefficients in units of {modular.zeta_even(1) * 2}"
        print("\n".join(_series_lines(s, args.format, header)))
    return 0


def _parse_tau(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise InputError(f"cannot parse tau {text!r}")


def _load_curvature(path: str) -> zeta_det.CurvatureModel:
    """JSON ``{"matrix": [[...], ...]}`` with numbers (numeric) or form
    strings such as "dx1*dx2" (formal); a plain whitespace table of numbers
    is also accepted."""
    text = _read(path)
    try:
        data = json.loads(text)
        rows = data["matrix"] if isinstance(data, dict) else data
    except json.JSONDecodeError:
        rows = [line.split() for line in text.splitlines() if line.strip()]
        try:
            rows = [[float(x) for x in r] for r in rows]
        except ValueError:
            raise InputError("curvature table must be numeric")
    except (KeyError, TypeError):
        raise InputError("curvature JSON needs a 'matrix' entry")
    try:
        if all(isinstance(x, (int, float)) for r in rows for x in r):
            return zeta_det.CurvatureModel(np.array(rows, dtype=float))
        return zeta_det.CurvatureModel([[parse_form(str(x)) for x in r] for r in rows])
    except ValueError as e:
        raise InputError(f"bad curvature: {e}")


def cmd_det(args) -> int:
    curv = _load_curvature(args.curvature)
    if args.model == "1-1":
        if args.radius is None or args.radius <= 0:
            raise InputError("1-1 needs a positive --radius")
        op = zeta_det.KineticOperator("1|1", args.radius, curv)
        res = zeta_det.sdet_zeta_11(op, relative=args.relative)
        if not curv.numeric:
            print(format_form(res.value))
            return 0
        print(f"sdet_zeta {_fmt_num(res.value)}")
        if args.oracle:
            if not args.relative:
                raise InputError("--oracle compares the relative determinant")
            val = zeta_det.fredholm_oracle_11(op, args.modes)
            print(f"fredholm_oracle modes={args.modes} {_fmt_num(val)}")
            print(f"relative_difference {abs(val - res.value) / abs(res.value):.3e}")
        return 0
    if args.tau is None:
        raise InputError("2-1 needs --tau")
    try:
        lat = modular.Lattice.from_tau(_parse_tau(args.tau), _parse_tau(args.ell))
    except ValueError as e:
        raise InputError(str(e))
    op = zeta_det.KineticOperator("2|1", lat, curv)
    res = zeta_det.sdet_zeta_21(op, relative=args.relative)
    if not curv.numeric:
        print(format_form(res.value))
        return 0
    print(f"sdet_zeta {_fmt_num(res.value)}")
    if args.oracle:
        terms = zeta_det.sdet_zeta_21_terms(op)
        tok = complex(np.exp(sum(v for k, v in terms.items() if k >= 2)))
        val = zeta_det.lattice_oracle_21(op, args.modes).value
        print(f"tokens_k>=2 {_fmt_num(tok)}")
        print(f"lattice_oracle cutoff={args.modes} {_fmt_num(val)}")
        print(f"relative_difference {abs(val - tok) / abs(tok):.3e}")
    return 0


def cmd_verify(args) -> int:
    cfg = checks.Config(seed=args.seed, tol=args.tol, cap=args.cap, modes=args.modes,
                        cutoff=args.cutoff, samples=args.samples)
    results = checks.run_suite(args.suite, cfg, _threads())
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


# --------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="genus-forge",
                                description="Exact genera, q-expansions and super determinants.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("genus", help="evaluate a genus on Pontryagin numbers")
    g.add_argument("--class", dest="cls", required=True,
                   choices=["ahat", "witten", "witten-star", "witten-string"])
    g.add_argument("--manifold", required=True)
    g.add_argument("--q-order", type=int, default=10)
    g.add_argument("--format", choices=["text", "csv"], default="text")
    g.set_defaults(func=cmd_genus)

    q = sub.add_parser("qexpand", help="print q-expansion coefficients")
    q.add_argument("--series", required=True, choices=["e2k", "eta", "e2star-coeffs"])
    q.add_argument("--k", type=int, default=1)
    q.add_argument("--order", type=int, default=10)
    q.add_argument("--convention", choices=["paper", "normalized"], default="normalized")
    q.add_argument("--format", choices=["csv", "text"], default="csv")
    q.set_defaults(func=cmd_qexpand)

    d = sub.add_parser("det", help="zeta super determinant of a kinetic operator")
    d.add_argument("--model", required=True, choices=["1-1", "2-1"])
    d.add_argument("--curvature", required=True)
    d.add_argument("--modes", type=int, default=100000)
    d.add_argument("--radius", type=float)
    d.add_argument("--tau")
    d.add_argument("--ell", default="1")
    d.add_argument("--relative", action="store_true")
    d.add_argument("--oracle", action="store_true")
    d.set_defaults(func=cmd_det)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", default="all", choices=list(checks.SUITES) + ["all"])
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=1e-8)
    v.add_argument("--cap", type=int, default=8)
    v.add_argument("--modes", type=int, default=100000)
    v.add_argument("--cutoff", type=int, default=2000)
    v.add_argument("--samples", type=int, default=10)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    for knob in ("q_order", "modes", "cutoff", "samples", "cap"):
        if getattr(args, knob, 1) is not None and getattr(args, knob, 1) < 1:
            print(f"error: --{knob.replace('_', '-')} must be positive", file=sys.stderr)
            return 2
    if getattr(args, "tol", 1) <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
