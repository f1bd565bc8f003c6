"""Command-line interface.

Exit codes: 0 ok, 1 numeric failure, 2 reality rejection (report still
written), 64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .amfun import hyper_am_function
from .contour_quad import periods
from .curve_model import Curve, chart, new_curve
from .divisor_flow import FlowSpec, initial_state, trajectory
from .errors import DegenerateSynthesis, DuplicateBranchPoint, EvenCount, HyperamError
from .reality import check_reality, classify_case, predicted_winding, synthesize_curve
from .soliton import (
    MKDV_CUBIC,
    SMKDV_CUBIC,
    mkdv_grid,
    mkdv_grid_residual,
    period_trajectory,
    scale_R,
    shape,
    smkdv_residual,
    winding_number,
)

EXIT_OK, EXIT_NUMERIC, EXIT_REALITY, EXIT_USAGE = 0, 1, 2, 64
INPUT_ERRORS = (DuplicateBranchPoint, EvenCount, DegenerateSynthesis)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"ERROR cli.usage: {message}\n")
        raise SystemExit(EXIT_USAGE)


# ----- formatting ------------------------------------------------------------
def fmt(x: float) -> str:
    return "%.17g" % x


def dumps(obj) -> str:
    """Compact JSON with %.17g floats and complex numbers as [re, im]."""
    if isinstance(obj, dict):
        return "{" + ",".join(json.dumps(str(k)) + ":" + dumps(v) for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(float(obj)) if math.isfinite(obj) else "null"
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([obj.real, obj.imag])
    return json.dumps(obj)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_csv(header, rows, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    _emit(buf.getvalue(), out)


# ----- inputs ----------------------------------------------------------------
def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}") from exc


def _span(text: str) -> tuple[float, float]:
    try:
        a, b = str(text).split(":")
        return float(a), float(b)
    except ValueError as exc:
        raise UsageError(f"span must look like a:b, got {text!r}") from exc


def _point(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise UsageError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def load_curve(args) -> tuple[Curve, int, list[int] | None]:
    a, sigma = args.a, None
    if args.curve is not None and args.curve_file is not None:
        raise UsageError("give exactly one of --curve and --curve-file")
    if args.curve is not None and args.curve.lstrip().startswith("["):
        try:
            pts = [_point(v) for v in json.loads(args.curve)]
        except json.JSONDecodeError as exc:
            raise UsageError(f"cannot parse --curve: {exc}") from exc
    elif args.curve is not None:
        pts = _floats(args.curve)
    elif args.curve_file is not None:
        try:
            data = json.loads(Path(args.curve_file).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read curve file: {exc}") from exc
        if isinstance(data, dict):
            pts = [_point(v) for v in data.get("branch_points", [])]
            a = a if a is not None else data.get("a")
            sigma = data.get("sigma")
        else:
            pts = [_point(v) for v in data]
    else:
        raise UsageError("a curve is required (--curve or --curve-file)")
    if args.sigma is not None:
        sigma = [int(v) for v in _floats(args.sigma)]
    return new_curve(pts), int(a if a is not None else 1), sigma


def _real_chart(args):
    """(curve, chart, report) or a reality rejection report (exit 2)."""
    curve, a, sigma = load_curve(args)
    rep = check_reality(curve, a)
    if not rep.passed:
        return curve, None, rep
    return curve, chart(curve, a, sigma if sigma is not None else rep.sigma), rep


def _reject(rep, args) -> int:
    _emit(dumps({"reality": "rejected", "a": rep.a, "violations": list(rep.violations)}) + "\n",
          args.out)
    sys.stderr.write("ERROR reality.check_reality: " + "; ".join(rep.violations) + "\n")
    return EXIT_REALITY


def _flow_kw(args):
    return dict(rtol=args.rtol, atol=args.atol)


# ----- commands --------------------------------------------------------------
def cmd_classify(args) -> int:
    curve, ch, rep = _real_chart(args)
    if ch is None:
        return _reject(rep, args)
    cc = classify_case(ch)
    k_sq = cc.k_sq[0] if cc.genus == 1 else list(cc.k_sq)
    out = {"case": cc.label, "k_sq": k_sq, "winding_pred": predicted_winding(cc)}
    if args.detail:
        out.update(genus=cc.genus, w_ranges=[list(r) for r in cc.w_ranges], rotating=cc.rotating,
                   sigma=list(ch.sigma), R=rep.R)
    _emit(dumps(out) + "\n", args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.g is None or args.ea is None or args.ratios is None:
        raise UsageError("synth needs --g, --ea and --ratios")
    signs = None if args.signs is None else [int(v) for v in _floats(args.signs)]
    curve, ch = synthesize_curve(args.g, args.ea, _floats(args.ratios), signs)
    out = {"branch_points": [[p.real, p.imag] for p in curve.branch_points], "a": ch.a,
           "sigma": list(ch.sigma), "case": classify_case(ch).label}
    _emit(dumps(out) + "\n", args.out)
    return EXIT_OK


def cmd_periods(args) -> int:
    curve, ch, rep = _real_chart(args)
    if ch is None:
        return _reject(rep, args)
    pl = periods(ch)
    row = [pl.omega, pl.omega_prime.real, pl.omega_prime.imag, pl.tau.real, pl.tau.imag, pl.case]
    header = ["omega", "re_omega_prime", "im_omega_prime", "re_tau", "im_tau", "case"]
    if args.format == "json":
        _emit(dumps(dict(zip(header, row))) + "\n", args.out)
    else:
        _emit_csv(header, [row], args.out)
    return EXIT_OK


def cmd_am(args) -> int:
    curve, ch, rep = _real_chart(args)
    if ch is None:
        return _reject(rep, args)
    lo, hi = _span(args.u_span)
    us = np.linspace(lo, hi, args.samples)
    g = ch.genus
    rows = []
    for u in us:
        ev = hyper_am_function(ch, float(u))
        rows.append([float(u), *ev.phis, ev.phi_total, ev.al.real, ev.al.imag])
    header = ["u"] + [f"phi_{i + 1}" for i in range(g)] + ["phi", "re_al", "im_al"]
    _emit_csv(header, rows, args.out)
    return EXIT_OK


def cmd_shape(args) -> int:
    curve, ch, rep = _real_chart(args)
    if ch is None:
        return _reject(rep, args)
    lo, hi = _span(args.t1_span)
    R = scale_R(ch)
    spec = FlowSpec.am(ch, **_flow_kw(args))
    tr = trajectory(spec, initial_state(ch), samples=np.linspace(lo, hi, args.samples) / R)
    sh = shape(tr)
    rows = [[s.t1, s.angle, s.Z.real, s.Z.imag, abs(s.tangent)] for s in sh]
    _emit_csv(["t1", "phi", "re_z", "im_z", "abs_tangent"], rows, args.out)
    return EXIT_OK


def cmd_winding(args) -> int:
    curve, ch, rep = _real_chart(args)
    if ch is None:
        return _reject(rep, args)
    cc = classify_case(ch)
    tr = period_trajectory(ch, args.samples, **_flow_kw(args))
    w = winding_number(tr, ch)
    out = {"case": cc.label, "winding": w, "winding_pred": predicted_winding(cc),
           "period": float(tr.times[-1] - tr.times[0])}
    _emit(dumps(out) + "\n", args.out)
    return EXIT_OK


def cmd_residual(args) -> int:
    curve, ch, rep = _real_chart(args)
    if ch is None:
        return _reject(rep, args)
    if ch.genus == 1:
        cubic = SMKDV_CUBIC if args.cubic is None else args.cubic
        tr = period_trajectory(ch, args.samples, **_flow_kw(args))
        sh = shape(tr)
        r = smkdv_residual(sh, cubic, period=sh[-1].t1 - sh[0].t1)
        out = {"equation": "smkdv", "cubic": cubic, "a_est": r.a_est, "residual": r.residual,
               "relative": r.relative, "a_determined": r.a_determined}
    else:
        cubic = MKDV_CUBIC if args.cubic is None else args.cubic
        t1 = np.linspace(*_span(args.t1_span), args.samples)
        t2 = np.linspace(*_span(args.t2_span), args.t2_samples)
        theta = mkdv_grid(ch, t1, t2)
        r = mkdv_grid_residual(theta, t1, t2, cubic)
        out = {"equation": "mkdv", "cubic": cubic, "residual": r.residual, "relative": r.relative,
               "fitted": list(r.fitted), "fitted_relative": r.fitted_relative}
    _emit(dumps(out) + "\n", args.out)
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify, "synth": cmd_synth, "periods": cmd_periods, "am": cmd_am,
    "shape": cmd_shape, "winding": cmd_winding, "residual": cmd_residual,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hyperam", description="Hyperelliptic am functions and loop solitons")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="JSON job file; its keys mirror the long options")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--curve", help="comma separated real branch points")
        sp.add_argument("--curve-file", help="JSON curve: list or {branch_points, a, sigma}")
        sp.add_argument("--a", type=int, help="1-based index of the distinguished branch point")
        sp.add_argument("--sigma", help="pair ordering of the remaining branch indices")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=["json", "csv"])
        sp.add_argument("--rtol", type=float, default=1e-13)
        sp.add_argument("--atol", type=float, default=1e-15)
        return sp

    c = common(sub.add_parser("classify", help="case label, k^2 and predicted winding"))
    c.add_argument("--detail", action="store_true")
    s = sub.add_parser("synth", help="build a curve that satisfies the reality conditions")
    s.add_argument("--g", type=int)
    s.add_argument("--ea", type=float)
    s.add_argument("--ratios")
    s.add_argument("--signs")
    s.add_argument("--out")
    common(sub.add_parser("periods", help="genus-1 half periods and tau"))
    am = common(sub.add_parser("am", help="sample the am/al functions"))
    am.add_argument("--u-span", default="0:10")
    am.add_argument("--samples", type=int, default=200)
    sh = common(sub.add_parser("shape", help="reconstruct the planar soliton curve"))
    sh.add_argument("--t1-span", default="0:20")
    sh.add_argument("--samples", type=int, default=2000)
    w = common(sub.add_parser("winding", help="winding number over one period"))
    w.add_argument("--samples", type=int, default=400)
    r = common(sub.add_parser("residual", help="SMKdV (genus 1) or MKdV (genus >= 2) residual"))
    r.add_argument("--samples", type=int, default=None)
    r.add_argument("--cubic", type=float)
    r.add_argument("--t1-span", default="0:0.1")
    r.add_argument("--t2-span", default="-0.0025:0.0025")
    r.add_argument("--t2-samples", type=int, default=20)
    return p


def _config_argv(path: str) -> tuple[str | None, list[str]]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    cmd = data.pop("command", None)
    argv = []
    for k, v in data.items():
        flag = "--" + k.replace("_", "-")
        if isinstance(v, bool):
            if v:
                argv.append(flag)
            continue
        if isinstance(v, list):
            # [re, im] pairs travel as JSON, plain numbers as a comma list
            v = json.dumps(v) if any(isinstance(x, list) for x in v) else ",".join(str(x) for x in v)
        argv += [flag, str(v)]
    return cmd, argv


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--curve -2,-1,0`` into ``--curve=-2,-1,0`` so argparse keeps the value."""
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        nxt = argv[k + 1] if k + 1 < len(argv) else None
        if (tok.startswith("--") and "=" not in tok and nxt is not None and len(nxt) > 1
                and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == ".")):
            out.append(f"{tok}={nxt}")
            k += 2
        else:
            out.append(tok)
            k += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    command = "cli"
    try:
        pre = _Parser(add_help=False)
        pre.add_argument("--config")
        known, rest = pre.parse_known_args(argv)
        if known.config:
            cfg_cmd, cfg_argv = _config_argv(known.config)
            if rest and rest[0] in COMMANDS:
                cmd, rest = rest[0], rest[1:]
            else:
                cmd = cfg_cmd
            if cmd is None:
                raise UsageError("no command given on the command line or in the config")
            argv = _glue_negative_values([cmd] + cfg_argv + rest)
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("a command is required")
        command = args.command
        if command == "residual" and args.samples is None:
            args.samples = 4001 if _genus_hint(args) == 1 else 200
        return COMMANDS[command](args)
    except UsageError as exc:
        sys.stderr.write(f"ERROR cli.{command}: {exc}\n")
        return EXIT_USAGE
    except INPUT_ERRORS as exc:
        sys.stderr.write(f"ERROR {exc.tag()}: {exc}\n")
        return EXIT_USAGE
    except HyperamError as exc:
        sys.stderr.write(f"ERROR {exc.tag()}: {exc}\n")
        return EXIT_REALITY if exc.reality else EXIT_NUMERIC
    except ValueError as exc:
        sys.stderr.write(f"ERROR cli.{command}: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:
        # argparse exits on usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


def _genus_hint(args) -> int:
    curve, _, _ = load_curve(args)
    return curve.genus


if __name__ == "__main__":
    raise SystemExit(main())
