"""Command-line front end.

Subcommands: ``model``, ``op``, ``dc``, ``tran``, ``ac``, ``noise`` run on
a user netlist (or chirality for ``model``); ``bench`` runs the built-in
multiplier experiment suite. Exit codes: 0 success, 1 usage error, 2
simulation error. CSV files are the authoritative output (12 significant
digits, written atomically); ``--plot`` adds native SVG line charts.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import bench
from .analyses import (SweepSpec, ac_sweep, dc_sweep, noise_analysis,
                       operating_point, power_report, transient)
from .cnfet import (CntParams, DevicePoint, diameter_from_chirality,
                    drain_current, threshold_voltage)
from .errors import CnfetLabError, UsageError
from .mna import NewtonConfig
from .netlist import parse_netlist, parse_value
from .output import svg_line_chart, write_csv_atomic


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cnfetlab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command")

    def add_common(p, netlist=True):
        if netlist:
            p.add_argument("netlist", help="netlist file path")
        p.add_argument("--out", default=os.environ.get("CNFETLAB_OUT"),
                       help="output directory (default: $CNFETLAB_OUT)")
        p.add_argument("--plot", action="store_true",
                       help="also write SVG charts next to each CSV")
        p.add_argument("--max-iter", type=int, default=200)
        p.add_argument("--abstol", type=float, default=1e-9,
                       help="voltage tolerance, volts")
        p.add_argument("--abstol-i", type=float, default=1e-12,
                       help="current tolerance, amps")
        p.add_argument("--reltol", type=float, default=1e-6)
        p.add_argument("--damping", type=float, default=0.3,
                       help="max Newton voltage step, volts")

    p = sub.add_parser("model", help="print device geometry/threshold and an I-V table")
    p.add_argument("--chirality", default="25,0", help="n,m (default 25,0)")
    p.add_argument("--out", default=os.environ.get("CNFETLAB_OUT"))
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("op", help="operating point")
    add_common(p)

    p = sub.add_parser("dc", help="DC sweep")
    add_common(p)
    p.add_argument("--sweep", required=True,
                   help="source,start,stop,step[,mirror-source]")
    p.add_argument("--sweep2", help="inner sweep, same format")
    p.add_argument("--probe", action="append", required=True,
                   help="v(node) or v(a,b); repeatable")

    p = sub.add_parser("tran", help="transient analysis")
    add_common(p)
    p.add_argument("--tstop", required=True, help="stop time, seconds")
    p.add_argument("--dt", required=True, help="fixed step, seconds")
    p.add_argument("--probe", action="append", required=True)

    p = sub.add_parser("ac", help="small-signal frequency sweep")
    add_common(p)
    p.add_argument("--fstart", required=True)
    p.add_argument("--fstop", required=True)
    p.add_argument("--ppd", type=int, default=20, help="points per decade")
    p.add_argument("--probe", action="append", required=True)

    p = sub.add_parser("noise", help="noise densities vs frequency")
    add_common(p)
    p.add_argument("--output", required=True, help="output pair, v(a,b)")
    p.add_argument("--input", required=True, help="input source name")
    p.add_argument("--fstart", required=True)
    p.add_argument("--fstop", required=True)
    p.add_argument("--ppd", type=int, default=10)

    p = sub.add_parser("bench", help="built-in multiplier experiment suite")
    p.add_argument("which", choices=["dc", "thd", "freq", "noise", "am", "all"])
    p.add_argument("--out", default=os.environ.get("CNFETLAB_OUT"))
    p.add_argument("--plot", action="store_true")
    return parser


def _newton_config(args) -> NewtonConfig:
    return NewtonConfig(max_iter=args.max_iter, abstol_v=args.abstol,
                        abstol_i=args.abstol_i, reltol=args.reltol,
                        damping_v=args.damping)


def _load_netlist(path):
    try:
        with open(path) as fh:
            return parse_netlist(fh.read())
    except OSError as exc:
        raise CnfetLabError(f"cannot read netlist {path!r}: {exc}") from exc


def _out_dir(args):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _emit(args, name, header, rows, logx=False):
    out = _out_dir(args)
    path = os.path.join(out, f"{name}.csv")
    write_csv_atomic(path, header, rows)
    print(f"wrote {path}")
    if args.plot:
        try:
            arr = np.array([[float(v) for v in row] for row in rows])
            series = {header[j]: arr[:, j] for j in range(1, arr.shape[1])}
            svg_line_chart(os.path.join(out, f"{name}.svg"), arr[:, 0], series,
                           title=name, xlabel=header[0], logx=logx)
        except Exception as exc:
            print(f"plot generation failed: {exc}", file=sys.stderr)


def _cmd_model(args):
    try:
        n, m = (int(tok) for tok in args.chirality.split(","))
    except ValueError as exc:
        raise UsageError(f"--chirality expects n,m integers: {exc}") from exc
    params = CntParams(n=n, m=m)
    d = diameter_from_chirality(params)
    vth = threshold_voltage(params)
    print(f"chirality      ({n},{m})")
    print(f"diameter       {d*1e9:.4f} nm")
    print(f"threshold      {vth:.4f} V")
    print(f"kTube          {params.k_tube:.4e} A/V^2")
    print(f"gate cap       {params.c_eff*1e18:.1f} aF/FET per tube")
    header = ["vds"] + [f"ids@vgs={vgs:.1f}" for vgs in (0.3, 0.5, 0.7, 0.9)]
    rows = []
    for vds in np.linspace(0.0, 0.9, 46):
        row = [vds]
        for vgs in (0.3, 0.5, 0.7, 0.9):
            row.append(drain_current(params, "N", 1, vgs, vds).ids)
        rows.append(row)
    if args.out:
        path = os.path.join(_out_dir(args), "model_iv.csv")
        write_csv_atomic(path, header, rows)
        print(f"wrote {path}")
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(f"{v:.11e}" for v in row))
    return 0


def _cmd_op(args):
    net = _load_netlist(args.netlist)
    op = operating_point(net, _newton_config(args))
    for node, v in op.node_voltages.items():
        if node != "0":
            print(f"v({node}) = {v:.9g} V")
    for name, i in op.branch_currents.items():
        print(f"i({name}) = {i:.9g} A")
    report = power_report(net, op)
    print(f"total source power = {report.total:.9g} W")
    if args.out:
        names = [n for n in op.node_voltages if n != "0"]
        _emit(args, "op", ["t_or_f"] + [f"v({n})" for n in names],
              [[0.0] + [op.node_voltages[n] for n in names]])
    return 0


def _parse_sweep(text) -> SweepSpec:
    parts = text.split(",")
    if len(parts) not in (4, 5):
        raise UsageError(f"sweep must be source,start,stop,step[,mirror]: {text!r}")
    try:
        return SweepSpec(parts[0], parse_value(parts[1]), parse_value(parts[2]),
                         parse_value(parts[3]),
                         mirror=parts[4] if len(parts) == 5 else None)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_dc(args):
    net = _load_netlist(args.netlist)
    outer = _parse_sweep(args.sweep)
    inner = _parse_sweep(args.sweep2) if args.sweep2 else None
    result = dc_sweep(net, outer, inner, probes=args.probe,
                      config=_newton_config(args))
    for fail in result.failures:
        print(f"no convergence at inner={fail[0]:g} outer={fail[1]:g}: {fail[2]}",
              file=sys.stderr)
    header = ["t_or_f"] + list(args.probe)
    for j, vin in enumerate(result.inner_values):
        rows = [[result.outer_values[i]] + [result.data[p][j, i] for p in args.probe]
                for i in range(result.outer_values.size)]
        suffix = "" if inner is None else f"_{inner.source.lower()}={vin:g}"
        _emit(args, f"dc{suffix}", header, rows)
    return 0


def _cmd_tran(args):
    net = _load_netlist(args.netlist)
    t_stop = parse_value(args.tstop)
    dt = parse_value(args.dt)
    result = transient(net, t_stop, dt, args.probe, config=_newton_config(args))
    first = result.waveforms[next(iter(result.waveforms))]
    times = first.times
    rows = [[times[k]] + [result.waveforms[label].samples[k]
                          for label in result.waveforms]
            for k in range(times.size)]
    _emit(args, "tran", ["t_or_f"] + list(result.waveforms), rows)
    return 0


def _cmd_ac(args):
    net = _load_netlist(args.netlist)
    points = ac_sweep(net, parse_value(args.fstart), parse_value(args.fstop),
                      args.ppd, probes=args.probe, config=_newton_config(args))
    header = ["t_or_f"] + list(args.probe) + [f"{p}_phase_deg" for p in args.probe]
    rows = []
    for pt in points:
        row = [pt.freq_hz]
        row += [abs(pt.values[p]) for p in args.probe]
        row += [math.degrees(np.angle(pt.values[p])) for p in args.probe]
        rows.append(row)
    _emit(args, "ac", header, rows, logx=True)
    return 0


def _cmd_noise(args):
    net = _load_netlist(args.netlist)
    result = noise_analysis(net, args.output, args.input,
                            parse_value(args.fstart), parse_value(args.fstop),
                            args.ppd, config=_newton_config(args))
    rows = [[p.freq_hz, p.output_density, p.input_density] for p in result.points]
    for f, msg in result.diagnostics:
        print(f"{f:g} Hz: {msg}", file=sys.stderr)
    _emit(args, "noise", ["t_or_f", "onoise", "inoise"], rows, logx=True)
    return 0


def _cmd_bench(args):
    out = _out_dir(args)
    reports = bench.run_suite(args.which, out_dir=out, plot=args.plot)
    for report in reports:
        for key in sorted(report.scalars):
            print(f"{report.name}: {key} = {report.scalars[key]:.6e}")
    print(f"wrote {out}/summary.md")
    return 0


_COMMANDS = {
    "model": _cmd_model,
    "op": _cmd_op,
    "dc": _cmd_dc,
    "tran": _cmd_tran,
    "ac": _cmd_ac,
    "noise": _cmd_noise,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required")
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except CnfetLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
