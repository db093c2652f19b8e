"""Four-quadrant quarter-square multiplier benchmark and experiment suite.

The multiplier has two stages: four capacitive summers derive the scaled
sum and difference voltages vB+Vy, vB-Vy, vB+Vx, vB-Vx from the inputs and
their inverted replicas (Vy = (v1+v2)/6, Vx = (v1-v2)/6), and a core of
four matched N-CNFET common-source devices squares them. The pair driven
by +-Vx (M1, M2) shares drain node vo2, the +-Vy pair (M3, M4) shares
vo1, and P-CNFET current-source loads (or ideal resistors) pull both
nodes from the positive rail. With matched square-law devices

    Vout = v(vo2) - v(vo1) = R_load * (2*K/9) * v1 * v2

exactly, which is the quarter-square identity ((v1+v2)^2 - (v1-v2)^2 =
4*v1*v2) after the 1/6 input scaling.

Experiments are independent and may run concurrently on their own netlist
instances; report emission is single-threaded and byte-deterministic.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np
from scipy.optimize import brentq

from .analyses import (NewtonConfig, Probe, SweepSpec, ac_sweep, dc_sweep,
                       noise_analysis, operating_point, power_report, transient)
from .cnfet import CntParams, Region, threshold_voltage
from .errors import AnalysisError, CalibrationError, SaturationViolatedError, \
    ZeroFundamentalError
from .mna import Circuit, newton_solve
from .netlist import (Cnfet, Netlist, Resistor, SinSpec, SourceShape, Summer,
                      VSource, AcSpec, render_netlist, validate_netlist)
from .output import svg_line_chart, write_csv_atomic, write_text_atomic
from .spectral import analysis_window, bandwidth_3db, dft_component, spectrum, thd

DISCLAIMER = (
    "Device model: simplified square-law CNFET compact model (chirality-derived "
    "threshold, fixed gate capacitance, 4kT*(2/3)*gm channel noise). Quantities "
    "are not directly comparable to full transport-model simulations; the "
    "reference column lists figures obtained with the full Stanford CNFET model "
    "and is informational only. The first 2 fundamental periods of every "
    "transient are discarded before spectral analysis."
)

# Full-device-model figures shown alongside our results, never asserted.
REFERENCE_FIGURES = {
    "power_w": "2.469e-4",
    "thd_pct": "< 0.45",
    "bandwidth_hz": "4.988e+10",
    "dc_offset_v": "6.77e-4",
    "output_swing_v": "9.0e-3 (+-4.5 mV)",
}

VOUT_PROBE = "v(vo2,vo1)"


@dataclass(frozen=True)
class CnfetLoad:
    pass


@dataclass(frozen=True)
class ResistorLoad:
    ohms: float = 10e3

    def __post_init__(self):
        if self.ohms <= 0:
            raise ValueError("load resistance must be > 0")


@dataclass(frozen=True)
class MultiplierConfig:
    """Benchmark configuration.

    ``lambda_override`` replaces the model's channel-length modulation for
    the bench (0.25/V keeps every device saturated over the +-0.4 V input
    grid against the current-source loads); set it to 0 together with a
    ResistorLoad for the exact quarter-square algebra. ``load_bias`` is
    the P-load gate voltage, normally filled in by calibrate_load_bias.

    The default summer mode is the DC-coupled behavioral one: physical
    capacitive summers bias their outputs through 10 GOhm, so any window
    short enough to simulate still carries the millisecond-scale settling
    of the gate bias network (see exp_doubler_thd).
    """

    vdd: float = 0.9
    vss: float = -0.9
    model: CntParams = field(default_factory=lambda: CntParams(n=25, m=0))
    tubes_core: int = 1
    tubes_load: int = 2
    summer_c: float = 5e-15
    summer_mode: str = "behav"
    gate_bias: float = -0.2
    load_bias: Optional[float] = None
    load: Union[CnfetLoad, ResistorLoad] = CnfetLoad()
    lambda_override: Optional[float] = 0.25

    def __post_init__(self):
        if not (self.vdd > 0 > self.vss):
            raise ValueError("need vdd > 0 > vss")
        if self.tubes_core < 1 or self.tubes_load != 2 * self.tubes_core:
            raise ValueError("loads need twice the core tube count")
        if self.summer_mode not in ("phys", "behav"):
            raise ValueError("summer_mode must be phys or behav")
        if self.summer_c < 10.0 * self.model.c_eff:
            raise ValueError("summer capacitance must be >= 10x the gate capacitance")

    def effective_model(self) -> CntParams:
        if self.lambda_override is None:
            return self.model
        return replace(self.model, lam=self.lambda_override)


def default_config() -> MultiplierConfig:
    return MultiplierConfig()


def ideal_config(ohms: float = 10e3) -> MultiplierConfig:
    """Resistor loads, no channel-length modulation, DC-coupled summers:
    the configuration in which the quarter-square identity is exact."""
    return MultiplierConfig(load=ResistorLoad(ohms), lambda_override=0.0,
                            summer_mode="behav")


def build_multiplier(cfg: MultiplierConfig,
                     v1: Optional[SourceShape] = None,
                     v2: Optional[SourceShape] = None) -> Netlist:
    """Construct the benchmark netlist for the given input source shapes.

    Inverted replicas of both inputs are separate ideal sources (DC and
    sinusoid negated; any AC tag stays single-ended on the original
    source, since the AC analysis takes exactly one stimulus).
    """
    v1 = v1 or SourceShape()
    v2 = v2 or SourceShape()
    model = cfg.effective_model()
    if isinstance(cfg.load, CnfetLoad) and cfg.load_bias is None:
        raise ValueError("CNFET loads need load_bias; run calibrate_load_bias")

    summer = functools.partial(Summer, mode=cfg.summer_mode, c_in=cfg.summer_c,
                               v_bias=cfg.gate_bias)
    elements = [
        VSource("V1", "in1", "0", v1),
        VSource("V2", "in2", "0", v2),
        VSource("V1N", "in1n", "0", v1.negated()),
        VSource("V2N", "in2n", "0", v2.negated()),
        VSource("VDD", "vdd", "0", SourceShape(dc=cfg.vdd)),
        VSource("VSS", "vss", "0", SourceShape(dc=cfg.vss)),
        summer("XYP", "in1", "in2", "gyp"),
        summer("XYM", "in1n", "in2n", "gym"),
        summer("XXP", "in1", "in2n", "gxp"),
        summer("XXM", "in1n", "in2", "gxm"),
        Cnfet("M1", "vo2", "gxp", "vss", "cnt", tubes=cfg.tubes_core),
        Cnfet("M2", "vo2", "gxm", "vss", "cnt", tubes=cfg.tubes_core),
        Cnfet("M3", "vo1", "gyp", "vss", "cnt", tubes=cfg.tubes_core),
        Cnfet("M4", "vo1", "gym", "vss", "cnt", tubes=cfg.tubes_core),
    ]
    if isinstance(cfg.load, CnfetLoad):
        elements.append(VSource("VBP", "gbp", "0", SourceShape(dc=cfg.load_bias)))
        elements.append(Cnfet("M5", "vo1", "gbp", "vdd", "cnt",
                              polarity="P", tubes=cfg.tubes_load))
        elements.append(Cnfet("M6", "vo2", "gbp", "vdd", "cnt",
                              polarity="P", tubes=cfg.tubes_load))
    else:
        elements.append(Resistor("R5", "vdd", "vo1", cfg.load.ohms))
        elements.append(Resistor("R6", "vdd", "vo2", cfg.load.ohms))
    return Netlist(elements=tuple(elements), models={"cnt": model},
                   title="quarter-square CNFET multiplier")


def ideal_product(v1: float, v2: float, cfg: MultiplierConfig) -> float:
    """Closed-form multiplier output R*(2K/9)*v1*v2 for the ideal setup.

    Valid only for resistor loads with zero channel-length modulation and
    all four core devices in saturation; raises SaturationViolatedError
    when the operating region assumption breaks at (v1, v2).
    """
    if not isinstance(cfg.load, ResistorLoad):
        raise ValueError("ideal_product needs ResistorLoad")
    model = cfg.effective_model()
    if model.lam != 0.0:
        raise ValueError("ideal_product needs zero channel-length modulation")
    k = model.k_tube * cfg.tubes_core
    vth = threshold_voltage(model)
    vov0 = cfg.gate_bias - cfg.vss - vth
    vy = (v1 + v2) / 6.0
    vx = (v1 - v2) / 6.0
    r = cfg.load.ohms
    for pair_swing, node in ((vy, "vo1"), (vx, "vo2")):
        vov_hi, vov_lo = vov0 + pair_swing, vov0 - pair_swing
        if vov_hi <= 0 or vov_lo <= 0:
            raise SaturationViolatedError(
                f"{node} pair cut off at (v1={v1:g}, v2={v2:g})")
        v_node = cfg.vdd - r * k * (vov_hi ** 2 + vov_lo ** 2)
        vds = v_node - cfg.vss
        if vds < max(vov_hi, vov_lo):
            raise SaturationViolatedError(
                f"{node} pair leaves saturation at (v1={v1:g}, v2={v2:g})")
    return r * (2.0 * k / 9.0) * v1 * v2


# --- calibrations -------------------------------------------------------------

@functools.lru_cache(maxsize=32)
def calibrate_load_bias(cfg: MultiplierConfig,
                        config: Optional[NewtonConfig] = None) -> float:
    """Load gate bias that zeroes the output nodes at zero input.

    Scalar root-find on v(vo1) over [vss, vdd]; verifies both loads stay
    saturated at the solution. |vo1| lands well below the 1 mV target.
    """
    if not isinstance(cfg.load, CnfetLoad):
        raise CalibrationError("load bias calibration needs CNFET loads")
    circuit = Circuit(build_multiplier(replace(cfg, load_bias=0.0)))
    guess = {}

    def residual(vbp):
        sol = newton_solve(circuit, config, x0=guess.get("x"),
                           source_dc={"VBP": vbp})
        guess["x"] = sol.x
        return sol.voltage("vo1")

    lo, hi = cfg.vss, cfg.vdd
    if residual(lo) * residual(hi) > 0:
        raise CalibrationError(
            f"no load bias in [{lo:g}, {hi:g}] zeroes the output")
    vbp = brentq(residual, lo, hi, xtol=1e-9)
    sol = newton_solve(circuit, config, x0=guess.get("x"), source_dc={"VBP": vbp})
    for name in ("M5", "M6"):
        region = circuit.device_eval(sol.x)[name][3]
        if region is not Region.SATURATION:
            raise SaturationViolatedError(f"load {name} in {region.value} after calibration")
    return vbp


def calibrated(cfg: MultiplierConfig,
               config: Optional[NewtonConfig] = None) -> MultiplierConfig:
    """cfg with load_bias filled in (no-op for resistor loads)."""
    if isinstance(cfg.load, CnfetLoad) and cfg.load_bias is None:
        return replace(cfg, load_bias=calibrate_load_bias(cfg, config))
    return cfg


def quiescent_power(cfg: MultiplierConfig,
                    config: Optional[NewtonConfig] = None) -> float:
    """Total supply power of the zero-input multiplier."""
    net = build_multiplier(calibrated(cfg, config))
    return power_report(net, operating_point(net, config)).total


# --- reports ------------------------------------------------------------------

@dataclass(frozen=True)
class Trace:
    name: str
    header: tuple
    rows: tuple


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    scalars: dict
    traces: tuple = ()
    disclaimer: str = DISCLAIMER
    diagnostics: tuple = ()

    def __post_init__(self):
        for key, value in self.scalars.items():
            if not math.isfinite(value):
                raise ValueError(f"scalar {key} is not finite: {value!r}")


def _trace(name, header, columns):
    rows = tuple(tuple(float(v) for v in row) for row in zip(*columns))
    return Trace(name, tuple(header), rows)


# --- experiments --------------------------------------------------------------

def exp_dc_transfer(cfg: Optional[MultiplierConfig] = None,
                    v1_step: float = 0.01, v2_step: float = 0.05,
                    v_max: float = 0.4,
                    config: Optional[NewtonConfig] = None):
    """DC transfer surface Vout(v1, v2); forces behavioral summers since a
    DC sweep cannot propagate through ideal capacitors."""
    cfg = calibrated(replace(cfg or default_config(), summer_mode="behav"), config)
    net = build_multiplier(cfg)
    result = dc_sweep(
        net,
        SweepSpec("V1", -v_max, v_max, v1_step, mirror="V1N"),
        SweepSpec("V2", -v_max, v_max, v2_step, mirror="V2N"),
        probes=[VOUT_PROBE], config=config)
    if result.failures:
        raise AnalysisError(f"dc grid failed at {result.failures[0]}")
    grid = result.data[VOUT_PROBE]

    op = operating_point(net, config)
    power = power_report(net, op)
    v1g = np.repeat(result.outer_values[np.newaxis, :], result.inner_values.size, 0)
    v2g = np.repeat(result.inner_values[:, np.newaxis], result.outer_values.size, 1)
    report = ExperimentReport(
        name="dc-transfer",
        scalars={
            "power_w": power.total,
            "dc_offset_v": abs(op.node_voltages["vo1"]),
            "output_swing_v": float(grid.max() - grid.min()),
            "vout_max_v": float(np.abs(grid).max()),
        },
        traces=(_trace("dc_transfer", ("v1", "v2", "vout"),
                       (v1g.ravel(), v2g.ravel(), grid.ravel())),),
    )
    return report, result


def _doubler_run(cfg, a1, a2, freq, periods, discard, spp, config):
    shape1 = SourceShape(sin=SinSpec(0.0, a1, freq))
    shape2 = SourceShape(sin=SinSpec(0.0, a2, freq))
    net = build_multiplier(cfg, shape1, shape2)
    dt = 1.0 / (freq * spp)
    tr = transient(net, periods / freq, dt, [VOUT_PROBE], config=config)
    return analysis_window(tr.waveforms[VOUT_PROBE], freq, discard)


def exp_doubler_thd(cfg: Optional[MultiplierConfig] = None,
                    amplitude: float = 0.4, freq: float = 1e6,
                    amp_grid=(0.1, 0.2, 0.3, 0.4),
                    periods: int = 12, discard: int = 2,
                    samples_per_period: int = 512, max_harmonic: int = 10,
                    config: Optional[NewtonConfig] = None):
    """Frequency-doubler distortion: both inputs share one tone, the output
    fundamental sits at twice the input frequency. Reports the residual at
    the input frequency and a THD surface over the amplitude grid."""
    cfg = calibrated(cfg or default_config(), config)
    window = _doubler_run(cfg, amplitude, amplitude, freq, periods, discard,
                          samples_per_period, config)
    f0 = 2.0 * freq
    spec = spectrum(window, f0, max_harmonic)
    fundamental = spec.amplitude(1)
    residual, _ = dft_component(window, freq)
    headline_thd = thd(window, f0, max_harmonic)

    diagnostics = []
    surface = []
    for a1 in amp_grid:
        for a2 in amp_grid:
            if (a1, a2) == (amplitude, amplitude):
                w = window
            else:
                w = _doubler_run(cfg, a1, a2, freq, periods, discard,
                                 samples_per_period, config)
            try:
                surface.append((a1, a2, 100.0 * thd(w, f0, max_harmonic)))
            except ZeroFundamentalError as exc:
                diagnostics.append(f"thd({a1:g},{a2:g}): {exc}")

    ks = np.array([k for k, _, _ in spec.harmonics])
    amps = np.array([a for _, a, _ in spec.harmonics])
    phases = np.array([p for _, _, p in spec.harmonics])
    traces = [
        _trace("doubler_waveform", ("t_or_f", "vout"), (window.times, window.samples)),
        _trace("doubler_spectrum", ("k", "amplitude", "phase"), (ks, amps, phases)),
    ]
    scalars = {
        "thd_pct": 100.0 * headline_thd,
        "fundamental_v": fundamental,
        "input_freq_residual_v": residual,
        "suppression_ratio": residual / fundamental,
    }
    if surface:
        arr = np.array(surface)
        traces.append(_trace("thd_surface", ("a1", "a2", "thd_pct"),
                             (arr[:, 0], arr[:, 1], arr[:, 2])))
        scalars["thd_max_pct"] = float(arr[:, 2].max())
    return ExperimentReport(name="doubler-thd", scalars=scalars,
                            traces=tuple(traces), diagnostics=tuple(diagnostics))


def _freq_response_netlist(cfg, v2_bias, config):
    # behavioral summers: the linearization bias V2 must reach the gates at DC
    cfg = calibrated(replace(cfg, summer_mode="behav"), config)
    v1 = SourceShape(ac=AcSpec(1.0, 0.0))
    v2 = SourceShape(dc=v2_bias)
    return build_multiplier(cfg, v1, v2)


def exp_freq_response(cfg: Optional[MultiplierConfig] = None,
                      v2_bias: float = 0.2, f_start: float = 1e6,
                      f_stop: float = 1e12, points_per_decade: int = 20,
                      config: Optional[NewtonConfig] = None):
    """Small-signal response of the differential output to the first input,
    biased as a variable-gain amplifier by a DC level on the second input."""
    net = _freq_response_netlist(cfg or default_config(), v2_bias, config)
    points = ac_sweep(net, f_start, f_stop, points_per_decade,
                      probes=[VOUT_PROBE], config=config)
    freqs = np.array([p.freq_hz for p in points])
    mags = np.array([abs(p.values[VOUT_PROBE]) for p in points])
    phases = np.array([math.degrees(np.angle(p.values[VOUT_PROBE])) for p in points])
    bw = bandwidth_3db(points)
    report = ExperimentReport(
        name="frequency-response",
        scalars={"bandwidth_hz": bw, "lf_gain": float(mags[0])},
        traces=(_trace("frequency_response",
                       ("t_or_f", "mag", "mag_db", "phase_deg"),
                       (freqs, mags, 20.0 * np.log10(mags / mags[0]), phases)),),
    )
    return report, points


def exp_noise(cfg: Optional[MultiplierConfig] = None, v2_bias: float = 0.2,
              f_start: float = 1e5, f_stop: float = 1e12,
              points_per_decade: int = 10,
              config: Optional[NewtonConfig] = None):
    """Output and input-referred noise densities at the frequency-response
    bias (AC stimulus on the first input)."""
    net = _freq_response_netlist(cfg or default_config(), v2_bias, config)
    result = noise_analysis(net, VOUT_PROBE, "V1", f_start, f_stop,
                            points_per_decade, config=config)
    freqs = np.array([p.freq_hz for p in result.points])
    onoise = np.array([p.output_density for p in result.points])
    inoise = np.array([p.input_density for p in result.points])
    report = ExperimentReport(
        name="noise",
        scalars={
            "output_noise_lf_v_rthz": float(onoise[0]),
            "input_noise_lf_v_rthz": float(inoise[0]),
        },
        traces=(_trace("noise_densities", ("t_or_f", "onoise", "inoise"),
                       (freqs, onoise, inoise)),),
        diagnostics=tuple(f"{f:g} Hz: {msg}" for f, msg in result.diagnostics),
    )
    return report, result


def exp_am(cfg: Optional[MultiplierConfig] = None,
           carrier=(0.2, 10e6), modulating=(0.05, 1e6),
           periods: int = 6, discard: int = 2,
           samples_per_carrier_period: int = 256,
           config: Optional[NewtonConfig] = None) -> ExperimentReport:
    """Amplitude modulation: carrier on the first input, modulation on the
    second. A pure product gives equal sidebands at f_c +- f_m and a
    suppressed carrier (DSB)."""
    a_c, f_c = carrier
    a_m, f_m = modulating
    ratio = f_c / f_m
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 2:
        raise AnalysisError("carrier frequency must be an integer multiple "
                            "of the modulating frequency")
    cfg = calibrated(cfg or default_config(), config)
    net = build_multiplier(cfg,
                           SourceShape(sin=SinSpec(0.0, a_c, f_c)),
                           SourceShape(sin=SinSpec(0.0, a_m, f_m)))
    dt = 1.0 / (f_c * samples_per_carrier_period)
    tr = transient(net, periods / f_m, dt, [VOUT_PROBE], config=config)
    window = analysis_window(tr.waveforms[VOUT_PROBE], f_m, discard)

    lo, _ = dft_component(window, f_c - f_m)
    hi, _ = dft_component(window, f_c + f_m)
    feedthrough, _ = dft_component(window, f_c)
    k_c = int(round(ratio))
    spec = spectrum(window, f_m, max_harmonic=k_c + 3)
    ks = np.array([k for k, _, _ in spec.harmonics])
    amps = np.array([a for _, a, _ in spec.harmonics])
    phases = np.array([p for _, _, p in spec.harmonics])
    label = "mhz" if f_c < 1e9 else "ghz"
    return ExperimentReport(
        name=f"am-{label}",
        scalars={
            "carrier_v": a_c, "carrier_freq_hz": f_c,
            "modulating_v": a_m, "modulating_freq_hz": f_m,
            "sideband_lo_v": lo, "sideband_hi_v": hi,
            "sideband_asym_pct": 100.0 * abs(lo - hi) / max(lo, hi),
            "carrier_feedthrough_v": feedthrough,
        },
        traces=(
            _trace(f"am_waveform_{label}", ("t_or_f", "vout"),
                   (window.times, window.samples)),
            _trace(f"am_spectrum_{label}", ("k", "amplitude", "phase"),
                   (ks, amps, phases)),
        ),
    )


# --- suite and emission ---------------------------------------------------------

def run_suite(which: str = "all", cfg: Optional[MultiplierConfig] = None,
              out_dir: Optional[str] = None, plot: bool = False,
              config: Optional[NewtonConfig] = None):
    """Run the selected experiments; write reports when out_dir is given."""
    cfg = cfg or default_config()
    known = ("dc", "thd", "freq", "noise", "am", "all")
    if which not in known:
        raise AnalysisError(f"unknown bench selection {which!r}; pick one of {known}")
    selected = ("dc", "thd", "freq", "noise", "am") if which == "all" else (which,)
    reports = []
    for name in selected:
        if name == "dc":
            reports.append(exp_dc_transfer(cfg, config=config)[0])
        elif name == "thd":
            reports.append(exp_doubler_thd(cfg, config=config))
        elif name == "freq":
            reports.append(exp_freq_response(cfg, config=config)[0])
        elif name == "noise":
            reports.append(exp_noise(cfg, config=config)[0])
        elif name == "am":
            reports.append(exp_am(cfg, carrier=(0.2, 10e6),
                                  modulating=(0.05, 1e6), config=config))
            reports.append(exp_am(cfg, carrier=(0.2, 10e9),
                                  modulating=(0.05, 1e9), config=config))
    if out_dir is not None:
        emit_report(reports, out_dir, plot=plot)
        netlist_text = render_netlist(build_multiplier(calibrated(cfg, config)))
        write_text_atomic(f"{out_dir}/multiplier.cir", netlist_text)
    return reports


def emit_report(reports, out_dir: str, plot: bool = False):
    """Write one CSV per trace plus a deterministic summary.md table."""
    if not reports:
        raise ValueError("emit_report needs at least one report")
    paths = []
    for report in reports:
        for trace in report.traces:
            path = f"{out_dir}/{trace.name}.csv"
            write_csv_atomic(path, trace.header, trace.rows)
            paths.append(path)

    lines = ["# Multiplier benchmark summary", ""]
    lines.append("Supply: +-0.9 V. Input range: +-400 mV. Transistor count: 6.")
    lines.append("")
    lines.append(reports[0].disclaimer)
    lines.append("")
    lines.append("| experiment | quantity | value | full-model reference |")
    lines.append("|---|---|---|---|")
    for report in reports:
        for key in sorted(report.scalars):
            ref = REFERENCE_FIGURES.get(key, "")
            lines.append(f"| {report.name} | {key} | "
                         f"{report.scalars[key]:.6e} | {ref} |")
    for report in reports:
        if report.name == "doubler-thd":
            lines.append("")
            lines.append(f"THD={report.scalars['thd_pct']:.4f}%")
    notes = [d for report in reports for d in report.diagnostics]
    if notes:
        lines.append("")
        lines.append("Diagnostics:")
        lines.extend(f"- {note}" for note in notes)
    summary = f"{out_dir}/summary.md"
    write_text_atomic(summary, "\n".join(lines) + "\n")
    paths.append(summary)

    if plot:
        try:
            _plot_traces(reports, out_dir)
        except Exception as exc:  # plots are courtesy; CSVs stay authoritative
            import sys
            print(f"plot generation failed: {exc}", file=sys.stderr)
    return paths


def _plot_traces(reports, out_dir):
    for report in reports:
        for trace in report.traces:
            rows = np.array(trace.rows)
            if rows.shape[0] < 2 or rows.shape[1] < 2:
                continue
            xs = rows[:, 0]
            logx = trace.header[0] == "t_or_f" and xs.min() > 0 and \
                xs.max() / max(xs.min(), 1e-300) > 1e3
            series = {trace.header[j]: rows[:, j] for j in range(1, rows.shape[1])}
            svg_line_chart(f"{out_dir}/{trace.name}.svg", xs, series,
                           title=trace.name, xlabel=trace.header[0], logx=logx)
