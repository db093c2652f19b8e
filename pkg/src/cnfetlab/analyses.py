"""Analysis drivers: operating point, DC sweep, transient, AC, noise, power.

Every analysis owns its own state, so concurrent analyses over the same
immutable netlist are safe. Results are keyed by probe labels like
``v(out)`` or ``v(a,b)`` for differential pairs.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .constants import BOLTZMANN, CHANNEL_NOISE_GAMMA, ROOM_TEMPERATURE_K
from .errors import AnalysisError, NoConvergenceError, SingularMatrixError
from .mna import (AcContext, Circuit, DcContext, NewtonConfig, Solution,
                  TransientContext, _dense_solve, _newton, newton_solve)
from .netlist import BiasResistor, Capacitor, Cnfet, Resistor, Summer, VSource


# --- probes -----------------------------------------------------------------

_PROBE_RE = re.compile(r"^[vV]\(\s*([^,()\s]+)\s*(?:,\s*([^,()\s]+)\s*)?\)$")


@dataclass(frozen=True)
class Probe:
    label: str
    pos: str
    neg: str = "0"


def parse_probe(spec) -> Probe:
    """Accept ``v(node)``, ``v(pos,neg)`` or a bare node name."""
    if isinstance(spec, Probe):
        return spec
    text = str(spec).strip()
    m = _PROBE_RE.match(text)
    if m:
        return Probe(text, m.group(1), m.group(2) or "0")
    if re.match(r"^[^,()\s]+$", text):
        return Probe(f"v({text})", text, "0")
    raise AnalysisError(f"malformed probe {spec!r}")


def _resolve_probes(circuit: Circuit, probes):
    out = []
    for spec in probes:
        p = parse_probe(spec)
        for node in (p.pos, p.neg):
            if node not in circuit.node_index:
                raise AnalysisError(f"probe {p.label}: unknown node {node!r}")
        out.append(p)
    return out


def _probe_value(circuit, x, probe):
    return circuit._v(x, probe.pos) - circuit._v(x, probe.neg)


# --- sweep / waveform / point types ------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    """Linear source sweep; ``mirror`` names a source driven to the negated
    value in lockstep (used for the bench's inverted input replicas)."""

    source: str
    start: float
    stop: float
    step: float
    mirror: Optional[str] = None

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("sweep step must be > 0")
        if self.start > self.stop:
            raise ValueError("sweep start must be <= stop")

    def values(self):
        count = int(round((self.stop - self.start) / self.step)) + 1
        return self.start + self.step * np.arange(count)


@dataclass(frozen=True)
class Waveform:
    """Uniformly sampled trace starting at ``t0`` with spacing ``dt``."""

    t0: float
    dt: float
    samples: np.ndarray
    label: str = ""

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("waveform needs at least 2 samples")
        object.__setattr__(self, "samples", samples)

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.samples.size)


@dataclass(frozen=True)
class AcPoint:
    freq_hz: float
    values: dict  # probe label -> complex response (relative to the AC source)


@dataclass(frozen=True)
class NoisePoint:
    freq_hz: float
    output_density: float   # V/sqrt(Hz)
    input_density: float    # V/sqrt(Hz); inf when the gain is zero

    def __post_init__(self):
        if self.output_density < 0 or self.input_density < 0:
            raise ValueError("noise densities must be >= 0")


# --- operating point ---------------------------------------------------------

@dataclass
class OpResult:
    solution: Solution
    node_voltages: dict
    branch_currents: dict
    element_currents: dict
    element_power: dict       # absorbed power per non-source primitive, signed
    source_power: dict        # delivered power per independent voltage source
    device_points: dict       # device name -> (ids, di_dvg, di_dvd, region)
    total_source_power: float
    iterations: int


def _op_result(circuit: Circuit, sol: Solution, ctx) -> OpResult:
    currents = circuit.element_currents(sol.x, ctx)
    element_power = {}
    source_power = {}
    for p in circuit.prims:
        i = currents[p.name]
        if isinstance(p, VSource):
            v = circuit._v(sol.x, p.n1) - circuit._v(sol.x, p.n2)
            source_power[p.name] = -v * i
        elif isinstance(p, (Resistor, Capacitor)):
            v = circuit._v(sol.x, p.n1) - circuit._v(sol.x, p.n2)
            element_power[p.name] = v * i
        elif isinstance(p, BiasResistor):
            element_power[p.name] = circuit._v(sol.x, p.node) * i
        elif isinstance(p, Summer):
            element_power[p.name] = circuit._v(sol.x, p.out) * i
        elif isinstance(p, Cnfet):
            vds = circuit._v(sol.x, p.drain) - circuit._v(sol.x, p.source)
            element_power[p.name] = vds * i
    branch_currents = {name: sol.branch_current(name) for name in circuit.branch_index}
    return OpResult(
        solution=sol,
        node_voltages=sol.node_voltages,
        branch_currents=branch_currents,
        element_currents=currents,
        element_power=element_power,
        source_power=source_power,
        device_points=circuit.device_eval(sol.x, ctx),
        total_source_power=sum(abs(pw) for pw in source_power.values()),
        iterations=sol.iterations,
    )


def operating_point(net, config: Optional[NewtonConfig] = None,
                    source_dc=None) -> OpResult:
    """Bias solution plus per-element branch currents and dissipated power."""
    circuit = net if isinstance(net, Circuit) else Circuit(net)
    sol = newton_solve(circuit, config, source_dc=source_dc)
    return _op_result(circuit, sol, DcContext(source_dc=source_dc))


@dataclass
class PowerReport:
    per_source: dict          # delivered power per independent source
    per_element: dict         # absorbed power per element
    total: float              # sum over sources of |V*I|
    tellegen_residual: float  # |delivered - absorbed|


def power_report(net, op: Optional[OpResult] = None,
                 config: Optional[NewtonConfig] = None) -> PowerReport:
    """Quiescent power bookkeeping with a Tellegen balance check."""
    if op is None:
        op = operating_point(net, config)
    delivered = sum(op.source_power.values())
    absorbed = sum(op.element_power.values())
    return PowerReport(
        per_source=dict(op.source_power),
        per_element=dict(op.element_power),
        total=sum(abs(p) for p in op.source_power.values()),
        tellegen_residual=abs(delivered - absorbed),
    )


# --- DC sweep ----------------------------------------------------------------

@dataclass
class DcSweepResult:
    outer_values: np.ndarray
    inner_values: np.ndarray      # [nan] when no inner sweep was given
    data: dict                    # probe label -> array [n_inner, n_outer]
    failures: list = field(default_factory=list)


def dc_sweep(net, outer: SweepSpec, inner: Optional[SweepSpec] = None,
             probes=(), config: Optional[NewtonConfig] = None,
             seed: str = "continuation") -> DcSweepResult:
    """Grid of DC solutions; the previous point seeds Newton by default.

    A non-converging grid point is recorded in ``failures`` with its
    coordinates and leaves NaN in the data; the sweep continues.
    """
    if seed not in ("continuation", "cold"):
        raise ValueError("seed must be 'continuation' or 'cold'")
    circuit = net if isinstance(net, Circuit) else Circuit(net)
    probes = _resolve_probes(circuit, probes)
    source_names = {p.name for p in circuit.prims if isinstance(p, VSource)}
    for spec in filter(None, (outer, inner)):
        for name in filter(None, (spec.source, spec.mirror)):
            if name not in source_names:
                raise AnalysisError(f"sweep source {name!r} not in netlist")

    outer_values = outer.values()
    inner_values = inner.values() if inner is not None else np.array([math.nan])
    data = {p.label: np.full((inner_values.size, outer_values.size), math.nan)
            for p in probes}
    failures = []
    guess = None
    for j, vin in enumerate(inner_values):
        row_guess = guess
        for i, vout in enumerate(outer_values):
            overrides = {outer.source: float(vout)}
            if outer.mirror:
                overrides[outer.mirror] = -float(vout)
            if inner is not None:
                overrides[inner.source] = float(vin)
                if inner.mirror:
                    overrides[inner.mirror] = -float(vin)
            x0 = row_guess if seed == "continuation" else None
            try:
                sol = newton_solve(circuit, config, x0=x0, source_dc=overrides)
            except (NoConvergenceError, SingularMatrixError) as exc:
                failures.append((float(vin), float(vout), str(exc)))
                continue
            row_guess = sol.x
            if i == 0:
                guess = sol.x
            for p in probes:
                data[p.label][j, i] = _probe_value(circuit, sol.x, p)
    return DcSweepResult(outer_values, inner_values, data, failures)


# --- transient ----------------------------------------------------------------

@dataclass
class TransientResult:
    waveforms: dict              # probe label -> Waveform
    steps: int
    initial: np.ndarray


def transient(net, t_stop: float, dt: float, probes,
              config: Optional[NewtonConfig] = None, x0=None,
              first_step_be: bool = True) -> TransientResult:
    """Fixed-step trapezoidal integration from the operating point.

    Sinusoidal sources start at their t=0 value; the optional backward-
    Euler first step suppresses startup ringing when ``x0`` imposes an
    inconsistent initial state (e.g. a discharged capacitor against a DC
    source). Raises on non-convergence with the failing time attached.
    """
    if dt <= 0:
        raise AnalysisError("dt must be > 0")
    if t_stop < 10 * dt:
        raise AnalysisError("t_stop must be >= 10*dt")
    circuit = net if isinstance(net, Circuit) else Circuit(net)
    probes = _resolve_probes(circuit, probes)
    config = config or NewtonConfig()

    elements = circuit.prims
    for p in elements:
        if isinstance(p, VSource) and p.shape.sin is not None:
            if dt > 1.0 / (50.0 * p.shape.sin.freq_hz):
                warnings.warn(
                    f"source {p.name}: fewer than 50 samples per period at dt={dt:g}",
                    stacklevel=2)

    if x0 is None:
        x = newton_solve(circuit, config).x
    else:
        x = np.array(x0, dtype=float, copy=True)
        if x.shape != (circuit.dim,):
            raise AnalysisError(f"x0 has shape {x.shape}, expected ({circuit.dim},)")
    initial = x.copy()

    cap_state = {}
    for p in elements:
        if isinstance(p, Capacitor):
            v = circuit._v(x, p.n1) - circuit._v(x, p.n2)
            cap_state[p.name] = (v, 0.0)

    nsteps = int(round(t_stop / dt))
    traces = {p.label: np.empty(nsteps + 1) for p in probes}
    for p in probes:
        traces[p.label][0] = _probe_value(circuit, x, p)

    for k in range(1, nsteps + 1):
        t = k * dt
        method = "be" if (k == 1 and first_step_be) else "trap"
        ctx = TransientContext(time=t, dt=dt, cap_state=cap_state, method=method)
        try:
            x = _newton(circuit, config, x, ctx, polish=False).x
        except (NoConvergenceError, SingularMatrixError) as exc:
            raise NoConvergenceError(f"transient failed at t={t:.6g} s: {exc}",
                                     getattr(exc, "trace", [])) from exc
        new_state = {}
        for p in elements:
            if isinstance(p, Capacitor):
                geq, ieq = ctx.companion(p.name, p.farads)
                v = circuit._v(x, p.n1) - circuit._v(x, p.n2)
                new_state[p.name] = (v, geq * v + ieq)
        cap_state.update(new_state)
        for p in probes:
            traces[p.label][k] = _probe_value(circuit, x, p)

    waveforms = {label: Waveform(0.0, dt, samples, label)
                 for label, samples in traces.items()}
    return TransientResult(waveforms=waveforms, steps=nsteps, initial=initial)


# --- AC small-signal -----------------------------------------------------------

def _frequency_grid(f_start, f_stop, points_per_decade):
    if f_start <= 0 or f_stop < f_start:
        raise AnalysisError("need 0 < f_start <= f_stop")
    if f_start == f_stop:
        return np.array([f_start])
    decades = math.log10(f_stop / f_start)
    n = max(2, int(round(points_per_decade * decades)) + 1)
    return np.logspace(math.log10(f_start), math.log10(f_stop), n)


def _ac_setup(net, config):
    circuit = net if isinstance(net, Circuit) else Circuit(net)
    ac_sources = [p for p in circuit.prims
                  if isinstance(p, VSource) and p.shape.ac is not None]
    op = newton_solve(circuit, config)
    device_op = {name: (ev[1], ev[2])
                 for name, ev in circuit.device_eval(op.x, DcContext()).items()}
    return circuit, ac_sources, op, device_op


def ac_sweep(net, f_start: float, f_stop: float, points_per_decade: int,
             probes=(), config: Optional[NewtonConfig] = None):
    """Linearize at the operating point, solve the complex system per
    log-spaced frequency; responses are relative to the single AC source."""
    circuit, ac_sources, op, device_op = _ac_setup(net, config)
    if len(ac_sources) != 1:
        raise AnalysisError(
            f"ac_sweep needs exactly one AC-tagged source, found {len(ac_sources)}")
    probes = _resolve_probes(circuit, probes)
    reference = ac_sources[0].shape.ac.complex_value
    points = []
    for f in _frequency_grid(f_start, f_stop, points_per_decade):
        ctx = AcContext(omega=2.0 * math.pi * f, device_op=device_op)
        system = circuit.assemble(op.x, ctx, dtype=complex)
        x = _dense_solve(system.matrix, system.rhs)
        values = {p.label: complex(_probe_value(circuit, x, p)) / reference
                  for p in probes}
        points.append(AcPoint(freq_hz=float(f), values=values))
    return points


# --- noise ---------------------------------------------------------------------

@dataclass
class NoiseResult:
    points: list                 # NoisePoint per frequency
    gains: np.ndarray            # complex forward gain per frequency
    contributions: dict          # element name -> PSD (V^2/Hz) array
    diagnostics: list = field(default_factory=list)


def noise_analysis(net, output, input_source: str, f_start: float, f_stop: float,
                   points_per_decade: int, config: Optional[NewtonConfig] = None,
                   temperature_k: float = ROOM_TEMPERATURE_K) -> NoiseResult:
    """Output and input-referred noise densities over a log frequency grid.

    Thermal sources: 4kT/R per resistor (Norton) and 4kT*gamma*gm per
    device channel with gamma = 2/3. Each transfer comes from a unit
    current injected across the source's terminals into the linearized
    network; the input-referred density divides by the gain from the
    designated input source to the output pair.
    """
    circuit, _, op, device_op = _ac_setup(net, config)
    out_probe = parse_probe(output)
    for node in (out_probe.pos, out_probe.neg):
        if node not in circuit.node_index:
            raise AnalysisError(f"noise output: unknown node {node!r}")
    if input_source not in circuit.branch_index:
        raise AnalysisError(f"noise input source {input_source!r} not found")

    kT4 = 4.0 * BOLTZMANN * temperature_k
    sources = []  # (name, psd A^2/Hz, node+, node-)
    for p in circuit.prims:
        if isinstance(p, Resistor):
            sources.append((p.name, kT4 / p.ohms, p.n1, p.n2))
        elif isinstance(p, BiasResistor):
            sources.append((p.name, kT4 / p.ohms, p.node, "0"))
        elif isinstance(p, Cnfet):
            gm = abs(device_op[p.name][0])
            if gm > 0.0:
                sources.append((p.name, kT4 * CHANNEL_NOISE_GAMMA * gm,
                                p.drain, p.source))

    freqs = _frequency_grid(f_start, f_stop, points_per_decade)
    row_of = {}
    for name, _, a, b in sources:
        row_of[name] = (circuit.node_index[a] - 1, circuit.node_index[b] - 1)
    out_rows = (circuit.node_index[out_probe.pos] - 1,
                circuit.node_index[out_probe.neg] - 1)
    in_row = circuit.n_nodes - 1 + circuit.branch_index[input_source]

    def probe_of(x):
        vp = x[out_rows[0]] if out_rows[0] >= 0 else 0.0
        vn = x[out_rows[1]] if out_rows[1] >= 0 else 0.0
        return vp - vn

    points = []
    gains = np.empty(freqs.size, dtype=complex)
    contributions = {name: np.empty(freqs.size) for name, *_ in sources}
    diagnostics = []
    for idx, f in enumerate(freqs):
        ctx = AcContext(omega=2.0 * math.pi * f, device_op=device_op)
        system = circuit.assemble(op.x, ctx, dtype=complex)
        if not np.all(np.isfinite(system.matrix)):
            raise SingularMatrixError("non-finite entries in AC system")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(system.matrix, check_finite=False)
        if np.abs(np.diag(lu)).min() < 1e-300:
            raise SingularMatrixError(f"singular AC system at f={f:g} Hz")

        total = 0.0
        for name, psd, a, b in sources:
            rhs = np.zeros(circuit.dim, dtype=complex)
            ia, ib = row_of[name]
            if ia >= 0:
                rhs[ia] -= 1.0
            if ib >= 0:
                rhs[ib] += 1.0
            x = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
            h2 = abs(probe_of(x)) ** 2
            contributions[name][idx] = h2 * psd
            total += h2 * psd

        rhs = np.zeros(circuit.dim, dtype=complex)
        rhs[in_row] = 1.0
        gain = probe_of(scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False))
        gains[idx] = gain

        out_density = math.sqrt(total)
        if abs(gain) < 1e-300:
            diagnostics.append((float(f), "zero gain: input-referred undefined"))
            in_density = math.inf
        else:
            in_density = out_density / abs(gain)
        points.append(NoisePoint(float(f), out_density, in_density))
    return NoiseResult(points=points, gains=gains, contributions=contributions,
                       diagnostics=diagnostics)
