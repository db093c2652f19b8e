"""Modified nodal analysis: assembly, dense LU, damped Newton with homotopies.

Unknown ordering is node voltages 1..N-1 (ground eliminated) followed by
one branch current per voltage source and per behavioral summer. Dense
matrices throughout: the benchmark circuits stay below ~30 unknowns, so
simplicity and testability win over sparsity.

Each solve owns its matrices; independent solves on separate systems may
run concurrently.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .cnfet import CntParams, channel_eval, threshold_voltage
from .errors import NoConvergenceError, SingularMatrixError
from .netlist import (BiasResistor, Capacitor, Cnfet, Netlist, Resistor,
                      Summer, VSource, build_node_index, elaborate)

_PIVOT_FLOOR = 1e-300


@dataclass(frozen=True)
class NewtonConfig:
    max_iter: int = 200
    abstol_v: float = 1e-9      # volts
    abstol_i: float = 1e-12     # amps
    reltol: float = 1e-6
    damping_v: float = 0.3      # max voltage move per Newton update
    gmin_start: float = 1e-3    # siemens
    gmin_steps: int = 12
    source_steps: int = 10

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        for f in ("abstol_v", "abstol_i", "reltol", "damping_v", "gmin_start"):
            if getattr(self, f) <= 0:
                raise ValueError(f"{f} must be > 0")


# --- analysis contexts ------------------------------------------------------

@dataclass
class DcContext:
    kind: str = "dc"
    # per-solve DC value overrides for named sources (sweeps, calibration)
    source_dc: Optional[dict] = None


@dataclass
class TransientContext:
    """Companion-model state for one integration step ending at ``time``."""

    time: float
    dt: float
    cap_state: dict            # cap name -> (v_prev, i_prev)
    method: str = "trap"       # "trap" | "be" (first step)
    kind: str = "tran"

    def companion(self, name, c):
        v_prev, i_prev = self.cap_state[name]
        if self.method == "be":
            geq = c / self.dt
            ieq = -geq * v_prev
        else:
            geq = 2.0 * c / self.dt
            ieq = -geq * v_prev - i_prev
        return geq, ieq


@dataclass
class AcContext:
    omega: float
    device_op: dict            # device name -> (di_dvg, di_dvd) at the bias point
    kind: str = "ac"


# --- system -----------------------------------------------------------------

@dataclass
class MnaSystem:
    """Assembled nodal matrix and right-hand side (ground row eliminated)."""

    node_index: dict
    branch_index: dict
    matrix: np.ndarray
    rhs: np.ndarray

    @classmethod
    def zeros(cls, node_index, branch_index, dtype=float):
        dim = len(node_index) - 1 + len(branch_index)
        return cls(node_index, branch_index,
                   np.zeros((dim, dim), dtype=dtype), np.zeros(dim, dtype=dtype))

    @property
    def dimension(self):
        return self.rhs.shape[0]

    def _row(self, node):
        idx = self.node_index[node]
        return None if idx == 0 else idx - 1

    def _branch_row(self, name):
        return len(self.node_index) - 1 + self.branch_index[name]

    def add_conductance(self, a, b, g):
        ia, ib = self._row(a), self._row(b)
        if ia is not None:
            self.matrix[ia, ia] += g
        if ib is not None:
            self.matrix[ib, ib] += g
        if ia is not None and ib is not None:
            self.matrix[ia, ib] -= g
            self.matrix[ib, ia] -= g

    def add_current(self, node, value):
        """Inject ``value`` amps into ``node``."""
        idx = self._row(node)
        if idx is not None:
            self.rhs[idx] += value

    def add_jacobian(self, row_node, col_node, value):
        ir, ic = self._row(row_node), self._row(col_node)
        if ir is not None and ic is not None:
            self.matrix[ir, ic] += value


def lu_solve(system: MnaSystem) -> np.ndarray:
    """Solve the assembled system by LU with partial pivoting."""
    return _dense_solve(system.matrix, system.rhs)


def _dense_solve(a, b):
    if a.shape[0] == 0:
        return np.zeros(0, dtype=a.dtype)
    if not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)):
        raise SingularMatrixError("non-finite entries in MNA system")
    with warnings.catch_warnings():
        # exact-zero pivots become SingularMatrixError below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    if np.abs(np.diag(lu)).min() < _PIVOT_FLOOR:
        raise SingularMatrixError("pivot underflow: structurally singular system")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


# --- element stamps ---------------------------------------------------------

def stamp_linear(system: MnaSystem, elem, ctx, source_scale=1.0):
    """Stamp R, C, V, bias resistor or behavioral summer for the context.

    Capacitors are open at DC, trapezoidal (or backward-Euler) companions
    in transient, and admittances j*omega*C in AC.
    """
    if isinstance(elem, Resistor):
        system.add_conductance(elem.n1, elem.n2, 1.0 / elem.ohms)
    elif isinstance(elem, Capacitor):
        if ctx.kind == "tran":
            geq, ieq = ctx.companion(elem.name, elem.farads)
            system.add_conductance(elem.n1, elem.n2, geq)
            system.add_current(elem.n1, -ieq)
            system.add_current(elem.n2, ieq)
        elif ctx.kind == "ac":
            system.add_conductance(elem.n1, elem.n2, 1j * ctx.omega * elem.farads)
        # dc: open circuit
    elif isinstance(elem, BiasResistor):
        g = 1.0 / elem.ohms
        system.add_conductance(elem.node, "0", g)
        if ctx.kind != "ac":
            system.add_current(elem.node, g * elem.volts * source_scale)
    elif isinstance(elem, VSource):
        br = system._branch_row(elem.name)
        for node, sign in ((elem.n1, 1.0), (elem.n2, -1.0)):
            idx = system._row(node)
            if idx is not None:
                system.matrix[idx, br] += sign
                system.matrix[br, idx] += sign
        if ctx.kind == "ac":
            value = elem.shape.ac.complex_value if elem.shape.ac else 0.0
        elif ctx.kind == "tran":
            value = elem.shape.value_at(ctx.time) * source_scale
        else:
            if ctx.source_dc and elem.name in ctx.source_dc:
                value = ctx.source_dc[elem.name] * source_scale
            else:
                value = elem.shape.dc_value() * source_scale
        system.rhs[br] = value
    elif isinstance(elem, Summer):
        # behavioral mode only; physical summers are elaborated away
        br = system._branch_row(elem.name)
        out = system._row(elem.out)
        if out is not None:
            system.matrix[out, br] += 1.0
            system.matrix[br, out] += 1.0
        for node in (elem.in_a, elem.in_b):
            idx = system._row(node)
            if idx is not None:
                system.matrix[br, idx] -= elem.gain
        if ctx.kind != "ac":
            system.rhs[br] = elem.v_bias * source_scale
    else:
        raise TypeError(f"stamp_linear cannot stamp {elem!r}")


def stamp_cnfet(system: MnaSystem, dev: Cnfet, model: CntParams, voltages, ctx):
    """Stamp the Norton companion of the device channel at the given iterate.

    ``voltages`` maps node name -> guess voltage. In AC the linearization
    comes from the converged operating point carried by the context; the
    fixed gate capacitances are stamped separately as explicit capacitors
    by netlist elaboration.
    """
    keff = model.k_tube * dev.tubes
    vth = threshold_voltage(model)
    sign = 1.0 if dev.polarity == "N" else -1.0
    if ctx.kind == "ac":
        di_dvg, di_dvd = ctx.device_op[dev.name]
        _stamp_channel_jacobian(system, dev, di_dvg, di_dvd)
        return
    vg = voltages.get(dev.gate, 0.0)
    vd = voltages.get(dev.drain, 0.0)
    vs = voltages.get(dev.source, 0.0)
    ids, di_dvg, di_dvd, _ = channel_eval(keff, vth, model.lam, sign, vg, vd, vs)
    _stamp_channel_jacobian(system, dev, di_dvg, di_dvd)
    di_dvs = -(di_dvg + di_dvd)
    # rhs carries J.v* - i* so the companion reproduces ids at the fixed point
    lin = di_dvg * vg + di_dvd * vd + di_dvs * vs - ids
    system.add_current(dev.drain, lin)
    system.add_current(dev.source, -lin)


def _stamp_channel_jacobian(system, dev, di_dvg, di_dvd):
    di_dvs = -(di_dvg + di_dvd)
    for col, val in ((dev.gate, di_dvg), (dev.drain, di_dvd), (dev.source, di_dvs)):
        system.add_jacobian(dev.drain, col, val)
        system.add_jacobian(dev.source, col, -val)


# --- circuit compilation ----------------------------------------------------

@dataclass
class _CompiledDevice:
    dev: Cnfet
    keff: float
    vth: float
    lam: float
    sign: float


class Circuit:
    """Netlist lowered to stampable primitives with resolved indices."""

    def __init__(self, net: Netlist):
        self.net = net
        self.prims = elaborate(net)
        self.n_nodes, self.node_index = build_node_index(net)
        self.branch_index = {}
        for p in self.prims:
            if isinstance(p, VSource) or (isinstance(p, Summer) and p.mode == "behav"):
                self.branch_index[p.name] = len(self.branch_index)
        self.dim = self.n_nodes - 1 + len(self.branch_index)
        self.devices = []
        for p in self.prims:
            if isinstance(p, Cnfet):
                model = net.models[p.model]
                self.devices.append(_CompiledDevice(
                    p, model.k_tube * p.tubes, threshold_voltage(model),
                    model.lam, 1.0 if p.polarity == "N" else -1.0))
        self._device_by_name = {cd.dev.name: cd for cd in self.devices}
        self.has_devices = bool(self.devices)

    # voltage of a node under the unknown vector x (ground = 0)
    def _v(self, x, node):
        idx = self.node_index[node]
        return 0.0 if idx == 0 else x[idx - 1]

    def voltages(self, x):
        return {name: (0.0 if idx == 0 else x[idx - 1])
                for name, idx in self.node_index.items()}

    def assemble(self, x, ctx, gmin=0.0, source_scale=1.0, dtype=float):
        system = MnaSystem.zeros(self.node_index, self.branch_index, dtype=dtype)
        volts = self.voltages(x) if self.has_devices and ctx.kind != "ac" else None
        for p in self.prims:
            if isinstance(p, Cnfet):
                stamp_cnfet(system, p, self.net.models[p.model], volts, ctx)
            else:
                stamp_linear(system, p, ctx, source_scale)
        if gmin > 0.0:
            for i in range(self.n_nodes - 1):
                system.matrix[i, i] += gmin
        return system

    def device_eval(self, x, ctx=None):
        """(ids, di_dvg, di_dvd, region) per device at the solution x."""
        out = {}
        for cd in self.devices:
            vg = self._v(x, cd.dev.gate)
            vd = self._v(x, cd.dev.drain)
            vs = self._v(x, cd.dev.source)
            out[cd.dev.name] = channel_eval(cd.keff, cd.vth, cd.lam, cd.sign, vg, vd, vs)
        return out

    def element_currents(self, x, ctx, source_scale=1.0):
        """Branch current per primitive, consistent with the KCL residual.

        Convention: the current flows from the first terminal through the
        element to the second (into the drain for devices, into the node
        for nothing -- bias resistors report node-to-rail current).
        """
        currents = {}
        for p in self.prims:
            if isinstance(p, Resistor):
                currents[p.name] = (self._v(x, p.n1) - self._v(x, p.n2)) / p.ohms
            elif isinstance(p, Capacitor):
                if ctx.kind == "tran":
                    geq, ieq = ctx.companion(p.name, p.farads)
                    currents[p.name] = geq * (self._v(x, p.n1) - self._v(x, p.n2)) + ieq
                else:
                    currents[p.name] = 0.0
            elif isinstance(p, BiasResistor):
                currents[p.name] = (self._v(x, p.node) - p.volts * source_scale) / p.ohms
            elif isinstance(p, (VSource, Summer)):
                currents[p.name] = x[self.n_nodes - 1 + self.branch_index[p.name]]
            elif isinstance(p, Cnfet):
                cd = self._device_by_name[p.name]
                currents[p.name] = channel_eval(cd.keff, cd.vth, cd.lam, cd.sign,
                                                self._v(x, p.gate), self._v(x, p.drain),
                                                self._v(x, p.source))[0]
        return currents

    def kcl_residual(self, x, ctx, gmin=0.0, source_scale=1.0):
        """Max node current imbalance with true (nonlinear) element currents."""
        res = np.zeros(self.n_nodes - 1)

        def leave(node, i):
            idx = self.node_index[node]
            if idx != 0:
                res[idx - 1] += i

        for p in self.prims:
            if isinstance(p, Resistor):
                i = (self._v(x, p.n1) - self._v(x, p.n2)) / p.ohms
                leave(p.n1, i)
                leave(p.n2, -i)
            elif isinstance(p, Capacitor):
                if ctx.kind == "tran":
                    geq, ieq = ctx.companion(p.name, p.farads)
                    i = geq * (self._v(x, p.n1) - self._v(x, p.n2)) + ieq
                    leave(p.n1, i)
                    leave(p.n2, -i)
            elif isinstance(p, BiasResistor):
                leave(p.node, (self._v(x, p.node) - p.volts * source_scale) / p.ohms)
            elif isinstance(p, VSource):
                i = x[self.n_nodes - 1 + self.branch_index[p.name]]
                leave(p.n1, i)
                leave(p.n2, -i)
            elif isinstance(p, Summer):
                leave(p.out, x[self.n_nodes - 1 + self.branch_index[p.name]])
            elif isinstance(p, Cnfet):
                cd = self._device_by_name[p.name]
                i = channel_eval(cd.keff, cd.vth, cd.lam, cd.sign,
                                 self._v(x, p.gate), self._v(x, p.drain),
                                 self._v(x, p.source))[0]
                leave(p.drain, i)
                leave(p.source, -i)
        if gmin > 0.0:
            res += gmin * x[:self.n_nodes - 1]
        return float(np.abs(res).max()) if res.size else 0.0


# --- Newton iteration -------------------------------------------------------

@dataclass
class Solution:
    """Converged unknown vector with name-based accessors."""

    x: np.ndarray
    node_index: dict
    branch_index: dict
    iterations: int = 0
    trace: list = field(default_factory=list)

    def voltage(self, node):
        idx = self.node_index[node]
        return 0.0 if idx == 0 else self.x[idx - 1]

    def branch_current(self, name):
        return self.x[len(self.node_index) - 1 + self.branch_index[name]]

    @property
    def node_voltages(self):
        return {n: self.voltage(n) for n in self.node_index}


def _newton(circuit: Circuit, config: NewtonConfig, x0, ctx,
            gmin=0.0, source_scale=1.0, polish=True) -> Solution:
    nv = circuit.n_nodes - 1
    x = np.zeros(circuit.dim) if x0 is None else np.array(x0, dtype=float, copy=True)
    if x.shape != (circuit.dim,):
        raise ValueError(f"initial guess has shape {x.shape}, expected ({circuit.dim},)")
    if circuit.dim == 0:
        return Solution(x, circuit.node_index, circuit.branch_index)
    trace = []
    for it in range(1, config.max_iter + 1):
        system = circuit.assemble(x, ctx, gmin, source_scale)
        x_new = _dense_solve(system.matrix, system.rhs)
        dx = x_new - x
        if circuit.has_devices and nv:
            max_dv = float(np.abs(dx[:nv]).max())
            if max_dv > config.damping_v:
                dx *= config.damping_v / max_dv
        x = x + dx
        residual = circuit.kcl_residual(x, ctx, gmin, source_scale)
        tol = np.empty(circuit.dim)
        tol[:nv] = config.abstol_v
        tol[nv:] = config.abstol_i
        tol += config.reltol * np.abs(x)
        dx_ok = bool(np.all(np.abs(dx) < tol))
        trace.append((it, float(np.abs(dx).max()) if dx.size else 0.0, residual))
        if residual < config.abstol_i and (dx_ok or not circuit.has_devices):
            if polish and circuit.has_devices:
                system = circuit.assemble(x, ctx, gmin, source_scale)
                x = _dense_solve(system.matrix, system.rhs)
            return Solution(x, circuit.node_index, circuit.branch_index, it, trace)
    raise NoConvergenceError(
        f"Newton did not converge in {config.max_iter} iterations", trace)


def newton_solve(net_or_circuit, config: Optional[NewtonConfig] = None,
                 x0=None, source_dc=None) -> Solution:
    """DC solve: plain Newton, then gmin stepping, then source stepping.

    Raises NoConvergenceError (with the final iteration trace) only after
    every homotopy has failed.
    """
    circuit = (net_or_circuit if isinstance(net_or_circuit, Circuit)
               else Circuit(net_or_circuit))
    config = config or NewtonConfig()
    ctx = DcContext(source_dc=source_dc)
    try:
        return _newton(circuit, config, x0, ctx)
    except (NoConvergenceError, SingularMatrixError):
        pass

    try:
        x = x0
        for k in range(config.gmin_steps):
            gmin = config.gmin_start * 10.0 ** (-k)
            x = _newton(circuit, config, x, ctx, gmin=gmin, polish=False).x
        return _newton(circuit, config, x, ctx)
    except (NoConvergenceError, SingularMatrixError):
        pass

    x = None
    for k in range(1, config.source_steps + 1):
        alpha = k / config.source_steps
        x = _newton(circuit, config, x, ctx, source_scale=alpha, polish=False).x
    return _newton(circuit, config, x, ctx)
