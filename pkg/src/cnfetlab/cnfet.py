"""Simplified CNFET compact model.

Geometry and threshold are derived from the nanotube chirality; the
large-signal I-V is a square law with optional channel-length modulation.
Gate capacitance is a fixed per-tube constant. All functions are pure and
operate on immutable parameter sets, so they are safe to share across
concurrent analyses.

Sign conventions: ``ids`` is the current flowing into the drain terminal
and out of the source terminal. P-type devices are evaluated by sign
reflection of an N-type device, so N and P mirror each other exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import CalibrationError

# Per-tube transconductance parameter (A/V^2) that makes the default
# multiplier benchmark dissipate its 246.9 uW quiescent power target.
# calibrate_k() reproduces this number; see tests/test_acceptance.py.
DEFAULT_KTUBE = 1.2152e-4

# 32 nm technology defaults with no role in the square-law equations,
# kept as metadata for report fidelity only.
TECH_METADATA_32NM = {
    "channel_length_m": 32.0e-9,
    "doped_extension_length_m": 32.0e-9,
    "doped_region_fermi_level_ev": 0.6,
    "contact_work_function_ev": 4.6,
    "cnt_work_function_ev": 4.5,
    "mean_free_path_intrinsic_m": 200.0e-9,
    "mean_free_path_doped_m": 15.0e-9,
    "sublithographic_pitch_m": 6.4e-9,
    "gate_oxide_dielectric_constant": 16.0,
    "gate_oxide_thickness_m": 4.0e-9,
}


class Region(Enum):
    CUTOFF = "cutoff"
    TRIODE = "triode"
    SATURATION = "saturation"


@dataclass(frozen=True)
class CntParams:
    """Nanotube technology parameters for one device model.

    ``n, m``  chirality integers (n >= m >= 0, n >= 1)
    ``a``     carbon-carbon atomic distance, m
    ``v_pi``  carbon p-p bond energy, eV
    ``efo``   doped source/drain Fermi level, eV -- stored metadata only,
              it does not enter the square-law equations
    ``k_tube`` per-tube transconductance parameter, A/V^2
    ``lam``   channel-length modulation, 1/V
    ``c_eff`` total effective gate capacitance per FET per tube, F
    """

    n: int
    m: int = 0
    a: float = 2.49e-10
    v_pi: float = 3.033
    lch: float = 32e-9
    pitch: float = 20e-9
    efo: float = 0.6
    k_tube: float = DEFAULT_KTUBE
    lam: float = 0.05
    c_eff: float = 2.0e-16
    temperature_k: float = 300.0

    def __post_init__(self):
        if self.n < 1 or self.m < 0 or self.n < self.m:
            raise ValueError(f"invalid chirality ({self.n},{self.m})")
        for field in ("a", "v_pi", "lch", "pitch", "k_tube", "c_eff"):
            if getattr(self, field) <= 0:
                raise ValueError(f"{field} must be > 0")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.temperature_k <= 0:
            raise ValueError("temperature_k must be > 0")


@dataclass(frozen=True)
class DevicePoint:
    """Large-signal current and small-signal conductances at one bias."""

    ids: float
    gm: float
    gds: float
    region: Region


def diameter_from_chirality(p: CntParams) -> float:
    """Tube diameter in meters: D = a*sqrt(n^2 + n*m + m^2)/pi."""
    return p.a * math.sqrt(p.n * p.n + p.n * p.m + p.m * p.m) / math.pi


def threshold_voltage(p: CntParams) -> float:
    """Half-bandgap threshold estimate in volts: Vth = a*v_pi/(sqrt(3)*D)."""
    return p.a * p.v_pi / (math.sqrt(3.0) * diameter_from_chirality(p))


def _forward(keff: float, vth: float, lam: float, vgs: float, vds: float):
    """Square-law evaluation for vds >= 0.

    Returns (ids, d ids/d vgs, d ids/d vds, region). Continuous and, for
    lam == 0, once-differentiable across the triode/saturation boundary.
    """
    vov = vgs - vth
    if vov <= 0.0:
        return 0.0, 0.0, 0.0, Region.CUTOFF
    clm = 1.0 + lam * vds
    if vds >= vov:
        ids = keff * vov * vov * clm
        gm = 2.0 * keff * vov * clm
        gds = keff * vov * vov * lam
        return ids, gm, gds, Region.SATURATION
    quad = 2.0 * vov * vds - vds * vds
    ids = keff * quad * clm
    gm = 2.0 * keff * vds * clm
    gds = keff * (2.0 * vov - 2.0 * vds) * clm + keff * quad * lam
    return ids, gm, gds, Region.TRIODE


def channel_eval(keff: float, vth: float, lam: float, sign: float,
                 vg: float, vd: float, vs: float):
    """Three-terminal channel evaluation with polarity and reversal handling.

    ``sign`` is +1 for N, -1 for P (P is the exact mirror of N). For
    reversed bias (reflected vd < vs) the terminals act swapped, which keeps
    the current continuous at vds = 0 during Newton iterations.

    Returns (id_into_drain, d/dvg, d/dvd, region); the source partial is
    -(d/dvg + d/dvd) by translation invariance.
    """
    vg_, vd_, vs_ = sign * vg, sign * vd, sign * vs
    if vd_ >= vs_:
        ids, gm, gds, region = _forward(keff, vth, lam, vg_ - vs_, vd_ - vs_)
        di_dvg, di_dvd = gm, gds
    else:
        # swapped terminals: i = -F(vg - vd, vs - vd)
        ids_f, gm, gds, region = _forward(keff, vth, lam, vg_ - vd_, vs_ - vd_)
        ids = -ids_f
        di_dvg = -gm
        di_dvd = gm + gds
    # P mirror: i_P(v) = -i_N(-v), partials keep their sign
    return sign * ids, di_dvg, di_dvd, region


def drain_current(p: CntParams, polarity: str, tubes: int,
                  vgs: float, vds: float) -> DevicePoint:
    """Large-signal drain current with exact analytic partials.

    N-type with vgs - Vth <= 0 is cut off; triode for 0 < vds < Vov;
    saturation for vds >= Vov, each scaled by (1 + lam*vds). P-type is the
    sign reflection: drain_current(P, v) == -drain_current(N, -v). For
    vds < 0 (N-type) the drain and source act swapped, so gm can be
    negative there; the gm, gds >= 0 invariant applies to forward bias.
    """
    if tubes < 1:
        raise ValueError("tubes must be >= 1")
    if polarity not in ("N", "P"):
        raise ValueError(f"polarity must be 'N' or 'P', got {polarity!r}")
    keff = p.k_tube * tubes
    vth = threshold_voltage(p)
    sign = 1.0 if polarity == "N" else -1.0
    ids, gm, gds, region = channel_eval(keff, vth, p.lam, sign, vgs, vds, 0.0)
    return DevicePoint(ids=ids, gm=gm, gds=gds, region=region)


def small_signal_params(p: CntParams, polarity: str, tubes: int,
                        vgs: float, vds: float):
    """(gm, gds) at the given bias; analytic partials of drain_current."""
    pt = drain_current(p, polarity, tubes, vgs, vds)
    return pt.gm, pt.gds


def device_capacitances(p: CntParams, tubes: int):
    """Bias-independent (cgs, cgd); the fixed per-tube total split 50/50."""
    if tubes < 1:
        raise ValueError("tubes must be >= 1")
    half = 0.5 * p.c_eff * tubes
    return half, half


def calibrate_k(target_power: float, cfg=None, solver_config=None) -> float:
    """Find the per-tube k that gives the multiplier the target quiescent power.

    Scalar root-find (Brent) on a monotone map over k_tube in [1e-8, 1e-2];
    each candidate re-balances the load gate bias before measuring power.
    Raises CalibrationError if the target is unreachable in the bracket.
    """
    from scipy.optimize import brentq

    from . import bench  # deferred: the objective is the benchmark circuit

    if target_power <= 0:
        raise ValueError("target_power must be > 0")
    if cfg is None:
        cfg = bench.default_config()

    def power_error(k):
        trial = replace(cfg, model=replace(cfg.model, k_tube=k))
        return bench.quiescent_power(trial, solver_config) - target_power

    lo, hi = 1e-8, 1e-2
    f_lo, f_hi = power_error(lo), power_error(hi)
    if f_lo * f_hi > 0:
        raise CalibrationError(
            f"target power {target_power:.4g} W unreachable for k_tube in [{lo:g}, {hi:g}]")
    return brentq(power_error, lo, hi, rtol=1e-9)
