"""Spectral post-processing: single-bin DFT, spectrum, THD, -3 dB bandwidth.

All routines insist on coherent windows (an integer number of periods of
the probed frequency); with controllable transient steps exact bins beat
leakage-corrected estimates, so a non-coherent window is an error rather
than a warning. Pure functions, thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analyses import Waveform
from .errors import (EmptySweepError, NonCoherentWindowError,
                     ZeroFundamentalError)

_MIN_SAMPLES_PER_PERIOD = 16
_COHERENCE_RTOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    """Harmonic decomposition: DC term plus (k, amplitude, phase_deg) tuples."""

    f0: float
    harmonics: tuple
    dc: float

    def amplitude(self, k: int) -> float:
        for kk, amp, _ in self.harmonics:
            if kk == k:
                return amp
        raise KeyError(k)


def _check_window(w: Waveform, f: float):
    n = w.samples.size
    cycles = f * n * w.dt
    if abs(cycles - round(cycles)) > _COHERENCE_RTOL * max(1.0, abs(cycles)) \
            or round(cycles) < 1:
        raise NonCoherentWindowError(
            f"window of {n} samples spans {cycles:.9g} periods of {f:g} Hz")
    if 1.0 / (f * w.dt) < _MIN_SAMPLES_PER_PERIOD:
        raise NonCoherentWindowError(
            f"fewer than {_MIN_SAMPLES_PER_PERIOD} samples per period of {f:g} Hz")


def dft_component(w: Waveform, f: float):
    """Amplitude (peak) and phase (degrees) of the component at ``f``.

    Single-frequency correlation over a coherent window; exact for tones
    on the analysis grid up to float roundoff.
    """
    if f <= 0:
        raise ValueError("f must be > 0")
    _check_window(w, f)
    t = w.times
    z = np.exp(-2j * math.pi * f * t)
    x = 2.0 / w.samples.size * np.dot(w.samples, z)
    return abs(x), math.degrees(math.atan2(x.imag, x.real))


def spectrum(w: Waveform, f0: float, max_harmonic: int = 10) -> Spectrum:
    """DC term plus harmonics 1..max_harmonic of ``f0``."""
    if max_harmonic < 1:
        raise ValueError("max_harmonic must be >= 1")
    harmonics = []
    for k in range(1, max_harmonic + 1):
        amp, phase = dft_component(w, k * f0)
        harmonics.append((k, amp, phase))
    return Spectrum(f0=f0, harmonics=tuple(harmonics),
                    dc=float(np.mean(w.samples)))


def thd(w: Waveform, f0: float, max_harmonic: int = 10) -> float:
    """Total harmonic distortion sqrt(sum A_k^2, k=2..N)/A_1 as a fraction."""
    a1, _ = dft_component(w, f0)
    if a1 < 1e-15:
        raise ZeroFundamentalError(f"fundamental at {f0:g} Hz below 1e-15")
    total = 0.0
    for k in range(2, max_harmonic + 1):
        ak, _ = dft_component(w, k * f0)
        total += ak * ak
    return math.sqrt(total) / a1


def analysis_window(w: Waveform, f_base: float, discard_periods: int = 2) -> Waveform:
    """Drop the first ``discard_periods`` of 1/f_base (startup settling) and
    the final duplicated endpoint so the remainder is a coherent window."""
    period = 1.0 / f_base
    k0 = discard_periods * period / w.dt
    if abs(k0 - round(k0)) > 1e-6:
        raise NonCoherentWindowError(
            f"discard of {discard_periods} periods is not an integer sample count")
    k0 = int(round(k0))
    if w.samples.size - 1 - k0 < 2:
        raise NonCoherentWindowError("window too short after discarding settling")
    return Waveform(w.t0 + k0 * w.dt, w.dt, w.samples[k0:-1], w.label)


def bandwidth_3db(points, probe: str = None) -> float:
    """Lowest frequency where the magnitude falls to 1/sqrt(2) of the
    lowest-frequency reference, log-linearly interpolated in (log f, dB).
    Returns +inf when the response never crosses in the swept range."""
    if len(points) < 2:
        raise EmptySweepError(f"need at least 2 AC points, got {len(points)}")
    if probe is None:
        labels = list(points[0].values)
        if len(labels) != 1:
            raise EmptySweepError("probe must be named when several were swept")
        probe = labels[0]
    freqs = np.array([p.freq_hz for p in points])
    mags = np.array([abs(p.values[probe]) for p in points])
    ref = mags[0]
    if ref <= 0:
        raise EmptySweepError("zero reference magnitude at the lowest frequency")
    target = ref / math.sqrt(2.0)
    for i in range(1, mags.size):
        if mags[i] <= target:
            if mags[i] == target:
                return float(freqs[i])
            db1 = 20.0 * math.log10(mags[i - 1] / ref)
            db2 = 20.0 * math.log10(mags[i] / ref) if mags[i] > 0 else -400.0
            dbt = 20.0 * math.log10(1.0 / math.sqrt(2.0))
            frac = (db1 - dbt) / (db1 - db2)
            logf = math.log10(freqs[i - 1]) + frac * (
                math.log10(freqs[i]) - math.log10(freqs[i - 1]))
            return 10.0 ** logf
    return math.inf
