"""Exception types shared across the simulator."""


class CnfetLabError(Exception):
    """Base class for all simulator errors."""


class NetlistError(CnfetLabError):
    """Netlist syntax or semantic error, with source line context."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SingularMatrixError(CnfetLabError):
    """Structurally singular (or numerically unusable) MNA matrix."""


class NoConvergenceError(CnfetLabError):
    """Newton iteration failed after all homotopies.

    Carries the iteration trace of the last attempt as a list of
    (iteration, max_update, kcl_residual) tuples.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class AnalysisError(CnfetLabError):
    """Analysis precondition violated (bad sweep spec, missing AC source, ...)."""


class NonCoherentWindowError(CnfetLabError):
    """Waveform does not span an integer number of periods of the probe frequency."""


class ZeroFundamentalError(CnfetLabError):
    """THD undefined: fundamental amplitude below threshold."""


class EmptySweepError(CnfetLabError):
    """Bandwidth extraction needs at least two sweep points."""


class ZeroGainError(CnfetLabError):
    """Input-referred noise undefined at a frequency with zero forward gain."""


class SaturationViolatedError(CnfetLabError):
    """Closed-form multiplier oracle invalid: a device leaves saturation."""


class CalibrationError(CnfetLabError):
    """Scalar calibration root-find failed (target unreachable in bracket)."""


class UsageError(CnfetLabError):
    """Command-line usage error (exit code 1)."""
