"""cnfetlab: compact analog circuit simulator with a simplified CNFET model.

Modified nodal analysis with damped Newton iteration (gmin and source
stepping homotopies), trapezoidal transient, complex-matrix AC and noise
analyses, coherent-DFT spectral post-processing, and a built-in
quarter-square four-quadrant multiplier benchmark.
"""

from .analyses import (AcPoint, NoisePoint, OpResult, PowerReport, Probe,
                       SweepSpec, TransientResult, Waveform, ac_sweep,
                       dc_sweep, noise_analysis, operating_point, parse_probe,
                       power_report, transient)
from .bench import (DISCLAIMER, CnfetLoad, ExperimentReport, MultiplierConfig,
                    ResistorLoad, Trace, build_multiplier, calibrate_load_bias,
                    calibrated, default_config, emit_report, exp_am,
                    exp_dc_transfer, exp_doubler_thd, exp_freq_response,
                    exp_noise, ideal_config, ideal_product, quiescent_power,
                    run_suite)
from .cnfet import (DEFAULT_KTUBE, CntParams, DevicePoint, Region,
                    calibrate_k, device_capacitances, diameter_from_chirality,
                    drain_current, small_signal_params, threshold_voltage)
from .errors import (AnalysisError, CalibrationError, CnfetLabError,
                     EmptySweepError, NetlistError, NoConvergenceError,
                     NonCoherentWindowError, SaturationViolatedError,
                     SingularMatrixError, UsageError, ZeroFundamentalError,
                     ZeroGainError)
from .mna import (Circuit, MnaSystem, NewtonConfig, Solution, lu_solve,
                  newton_solve, stamp_cnfet, stamp_linear)
from .netlist import (AcSpec, BiasResistor, Capacitor, Cnfet, Diagnostic,
                      Netlist, Resistor, SinSpec, SourceShape, Summer,
                      VSource, build_node_index, elaborate, parse_netlist,
                      parse_value, render_netlist, validate_netlist)
from .spectral import (Spectrum, analysis_window, bandwidth_3db,
                       dft_component, spectrum, thd)

__version__ = "0.1.0"
