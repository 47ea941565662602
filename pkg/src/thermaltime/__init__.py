"""Clock-conditioned dynamics and thermalization in a stationary finite universe."""

from thermaltime.dynamics import (
    NonlocalKernel,
    RelativeState,
    alpha,
    conditioned_state,
    nonlocal_residual,
    norm_curve,
    relative_state,
    schrodinger_fidelity,
)
from thermaltime.errors import ThermalTimeError
from thermaltime.gppt import (
    MeasurementEffect,
    born_probability,
    collapse_then_evolve,
    single_time_probability,
    two_time_probability,
)
from thermaltime.spectra import (
    ClockSpectrum,
    SystemSpectrum,
    ThermalParams,
    build_exponential_clock,
    entropy_and_beta,
    harmonic_clock,
    quantize_rational_spectrum,
)
from thermaltime.thermo import (
    CensusReport,
    DensityMatrix,
    gibbs_state,
    reduced_density_matrix,
    time_average_density_matrix,
    trace_distance,
    typicality_census,
)
from thermaltime.timegrid import TimeGrid, TimeState, identity_residual, overlap, time_state
from thermaltime.toymodel import OscillatorConfig
from thermaltime.universe import EnergyShell, UniverseState, sample_universe, sharp_universe, support_sets

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
