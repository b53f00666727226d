"""Floquet exponents by Hill's method, with pendulum and Winkler-beam lock-in analyses."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    FloquetError,
    NumericError,
    ParameterError,
    SearchError,
    StructureError,
)
from .floquet import (
    FloquetExponent,
    FloquetSpectrum,
    FourierMatrixSeries,
    HillOptions,
    ModeShape,
    Periodicity,
    PeriodicityClass,
    build_hill_matrix,
    classify_spectrum,
    floquet_exponents,
    monodromy_exponents,
    reconstruct_mode,
)
from .models import (
    PendulumParams,
    PhysicalPendulum,
    PhysicalWinkler,
    WinklerParams,
    nondim_pendulum,
    nondim_winkler,
    pendulum_system,
    winkler_system,
)
from .maps import TongueMap
from .pendulum import StabilityPoint, pendulum_point, stability_map_pendulum
from .winkler import CriticalLoadResult, CriticalSearchOptions, critical_load, tongue_map_winkler
from .fd_oracle import FdProblem, fd_buckling
from .spectral import SampledSignal, SpectrumPeak, dft_peak, extended_spectrum

__all__ = [
    "__version__",
    "ConfigError",
    "FloquetError",
    "NumericError",
    "ParameterError",
    "SearchError",
    "StructureError",
    "FloquetExponent",
    "FloquetSpectrum",
    "FourierMatrixSeries",
    "HillOptions",
    "ModeShape",
    "Periodicity",
    "PeriodicityClass",
    "build_hill_matrix",
    "classify_spectrum",
    "floquet_exponents",
    "monodromy_exponents",
    "reconstruct_mode",
    "PendulumParams",
    "PhysicalPendulum",
    "PhysicalWinkler",
    "WinklerParams",
    "nondim_pendulum",
    "nondim_winkler",
    "pendulum_system",
    "winkler_system",
    "TongueMap",
    "StabilityPoint",
    "pendulum_point",
    "stability_map_pendulum",
    "CriticalLoadResult",
    "CriticalSearchOptions",
    "critical_load",
    "tongue_map_winkler",
    "FdProblem",
    "fd_buckling",
    "SampledSignal",
    "SpectrumPeak",
    "dft_peak",
    "extended_spectrum",
]
