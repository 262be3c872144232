"""Numerical nonlinear Fourier transform for the focusing Zakharov-Shabat problem."""

from .darboux import (TailWarning, add_eigenvalue_spectral_update, darboux_step, default_grid, exact_a,
                      fit_window, initial_state, norming_factor, norming_factors, synthesize)
from .eigensolver import (RoundTrip, SearchRegion, count_zeros, discrete_spectrum, find_eigenvalues,
                          round_trip)
from .exceptions import (DarbouxSingularityError, DegenerateEigenvalueError, DuplicateEigenvalueError,
                         NFTError, ScatteringOverflowError, SingularSplitError, SpectrumFormatError)
from .forward_backward import (SplitPolicy, fb_continuous_spectrum, fb_scatter, fb_scatter_many,
                               split_index, split_scatter)
from .io import read_pulse_csv, read_spectrum_json, write_pulse_csv, write_spectrum_json
from .kernels import (FactorChain, KernelKind, forward_scatter, forward_scatter_many, scalar_trapezoid_demo,
                      step_matrix, step_matrix_dlambda)
from .spectra import (ContinuousSpectrum, DiscreteSpectrum, NonlinearSpectrum, SampledPulse, ScatteringData,
                      SpectralPoint, TransferMatrix, evolution_factor, evolve_spectrum, shift_spectrum,
                      time_shift_correction)

__all__ = [
    "add_eigenvalue_spectral_update", "ContinuousSpectrum", "count_zeros", "darboux_step",
    "DarbouxSingularityError", "default_grid", "DegenerateEigenvalueError", "discrete_spectrum",
    "DiscreteSpectrum", "DuplicateEigenvalueError", "evolution_factor", "evolve_spectrum", "exact_a",
    "FactorChain", "fb_continuous_spectrum", "fb_scatter", "fb_scatter_many", "find_eigenvalues",
    "fit_window", "forward_scatter", "forward_scatter_many", "initial_state", "KernelKind", "NFTError",
    "NonlinearSpectrum", "norming_factor", "norming_factors", "read_pulse_csv", "read_spectrum_json",
    "round_trip", "RoundTrip", "SampledPulse", "scalar_trapezoid_demo", "ScatteringData",
    "ScatteringOverflowError", "SearchRegion", "shift_spectrum", "SingularSplitError", "SpectralPoint",
    "SpectrumFormatError", "split_index", "split_scatter", "SplitPolicy", "step_matrix",
    "step_matrix_dlambda", "synthesize", "TailWarning", "time_shift_correction", "TransferMatrix",
    "write_pulse_csv", "write_spectrum_json",
]

__version__ = "0.1.0"
