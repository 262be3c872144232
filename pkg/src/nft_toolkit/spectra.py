"""Domain types and elementary spectral arithmetic.

Conventions
-----------
A pulse lives on the symmetric grid ``t_n = -T0 + n*h``, ``n = 0..N`` with
``h = 2*T0/N`` (``N + 1`` samples including both endpoints).  Scattering
coefficients follow the focusing Zakharov-Shabat system

    dv/dt = [[-j*lam, q], [-conj(q), j*lam]] v

with ``a(lam)`` and ``b(lam)`` read off the canonical solution that starts
as ``(1, 0) * exp(-j*lam*t)`` at ``t -> -inf``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

import numpy as np

from .exceptions import DuplicateEigenvalueError

EPS = np.finfo(float).eps


def _frozen_array(x, dtype) -> np.ndarray:
    arr = np.array(x, dtype=dtype, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SampledPulse:
    """Uniformly sampled complex envelope ``q(t_n)`` on ``[-T0, T0]``."""

    t0_half_width: float
    samples: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.t0_half_width) or self.t0_half_width <= 0:
            raise ValueError("t0_half_width must be a positive finite number")
        samples = _frozen_array(self.samples, complex)
        if samples.size < 2:
            raise ValueError("a pulse needs at least two samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("pulse samples must be finite")
        object.__setattr__(self, "t0_half_width", float(self.t0_half_width))
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_function(cls, func, t0_half_width: float, n_intervals: int) -> "SampledPulse":
        """Sample ``func`` on ``n_intervals + 1`` uniform points of ``[-T0, T0]``."""
        t = np.linspace(-t0_half_width, t0_half_width, n_intervals + 1)
        return cls(t0_half_width, np.asarray(func(t), dtype=complex) * np.ones_like(t))

    @classmethod
    def zeros(cls, t0_half_width: float, n_intervals: int) -> "SampledPulse":
        return cls(t0_half_width, np.zeros(n_intervals + 1, dtype=complex))

    @property
    def n_samples(self) -> int:
        return self.samples.size

    @property
    def n_intervals(self) -> int:
        """``N``, the number of steps between the first and last sample."""
        return self.samples.size - 1

    @property
    def step(self) -> float:
        return 2.0 * self.t0_half_width / (self.samples.size - 1)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(-self.t0_half_width, self.t0_half_width, self.samples.size)

    def energy(self) -> float:
        """Rectangle-rule energy ``h * sum |q_n|^2``."""
        return float(self.step * np.sum(np.abs(self.samples) ** 2))


@dataclass(frozen=True)
class SpectralPoint:
    lam: complex

    @property
    def eta(self) -> float:
        return float(np.imag(self.lam))

    @property
    def is_discrete(self) -> bool:
        return self.eta > 0


@dataclass(frozen=True)
class ScatteringData:
    """Scattering coefficients at a single spectral parameter."""

    a: complex
    b: complex
    a_prime: complex
    b_prime: Optional[complex] = None

    @property
    def qc(self) -> complex:
        return self.b / self.a

    @property
    def qd(self) -> complex:
        return self.b / self.a_prime


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Eigenvalues in the upper half-plane with their spectral amplitudes.

    ``b`` is optional; when present it holds ``b(lam_i)`` so that
    ``qd == b / a'(lam_i)``.
    """

    eigenvalues: np.ndarray
    qd: np.ndarray
    b: Optional[np.ndarray] = None
    min_separation: float = field(default=1e-6, compare=False)

    def __post_init__(self):
        lam = _frozen_array(self.eigenvalues, complex)
        qd = _frozen_array(self.qd, complex)
        if lam.shape != qd.shape:
            raise ValueError("eigenvalues and qd must have the same length")
        if np.any(lam.imag <= 0):
            raise ValueError("discrete eigenvalues must satisfy Im(lambda) > 0")
        if lam.size > 1:
            gaps = np.abs(lam[:, None] - lam[None, :]) + np.diag(np.full(lam.size, np.inf))
            if np.min(gaps) < self.min_separation:
                raise DuplicateEigenvalueError(
                    f"eigenvalues closer than {self.min_separation:g}: min gap {np.min(gaps):.3g}"
                )
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "qd", qd)
        if self.b is not None:
            b = _frozen_array(self.b, complex)
            if b.shape != lam.shape:
                raise ValueError("b must have the same length as eigenvalues")
            object.__setattr__(self, "b", b)

    @classmethod
    def empty(cls) -> "DiscreteSpectrum":
        return cls(np.zeros(0, complex), np.zeros(0, complex))

    def __len__(self) -> int:
        return self.eigenvalues.size

    def __iter__(self) -> Iterator[tuple]:
        bs = self.b if self.b is not None else [None] * len(self)
        return iter(zip(self.eigenvalues, self.qd, bs))

    def reordered(self, order) -> "DiscreteSpectrum":
        order = np.asarray(order, dtype=int)
        b = None if self.b is None else self.b[order]
        return DiscreteSpectrum(self.eigenvalues[order], self.qd[order], b, self.min_separation)

    def sorted_by_imag(self) -> "DiscreteSpectrum":
        return self.reordered(np.lexsort((self.eigenvalues.real, self.eigenvalues.imag)))


@dataclass(frozen=True)
class ContinuousSpectrum:
    """``Q_c = b / a`` sampled on a strictly increasing real grid."""

    lambda_grid: np.ndarray
    qc: np.ndarray

    def __post_init__(self):
        grid = _frozen_array(self.lambda_grid, float)
        qc = _frozen_array(self.qc, complex)
        if grid.shape != qc.shape:
            raise ValueError("lambda_grid and qc must have the same length")
        if grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise ValueError("lambda_grid must be strictly increasing")
        object.__setattr__(self, "lambda_grid", grid)
        object.__setattr__(self, "qc", qc)


@dataclass(frozen=True)
class NonlinearSpectrum:
    """Discrete part plus optional continuous part, as stored in spectrum files."""

    discrete: DiscreteSpectrum
    continuous: Optional[ContinuousSpectrum] = None


@dataclass(frozen=True)
class TransferMatrix:
    m11: complex
    m12: complex
    m21: complex
    m22: complex

    @classmethod
    def identity(cls) -> "TransferMatrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, arr) -> "TransferMatrix":
        arr = np.asarray(arr, dtype=complex)
        return cls(arr[0, 0], arr[0, 1], arr[1, 0], arr[1, 1])

    @property
    def det(self) -> complex:
        return self.m11 * self.m22 - self.m12 * self.m21

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=complex)

    def __matmul__(self, other):
        if isinstance(other, TransferMatrix):
            return TransferMatrix.from_array(self.as_array() @ other.as_array())
        return self.as_array() @ np.asarray(other, dtype=complex)


Spectrum = Union[DiscreteSpectrum, ContinuousSpectrum, NonlinearSpectrum]


def evolution_factor(lam, z: float):
    """Multiplier ``exp(-4j*lam**2*z)`` picked up by ``b`` after distance ``z``."""
    lam = np.asarray(lam, dtype=complex)
    return np.exp(-4j * lam**2 * z)


def evolve_spectrum(spec: Spectrum, z: float) -> Spectrum:
    """Propagate a nonlinear spectrum over fiber distance ``z``.

    ``a`` is invariant, so ``b``, ``Q_c`` and ``Q_d`` all pick up the same
    factor ``exp(-4j*lam**2*z)``.  Negative ``z`` propagates backwards.
    """
    if not np.isfinite(z):
        raise ValueError("z must be finite")
    if isinstance(spec, NonlinearSpectrum):
        cont = None if spec.continuous is None else evolve_spectrum(spec.continuous, z)
        return NonlinearSpectrum(evolve_spectrum(spec.discrete, z), cont)
    if isinstance(spec, DiscreteSpectrum):
        f = evolution_factor(spec.eigenvalues, z)
        b = None if spec.b is None else spec.b * f
        return DiscreteSpectrum(spec.eigenvalues, spec.qd * f, b, spec.min_separation)
    if isinstance(spec, ContinuousSpectrum):
        return ContinuousSpectrum(spec.lambda_grid, spec.qc * evolution_factor(spec.lambda_grid, z))
    raise TypeError(f"cannot evolve {type(spec).__name__}")


def time_shift_correction(data: ScatteringData, lam: complex, t_shift: float) -> ScatteringData:
    """Map scattering data of a window centred at ``t_shift`` back to absolute time.

    If the pulse ``p(t)`` was scattered as ``r(tau) = p(tau + t_shift)``, then
    ``a_p = a_r`` and ``b_p = b_r * exp(-2j*lam*t_shift)``.
    """
    factor = np.exp(-2j * lam * t_shift)
    b_prime = None
    if data.b_prime is not None:
        b_prime = (data.b_prime - 2j * t_shift * data.b) * factor
    return ScatteringData(data.a, data.b * factor, data.a_prime, b_prime)


def shift_spectrum(spec: DiscreteSpectrum, t_shift: float) -> DiscreteSpectrum:
    """Discrete spectrum of the pulse delayed by ``t_shift``, ``q(t - t_shift)``."""
    f = np.exp(-2j * spec.eigenvalues * t_shift)
    b = None if spec.b is None else spec.b * f
    return DiscreteSpectrum(spec.eigenvalues, spec.qd * f, b, spec.min_separation)
