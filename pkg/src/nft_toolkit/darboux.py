"""Multi-soliton synthesis by the Darboux transform.

Starting from ``q = 0`` each stage adds one eigenvalue ``lam_i``:

    q <- q + 2j (lam_i - conj(lam_i)) conj(rho) / (1 + |rho|^2)

where ``rho`` is the ratio ``-v2/v1`` of the seed eigenvector at ``lam_i``
after all previous stages.  Seeds are initialised with norming factors
``A_i = 1`` and ``B_i`` chosen so that the final pulse carries exactly the
requested ``Q_d(lam_i)``.

Ratios are held as complex logarithms (``rho = exp(log_rho)``) so that the
initial ``exp(2j*lam*t)`` can span ``exp(+-700)`` without overflowing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DarbouxSingularityError, DuplicateEigenvalueError
from .spectra import ContinuousSpectrum, DiscreteSpectrum, NonlinearSpectrum, SampledPulse

DEFAULT_N_INTERVALS = 2048
TAIL_TOLERANCE = 1e-6


class TailWarning(UserWarning):
    """Synthesized pulse has not decayed at the window edges."""


def _check_distinct(lam: np.ndarray) -> None:
    if lam.size > 1:
        gaps = np.abs(lam[:, None] - lam[None, :]) + np.diag(np.full(lam.size, np.inf))
        if np.min(gaps) == 0:
            raise DuplicateEigenvalueError("duplicate eigenvalues make the norming product singular")


def norming_factor(i: int, spectrum: DiscreteSpectrum) -> complex:
    """``B_i`` (with ``A_i = 1``) that makes the synthesized ``Q_d(lam_i)`` exact."""
    lam = spectrum.eigenvalues
    _check_distinct(lam)
    if spectrum.qd[i] == 0:
        raise ValueError(f"Q_d(lambda_{i}) = 0: the soliton would be absent")
    li = lam[i]
    others = np.delete(lam, i)
    prod = np.prod((li - others) / (li - np.conj(others)))
    return complex(-spectrum.qd[i] / (li - np.conj(li)) * prod)


def norming_factors(spectrum: DiscreteSpectrum) -> np.ndarray:
    return np.array([norming_factor(i, spectrum) for i in range(len(spectrum))], dtype=complex)


def default_grid(spectrum: DiscreteSpectrum) -> tuple[float, int]:
    """``(T0, N)`` with ``T0 = max(5, 10 / min(2 Im lam))`` and ``N = 2048``."""
    if len(spectrum) == 0:
        return 5.0, DEFAULT_N_INTERVALS
    return max(5.0, 10.0 / (2.0 * float(np.min(spectrum.eigenvalues.imag)))), DEFAULT_N_INTERVALS


@dataclass(frozen=True)
class DarbouxState:
    """Pulse after ``stage`` eigenvalues plus log-ratios of the seeds still to be absorbed.

    ``eigenvalues`` lists all eigenvalues in processing order;
    ``log_ratios[j]`` belongs to ``eigenvalues[stage + j]``.
    """

    stage: int
    pulse: SampledPulse
    eigenvalues: np.ndarray
    log_ratios: tuple

    @property
    def ratios(self) -> list:
        return [np.exp(lr) for lr in self.log_ratios]

    @property
    def done(self) -> bool:
        return self.stage == self.eigenvalues.size


def initial_state(spectrum: DiscreteSpectrum, t0_half_width: float, n_intervals: int,
                  b_factors: Optional[np.ndarray] = None) -> DarbouxState:
    """Stage-0 state: zero pulse and ``rho_i = -B_i exp(2j lam_i t)``.

    ``b_factors`` overrides the norming factors (``A_i = 1`` throughout).
    """
    lam = spectrum.eigenvalues
    _check_distinct(lam)
    B = norming_factors(spectrum) if b_factors is None else np.asarray(b_factors, dtype=complex)
    if B.shape != lam.shape:
        raise ValueError("one norming factor per eigenvalue required")
    pulse = SampledPulse.zeros(t0_half_width, n_intervals)
    t = pulse.t
    logs = tuple(np.log(-Bi) + 2j * li * t for li, Bi in zip(lam, B))
    return DarbouxState(0, pulse, lam.copy(), logs)


def _signal_term(log_rho: np.ndarray) -> np.ndarray:
    """``conj(rho) / (1 + |rho|^2)`` evaluated from ``log(rho)`` without overflow."""
    x = log_rho.real
    return np.exp(-1j * log_rho.imag) / (2.0 * np.cosh(x))


def darboux_step(state: DarbouxState) -> DarbouxState:
    """Absorb the next eigenvalue (one pass of the outer loop)."""
    if state.done:
        raise ValueError("all eigenvalues already absorbed")
    i = state.stage
    li = state.eigenvalues[i]
    d = li - np.conj(li)
    L = state.log_ratios[0]
    x = L.real

    q_new = state.pulse.samples + 2j * d * _signal_term(L)

    # p = 1/(1+|rho|^2), prho = rho/(1+|rho|^2); both bounded by 1
    p = np.exp(-np.logaddexp(0.0, 2.0 * x))
    prho = np.exp(1j * L.imag) / (2.0 * np.cosh(x))
    new_logs = []
    for j, Lk in enumerate(state.log_ratios[1:], start=i + 1):
        lk = state.eigenvalues[j]
        A = lk - li + d * p
        B = d * prho
        C = lk - np.conj(li) - d * p
        Dc = d * np.conj(prho)
        # rho_k' = (A rho_k - B) / (C - Dc rho_k); factor out rho_k when it is large
        big = Lk.real > 0
        r = np.exp(np.where(big, -Lk, Lk))
        num = np.where(big, A - B * r, A * r - B)
        den = np.where(big, C * r - Dc, C - Dc * r)
        scale = np.where(big, np.abs(C * r) + np.abs(Dc), np.abs(C) + np.abs(Dc * r))
        bad = np.abs(den) <= 16 * np.finfo(float).eps * scale
        if np.any(bad):
            n = int(np.flatnonzero(bad)[0])
            raise DarbouxSingularityError(
                f"ratio update denominator vanishes at t index {n} (stage {i + 1}, eigenvalue {lk})", index=n
            )
        with np.errstate(divide="ignore"):
            new_logs.append(np.log(num) - np.log(den))
    pulse = SampledPulse(state.pulse.t0_half_width, q_new)
    return DarbouxState(i + 1, pulse, state.eigenvalues, tuple(new_logs))


def _synthesize_alg1(spectrum: DiscreteSpectrum, t: np.ndarray,
                     b_factors: Optional[np.ndarray] = None) -> np.ndarray:
    """Eigenvector form of the recursion (kept for cross-checking the ratio form)."""
    lam = spectrum.eigenvalues
    B = norming_factors(spectrum) if b_factors is None else np.asarray(b_factors, dtype=complex)
    v = [np.array([np.exp(-1j * li * t), Bi * np.exp(1j * li * t)]) for li, Bi in zip(lam, B)]
    q = np.zeros_like(t, dtype=complex)
    for i, li in enumerate(lam):
        psi1, psi2 = v[i]
        d = li - np.conj(li)
        nrm = np.abs(psi1) ** 2 + np.abs(psi2) ** 2
        q = q - 2j * d * np.conj(psi2) * psi1 / nrm
        for k in range(i + 1, lam.size):
            v1, v2 = v[k]
            lk = lam[k]
            n1 = (lk - np.conj(li) - d * np.abs(psi1) ** 2 / nrm) * v1 - d * np.conj(psi2) * psi1 / nrm * v2
            n2 = -d * psi2 * np.conj(psi1) / nrm * v1 + (lk - li + d * np.abs(psi1) ** 2 / nrm) * v2
            v[k] = np.array([n1, n2])
    return q


def synthesize(spectrum: DiscreteSpectrum, t0_half_width: Optional[float] = None,
               n_intervals: Optional[int] = None, *, algorithm: int = 2,
               order: str = "imag", tail_tolerance: float = TAIL_TOLERANCE,
               b_factors: Optional[np.ndarray] = None) -> SampledPulse:
    """N-soliton pulse whose discrete spectrum is ``spectrum``.

    Parameters
    ----------
    spectrum : DiscreteSpectrum
        Eigenvalues (``Im > 0``, pairwise distinct) and their ``Q_d``.
    t0_half_width, n_intervals : optional
        Synthesis grid ``[-T0, T0]`` with ``N + 1`` samples; defaults from
        :func:`default_grid`.
    algorithm : {1, 2}
        2 updates the ratios ``rho = -v2/v1`` (default); 1 updates the full
        eigenvectors.
    order : {"imag", "given"}
        Order in which eigenvalues are absorbed.  The resulting pulse is the
        same up to rounding for any order.
    b_factors : optional
        Explicit norming factors ``B_i`` in the order of ``spectrum``.

    Emits :class:`TailWarning` when ``|q(+-T0)| > tail_tolerance * max|q|``.
    """
    if t0_half_width is None or n_intervals is None:
        T0, N = default_grid(spectrum)
        t0_half_width = T0 if t0_half_width is None else t0_half_width
        n_intervals = N if n_intervals is None else n_intervals
    if len(spectrum) == 0:
        return SampledPulse.zeros(t0_half_width, n_intervals)
    if b_factors is None:
        b_factors = norming_factors(spectrum)
    b_factors = np.asarray(b_factors, dtype=complex)
    if order == "imag":
        idx = np.lexsort((spectrum.eigenvalues.real, spectrum.eigenvalues.imag))
    elif order == "given":
        idx = np.arange(len(spectrum))
    else:
        raise ValueError(f"unknown order {order!r}")
    spec = spectrum.reordered(idx)
    b_factors = b_factors[idx]

    if algorithm == 1:
        t = np.linspace(-t0_half_width, t0_half_width, n_intervals + 1)
        pulse = SampledPulse(t0_half_width, _synthesize_alg1(spec, t, b_factors))
    elif algorithm == 2:
        state = initial_state(spec, t0_half_width, n_intervals, b_factors)
        while not state.done:
            state = darboux_step(state)
        pulse = state.pulse
    else:
        raise ValueError("algorithm must be 1 or 2")

    peak = np.max(np.abs(pulse.samples))
    edge = max(abs(pulse.samples[0]), abs(pulse.samples[-1]))
    if peak > 0 and edge > tail_tolerance * peak:
        warnings.warn(
            f"pulse tail |q(+-T0)| = {edge:.2e} exceeds {tail_tolerance:g} * max|q|; widen the window",
            TailWarning, stacklevel=2,
        )
    return pulse


def fit_window(spectrum: DiscreteSpectrum, n_intervals: int = DEFAULT_N_INTERVALS,
               tail_tolerance: float = TAIL_TOLERANCE) -> tuple[float, float]:
    """Centre and half-width of the smallest window holding the pulse above ``tail_tolerance``.

    Solitons whose norming constants push them off centre need a wider or
    shifted window than :func:`default_grid` suggests.  The pulse is
    synthesized on growing probe windows until its support above
    ``tail_tolerance * max|q|`` is bracketed.  Synthesize on the returned
    window with ``shift_spectrum(spectrum, -centre)``.
    """
    T0, _ = default_grid(spectrum)
    if len(spectrum) == 0:
        return 0.0, T0
    eta_min = float(np.min(spectrum.eigenvalues.imag))
    probe = T0
    for _ in range(12):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TailWarning)
            pulse = synthesize(spectrum, probe, n_intervals, tail_tolerance=np.inf)
        mag = np.abs(pulse.samples)
        above = np.flatnonzero(mag > tail_tolerance * mag.max())
        if above[0] > 0 and above[-1] < mag.size - 1:
            t = pulse.t
            lo, hi = t[above[0] - 1], t[above[-1] + 1]
            # the probe grid may be coarse; pad by a fraction of the slowest decay length
            half = 0.5 * (hi - lo) + 0.25 / eta_min
            return 0.5 * (lo + hi), half
        probe *= 2.0
    raise ValueError("could not find a window containing the pulse support")


def exact_a(lam, eigenvalues) -> np.ndarray:
    """``a(lam) = prod (lam - lam_k) / (lam - conj(lam_k))`` of a reflectionless pulse."""
    lam = np.asarray(lam, dtype=complex)
    out = np.ones_like(lam)
    for lk in np.asarray(eigenvalues, dtype=complex):
        out = out * (lam - lk) / (lam - np.conj(lk))
    return out


def add_eigenvalue_spectral_update(spec_in: NonlinearSpectrum, lambda0: complex,
                                   qd0: complex) -> NonlinearSpectrum:
    """Spectrum after a Darboux transform that adds ``(lambda0, qd0)``.

    Existing ``Q_d(lam_i)`` and ``Q_c(lam)`` are multiplied by
    ``(lam - conj(lambda0)) / (lam - lambda0)``; ``b`` at existing eigenvalues
    is unchanged and the new point is appended.
    """
    if isinstance(spec_in, DiscreteSpectrum):
        spec_in = NonlinearSpectrum(spec_in)
    disc = spec_in.discrete
    lambda0 = complex(lambda0)
    if lambda0.imag <= 0:
        raise ValueError("lambda0 must lie in the upper half-plane")
    if np.any(np.abs(disc.eigenvalues - lambda0) < disc.min_separation):
        raise DuplicateEigenvalueError(f"{lambda0} is already an eigenvalue (a(lambda0) = 0)")

    lam = disc.eigenvalues
    factor = (lam - np.conj(lambda0)) / (lam - lambda0)
    new_lam = np.append(lam, lambda0)
    new_qd = np.append(disc.qd * factor, qd0)
    new_b = None
    if disc.b is not None or len(disc) == 0:
        # b(lambda0) = Q_d(lambda0) * a'(lambda0), with a the product over the old zeros
        a_old = exact_a(lambda0, lam)
        b0 = qd0 * a_old / (lambda0 - np.conj(lambda0))
        old_b = disc.b if disc.b is not None else np.zeros(0, complex)
        new_b = np.append(old_b, b0)
    cont = None
    if spec_in.continuous is not None:
        g = spec_in.continuous.lambda_grid
        cont = ContinuousSpectrum(g, spec_in.continuous.qc * (g - np.conj(lambda0)) / (g - lambda0))
    return NonlinearSpectrum(DiscreteSpectrum(new_lam, new_qd, new_b, disc.min_separation), cont)
