"""Forward-backward scattering.

The full product of step matrices is split at grid index ``m`` into
``L`` (factors from ``-T0`` up to ``t_m``) and ``R`` (the rest).  ``L (1,0)``
is accumulated forward from ``-T0`` and ``R^{-1} (0,1) = (-R12, R11)`` backward
from ``+T0``.  Combining at the split,

    a  = L11 R11 + R12 L21
    b  = L21 / R11                       at an eigenvalue
    b  = -a conj(R12) / R11 + L21 / R11  on the real axis

which avoids the ``a * R21 / R11`` term that blows up at eigenvalues.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import SingularSplitError
from .kernels import FactorChain, KernelKind, sweep
from .spectra import ContinuousSpectrum, SampledPulse, ScatteringData

# |a| below this (relative to max |a| on the real axis, which tends to 1) selects the eigenvalue formula for b
EIGEN_A_THRESHOLD = 1e-3
# |R11| below this fraction of |(R12, R11)| is treated as a singular split
SINGULAR_R11 = 1e-13


@dataclass(frozen=True)
class SplitPolicy:
    """``fixed`` splits at ``m = round(c*N)``; ``argmin`` minimises ``|q(t)| exp(2 eta |t|)``."""

    mode: str = "fixed"
    c: float = 0.5

    def __post_init__(self):
        if self.mode not in ("fixed", "argmin"):
            raise ValueError(f"unknown split policy {self.mode!r}")
        if not 0.0 < self.c < 1.0:
            raise ValueError("split fraction c must lie in (0, 1)")

    @classmethod
    def parse(cls, value, c: float = 0.5) -> "SplitPolicy":
        if isinstance(value, cls):
            return value
        return cls(str(value), c)


@dataclass(frozen=True)
class SplitScatter:
    """Forward and backward vectors meeting at split index ``m``."""

    m: int
    w: np.ndarray
    w_prime: np.ndarray
    v: np.ndarray
    v_prime: np.ndarray
    u: np.ndarray
    det_right: float = 1.0

    @property
    def R11(self) -> complex:
        return self.v[1]

    @property
    def R12(self) -> complex:
        return -self.v[0]

    @property
    def R21(self) -> complex:
        return -self.u[1]

    @property
    def R22(self) -> complex:
        return self.u[0]


def split_index(pulse: SampledPulse, eta: float = 0.0, policy="fixed", c: float = 0.5) -> int:
    """Grid index ``m`` at which forward and backward passes meet.

    Ties of the ``argmin`` objective are broken toward the grid centre, then
    toward the lower index.
    """
    policy = SplitPolicy.parse(policy, c)
    N = pulse.n_intervals
    if N < 2:
        raise ValueError("forward-backward needs at least two intervals")
    if policy.mode == "fixed":
        return int(min(max(round(policy.c * N), 1), N - 1))
    if eta < 0:
        raise ValueError("eta must be non-negative")
    idx = np.arange(1, N)
    with np.errstate(divide="ignore"):
        objective = np.log(np.abs(pulse.samples[idx])) + 2.0 * eta * np.abs(pulse.t[idx])
    best = np.min(objective)
    if np.isfinite(best):
        ties = idx[objective <= best + 1e-12 * max(1.0, abs(best))]
    else:
        ties = idx[objective == best]
    centre = N / 2
    dist = np.abs(ties - centre)
    return int(ties[np.flatnonzero(dist == dist.min())[0]])


def _split_factors(chain: FactorChain, pulse: SampledPulse, lams, policy: SplitPolicy):
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    if policy.mode == "fixed":
        m = np.full(lams.shape, split_index(pulse, 0.0, policy), dtype=np.int64)
    else:
        m = np.array([split_index(pulse, max(lam.imag, 0.0), policy) for lam in lams], dtype=np.int64)
    ks = m + 1 if chain.kind.has_half_steps else m
    return m, ks


def split_scatter(pulse: SampledPulse, lam: complex, kind=KernelKind.TRAPEZOID,
                  split="fixed", c: float = 0.5, m: Optional[int] = None) -> SplitScatter:
    """Raw forward/backward vectors at a single ``lam``; ``m`` overrides the policy."""
    chain = FactorChain.build(pulse, kind)
    if m is None:
        m = int(_split_factors(chain, pulse, [lam], SplitPolicy.parse(split, c))[0][0])
    if not 0 < m < pulse.n_intervals:
        raise ValueError(f"split index {m} outside (0, {pulse.n_intervals})")
    res = sweep(chain, [lam], chain.split_factor(m))
    return SplitScatter(m, res.w[0], res.w_prime[0], res.v[0], res.v_prime[0], res.u[0],
                        float(np.exp(res.log_det_right[0])))


@dataclass(frozen=True)
class FBArrays:
    lam: np.ndarray
    a: np.ndarray
    a_prime: np.ndarray
    b: np.ndarray
    m: np.ndarray


def fb_scatter_many(pulse: SampledPulse, lams, kind=KernelKind.TRAPEZOID, split="fixed",
                    c: float = 0.5, eigen=None, m=None) -> FBArrays:
    """Forward-backward ``a``, ``a'`` and ``b`` for a batch of spectral parameters.

    ``eigen`` selects the eigenvalue formula for ``b`` (bool or boolean array).
    When ``None`` it is used off the real axis whenever ``|a| < 1e-3``.
    ``m`` (scalar or array) overrides the split policy.
    """
    chain = FactorChain.build(pulse, kind)
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    if m is None:
        m, ks = _split_factors(chain, pulse, lams, SplitPolicy.parse(split, c))
    else:
        m = np.broadcast_to(np.asarray(m, dtype=np.int64), lams.shape).copy()
        if np.any(m <= 0) or np.any(m >= pulse.n_intervals):
            raise ValueError("split index outside (0, N)")
        ks = m + 1 if chain.kind.has_half_steps else m
    res = sweep(chain, lams, ks)
    w1, w2 = res.w[:, 0], res.w[:, 1]
    v1, v2 = res.v[:, 0], res.v[:, 1]
    d1, d2 = res.w_prime[:, 0], res.w_prime[:, 1]
    p1, p2 = res.v_prime[:, 0], res.v_prime[:, 1]
    # adjugate recursion: v = adj(R) (0,1) = (-R12, R11), u = adj(R) (1,0) = (R22, -R21)
    det_r = np.exp(res.log_det_right)
    a = w1 * v2 - v1 * w2
    a_prime = d1 * v2 + w1 * p2 - p1 * w2 - v1 * d2
    singular = np.abs(v2) < SINGULAR_R11 * np.hypot(np.abs(v1), np.abs(v2))
    if np.any(singular):
        bad = lams[singular]
        raise SingularSplitError(
            f"split lies at scattering singularity (R11 = 0) for lambda = {bad[0]}; retry with different split"
        )
    real = lams.imag == 0
    if eigen is None:
        eig = (~real) & (np.abs(a) < EIGEN_A_THRESHOLD)
    else:
        eig = np.broadcast_to(np.asarray(eigen, dtype=bool), lams.shape)
    r21 = -res.u[:, 1]
    if chain.kind.unit_determinant:
        r21 = np.where(real, np.conj(v1), r21)
    b = np.where(eig, det_r * w2 / v2, a * r21 / v2 + det_r * w2 / v2)
    return FBArrays(lams, a, a_prime, b, m)


def fb_scatter(pulse: SampledPulse, lam: complex, kind=KernelKind.TRAPEZOID, split="fixed",
               c: float = 0.5, eigen: Optional[bool] = None, m: Optional[int] = None) -> ScatteringData:
    """Scattering data of ``pulse`` at ``lam`` by the forward-backward method.

    Set ``eigen=True`` when ``lam`` is known to be a (numerical) zero of ``a``;
    ``b`` is then ``L21 / R11``.  ``b'`` is not produced.
    """
    r = fb_scatter_many(pulse, [lam], kind, split, c, eigen, m)
    return ScatteringData(complex(r.a[0]), complex(r.b[0]), complex(r.a_prime[0]), None)


def fb_continuous_spectrum(pulse: SampledPulse, lambda_grid, kind=KernelKind.TRAPEZOID,
                           split="fixed", c: float = 0.5) -> ContinuousSpectrum:
    """``Q_c = b / a`` on a real grid.

    Grid points where ``a`` vanishes (spectral singularities) are set to NaN
    with a warning; the rest of the grid is unaffected.
    """
    grid = np.asarray(lambda_grid, dtype=float)
    r = fb_scatter_many(pulse, grid.astype(complex), kind, split, c, eigen=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        qc = r.b / r.a
    bad = np.abs(r.a) < 1e-14
    if np.any(bad):
        warnings.warn(f"a(lambda) vanishes at {int(bad.sum())} real grid point(s); Q_c set to NaN",
                      RuntimeWarning, stacklevel=2)
        qc = np.where(bad, np.nan + 0j, qc)
    return ContinuousSpectrum(grid, qc)
