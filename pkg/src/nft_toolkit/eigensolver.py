"""Discrete-spectrum detection: Newton search for the zeros of a(lambda)."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DegenerateEigenvalueError
from .forward_backward import fb_scatter_many
from .kernels import FactorChain, KernelKind, sweep
from .spectra import DiscreteSpectrum, SampledPulse

logger = logging.getLogger(__name__)

DEGENERATE_A_PRIME = 1e-8


@dataclass(frozen=True)
class SearchRegion:
    """Rectangle of the upper half-plane seeded with a uniform Newton grid."""

    re_range: tuple = (-2.0, 2.0)
    im_range: tuple = (0.05, 2.5)
    seed_grid: tuple = (8, 8)
    newton_tol: float = 1e-12
    max_iter: int = 50
    dedupe_radius: float = 1e-6

    def __post_init__(self):
        re0, re1 = self.re_range
        im0, im1 = self.im_range
        if not re0 < re1:
            raise ValueError("re_range must be increasing")
        if not 0 < im0 < im1:
            raise ValueError("im_range must satisfy 0 < im_min < im_max")
        if min(self.seed_grid) < 1:
            raise ValueError("seed grid needs at least one point per axis")

    @classmethod
    def parse(cls, text: str, **kwargs) -> "SearchRegion":
        """From ``re0:re1:im0:im1``."""
        try:
            re0, re1, im0, im1 = (float(x) for x in text.split(":"))
        except ValueError:
            raise ValueError(f"region must look like re0:re1:im0:im1, got {text!r}") from None
        return cls((re0, re1), (im0, im1), **kwargs)

    def seeds(self) -> np.ndarray:
        n_re, n_im = self.seed_grid
        # cell centres keep seeds off the region boundary
        re = self.re_range[0] + (np.arange(n_re) + 0.5) * (self.re_range[1] - self.re_range[0]) / n_re
        im = self.im_range[0] + (np.arange(n_im) + 0.5) * (self.im_range[1] - self.im_range[0]) / n_im
        return (re[None, :] + 1j * im[:, None]).ravel()

    def contains(self, lam, slack: float = 0.0) -> np.ndarray:
        lam = np.asarray(lam)
        return ((lam.real >= self.re_range[0] - slack) & (lam.real <= self.re_range[1] + slack)
                & (lam.imag >= self.im_range[0] - slack) & (lam.imag <= self.im_range[1] + slack))


def _a_and_derivative(chain: FactorChain, lams):
    res = sweep(chain, lams, len(chain))
    return res.w[:, 0], res.w_prime[:, 0]


def _newton(chain: FactorChain, seeds: np.ndarray, region: SearchRegion, known=()):
    """Vectorised Newton iteration ``lam <- lam - a/a'`` from every seed.

    Zeros in ``known`` are deflated, i.e. Newton runs on
    ``a(lam) / prod(lam - r)`` so that seeds are not drawn back to them.
    Returns final iterates and a mask of seeds that converged.
    """
    known = np.asarray(known, dtype=complex)
    lam = seeds.astype(complex).copy()
    active = np.ones(lam.shape, dtype=bool)
    converged = np.zeros(lam.shape, dtype=bool)
    width = max(region.re_range[1] - region.re_range[0], region.im_range[1] - region.im_range[0])
    max_step = 0.25 * width
    for _ in range(region.max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        a, ap = _a_and_derivative(chain, lam[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            if known.size:
                step = 1.0 / (ap / a - np.sum(1.0 / (lam[idx, None] - known[None, :]), axis=1))
            else:
                step = a / ap
        bad = ~np.isfinite(step)
        big = np.abs(step) > max_step
        step = np.where(big, step / np.abs(step) * max_step, step)
        step = np.where(bad, 0, step)
        lam[idx] = lam[idx] - step
        done = np.abs(step) <= region.newton_tol * np.maximum(1.0, np.abs(lam[idx]))
        converged[idx[done & ~bad]] = True
        # seeds that leave the half-plane or wander far from the region are dropped
        lost = bad | (lam[idx].imag <= 0) | ~region.contains(lam[idx], slack=width)
        active[idx[done | lost]] = False
    return lam, converged & (lam.imag > 0)


def _dedupe(cand: np.ndarray, radius: float) -> np.ndarray:
    roots = []
    for z in cand[np.argsort(cand.imag, kind="stable")]:
        if all(abs(z - r) > radius for r in roots):
            roots.append(z)
    return np.array(roots, dtype=complex)


def _search(pulse, chain, seeds, region, known, kind, split, c) -> np.ndarray:
    """Newton from ``seeds``; keeps in-region roots that forward-backward scattering confirms."""
    lam, ok = _newton(chain, seeds, region, known)
    cand = lam[ok & region.contains(lam)]
    if cand.size == 0:
        return np.zeros(0, dtype=complex)
    residual = np.abs(fb_scatter_many(pulse, cand, kind, split, c, eigen=True).a)
    cand = cand[residual <= region.newton_tol * pulse.n_intervals]
    return _dedupe(cand, region.dedupe_radius)


def find_eigenvalues(pulse: SampledPulse, region: SearchRegion | None = None,
                     kind=KernelKind.TRAPEZOID, split="fixed", c: float = 0.5,
                     check_count: bool = False) -> np.ndarray:
    """Zeros of ``a_N(lambda)`` inside ``region``, sorted by ascending imaginary part.

    Each root is kept only if forward-backward scattering confirms
    ``|a_N| <= newton_tol * N``.  Seeds whose Newton iteration diverges are
    silently discarded.  When the winding number of ``a`` around the region
    exceeds the number of roots found, the search is repeated on denser seed
    grids with the known roots deflated.
    """
    region = region or SearchRegion()
    kind = KernelKind.parse(kind)
    if not np.any(pulse.samples):
        return np.zeros(0, dtype=complex)
    chain = FactorChain.build(pulse, kind)
    roots = _search(pulse, chain, region.seeds(), region, (), kind, split, c)
    expected = None
    n_re, n_im = region.seed_grid
    for refine in (2, 4, 8):
        # the argument principle tells whether some basins were missed
        if expected is None:
            expected = count_zeros(pulse, region, kind)
        if roots.size >= expected:
            break
        dense = replace(region, seed_grid=(refine * n_re, refine * n_im))
        extra = _search(pulse, chain, dense.seeds(), region, roots, kind, split, c)
        roots = _dedupe(np.concatenate([roots, extra]), region.dedupe_radius)
    roots = roots[np.lexsort((roots.real, roots.imag))] if roots.size else roots
    if check_count:
        expected = count_zeros(pulse, region, kind)
        if expected is None:
            expected = count_zeros(pulse, region, kind)
        if expected != roots.size:
            warnings.warn(f"argument principle counts {expected} zeros in the region, Newton found {roots.size}",
                          RuntimeWarning, stacklevel=2)
    logger.debug("found %d eigenvalues", roots.size)
    return roots


def count_zeros(pulse: SampledPulse, region: SearchRegion | None = None,
                kind=KernelKind.TRAPEZOID, n_per_side: int = 400) -> int:
    """Number of zeros of ``a_N`` in the region from the winding of ``a`` along its boundary."""
    region = region or SearchRegion()
    chain = FactorChain.build(pulse, kind)
    (re0, re1), (im0, im1) = region.re_range, region.im_range
    s = np.linspace(0.0, 1.0, n_per_side, endpoint=False)
    path = np.concatenate([
        re0 + (re1 - re0) * s + 1j * im0,
        re1 + 1j * (im0 + (im1 - im0) * s),
        re1 - (re1 - re0) * s + 1j * im1,
        re0 + 1j * (im1 - (im1 - im0) * s),
    ])
    a, _ = _a_and_derivative(chain, path)
    dphi = np.angle(np.roll(a, -1) / a)
    return int(round(np.sum(dphi) / (2 * np.pi)))


def discrete_spectrum(pulse: SampledPulse, region: SearchRegion | None = None,
                      kind=KernelKind.TRAPEZOID, split="fixed", c: float = 0.5,
                      fb: bool = True, eigenvalues=None) -> DiscreteSpectrum:
    """Eigenvalues with ``Q_d = b / a'``.

    With ``fb=True`` ``b`` comes from the forward-backward eigenvalue formula;
    with ``fb=False`` from the plain forward pass.  ``eigenvalues`` skips the
    search and evaluates the amplitudes at the given points.
    """
    region = region or SearchRegion()
    lam = find_eigenvalues(pulse, region, kind, split, c) if eigenvalues is None else \
        np.atleast_1d(np.asarray(eigenvalues, dtype=complex))
    if lam.size == 0:
        return DiscreteSpectrum.empty()
    if fb:
        r = fb_scatter_many(pulse, lam, kind, split, c, eigen=True)
        b, ap = r.b, r.a_prime
    else:
        chain = FactorChain.build(pulse, kind)
        res = sweep(chain, lam, len(chain))
        b, ap = res.w[:, 1], res.w_prime[:, 0]
    if np.any(np.abs(ap) < DEGENERATE_A_PRIME):
        z = lam[np.argmin(np.abs(ap))]
        raise DegenerateEigenvalueError(f"near-degenerate eigenvalue {z}; Q_d ill-conditioned")
    return DiscreteSpectrum(lam, b / ap, b, min_separation=min(region.dedupe_radius, 1e-6))


# exp(-10): the edge decay implied by the default synthesis grid for a centred soliton
ROUNDTRIP_TAIL = float(np.exp(-10.0))


@dataclass(frozen=True)
class RoundTrip:
    """Synthesized pulse, its window and the re-detected spectrum (in absolute time)."""

    pulse: SampledPulse
    centre: float
    detected: DiscreteSpectrum


def round_trip(spectrum: DiscreteSpectrum, n_intervals: int = 4096, region: SearchRegion | None = None,
               kind=KernelKind.TRAPEZOID, split="fixed", c: float = 0.5, fb: bool = True,
               tail_tolerance: float = ROUNDTRIP_TAIL, t0_half_width: float | None = None) -> RoundTrip:
    """Synthesize ``spectrum`` on a fitted window and detect its discrete spectrum again.

    The window is centred on the pulse support (see ``fit_window``) unless
    ``t0_half_width`` fixes a symmetric window.  Detected ``Q_d`` are
    shifted back to the original time origin.
    """
    from .darboux import fit_window, synthesize
    from .spectra import shift_spectrum

    if t0_half_width is None:
        centre, half = fit_window(spectrum, n_intervals, tail_tolerance)
    else:
        centre, half = 0.0, float(t0_half_width)
    pulse = synthesize(shift_spectrum(spectrum, -centre), half, n_intervals, tail_tolerance=tail_tolerance)
    detected = discrete_spectrum(pulse, region, kind, split, c, fb=fb)
    return RoundTrip(pulse, centre, shift_spectrum(detected, centre))
