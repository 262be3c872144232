from functools import lru_cache

import numpy as np
import pytest

from nft_toolkit import DiscreteSpectrum, synthesize

EX2_EIGS = np.array([0.5j, 1.0j])
EX2_QD = np.array([3.0, -6.0], dtype=complex)


@lru_cache(maxsize=None)
def ex2_pulse(n_intervals: int, t0: float = 5.0):
    """Two-soliton test pulse truncated to [-t0, t0]; tails are deliberately not checked."""
    return synthesize(DiscreteSpectrum(EX2_EIGS, EX2_QD), t0, n_intervals, tail_tolerance=np.inf)


@pytest.fixture
def ex2_spectrum():
    return DiscreteSpectrum(EX2_EIGS, EX2_QD)


def sech_pulse(t0: float, n: int, amp: float = 1.0):
    from nft_toolkit import SampledPulse

    return SampledPulse.from_function(lambda t: amp / np.cosh(t) + 0j, t0, n)
