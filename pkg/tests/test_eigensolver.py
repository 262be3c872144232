import warnings

import numpy as np
import pytest
from scipy.ndimage import minimum_filter

from conftest import EX2_EIGS, ex2_pulse, sech_pulse
from nft_toolkit import (DegenerateEigenvalueError, DiscreteSpectrum, SampledPulse, SearchRegion, count_zeros,
                         discrete_spectrum, fb_scatter_many, find_eigenvalues, forward_scatter_many, round_trip,
                         synthesize)
from nft_toolkit.cli import random_spectrum


class TestSearchRegion:
    def test_parse(self):
        r = SearchRegion.parse("-1:1:0.1:2")
        assert r.re_range == (-1, 1) and r.im_range == (0.1, 2)

    @pytest.mark.parametrize("text", ["1:0:0.1:1", "-1:1:0:1", "-1:1:1:0.5", "a:b", "1:2:3"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            SearchRegion.parse(text)

    def test_seeds_are_cell_centres(self):
        seeds = SearchRegion((0, 1), (1, 2), seed_grid=(2, 2)).seeds()
        np.testing.assert_allclose(np.sort_complex(seeds), [0.25 + 1.25j, 0.25 + 1.75j, 0.75 + 1.25j, 0.75 + 1.75j])


def test_zero_pulse_has_no_eigenvalues():
    pulse = SampledPulse.zeros(5.0, 128)
    assert find_eigenvalues(pulse).size == 0
    assert len(discrete_spectrum(pulse)) == 0


def test_two_soliton_eigenvalues():
    roots = find_eigenvalues(ex2_pulse(1024))
    np.testing.assert_allclose(roots, EX2_EIGS, atol=1e-3)


def test_two_soliton_amplitudes_at_exact_eigenvalues():
    spec = discrete_spectrum(ex2_pulse(1024), eigenvalues=EX2_EIGS)
    assert spec.qd[0].real == pytest.approx(3.01, abs=0.01)
    assert spec.qd[1].real == pytest.approx(-5.991, abs=0.001)
    np.testing.assert_allclose(spec.qd, spec.b / fb_scatter_many(ex2_pulse(1024), EX2_EIGS, eigen=True).a_prime)


def test_two_soliton_amplitudes_at_detected_eigenvalues():
    spec = discrete_spectrum(ex2_pulse(1024))
    np.testing.assert_allclose(spec.qd, [3, -6], rtol=0.01)


def test_coarse_grid_amplitudes_are_finite():
    spec = discrete_spectrum(ex2_pulse(32), eigenvalues=EX2_EIGS)
    assert np.all(np.isfinite(spec.qd)) and np.all(np.abs(spec.qd) < 10)


def test_grid_scan_oracle():
    # |a_N| on a dense grid; its interior local minima bracket the zeros
    pulse = sech_pulse(15.0, 2048, amp=2.2)
    re = np.linspace(-0.5, 0.5, 200)
    im = np.linspace(0.05, 2.5, 200)
    L = re[None, :] + 1j * im[:, None]
    mag = np.abs(forward_scatter_many(pulse, L.ravel())[0]).reshape(L.shape)
    is_min = (mag == minimum_filter(mag, size=5)) & (mag < 0.05)
    is_min[[0, -1], :] = is_min[:, [0, -1]] = False
    scan = np.sort_complex(L[is_min])
    roots = find_eigenvalues(pulse)
    assert roots.size == scan.size == 2
    spacing = max(re[1] - re[0], im[1] - im[0])
    np.testing.assert_allclose(roots, scan, atol=spacing)
    np.testing.assert_allclose(roots, [0.7j, 1.7j], atol=1e-3)


def test_newton_residual():
    pulse = synthesize(DiscreteSpectrum([0.3j, 0.2 + 0.9j, -0.3 + 0.6j], [1.0, -2.0, 0.5j]), 30.0, 4096)
    region = SearchRegion()
    roots = find_eigenvalues(pulse, region)
    assert roots.size == 3
    a = fb_scatter_many(pulse, roots, eigen=True).a
    assert np.all(np.abs(a) <= region.newton_tol * pulse.n_intervals)
    assert np.all(np.diff(roots.imag) > 0)


def test_argument_principle_count():
    pulse = synthesize(DiscreteSpectrum([0.3j, 0.2 + 0.9j, -0.3 + 0.6j], [1.0, -2.0, 0.5j]), 30.0, 2048)
    assert count_zeros(pulse) == 3
    assert count_zeros(pulse, SearchRegion((-1, 1), (0.5, 2))) == 2


def test_count_check_warns_on_mismatch(monkeypatch):
    import nft_toolkit.eigensolver as es

    pulse = ex2_pulse(256)
    monkeypatch.setattr(es, "count_zeros", lambda *a, **k: 3)
    with pytest.warns(RuntimeWarning, match="argument principle"):
        es.find_eigenvalues(pulse, check_count=True)


def test_dense_reseeding_finds_missed_roots():
    # a 2x2 seed grid misses basins here; the winding count triggers denser rounds
    pulse = synthesize(DiscreteSpectrum([0.3j, 0.2 + 0.9j, -0.3 + 0.6j], [1.0, -2.0, 0.5j]), 30.0, 2048)
    roots = find_eigenvalues(pulse, SearchRegion(seed_grid=(2, 2)))
    assert roots.size == 3


def test_degenerate_amplitude_reported():
    # a = 1 identically for the zero pulse, so a' = 0 at any requested point
    with pytest.raises(DegenerateEigenvalueError, match="ill-conditioned"):
        discrete_spectrum(SampledPulse.zeros(5.0, 64), eigenvalues=[0.5j])


def test_plain_forward_amplitudes():
    spec = discrete_spectrum(ex2_pulse(1024), fb=False, eigenvalues=EX2_EIGS)
    assert spec.qd[1].real == pytest.approx(-6.130, abs=0.001)


def test_round_trip_error_decreases_with_n(ex2_spectrum):
    errs = [np.max(np.abs(round_trip(ex2_spectrum, n).detected.qd / ex2_spectrum.qd - 1))
            for n in (256, 512, 1024, 2048, 4096)]
    assert all(e2 <= e1 for e1, e2 in zip(errs, errs[1:])), errs


def test_round_trip_within_one_percent():
    # amplitudes within 1% for Im(lambda) <= 1 and |Q_d| in [0.1, 10]
    spec = DiscreteSpectrum([0.25 + 0.4j, -0.3 + 1.0j, 0.1 + 0.7j], [0.1, 10.0, -2.0j]).sorted_by_imag()
    rt = round_trip(spec, 4096)
    np.testing.assert_allclose(rt.detected.eigenvalues, spec.eigenvalues, atol=1e-3)
    np.testing.assert_allclose(rt.detected.qd, spec.qd, rtol=0.01)


def test_random_three_soliton_round_trip():
    rng = np.random.default_rng(0)
    spec = random_spectrum(rng)
    while len(spec) != 3:
        spec = random_spectrum(rng)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rt = round_trip(spec, 4096)
    np.testing.assert_allclose(rt.detected.eigenvalues, spec.eigenvalues, atol=1e-4)
    np.testing.assert_allclose(rt.detected.qd, spec.qd, rtol=0.01)
