import numpy as np
import pytest

from broadband_fit.bands import band_rotation, decompose_bands, reassemble
from broadband_fit.error import UnsupportedGridError
from broadband_fit.spectral import conjugate_extend, dft_forward, plan_segments


def _tone_spectrum(n: int, bins):
    half = np.zeros(n // 2 + 1, dtype=complex)
    for k in bins:
        half[k] = n / 2
    return conjugate_extend(half, n)


def test_reassembly_identity_random_signal(rng):
    samples = rng.standard_normal(301)
    spectrum = dft_forward(samples)
    plan = plan_segments(301, 11)
    bands = decompose_bands(spectrum, plan)
    rebuilt = reassemble(bands, [band.signal for band in bands], 301)
    np.testing.assert_allclose(rebuilt, samples, atol=1e-10)


def test_tone_at_band_center_is_constant_in_baseband():
    n = 101
    spectrum = _tone_spectrum(n, [16])
    bands = decompose_bands(spectrum, plan_segments(n, 11))
    assert bands[1].center_bin == 16
    np.testing.assert_allclose(bands[1].signal, 0.5, atol=1e-12)


def test_band_without_energy_is_zero():
    spectrum = _tone_spectrum(101, [16])
    bands = decompose_bands(spectrum, plan_segments(101, 11))
    np.testing.assert_array_equal(bands[0].signal, 0.0)
    np.testing.assert_array_equal(bands[3].signal, 0.0)


def test_band_centers_increase_and_first_band_holds_dc(rng):
    n = 201
    spectrum = dft_forward(rng.standard_normal(n), spacing=0.1)
    bands = decompose_bands(spectrum, plan_segments(n, 7))
    centers = [band.center_frequency for band in bands]
    assert all(a < b for a, b in zip(centers, centers[1:]))
    assert bands[0].contains_dc
    assert not any(band.contains_dc for band in bands[1:])
    assert centers[0] == pytest.approx(spectrum.frequencies()[3])


def test_dc_is_counted_once():
    n = 51
    samples = np.full(n, 3.0)
    bands = decompose_bands(dft_forward(samples), plan_segments(n, 5))
    rebuilt = reassemble(bands, [band.signal for band in bands], n)
    np.testing.assert_allclose(rebuilt, samples, atol=1e-12)


def test_only_retained_bands_are_decomposed(rng):
    spectrum = dft_forward(rng.standard_normal(101))
    bands = decompose_bands(spectrum, plan_segments(101, 11, retained_count=2))
    assert [band.index for band in bands] == [0, 1]


def test_decompose_rejects_even_grid():
    spectrum = dft_forward(np.ones(100))
    with pytest.raises(UnsupportedGridError):
        decompose_bands(spectrum, plan_segments(100, 10))


def test_decompose_rejects_plan_for_other_length():
    spectrum = dft_forward(np.ones(101))
    with pytest.raises(ValueError):
        decompose_bands(spectrum, plan_segments(103, 11))


def test_reassemble_rejects_signal_count_mismatch(rng):
    spectrum = dft_forward(rng.standard_normal(101))
    bands = decompose_bands(spectrum, plan_segments(101, 11))
    with pytest.raises(ValueError):
        reassemble(bands, [bands[0].signal], 101)


def test_band_rotation_is_unit_modulus_and_periodic():
    rotation = band_rotation(7, 31)
    np.testing.assert_allclose(np.abs(rotation), 1.0)
    assert rotation[0] == 1.0
    np.testing.assert_allclose(
        band_rotation(7, 31, shift=0.5)[0], np.exp(1j * np.pi * 7 / 31)
    )
