import math

import numpy as np
import pytest

from broadband_fit.config import (
    DEFAULT_DOMAINS,
    MACKEY_GLASS_SPAN,
    SignalKind,
    SignalSpec,
)
from broadband_fit.signals import (
    CLOSED_FORMS,
    eval_closed_form,
    grid,
    midpoint_grid,
    sample_signal,
)
from broadband_fit.spectral import dft_forward


@pytest.mark.parametrize(
    "kind, x, expected",
    [
        (SignalKind.SINE_ON_POLYNOMIAL, 0.0, 0.3),
        (SignalKind.ENSO, 0.0, 6.5),
        (SignalKind.CHIRP, 0.0, 1.0),
        (SignalKind.SQUARE_WAVE, math.pi / 2, 0.0),
        (SignalKind.F1, 0.0, 0.0),
    ],
)
def test_eval_closed_form_examples(kind, x, expected):
    value = eval_closed_form(SignalSpec(kind=kind), x)
    assert isinstance(value, float)
    assert value == pytest.approx(expected, abs=1e-12)


def test_every_closed_form_kind_has_a_formula():
    closed = {kind for kind in SignalKind if kind != SignalKind.MACKEY_GLASS}
    assert set(CLOSED_FORMS) == closed


def test_eval_closed_form_rejects_mackey_glass():
    with pytest.raises(ValueError, match="sample_signal"):
        eval_closed_form(SignalSpec(kind=SignalKind.MACKEY_GLASS), 150.0)


def test_square_wave_uses_signum_zero():
    spec = SignalSpec(kind=SignalKind.SQUARE_WAVE)
    assert eval_closed_form(spec, 0.0) == 0.0


def test_piecewise_branches_at_zero():
    spec = SignalSpec(kind=SignalKind.PIECEWISE)
    x = -0.3
    assert eval_closed_form(spec, x) == pytest.approx(
        10 * (math.sin(x) + math.sin(3 * x))
    )
    x = 0.3
    assert eval_closed_form(spec, x) == pytest.approx(
        10 * (math.sin(23 * x) + math.sin(137 * x) + math.sin(203 * x))
    )


def test_chirp_cubic_and_linear_variants():
    x = 0.7
    cubic = SignalSpec(kind=SignalKind.CHIRP)
    linear = SignalSpec(kind=SignalKind.CHIRP, chirp={"linear": True})
    rate = 50.0 - 0.01
    assert eval_closed_form(cubic, x) == pytest.approx(
        math.cos(math.pi * (0.01 + rate * x**3) * x**3)
    )
    assert eval_closed_form(linear, x) == pytest.approx(
        math.cos(math.pi * (0.01 + rate * x) * x)
    )


def test_grid_is_half_open_and_exact():
    spec = SignalSpec(kind=SignalKind.ENSO, n=7)
    x = grid(spec)
    assert x[0] == 0.0
    assert x[-1] < 24.0
    for j, value in enumerate(x):
        assert value == 0.0 + j * (24.0 / 7)
    np.testing.assert_allclose(midpoint_grid(spec) - x, 0.5 * spec.spacing)


@pytest.mark.parametrize("kind", list(CLOSED_FORMS))
def test_sample_signal_matches_closed_form_bitwise(kind):
    spec = SignalSpec(kind=kind, n=257)
    samples = sample_signal(spec)
    assert samples.shape == (257,)
    assert samples.tobytes() == eval_closed_form(spec, grid(spec)).tobytes()
    assert samples[0] == pytest.approx(eval_closed_form(spec, spec.x_start), rel=1e-12)


def test_piecewise_sample_at_center_uses_high_branch():
    spec = SignalSpec(kind=SignalKind.PIECEWISE, n=5001)
    x = grid(spec)
    j = int(np.searchsorted(x, 0.0))
    assert j in (2500, 2501)
    expected = 10 * (
        math.sin(23 * x[j]) + math.sin(137 * x[j]) + math.sin(203 * x[j])
    )
    assert sample_signal(spec)[j] == pytest.approx(expected)


def test_f1_spectrum_has_three_tone_peaks():
    spec = SignalSpec(kind=SignalKind.F1)
    spectrum = dft_forward(sample_signal(spec), spec.spacing)
    magnitude = np.abs(spectrum.half)
    peaks = sorted(np.argsort(magnitude)[-3:].tolist())
    assert peaks == [5, 7, 11]
    others = np.delete(magnitude, peaks)
    assert np.max(others) < 1e-6 * np.min(magnitude[peaks])


def test_default_domains_are_filled_per_kind():
    for kind, domain in DEFAULT_DOMAINS.items():
        assert SignalSpec(kind=kind).domain == domain


def test_mackey_glass_domain_follows_transient_skip():
    spec = SignalSpec(kind=SignalKind.MACKEY_GLASS, mackey_glass={"transient_skip": 50})
    assert spec.domain == (50.0, 50.0 + MACKEY_GLASS_SPAN)
    assert not spec.is_closed_form


def test_sample_signal_mackey_glass():
    spec = SignalSpec(kind=SignalKind.MACKEY_GLASS, n=201, domain=(20.0, 60.0))
    samples = sample_signal(spec)
    assert samples.shape == (201,)
    assert np.all(np.isfinite(samples))
    # Until the delay has elapsed the solution decays from its history value.
    assert np.all(np.diff(samples[:50]) < 0)
    assert 0.0 < samples.min() and samples.max() < 2.0
