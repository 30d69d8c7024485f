import numpy as np
import pytest

from broadband_fit.config import (
    ExperimentSettings,
    SignalKind,
    SignalSpec,
    TrainingSettings,
)
from broadband_fit.signals import sample_signal


@pytest.fixture
def tiny_training() -> TrainingSettings:
    """A few updates on a small network, fast enough for unit tests."""
    return TrainingSettings(
        net_shape=[1, 6, 6, 1],
        learning_rate=0.001,
        batch_size=16,
        updates=20,
        eval_every=10,
        seed=0,
    )


@pytest.fixture
def spec_factory():
    """A factory for SignalSpec objects with a small odd sample count."""

    def _factory(kind=SignalKind.F1, n=101, **kwargs):
        return SignalSpec(kind=kind, n=n, **kwargs)

    return _factory


@pytest.fixture
def small_settings(tmp_path, tiny_training) -> ExperimentSettings:
    """Experiment settings for f1 on 101 points writing into a temp directory."""
    return ExperimentSettings(
        signal=SignalSpec(kind=SignalKind.F1, n=101),
        methods=["pffdnn"],
        delta_omega=[11],
        training=tiny_training,
        output_dir=str(tmp_path / "runs"),
    )


@pytest.fixture(scope="session")
def oracle_samples():
    """Samples of every signal kind on 1001 points (Mackey-Glass on [100, 300))."""
    samples = {}
    for kind in SignalKind:
        if kind == SignalKind.MACKEY_GLASS:
            spec = SignalSpec(kind=kind, n=1001, domain=(100.0, 300.0))
        else:
            spec = SignalSpec(kind=kind, n=1001)
        samples[kind] = (spec, sample_signal(spec))
    return samples


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
