import logging
from pathlib import Path
from typing import Optional

from prometheus_client import (
    CollectorRegistry,
    Counter,
    Gauge,
    Summary,
    write_to_textfile,
)

from .config import MetricsSettings
from .events import fit_completed

logger = logging.getLogger(__name__)


class MetricsRecorder:
    """
    Records finished fits into a private Prometheus registry and writes it as
    a textfile for node-exporter style collection.
    """

    def __init__(
        self,
        settings: MetricsSettings,
        registry: Optional[CollectorRegistry] = None,
    ):
        self.settings = settings
        self.registry = registry or CollectorRegistry()
        labels = ["method", "signal", "delta_omega"]
        self._final_rmse = Gauge(
            "broadband_fit_final_rmse",
            "Time-domain RMSE at the last checkpoint of a fit",
            labels,
            registry=self.registry,
        )
        self._final_relative_rmse = Gauge(
            "broadband_fit_final_relative_rmse",
            "RMSE divided by the signal RMS at the last checkpoint of a fit",
            labels,
            registry=self.registry,
        )
        self._networks = Gauge(
            "broadband_fit_networks",
            "Number of trained networks in a fit",
            labels,
            registry=self.registry,
        )
        # Note: prometheus_client.Counter appends the "_total" suffix on exposition.
        self._network_updates = Counter(
            "broadband_fit_network_updates",
            "Adam updates summed over all networks",
            ["method", "signal"],
            registry=self.registry,
        )
        self._fit_duration = Summary(
            "broadband_fit_duration_seconds",
            "Wall-clock duration of fits",
            ["method"],
            registry=self.registry,
        )
        self._connected = False

    @property
    def is_enabled(self) -> bool:
        return self.settings.enabled

    def start(self) -> None:
        if not self.is_enabled or self._connected:
            return
        fit_completed.connect(self.handle_fit_completed)
        self._connected = True
        logger.debug("MetricsRecorder connected to signals.")

    def stop(self) -> None:
        if not self._connected:
            return
        fit_completed.disconnect(self.handle_fit_completed)
        self._connected = False
        logger.debug("MetricsRecorder disconnected from signals.")

    def __enter__(self) -> "MetricsRecorder":
        self.start()
        return self

    def __exit__(self, *exc_info) -> None:
        self.stop()

    def handle_fit_completed(self, sender, **kwargs):
        result = kwargs.get("result")
        if result is None:
            return
        method = result.method.value
        labels = {
            "method": method,
            "signal": result.signal,
            "delta_omega": str(result.delta_omega),
        }
        final = result.final
        self._final_rmse.labels(**labels).set(final.rmse)
        self._final_relative_rmse.labels(**labels).set(final.relative_rmse)
        self._networks.labels(**labels).set(result.network_count)
        self._network_updates.labels(method=method, signal=result.signal).inc(
            result.network_count * final.update_count
        )
        self._fit_duration.labels(method=method).observe(result.wall_seconds)

    def write(self, output_dir: Path) -> Optional[Path]:
        if not self.is_enabled:
            return None
        path = Path(output_dir) / self.settings.filename
        path.parent.mkdir(parents=True, exist_ok=True)
        write_to_textfile(str(path), self.registry)
        logger.info(f"Wrote metrics to {path}")
        return path
