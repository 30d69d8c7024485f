"""
Collections of scalar regressors behind one fitting method.

A fit is decomposed into FitTasks, one per (segment or band, real or
imaginary part). A bank owns one model per task: trained networks in
NetworkBank, or exact tables of the targets in LookupBank.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .config import TrainingSettings
from .network import AdamState, Trainer, TrainingSet, forward, init_networks

logger = logging.getLogger(__name__)

PREDICTION_CHUNK = 32


@dataclass(frozen=True)
class FitTask:
    """
    One scalar regression problem: normalized inputs to raw targets.

    Targets are scaled by their max-abs value for training. A zero scale marks
    a degenerate all-zero part that gets no network and predicts exact zeros.
    """

    index: int
    part: str
    inputs: np.ndarray
    targets: np.ndarray
    seed: int
    scale: float = field(init=False)

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        targets = np.asarray(self.targets, dtype=np.float64)
        if inputs.shape != targets.shape or inputs.ndim != 1 or inputs.size == 0:
            raise ValueError(
                f"Task {self.index}/{self.part}: inputs {inputs.shape} and "
                f"targets {targets.shape} must be equal non-empty vectors"
            )
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "scale", float(np.max(np.abs(targets))))

    @property
    def is_degenerate(self) -> bool:
        return self.scale == 0.0

    @property
    def normalized_targets(self) -> np.ndarray:
        return self.targets / self.scale


class ModelBank(ABC):
    def __init__(self, tasks: Sequence[FitTask]):
        self.tasks: List[FitTask] = list(tasks)
        self.updates_done = 0

    @property
    def network_count(self) -> int:
        return sum(1 for task in self.tasks if not task.is_degenerate)

    @abstractmethod
    def advance(self, updates: int) -> None:
        """Performs `updates` further updates on every model."""
        pass

    @abstractmethod
    def predict(
        self, inputs: Optional[Sequence[np.ndarray]] = None
    ) -> List[np.ndarray]:
        """
        Denormalized predictions, in task order, at each task's own inputs or
        at `inputs` (one normalized input vector per task).
        """
        pass

    def train_mse(self) -> Optional[float]:
        return None


class LookupBank(ModelBank):
    """Exact-lookup oracle: every model returns its training targets."""

    def advance(self, updates: int) -> None:
        if updates < 0:
            raise ValueError(f"updates must be non-negative, got {updates}")
        self.updates_done += updates

    def predict(
        self, inputs: Optional[Sequence[np.ndarray]] = None
    ) -> List[np.ndarray]:
        if inputs is not None:
            raise ValueError("An exact-lookup model only knows its own inputs")
        return [task.targets.copy() for task in self.tasks]


@dataclass
class _Stack:
    positions: List[int]
    trainer: Trainer


class NetworkBank(ModelBank):
    """
    One dense network per non-degenerate task.

    Networks whose tasks have the same number of points are trained together
    as one stack; each keeps its own seed, parameters and optimizer state, so
    results do not depend on how the stacks are formed.
    """

    def __init__(self, tasks: Sequence[FitTask], training: TrainingSettings):
        super().__init__(tasks)
        self.training = training
        groups: Dict[int, List[int]] = {}
        for position, task in enumerate(self.tasks):
            if not task.is_degenerate:
                groups.setdefault(task.inputs.size, []).append(position)

        self._stacks: List[_Stack] = []
        for size, positions in sorted(groups.items()):
            members = [self.tasks[p] for p in positions]
            seeds = [task.seed for task in members]
            net = init_networks(training.net_shape, seeds, training.elu_alpha)
            state = AdamState.for_network(
                net,
                learning_rate=training.learning_rate,
                beta1=training.beta1,
                beta2=training.beta2,
                epsilon=training.epsilon,
            )
            data = TrainingSet(
                np.stack([task.inputs for task in members]),
                np.stack([task.normalized_targets for task in members]),
            )
            trainer = Trainer(
                net, state, data, batch_size=training.batch_size, seeds=seeds
            )
            self._stacks.append(_Stack(positions, trainer))
            logger.debug(
                f"Stack of {len(positions)} networks over {size} points "
                f"({'full' if trainer.is_full_batch else training.batch_size}"
                f"-point batches)"
            )

    def advance(self, updates: int) -> None:
        for stack in self._stacks:
            stack.trainer.run(updates)
        self.updates_done += updates

    def predict(
        self, inputs: Optional[Sequence[np.ndarray]] = None
    ) -> List[np.ndarray]:
        if inputs is None:
            queries = [task.inputs for task in self.tasks]
        elif len(inputs) != len(self.tasks):
            raise ValueError(
                f"Expected {len(self.tasks)} input vectors, got {len(inputs)}"
            )
        else:
            queries = [np.asarray(x, dtype=np.float64) for x in inputs]

        predictions = [np.zeros_like(x) for x in queries]
        for stack in self._stacks:
            net = stack.trainer.net
            stacked = np.stack([queries[p] for p in stack.positions])
            for start in range(0, net.count, PREDICTION_CHUNK):
                rows = np.arange(start, min(start + PREDICTION_CHUNK, net.count))
                outputs = forward(net.select(rows), stacked[rows])
                for row, output in zip(rows, outputs):
                    task = self.tasks[stack.positions[row]]
                    predictions[stack.positions[row]] = output * task.scale
        return predictions

    def train_mse(self) -> Optional[float]:
        """Mean last-update training MSE over all networks, in normalized units."""
        losses = [
            stack.trainer.last_loss
            for stack in self._stacks
            if stack.trainer.last_loss is not None
        ]
        if not losses:
            return None
        return float(np.mean(np.concatenate(losses)))
