"""
Dense-network engine: ELU hidden layers, a linear output layer, exact
reverse-mode gradients of the mean squared error and Adam updates.

Networks are held as stacks of identically shaped networks so that the many
small per-segment and per-band networks of a fit train side by side. Every
network in a stack owns its own parameters, optimizer moments and batch
generator; stacking never mixes them.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .error import NumericError

logger = logging.getLogger(__name__)

ArrayList = List[np.ndarray]
SeedLike = Union[int, Sequence[int]]


def elu(x, alpha: float = 1.0) -> np.ndarray:
    """x for x > 0, alpha * (exp(x) - 1) otherwise."""
    return _elu_inplace(np.array(x, dtype=np.float64), alpha)


def _elu_inplace(z: np.ndarray, alpha: float) -> np.ndarray:
    negative = z < 0.0
    np.expm1(z, out=z, where=negative)
    if alpha != 1.0:
        np.multiply(z, alpha, out=z, where=negative)
    return z


def elu_derivative(x, alpha: float = 1.0) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, 1.0, alpha * np.exp(np.minimum(x, 0.0)))


def _elu_derivative_from_output(h: np.ndarray, alpha: float) -> np.ndarray:
    # For z <= 0, alpha * exp(z) == elu(z) + alpha; elu(z) > 0 exactly when z > 0.
    derivative = h + alpha
    derivative[h > 0.0] = 1.0
    return derivative


def _validate_layer_sizes(layer_sizes: Sequence[int]) -> Tuple[int, ...]:
    sizes = tuple(int(size) for size in layer_sizes)
    if len(sizes) < 2:
        raise ValueError(f"layer_sizes needs at least 2 entries, got {sizes}")
    if any(size < 1 for size in sizes):
        raise ValueError(f"layer_sizes must all be positive, got {sizes}")
    return sizes


@dataclass
class DenseNetwork:
    """
    A stack of `count` fully connected networks sharing one layer layout.

    weights[l] has shape (count, layer_sizes[l + 1], layer_sizes[l]) and
    biases[l] has shape (count, layer_sizes[l + 1]).
    """

    layer_sizes: Tuple[int, ...]
    weights: ArrayList
    biases: ArrayList
    alpha: float = 1.0

    def __post_init__(self):
        self.layer_sizes = _validate_layer_sizes(self.layer_sizes)
        if len(self.weights) != self.depth or len(self.biases) != self.depth:
            raise ValueError(
                f"Expected {self.depth} weight and bias arrays, got "
                f"{len(self.weights)} and {len(self.biases)}"
            )
        count = self.weights[0].shape[0]
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            fan_in, fan_out = self.layer_sizes[layer], self.layer_sizes[layer + 1]
            if w.shape != (count, fan_out, fan_in) or b.shape != (count, fan_out):
                raise ValueError(
                    f"Layer {layer} has weight shape {w.shape} and bias shape "
                    f"{b.shape}; expected {(count, fan_out, fan_in)} and "
                    f"{(count, fan_out)}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NumericError(f"Layer {layer} holds non-finite parameters")
        if self.alpha <= 0:
            raise ValueError(f"ELU alpha must be positive, got {self.alpha}")

    @property
    def depth(self) -> int:
        return len(self.layer_sizes) - 1

    @property
    def count(self) -> int:
        return self.weights[0].shape[0]

    def parameters(self) -> ArrayList:
        """Weights and biases interleaved per layer: [W0, b0, W1, b1, ...]."""
        params: ArrayList = []
        for w, b in zip(self.weights, self.biases):
            params.extend((w, b))
        return params

    def select(self, indices) -> "DenseNetwork":
        """Copies the networks at `indices` into a new stack."""
        rows = np.atleast_1d(np.asarray(indices, dtype=np.intp))
        return DenseNetwork(
            layer_sizes=self.layer_sizes,
            weights=[w[rows].copy() for w in self.weights],
            biases=[b[rows].copy() for b in self.biases],
            alpha=self.alpha,
        )

    def copy(self) -> "DenseNetwork":
        return self.select(np.arange(self.count))


def init_networks(
    layer_sizes: Sequence[int], seeds: Sequence[int], alpha: float = 1.0
) -> DenseNetwork:
    """
    Builds one network per seed with Glorot-uniform weights and zero biases.

    Each network draws only from its own seed, so a network is bit-identical
    whether it is created alone or inside a larger stack.
    """
    sizes = _validate_layer_sizes(layer_sizes)
    if len(seeds) == 0:
        raise ValueError("At least one seed is required")

    per_layer: List[ArrayList] = [[] for _ in range(len(sizes) - 1)]
    for seed in seeds:
        rng = np.random.default_rng(int(seed))
        for layer in range(len(sizes) - 1):
            fan_in, fan_out = sizes[layer], sizes[layer + 1]
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            per_layer[layer].append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))

    weights = [np.stack(layer_weights) for layer_weights in per_layer]
    biases = [np.zeros((len(seeds), sizes[i + 1])) for i in range(len(sizes) - 1)]
    return DenseNetwork(sizes, weights, biases, alpha)


def init_network(
    layer_sizes: Sequence[int], seed: int, alpha: float = 1.0
) -> DenseNetwork:
    return init_networks(layer_sizes, [seed], alpha)


def _stack_inputs(net: DenseNetwork, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim == 1:
        x = np.broadcast_to(x, (net.count, x.shape[0]))
    if x.ndim != 2 or x.shape[0] != net.count:
        raise ValueError(
            f"Inputs of shape {x.shape} do not match a stack of {net.count} networks"
        )
    return x


def _forward_pass(
    net: DenseNetwork, inputs: np.ndarray
) -> Tuple[np.ndarray, ArrayList]:
    h = inputs[:, None, :]
    activations = [h]
    last = net.depth - 1
    for layer, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = np.matmul(w, h)
        z += b[:, :, None]
        h = z if layer == last else _elu_inplace(z, net.alpha)
        activations.append(h)
    return h[:, 0, :], activations


def forward(net: DenseNetwork, x) -> np.ndarray:
    """
    Evaluates every network of the stack.

    `x` is a scalar, a 1-D array shared by all networks, or a (count, points)
    array. Returns a (count, points) array.
    """
    output, _ = _forward_pass(net, _stack_inputs(net, x))
    if not np.all(np.isfinite(output)):
        raise NumericError("Network evaluation produced non-finite values")
    return output


@dataclass(frozen=True)
class TrainingSet:
    """Normalized (input, target) pairs, one row per network of a stack."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=np.float64))
        targets = np.atleast_2d(np.asarray(self.targets, dtype=np.float64))
        if inputs.shape != targets.shape:
            raise ValueError(
                f"inputs {inputs.shape} and targets {targets.shape} differ in shape"
            )
        if inputs.size == 0:
            raise ValueError("A training set needs at least one point")
        if not (np.all(np.isfinite(inputs)) and np.all(np.isfinite(targets))):
            raise ValueError("Training data must be finite")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def count(self) -> int:
        return self.inputs.shape[0]

    @property
    def size(self) -> int:
        return self.inputs.shape[1]


def loss_and_gradient(
    net: DenseNetwork, batch: TrainingSet
) -> Tuple[np.ndarray, ArrayList]:
    """
    Mean squared error of each network over its batch row, and the exact
    gradients of that loss laid out like `net.parameters()`.
    """
    if batch.count != net.count:
        raise ValueError(
            f"Batch has {batch.count} rows for a stack of {net.count} networks"
        )
    output, activations = _forward_pass(net, batch.inputs)
    residual = output - batch.targets
    loss = np.mean(residual * residual, axis=1)
    if not np.all(np.isfinite(loss)):
        raise NumericError("Training loss became non-finite")

    grads: List[Optional[np.ndarray]] = [None] * (2 * net.depth)
    delta = (2.0 / batch.size) * residual[:, None, :]
    for layer in reversed(range(net.depth)):
        grads[2 * layer] = np.matmul(delta, activations[layer].transpose(0, 2, 1))
        grads[2 * layer + 1] = delta.sum(axis=2)
        if layer > 0:
            back = np.matmul(net.weights[layer].transpose(0, 2, 1), delta)
            delta = back * _elu_derivative_from_output(activations[layer], net.alpha)
    return loss, [g for g in grads if g is not None]


@dataclass
class AdamState:
    first_moment: ArrayList
    second_moment: ArrayList
    step_count: int = 0
    learning_rate: float = 0.0002
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_network(
        cls,
        net: DenseNetwork,
        learning_rate: float = 0.0002,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ) -> "AdamState":
        params = net.parameters()
        return cls(
            first_moment=[np.zeros_like(p) for p in params],
            second_moment=[np.zeros_like(p) for p in params],
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
        )


def adam_step(
    net: DenseNetwork, state: AdamState, gradients: Sequence[np.ndarray]
) -> Tuple[DenseNetwork, AdamState]:
    """Applies one bias-corrected Adam update in place and returns both objects."""
    params = net.parameters()
    if len(gradients) != len(params):
        raise ValueError(
            f"Expected {len(params)} gradient arrays, got {len(gradients)}"
        )
    for p, g, m in zip(params, gradients, state.first_moment):
        if g.shape != p.shape or m.shape != p.shape:
            raise ValueError(
                f"Gradient shape {g.shape} does not match parameter shape {p.shape}"
            )

    state.step_count += 1
    correction1 = 1.0 - state.beta1**state.step_count
    correction2 = 1.0 - state.beta2**state.step_count
    step_size = state.learning_rate / correction1
    for p, g, m, v in zip(params, gradients, state.first_moment, state.second_moment):
        scratch = g * (1.0 - state.beta1)
        m *= state.beta1
        m += scratch
        np.multiply(g, g, out=scratch)
        scratch *= 1.0 - state.beta2
        v *= state.beta2
        v += scratch
        np.divide(v, correction2, out=scratch)
        np.sqrt(scratch, out=scratch)
        scratch += state.epsilon
        np.divide(m, scratch, out=scratch)
        scratch *= step_size
        p -= scratch
    return net, state


@dataclass
class Trainer:
    """
    Runs Adam updates for a network stack over a fixed training set.

    Each update uses min(batch_size, points) points per network. When the
    set is no larger than the batch every update is full-batch; otherwise each
    network draws its batch without replacement from its own generator.
    """

    net: DenseNetwork
    state: AdamState
    data: TrainingSet
    batch_size: int = 100
    seeds: Sequence[int] = ()
    updates_done: int = 0
    last_loss: Optional[np.ndarray] = None
    _generators: List[np.random.Generator] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.data.count != self.net.count:
            raise ValueError(
                f"Training set has {self.data.count} rows for "
                f"{self.net.count} networks"
            )
        if not self.is_full_batch:
            if len(self.seeds) != self.net.count:
                raise ValueError(
                    f"Need one batch seed per network ({self.net.count}), "
                    f"got {len(self.seeds)}"
                )
            # spawn_key keeps the batch stream apart from the initialization stream.
            self._generators = [
                np.random.default_rng(np.random.SeedSequence(int(s), spawn_key=(1,)))
                for s in self.seeds
            ]

    @property
    def is_full_batch(self) -> bool:
        return self.data.size <= self.batch_size

    def draw_batch(self) -> TrainingSet:
        if self.is_full_batch:
            return self.data
        rows = np.stack(
            [
                g.choice(self.data.size, size=self.batch_size, replace=False)
                for g in self._generators
            ]
        )
        owners = np.arange(self.data.count)[:, None]
        return TrainingSet(
            self.data.inputs[owners, rows], self.data.targets[owners, rows]
        )

    def run(self, updates: int) -> np.ndarray:
        """Performs `updates` steps; returns the (updates, count) loss history."""
        if updates < 0:
            raise ValueError(f"updates must be non-negative, got {updates}")
        history = np.empty((updates, self.net.count))
        for step in range(updates):
            loss, grads = loss_and_gradient(self.net, self.draw_batch())
            adam_step(self.net, self.state, grads)
            history[step] = loss
        if updates:
            self.last_loss = history[-1].copy()
        self.updates_done += updates
        return history


def train(
    net: DenseNetwork,
    state: AdamState,
    data: TrainingSet,
    updates: int,
    batch_size: int = 100,
    seed: SeedLike = 0,
) -> Tuple[DenseNetwork, np.ndarray]:
    """
    Trains `net` in place for `updates` Adam steps and returns it with the
    per-update loss history. `seed` is one integer for a single network or
    one integer per network of a stack.
    """
    seeds = [seed] if isinstance(seed, (int, np.integer)) else list(seed)
    if len(seeds) != net.count:
        raise ValueError(
            f"Need one seed per network ({net.count}), got {len(seeds)}"
        )
    trainer = Trainer(net, state, data, batch_size=batch_size, seeds=seeds)
    history = trainer.run(updates)
    logger.debug(
        f"Trained {net.count} network(s) for {updates} updates "
        f"({'full' if trainer.is_full_batch else batch_size}-point batches)"
    )
    return net, history
