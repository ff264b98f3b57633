"""Feedforward network with ReLU hidden layers, inverted dropout and manual backprop."""

import math
from dataclasses import dataclass, field

import numpy as np

from wavelocate.core.errors import DimensionMismatch, NonFiniteActivation, NonFiniteGradient
from wavelocate.core.models import FloatArray, NetworkSpec

INITIAL_VARIANCE = 0.05


@dataclass(eq=False)
class ForwardCache:
    """Values retained by `forward` for `backward`."""

    inputs: list[FloatArray] = field(default_factory=list)  # input to each affine layer
    pre_activations: list[FloatArray] = field(default_factory=list)  # hidden layers only
    masks: list[FloatArray | None] = field(default_factory=list)  # scaled dropout masks


def init_params(spec: NetworkSpec, rng: np.random.Generator) -> list[FloatArray]:
    """Fan-in scaled uniform weights, zero biases, variance bias at log(INITIAL_VARIANCE).

    Hidden layers use the ReLU limit sqrt(6 / fan_in); the linear output layer
    uses sqrt(3 / fan_in).
    """
    params: list[FloatArray] = []
    sizes = spec.layer_sizes
    last = len(sizes) - 2
    for layer, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:], strict=True)):
        gain = 3.0 if layer == last else 6.0
        limit = math.sqrt(gain / fan_in)
        params.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))

    k, d = spec.num_components, spec.dims
    params[-1][k * d : 2 * k * d] = math.log(INITIAL_VARIANCE)
    return params


def forward(
    x: FloatArray,
    params: list[FloatArray],
    spec: NetworkSpec,
    rng: np.random.Generator | None = None,
    dropout: float | None = None,
) -> tuple[FloatArray, ForwardCache]:
    """Raw output vectors for a batch of standardized inputs.

    Args:
        x: Inputs (B, input_dim).
        params: Parameters in declared order W1, b1, W2, b2, ...
        spec: Network architecture.
        rng: Dropout stream; None selects inference mode (no masks).
        dropout: Dropout probability overriding spec.dropout in train mode.

    Returns:
        Raw outputs (B, output_dim) and the cache for backprop.

    Raises:
        DimensionMismatch: If the input width differs from spec.input_dim.
        NonFiniteActivation: If any output is NaN or infinite.
    """
    x = np.atleast_2d(x)
    if x.shape[1] != spec.input_dim:
        raise DimensionMismatch(f"expected {spec.input_dim} input features, found {x.shape[1]}")
    rate = spec.dropout if dropout is None else dropout
    cache = ForwardCache()
    h = x
    num_layers = len(params) // 2
    for layer in range(num_layers - 1):
        cache.inputs.append(h)
        a = h @ params[2 * layer] + params[2 * layer + 1]
        cache.pre_activations.append(a)
        h = np.maximum(a, 0.0)
        mask = None
        if rng is not None and rate > 0:
            mask = (rng.random(h.shape) >= rate) / (1.0 - rate)
            h = h * mask
        cache.masks.append(mask)

    cache.inputs.append(h)
    z = h @ params[-2] + params[-1]
    if not np.all(np.isfinite(z)):
        raise NonFiniteActivation("network output contains non-finite values")
    return z, cache


def backward(
    params: list[FloatArray], cache: ForwardCache, grad_z: FloatArray
) -> list[FloatArray]:
    """Parameter gradients given dL/dz, in the same order as params.

    Raises:
        NonFiniteGradient: If any gradient entry is NaN or infinite.
    """
    num_layers = len(params) // 2
    grads: list[FloatArray] = [np.empty(0)] * len(params)
    delta = grad_z
    for layer in reversed(range(num_layers)):
        grads[2 * layer] = cache.inputs[layer].T @ delta
        grads[2 * layer + 1] = delta.sum(axis=0)
        if layer == 0:
            break
        delta = delta @ params[2 * layer].T
        mask = cache.masks[layer - 1]
        if mask is not None:
            delta = delta * mask
        delta = delta * (cache.pre_activations[layer - 1] > 0)

    if not all(np.all(np.isfinite(g)) for g in grads):
        raise NonFiniteGradient("parameter gradients contain non-finite values")
    return grads
