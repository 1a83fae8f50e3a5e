"""
Minimal differentiable substrate for the advising policies: a ReLU multilayer
perceptron with exact reverse-mode gradients, Adam, softmax and Gumbel-Softmax.
"""
import copy
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from coteach.exceptions import ContractViolation

logger = logging.getLogger(__name__)


class Mlp:
    """
    Fully connected network: ReLU on hidden layers, linear output.
    Inputs are (batch, width) or a single (width,) vector.
    """

    def __init__(self, sizes: Sequence[int], rng: Optional[np.random.Generator] = None):
        if len(sizes) < 2:
            raise ContractViolation("an Mlp needs at least an input and an output width")
        self.sizes = tuple(int(s) for s in sizes)
        self.weights: List[np.ndarray] = []
        self.biases: List[np.ndarray] = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            if rng is None:
                w = np.zeros((fan_in, fan_out))
            else:
                limit = np.sqrt(6.0 / (fan_in + fan_out))
                w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

    @property
    def params(self) -> List[np.ndarray]:
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend([w, b])
        return params

    @property
    def n_parameters(self) -> int:
        return int(sum(p.size for p in self.params))

    def copy(self) -> "Mlp":
        return copy.deepcopy(self)

    def load_params(self, params: Sequence[np.ndarray]) -> None:
        own = self.params
        if len(params) != len(own):
            raise ContractViolation(f"expected {len(own)} parameter arrays, got {len(params)}")
        for target, source in zip(own, params):
            source = np.asarray(source, dtype=float)
            if source.shape != target.shape:
                raise ContractViolation(f"parameter shape {source.shape} does not match {target.shape}")
            target[...] = source

    def _as_batch(self, x) -> Tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        batch = x[None, :] if single else x
        if batch.ndim != 2 or batch.shape[1] != self.sizes[0]:
            raise ContractViolation(f"input width {batch.shape[-1]} does not match network input {self.sizes[0]}")
        return batch, single

    def _activations(self, batch: np.ndarray) -> List[np.ndarray]:
        activations = [batch]
        h = batch
        last = len(self.weights) - 1
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if layer == last else np.maximum(z, 0.0)
            activations.append(h)
        return activations

    def forward(self, x) -> np.ndarray:
        batch, single = self._as_batch(x)
        out = self._activations(batch)[-1]
        return out[0] if single else out

    def backward(self, x, output_gradient) -> Tuple[List[np.ndarray], np.ndarray]:
        """
        Gradients of sum(output * output_gradient) with respect to every parameter
        (ordered like `params`) and with respect to the input.
        """
        batch, single = self._as_batch(x)
        grad = np.asarray(output_gradient, dtype=float)
        if single:
            grad = grad[None, :]
        if grad.shape != (batch.shape[0], self.sizes[-1]):
            raise ContractViolation(f"output gradient shape {grad.shape} does not match {(batch.shape[0], self.sizes[-1])}")

        activations = self._activations(batch)
        grads_w: List[np.ndarray] = [None] * len(self.weights)  # type: ignore[list-item]
        grads_b: List[np.ndarray] = [None] * len(self.weights)  # type: ignore[list-item]
        for layer in reversed(range(len(self.weights))):
            h_prev = activations[layer]
            grads_w[layer] = h_prev.T @ grad
            grads_b[layer] = grad.sum(axis=0)
            grad = grad @ self.weights[layer].T
            if layer > 0:
                grad = grad * (h_prev > 0.0)

        grads = []
        for gw, gb in zip(grads_w, grads_b):
            grads.extend([gw, gb])
        return grads, (grad[0] if single else grad)


@dataclass
class AdamState:
    m: List[np.ndarray]
    v: List[np.ndarray]
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: Sequence[np.ndarray], lr: float = 1e-3) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], lr=lr)


def adam_step(params: Sequence[np.ndarray], grads: Sequence[np.ndarray], state: AdamState) -> Sequence[np.ndarray]:
    """Bias-corrected Adam update applied in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ContractViolation("params, grads and Adam moments must have the same length")
    for p, g in zip(params, grads):
        if p.shape != np.shape(g):
            raise ContractViolation(f"gradient shape {np.shape(g)} does not match parameter {p.shape}")
        if not np.all(np.isfinite(g)):
            raise ContractViolation("non-finite gradient passed to adam_step")

    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        p -= state.lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
    return params


def softmax(logits, axis: int = -1) -> np.ndarray:
    z = np.asarray(logits, dtype=float)
    z = z - np.max(z, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=axis, keepdims=True)


def softmax_backward(probs: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Vector-Jacobian product of softmax along the last axis."""
    return probs * (grad - np.sum(grad * probs, axis=-1, keepdims=True))


def one_hot(index, size: int) -> np.ndarray:
    index = np.asarray(index, dtype=np.int64)
    out = np.zeros(index.shape + (size,))
    np.put_along_axis(out, index[..., None], 1.0, axis=-1)
    return out


def gumbel_softmax(
    logits,
    temperature: float,
    rng: Optional[np.random.Generator] = None,
    noise: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Straight-through Gumbel-Softmax. Returns (hard one-hot sample, soft probabilities);
    the hard sample is argmax(logits + g) and gradients are meant to flow through the
    soft vector. Pass `noise` to freeze the Gumbel draw.
    """
    if temperature <= 0:
        raise ContractViolation(f"temperature must be > 0, got {temperature}")
    logits = np.asarray(logits, dtype=float)
    if noise is None:
        if rng is None:
            raise ContractViolation("gumbel_softmax needs an rng or explicit noise")
        noise = rng.gumbel(size=logits.shape)
    perturbed = logits + noise
    soft = softmax(perturbed / temperature)
    hard = one_hot(np.argmax(perturbed, axis=-1), logits.shape[-1])
    return hard, soft
