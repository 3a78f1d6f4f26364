"""
Reverse-mode differentiation over recorded primitives
forward() records a Tape, backward() walks it once in reverse
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from src.autodiff.layers import Activation, MLPArch
from src.autodiff.tensor import ParamStore, Tensor, as_tensor, ensure_finite
from src.exceptions import DimensionError

logger = logging.getLogger(__name__)

InputLike = Union[np.ndarray, Sequence[np.ndarray]]


@dataclass(frozen=True)
class DropoutSpec:
    """Inverted dropout: survivors are scaled by 1/(1-rate)"""
    rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ValueError(f"dropout rate must lie in [0, 1), got {self.rate}")


@dataclass
class TapeNode:
    op: str
    layer: str
    inputs: Tuple[np.ndarray, ...]
    output: np.ndarray
    param: Optional[str] = None
    operand: Optional[np.ndarray] = None
    slope: float = 0.0


@dataclass
class Tape:
    nodes: List[TapeNode] = field(default_factory=list)
    input_shapes: Tuple[Tuple[int, ...], ...] = ()
    squeezed: bool = False
    stamp: Any = None

    @property
    def output(self) -> np.ndarray:
        out = self.nodes[-1].output
        return out[0] if self.squeezed else out

    def record(self, node: TapeNode) -> np.ndarray:
        self.nodes.append(node)
        return node.output

    def replay(self) -> bool:
        """Recompute each node from its cached inputs; True when all match bit for bit"""
        for node in self.nodes:
            again = _FORWARD[node.op](node)
            if again.shape != node.output.shape or not np.array_equal(again, node.output):
                logger.debug(f"replay mismatch at {node.layer}/{node.op}")
                return False
        return True


# -- primitive forwards (operate on a node's cached inputs) --------------------

def _fwd_matmul(n: TapeNode) -> np.ndarray:
    return n.inputs[0] @ n.operand


def _fwd_add_bias(n: TapeNode) -> np.ndarray:
    return n.inputs[0] + n.operand


def _fwd_leaky_relu(n: TapeNode) -> np.ndarray:
    x = n.inputs[0]
    return np.where(x > 0, x, n.slope * x)


def _fwd_tanh(n: TapeNode) -> np.ndarray:
    return np.tanh(n.inputs[0])


def _fwd_sigmoid(n: TapeNode) -> np.ndarray:
    return expit(n.inputs[0])


def _fwd_dropout(n: TapeNode) -> np.ndarray:
    return n.inputs[0] * n.operand


def _fwd_concat(n: TapeNode) -> np.ndarray:
    return np.concatenate(n.inputs, axis=1)


_FORWARD: Dict[str, Callable[[TapeNode], np.ndarray]] = {
    "matmul": _fwd_matmul,
    "add_bias": _fwd_add_bias,
    "leaky_relu": _fwd_leaky_relu,
    "tanh": _fwd_tanh,
    "sigmoid": _fwd_sigmoid,
    "dropout": _fwd_dropout,
    "concat": _fwd_concat,
}

_ACTIVATION_OPS = {
    Activation.TANH: "tanh",
    Activation.LEAKY_RELU: "leaky_relu",
    Activation.SIGMOID: "sigmoid",
}


def _apply(tape: Tape, op: str, layer: str, x: np.ndarray, **kw) -> np.ndarray:
    node = TapeNode(op=op, layer=layer, inputs=(x,), output=np.empty(0), **kw)
    node.output = _FORWARD[op](node)
    return tape.record(node)


def forward(params: ParamStore, arch: MLPArch, input: InputLike,
            dropout: Optional[DropoutSpec] = None) -> Tuple[Tensor, Tape]:
    """
    Evaluate an MLP and record every primitive.

    Args:
        params: weights named after the arch's layers
        arch: layer stack
        input: (m, d) or (d,) array; a sequence of arrays is concatenated along the
            feature axis first (arch.input_splits gives the expected widths)
        dropout: rate and seed for the layers flagged with dropout

    Returns:
        (output, tape); output keeps the rank of the input
    """
    dropout = dropout or DropoutSpec()
    tape = Tape()
    first = arch.layers[0].name

    if isinstance(input, np.ndarray) or np.isscalar(input):
        parts = [as_tensor(input, "input")]
    else:
        parts = [as_tensor(p, f"input[{i}]") for i, p in enumerate(input)]

    squeezed = parts[0].ndim == 1
    parts = [np.atleast_2d(p) for p in parts]
    rows = {p.shape[0] for p in parts}
    if len(rows) != 1 or any(p.ndim != 2 for p in parts):
        raise DimensionError(first, f"inputs must share a batch axis, got {[p.shape for p in parts]}")
    tape.input_shapes = tuple(p.shape for p in parts)
    tape.squeezed = squeezed

    if len(parts) > 1:
        widths = tuple(p.shape[1] for p in parts)
        if arch.input_splits is not None and widths != arch.input_splits:
            raise DimensionError(first, f"input widths {widths} != expected {arch.input_splits}")
        node = TapeNode(op="concat", layer=first, inputs=tuple(parts), output=np.empty(0))
        node.output = _fwd_concat(node)
        x = tape.record(node)
    else:
        x = parts[0]

    if x.shape[1] != arch.input_width:
        raise DimensionError(first, f"input width {x.shape[1]} != {arch.input_width}")

    rng = np.random.default_rng(dropout.seed) if dropout.rate > 0 else None
    keep_scale = 1.0 / (1.0 - dropout.rate)

    for layer in arch.layers:
        weight = params[layer.weight]
        bias = params[layer.bias]
        if weight.shape != (layer.in_features, layer.out_features) or bias.shape != (layer.out_features,):
            raise DimensionError(
                layer.name, f"parameter shapes {weight.shape}/{bias.shape} do not match "
                            f"({layer.in_features}, {layer.out_features})"
            )
        x = _apply(tape, "matmul", layer.name, x, param=layer.weight, operand=weight.copy())
        x = _apply(tape, "add_bias", layer.name, x, param=layer.bias, operand=bias.copy())
        op = _ACTIVATION_OPS.get(layer.activation)
        if op is not None:
            x = _apply(tape, op, layer.name, x, slope=arch.leaky_slope)
        if layer.dropout and rng is not None:
            mask = (rng.random(x.shape) >= dropout.rate) * keep_scale
            x = _apply(tape, "dropout", layer.name, x, operand=mask)

    ensure_finite(x, f"{arch.layers[-1].name}.output")
    return (x[0] if squeezed else x), tape


def backward(tape: Tape, upstream,
             from_logit: bool = False) -> Tuple[Dict[str, Tensor], Union[Tensor, Tuple[Tensor, ...]]]:
    """
    Gradients of <upstream, output> w.r.t. parameters and inputs.

    With from_logit the tape must end in a sigmoid and upstream is taken w.r.t. its
    input, so a saturated sigmoid does not swallow the gradient.

    Returns:
        (param_grads, input_grad); input_grad is one array for a single-input tape and a
        tuple with one array per concatenated input otherwise
    """
    g = as_tensor(upstream, "upstream")
    if g.shape != tape.output.shape:
        raise DimensionError("upstream", f"shape {g.shape} != tape output shape {tape.output.shape}")
    g = np.atleast_2d(g) if tape.squeezed else g

    nodes = tape.nodes
    if from_logit:
        if not nodes or nodes[-1].op != "sigmoid":
            raise ValueError("from_logit needs a tape that ends in a sigmoid")
        nodes = nodes[:-1]

    grads: Dict[str, Tensor] = {}
    input_grads: Optional[Tuple[np.ndarray, ...]] = None

    for node in reversed(nodes):
        x = node.inputs[0]
        if node.op == "matmul":
            grads[node.param] = grads.get(node.param, 0) + x.T @ g
            g = g @ node.operand.T
        elif node.op == "add_bias":
            grads[node.param] = grads.get(node.param, 0) + g.sum(axis=0)
        elif node.op == "leaky_relu":
            g = g * np.where(x > 0, 1.0, node.slope)
        elif node.op == "tanh":
            g = g * (1.0 - node.output ** 2)
        elif node.op == "sigmoid":
            g = g * node.output * (1.0 - node.output)
        elif node.op == "dropout":
            g = g * node.operand
        elif node.op == "concat":
            bounds = np.cumsum([p.shape[1] for p in node.inputs])[:-1]
            input_grads = tuple(np.split(g, bounds, axis=1))
        else:
            raise ValueError(f"unknown primitive {node.op}")

    if input_grads is None:
        input_grad = g[0] if tape.squeezed else g
        return grads, input_grad
    if tape.squeezed:
        input_grads = tuple(p[0] for p in input_grads)
    return grads, input_grads
