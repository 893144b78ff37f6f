#!/usr/bin/env python3
"""
Reverse-mode automatic differentiation over dense float64 tensors

A ComputeGraph is an append-only list of operation records. ``backward`` does
not run a separate tape pass: it appends the derivative computation to the same
graph and returns node ids, so a gradient is an ordinary node that can be fed to
``backward`` again (the gradient penalty of the critic loss needs this).

Tensors are plain numpy float64 arrays with at least one dimension; a scalar
has shape (1,).
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

try:
    from .errors import GraphError, NonFiniteError, ShapeError
except ImportError:
    from errors import GraphError, NonFiniteError, ShapeError

# Create logger for this module
logger = logging.getLogger(__name__)

Tensor = np.ndarray
Shape = Tuple[int, ...]

# Kinds callers build models from
PUBLIC_KINDS = (
    'add', 'subtract', 'multiply', 'matmul', 'tanh', 'sigmoid', 'relu',
    'softmax', 'mean', 'sum', 'square', 'sqrt', 'concat', 'slice', 'scale',
)
# Kinds emitted by derivative rules
INTERNAL_KINDS = (
    'divide', 'transpose', 'step', 'reshape', 'broadcast_to', 'sum_to', 'pad',
)
LEAF_KINDS = ('input', 'parameter', 'constant')
# Piecewise-constant or constant kinds have no derivative contribution
NON_DIFFERENTIABLE = ('step', 'constant')


def as_tensor(value) -> Tensor:
    """Convert a value to a contiguous float64 array of at least one dimension"""
    array = np.ascontiguousarray(np.asarray(value, dtype=np.float64))
    if array.ndim == 0:
        array = array.reshape(1)
    return array


@dataclass(frozen=True)
class Node:
    """One operation record of a compute graph"""
    id: int
    kind: str
    inputs: Tuple[int, ...]
    shape: Shape
    attrs: Dict[str, Any] = field(default_factory=dict)
    name: Optional[str] = None

    def describe(self) -> str:
        label = f" '{self.name}'" if self.name else ''
        return f"node {self.id} ({self.kind}{label}, shape {self.shape})"


@dataclass
class GradientVector:
    """Per-parameter gradient values with the cached L2 norm of their concatenation"""
    entries: Dict[str, Tensor]

    @cached_property
    def norm(self) -> float:
        total = 0.0
        for value in self.entries.values():
            flat = value.ravel()
            total += float(np.dot(flat, flat))
        return float(np.sqrt(total))

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.entries.values())

    def scaled(self, factor: float) -> 'GradientVector':
        return GradientVector({k: v * factor for k, v in self.entries.items()})

    def shapes(self) -> Dict[str, Shape]:
        return {k: v.shape for k, v in self.entries.items()}

    @classmethod
    def zeros_like(cls, shapes: Mapping[str, Shape]) -> 'GradientVector':
        return cls({k: np.zeros(s) for k, s in shapes.items()})


def _broadcast(a: Shape, b: Shape) -> Shape:
    return tuple(np.broadcast_shapes(a, b))


def _sum_to(value: Tensor, shape: Shape) -> Tensor:
    """Reduce a broadcast value back to ``shape`` by summing the expanded axes"""
    if value.shape == shape:
        return value
    lead = value.ndim - len(shape)
    axes = list(range(lead))
    for i, size in enumerate(shape):
        if size == 1 and value.shape[i + lead] != 1:
            axes.append(i + lead)
    reduced = value.sum(axis=tuple(axes), keepdims=True) if axes else value
    return reduced.reshape(shape)


def _softmax(value: Tensor, axis: int) -> Tensor:
    shifted = value - value.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=axis, keepdims=True)


def _reduced_shape(shape: Shape, axis: Optional[int], keepdims: bool) -> Shape:
    if axis is None:
        return (1,)
    axis = axis % len(shape)
    if keepdims:
        return tuple(1 if i == axis else s for i, s in enumerate(shape))
    reduced = tuple(s for i, s in enumerate(shape) if i != axis)
    return reduced or (1,)


class ComputeGraph:
    """Append-only differentiable operation graph

    Node ids are positions in ``nodes``; every node's inputs precede it, so the
    graph is acyclic by construction.
    """

    def __init__(self):
        self.nodes: List[Node] = []
        self.parameters: Dict[str, int] = {}
        self.inputs: Dict[str, int] = {}
        self._plans: Dict[Tuple[int, ...], List[int]] = {}

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    def _append(self, kind, inputs, shape, attrs=None, name=None) -> int:
        node = Node(len(self.nodes), kind, tuple(inputs), tuple(int(s) for s in shape), attrs or {}, name)
        self.nodes.append(node)
        return node.id

    def input(self, name: str, shape: Sequence[int]) -> int:
        """Declare a feed leaf"""
        if name in self.inputs or name in self.parameters:
            raise GraphError(f"Leaf name '{name}' already declared")
        node_id = self._append('input', (), shape, name=name)
        self.inputs[name] = node_id
        return node_id

    def parameter(self, name: str, shape: Sequence[int]) -> int:
        """Declare a parameter leaf; its value is fed alongside the inputs"""
        if name in self.inputs or name in self.parameters:
            raise GraphError(f"Leaf name '{name}' already declared")
        node_id = self._append('parameter', (), shape, name=name)
        self.parameters[name] = node_id
        return node_id

    def constant(self, value) -> int:
        value = as_tensor(value)
        return self._append('constant', (), value.shape, attrs={'value': value})

    def shape_of(self, node_id: int) -> Shape:
        return self.nodes[node_id].shape

    def apply(self, kind: str, inputs: Sequence[int], **attrs) -> int:
        """Append an operation node and return its id

        Raises:
            ShapeError: operand shapes do not fit the kind
            GraphError: unknown kind or input id
        """
        if kind not in PUBLIC_KINDS and kind not in INTERNAL_KINDS:
            raise GraphError(f"Unknown operation kind '{kind}'")
        for input_id in inputs:
            if not 0 <= input_id < len(self.nodes):
                raise GraphError(f"Operation '{kind}' refers to unknown node {input_id}")
        shapes = [self.nodes[i].shape for i in inputs]
        shape = self._infer_shape(kind, shapes, attrs, len(self.nodes))
        return self._append(kind, inputs, shape, attrs)

    def _infer_shape(self, kind, shapes, attrs, node_id) -> Shape:
        def fail(expected):
            raise ShapeError(
                f"node {node_id} ({kind}): incompatible input shapes {shapes}; expected {expected}"
            )

        arity = 2 if kind in ('add', 'subtract', 'multiply', 'divide', 'matmul') else None
        if kind == 'concat':
            if not shapes:
                fail("at least one input")
        elif arity is not None and len(shapes) != arity:
            fail(f"{arity} inputs")
        elif arity is None and len(shapes) != 1:
            fail("1 input")

        if kind in ('add', 'subtract', 'multiply', 'divide'):
            try:
                return _broadcast(shapes[0], shapes[1])
            except ValueError:
                fail("broadcast-compatible shapes")
        if kind == 'matmul':
            a, b = shapes
            if len(a) != 2 or len(b) != 2 or a[1] != b[0]:
                fail("(n, k) @ (k, m)")
            return (a[0], b[1])
        if kind in ('tanh', 'sigmoid', 'relu', 'square', 'sqrt', 'step', 'scale'):
            return shapes[0]
        if kind == 'softmax':
            axis = attrs.get('axis', -1)
            if not -len(shapes[0]) <= axis < len(shapes[0]):
                fail(f"axis {axis} within rank {len(shapes[0])}")
            return shapes[0]
        if kind in ('sum', 'mean'):
            axis = attrs.get('axis')
            if axis is not None and not -len(shapes[0]) <= axis < len(shapes[0]):
                fail(f"axis {axis} within rank {len(shapes[0])}")
            return _reduced_shape(shapes[0], axis, attrs.get('keepdims', False))
        if kind == 'concat':
            axis = attrs.get('axis', -1) % len(shapes[0])
            first = shapes[0]
            for other in shapes[1:]:
                if len(other) != len(first) or any(
                    o != f for i, (o, f) in enumerate(zip(other, first)) if i != axis
                ):
                    fail(f"matching dimensions except axis {axis}")
            total = sum(s[axis] for s in shapes)
            return tuple(total if i == axis else s for i, s in enumerate(first))
        if kind == 'slice':
            shape = shapes[0]
            axis = attrs['axis'] % len(shape)
            start, stop = attrs['start'], attrs['stop']
            if not 0 <= start < stop <= shape[axis]:
                fail(f"0 <= start < stop <= {shape[axis]} on axis {axis}")
            return tuple(stop - start if i == axis else s for i, s in enumerate(shape))
        if kind == 'transpose':
            if len(shapes[0]) != 2:
                fail("a 2-D input")
            return (shapes[0][1], shapes[0][0])
        if kind == 'reshape':
            target = tuple(attrs['shape'])
            if int(np.prod(target)) != int(np.prod(shapes[0])):
                fail(f"same element count as {target}")
            return target
        if kind == 'broadcast_to':
            target = tuple(attrs['shape'])
            try:
                if _broadcast(shapes[0], target) != target:
                    fail(f"broadcastable to {target}")
            except ValueError:
                fail(f"broadcastable to {target}")
            return target
        if kind == 'sum_to':
            target = tuple(attrs['shape'])
            try:
                if _broadcast(target, shapes[0]) != shapes[0]:
                    fail(f"reducible to {target}")
            except ValueError:
                fail(f"reducible to {target}")
            return target
        if kind == 'pad':
            shape = shapes[0]
            axis = attrs['axis'] % len(shape)
            if attrs['start'] < 0 or attrs['start'] + shape[axis] > attrs['size']:
                fail(f"input fitting inside size {attrs['size']} at offset {attrs['start']}")
            return tuple(attrs['size'] if i == axis else s for i, s in enumerate(shape))
        fail("a supported kind")

    # Readable helpers for model code
    def add(self, a, b):
        return self.apply('add', (a, b))

    def subtract(self, a, b):
        return self.apply('subtract', (a, b))

    def multiply(self, a, b):
        return self.apply('multiply', (a, b))

    def divide(self, a, b):
        return self.apply('divide', (a, b))

    def matmul(self, a, b):
        return self.apply('matmul', (a, b))

    def tanh(self, a):
        return self.apply('tanh', (a,))

    def sigmoid(self, a):
        return self.apply('sigmoid', (a,))

    def relu(self, a):
        return self.apply('relu', (a,))

    def softmax(self, a, axis=-1):
        return self.apply('softmax', (a,), axis=axis)

    def square(self, a):
        return self.apply('square', (a,))

    def sqrt(self, a):
        return self.apply('sqrt', (a,))

    def scale(self, a, factor):
        return self.apply('scale', (a,), factor=float(factor))

    def sum(self, a, axis=None, keepdims=False):
        return self.apply('sum', (a,), axis=axis, keepdims=keepdims)

    def mean(self, a, axis=None, keepdims=False):
        return self.apply('mean', (a,), axis=axis, keepdims=keepdims)

    def concat(self, items, axis=-1):
        return self.apply('concat', tuple(items), axis=axis)

    def slice(self, a, axis, start, stop):
        return self.apply('slice', (a,), axis=axis, start=start, stop=stop)

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def _ancestors(self, targets: Sequence[int]) -> set:
        seen = set()
        stack = list(targets)
        while stack:
            node_id = stack.pop()
            if node_id in seen:
                continue
            seen.add(node_id)
            stack.extend(self.nodes[node_id].inputs)
        return seen

    def _plan(self, outputs: Tuple[int, ...]) -> List[int]:
        plan = self._plans.get(outputs)
        if plan is None:
            plan = sorted(self._ancestors(outputs))
            self._plans[outputs] = plan
        return plan

    def forward(self, feeds: Mapping[str, Tensor], outputs: Sequence[int]) -> List[Tensor]:
        """Evaluate the requested nodes

        Args:
            feeds: value per input and parameter leaf name
            outputs: node ids to return

        Returns:
            One array per requested node, in order

        Raises:
            GraphError: a needed leaf was not fed
            ShapeError: a fed value has the wrong shape
            NonFiniteError: an intermediate value is NaN or infinite
        """
        outputs = tuple(outputs)
        values: Dict[int, Tensor] = {}
        for node_id in self._plan(outputs):
            node = self.nodes[node_id]
            if node.kind in ('input', 'parameter'):
                if node.name not in feeds:
                    raise GraphError(f"Missing feed for {node.kind} '{node.name}'")
                value = as_tensor(feeds[node.name])
                if value.shape != node.shape:
                    raise ShapeError(
                        f"Feed for {node.describe()} has shape {value.shape}, expected {node.shape}"
                    )
            else:
                value = self._evaluate(node, [values[i] for i in node.inputs])
            if not np.all(np.isfinite(value)):
                raise NonFiniteError(f"Non-finite value produced by {node.describe()}")
            values[node_id] = value
        return [values[o] for o in outputs]

    def _evaluate(self, node: Node, args: List[Tensor]) -> Tensor:
        kind, attrs = node.kind, node.attrs
        if kind == 'constant':
            return attrs['value']
        if kind == 'add':
            return args[0] + args[1]
        if kind == 'subtract':
            return args[0] - args[1]
        if kind == 'multiply':
            return args[0] * args[1]
        if kind == 'divide':
            with np.errstate(divide='ignore', invalid='ignore'):
                return args[0] / args[1]
        if kind == 'matmul':
            return args[0] @ args[1]
        if kind == 'tanh':
            return np.tanh(args[0])
        if kind == 'sigmoid':
            return 0.5 * (1.0 + np.tanh(0.5 * args[0]))
        if kind == 'relu':
            return np.maximum(args[0], 0.0)
        if kind == 'step':
            return (args[0] > 0.0).astype(np.float64)
        if kind == 'softmax':
            return _softmax(args[0], attrs.get('axis', -1))
        if kind == 'square':
            return args[0] * args[0]
        if kind == 'sqrt':
            with np.errstate(invalid='ignore'):
                return np.sqrt(args[0])
        if kind == 'scale':
            return args[0] * attrs['factor']
        if kind in ('sum', 'mean'):
            reduce = np.sum if kind == 'sum' else np.mean
            axis = attrs.get('axis')
            if axis is None:
                return np.asarray(reduce(args[0])).reshape(1)
            return np.asarray(reduce(args[0], axis=axis, keepdims=attrs.get('keepdims', False))).reshape(node.shape)
        if kind == 'concat':
            return np.concatenate(args, axis=attrs.get('axis', -1))
        if kind == 'slice':
            index = [slice(None)] * args[0].ndim
            index[attrs['axis']] = slice(attrs['start'], attrs['stop'])
            return args[0][tuple(index)]
        if kind == 'transpose':
            return np.ascontiguousarray(args[0].T)
        if kind == 'reshape':
            return args[0].reshape(node.shape)
        if kind == 'broadcast_to':
            return np.array(np.broadcast_to(args[0], node.shape))
        if kind == 'sum_to':
            return _sum_to(args[0], node.shape)
        if kind == 'pad':
            out = np.zeros(node.shape)
            index = [slice(None)] * out.ndim
            start = attrs['start']
            index[attrs['axis']] = slice(start, start + args[0].shape[attrs['axis']])
            out[tuple(index)] = args[0]
            return out
        raise GraphError(f"No evaluation rule for {node.describe()}")

    # ------------------------------------------------------------------
    # Differentiation
    # ------------------------------------------------------------------

    def _unbroadcast(self, grad: int, shape: Shape) -> int:
        if self.shape_of(grad) == tuple(shape):
            return grad
        return self.apply('sum_to', (grad,), shape=tuple(shape))

    def _vector_jacobian(self, node: Node, grad: int) -> List[Optional[int]]:
        """Emit nodes for the input adjoints of ``node`` given its output adjoint"""
        kind, attrs = node.kind, node.attrs
        ins = node.inputs
        shapes = [self.shape_of(i) for i in ins]
        if kind in NON_DIFFERENTIABLE:
            return [None] * len(ins)
        if kind == 'add':
            return [self._unbroadcast(grad, shapes[0]), self._unbroadcast(grad, shapes[1])]
        if kind == 'subtract':
            return [self._unbroadcast(grad, shapes[0]),
                    self._unbroadcast(self.scale(grad, -1.0), shapes[1])]
        if kind == 'multiply':
            return [self._unbroadcast(self.multiply(grad, ins[1]), shapes[0]),
                    self._unbroadcast(self.multiply(grad, ins[0]), shapes[1])]
        if kind == 'divide':
            quotient_over_b = self.divide(self.multiply(grad, node.id), ins[1])
            return [self._unbroadcast(self.divide(grad, ins[1]), shapes[0]),
                    self._unbroadcast(self.scale(quotient_over_b, -1.0), shapes[1])]
        if kind == 'matmul':
            return [self.matmul(grad, self.apply('transpose', (ins[1],))),
                    self.matmul(self.apply('transpose', (ins[0],)), grad)]
        if kind == 'tanh':
            one = self.constant(1.0)
            return [self.multiply(grad, self.subtract(one, self.square(node.id)))]
        if kind == 'sigmoid':
            one = self.constant(1.0)
            return [self.multiply(grad, self.multiply(node.id, self.subtract(one, node.id)))]
        if kind == 'relu':
            return [self.multiply(grad, self.apply('step', (ins[0],)))]
        if kind == 'softmax':
            axis = attrs.get('axis', -1)
            inner = self.sum(self.multiply(grad, node.id), axis=axis, keepdims=True)
            return [self.multiply(node.id, self.subtract(grad, inner))]
        if kind == 'square':
            return [self.multiply(grad, self.scale(ins[0], 2.0))]
        if kind == 'sqrt':
            return [self.divide(grad, self.scale(node.id, 2.0))]
        if kind == 'scale':
            return [self.scale(grad, attrs['factor'])]
        if kind in ('sum', 'mean'):
            axis = attrs.get('axis')
            source = grad
            if axis is not None and not attrs.get('keepdims', False):
                source = self.apply('reshape', (grad,), shape=_reduced_shape(shapes[0], axis, True))
            spread = self.apply('broadcast_to', (source,), shape=shapes[0])
            if kind == 'mean':
                count = int(np.prod(shapes[0])) if axis is None else shapes[0][axis]
                spread = self.scale(spread, 1.0 / count)
            return [spread]
        if kind == 'concat':
            axis = attrs.get('axis', -1) % len(shapes[0])
            pieces, offset = [], 0
            for shape in shapes:
                pieces.append(self.slice(grad, axis, offset, offset + shape[axis]))
                offset += shape[axis]
            return pieces
        if kind == 'slice':
            axis = attrs['axis'] % len(shapes[0])
            return [self.apply('pad', (grad,), axis=axis, start=attrs['start'], size=shapes[0][axis])]
        if kind == 'pad':
            axis = attrs['axis']
            start = attrs['start']
            return [self.slice(grad, axis, start, start + shapes[0][axis])]
        if kind == 'transpose':
            return [self.apply('transpose', (grad,))]
        if kind == 'reshape':
            return [self.apply('reshape', (grad,), shape=shapes[0])]
        if kind == 'broadcast_to':
            return [self._unbroadcast(grad, shapes[0])]
        if kind == 'sum_to':
            return [self.apply('broadcast_to', (grad,), shape=shapes[0])]
        raise GraphError(f"No derivative rule for {node.describe()}")

    def backward(self, scalar: int, wrt: Sequence[int]) -> List[int]:
        """Append the gradient of ``scalar`` with respect to each ``wrt`` node

        Returns:
            Node ids of the gradients, aligned with ``wrt``; each has the shape
            of its ``wrt`` node and may itself be differentiated.

        Raises:
            GraphError: ``scalar`` is not of shape (1,) or a ``wrt`` node is not
                an ancestor of it
        """
        if self.shape_of(scalar) != (1,):
            raise GraphError(
                f"backward needs a scalar target; {self.nodes[scalar].describe()} is not scalar"
            )
        ancestors = self._ancestors([scalar])
        for target in wrt:
            if target not in ancestors:
                raise GraphError(
                    f"{self.nodes[target].describe()} is not reachable from {self.nodes[scalar].describe()}"
                )

        # Nodes on some path wrt -> scalar
        on_path = set(wrt)
        for node_id in range(min(wrt, default=scalar), scalar + 1):
            if node_id in ancestors and any(i in on_path for i in self.nodes[node_id].inputs):
                on_path.add(node_id)

        adjoints: Dict[int, int] = {scalar: self.constant(1.0)}
        for node_id in range(scalar, -1, -1):
            if node_id not in adjoints or node_id not in on_path:
                continue
            node = self.nodes[node_id]
            if not node.inputs:
                continue
            contributions = self._vector_jacobian(node, adjoints[node_id])
            for input_id, contribution in zip(node.inputs, contributions):
                if contribution is None or input_id not in on_path:
                    continue
                if input_id in adjoints:
                    adjoints[input_id] = self.add(adjoints[input_id], contribution)
                else:
                    adjoints[input_id] = contribution

        results = []
        for target in wrt:
            if target in adjoints:
                results.append(adjoints[target])
            else:
                # Reachable only through non-differentiable nodes
                results.append(self.constant(np.zeros(self.shape_of(target))))
        return results


def apply(graph: ComputeGraph, kind: str, inputs: Sequence[int], **attrs) -> int:
    """Append an operation to ``graph``; see ComputeGraph.apply"""
    return graph.apply(kind, inputs, **attrs)


def forward(graph: ComputeGraph, feeds: Mapping[str, Tensor], outputs: Sequence[int]) -> List[Tensor]:
    """Evaluate ``outputs``; see ComputeGraph.forward"""
    return graph.forward(feeds, outputs)


def backward(graph: ComputeGraph, scalar: int, wrt: Sequence[int]) -> List[int]:
    """Gradient nodes of ``scalar``; see ComputeGraph.backward"""
    return graph.backward(scalar, wrt)


def gradient_vector(graph: ComputeGraph, grads: Mapping[str, int], feeds: Mapping[str, Tensor]) -> GradientVector:
    """Evaluate named gradient nodes into a GradientVector"""
    names = list(grads)
    values = graph.forward(feeds, [grads[n] for n in names])
    return GradientVector(dict(zip(names, values)))


def finite_difference_check(
    graph: ComputeGraph,
    scalar: int,
    wrt: Sequence[int],
    feeds: Mapping[str, Tensor],
    step: float = 1e-5,
) -> float:
    """
    Compare analytic gradients with central finite differences

    Args:
        graph: graph holding ``scalar``
        scalar: scalar node to differentiate
        wrt: leaf nodes (inputs or parameters) to perturb
        feeds: values for every leaf the scalar depends on
        step: central-difference half width

    Returns:
        max over all coordinates of |analytic - numeric| / max(1e-8, |numeric|)
    """
    if step <= 0:
        raise GraphError(f"finite-difference step must be positive, got {step}")
    for target in wrt:
        if graph.nodes[target].kind not in ('input', 'parameter'):
            raise GraphError(f"finite differences need leaf nodes; got {graph.nodes[target].describe()}")

    grad_nodes = graph.backward(scalar, wrt)
    analytic = graph.forward(feeds, grad_nodes)
    worst = 0.0
    for target, exact in zip(wrt, analytic):
        name = graph.nodes[target].name
        base = as_tensor(feeds[name])
        for index in np.ndindex(base.shape):
            shifted = dict(feeds)
            plus = base.copy()
            plus[index] += step
            shifted[name] = plus
            upper = graph.forward(shifted, [scalar])[0][0]
            minus = base.copy()
            minus[index] -= step
            shifted[name] = minus
            lower = graph.forward(shifted, [scalar])[0][0]
            numeric = (upper - lower) / (2.0 * step)
            error = abs(exact[index] - numeric) / max(1e-8, abs(numeric))
            worst = max(worst, error)
    return worst
