"""Exact ReLU regression networks.

Every weight, bias and intermediate value is a :class:`fractions.Fraction`,
so evaluation and pattern read-off never round.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

Rational = Fraction
Vector = Tuple[Fraction, ...]
Matrix = Tuple[Vector, ...]
# One bit per ReLU unit, layer-major; True means active.
Pattern = Tuple[bool, ...]


class NetError(ValueError):
    """Base class for malformed networks and bad inputs."""


class DimensionError(NetError):
    def __init__(self, message: str, layer: Optional[int] = None):
        if layer is not None:
            message = f"layer {layer}: {message}"
        super().__init__(message)
        self.layer = layer


class WeightClassError(NetError):
    pass


class Activation(enum.Enum):
    RELU = "relu"
    IDENTITY = "identity"


class WeightClass(enum.Enum):
    RATIONAL = "rational"
    INTEGER = "integer"
    TERNARY = "ternary"


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError(f"float {value!r} is not exact; pass an int, Fraction or 'p/q' string")
    return Fraction(value)


def to_vector(values: Iterable) -> Vector:
    return tuple(as_fraction(v) for v in values)


def to_matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(to_vector(r) for r in rows)


def matvec(m: Matrix, v: Sequence[Fraction]) -> Vector:
    # scale v to integers over one denominator; integral weights then stay
    # in int arithmetic and only one Fraction is built per row
    den = 1
    for x in v:
        d = x.denominator
        if d != 1:
            den = den * d // math.gcd(den, d)
    xs = [x.numerator * (den // x.denominator) for x in v]
    out = []
    for row in m:
        total = 0
        rest = None
        for a, x in zip(row, xs):
            if a:
                if a.denominator == 1:
                    total += a.numerator * x
                else:
                    rest = a * x if rest is None else rest + a * x
        val = Fraction(total, den)
        if rest is not None:
            val += rest / den
        out.append(val)
    return tuple(out)


def matmul(a: Matrix, b: Matrix, inner: int, cols: int) -> Matrix:
    out = []
    for row in a:
        acc = [Fraction(0)] * cols
        for k in range(inner):
            w = row[k]
            if w:
                brow = b[k]
                for j in range(cols):
                    if brow[j]:
                        acc[j] += w * brow[j]
        out.append(tuple(acc))
    return tuple(out)


@dataclass(frozen=True)
class Layer:
    weights: Matrix
    bias: Vector
    activation: Activation = Activation.RELU

    def __post_init__(self):
        object.__setattr__(self, "weights", to_matrix(self.weights))
        object.__setattr__(self, "bias", to_vector(self.bias))
        object.__setattr__(self, "activation", Activation(self.activation))
        if len(self.weights) != len(self.bias):
            raise DimensionError(
                f"{len(self.weights)} weight rows but {len(self.bias)} bias entries")
        if not self.weights:
            raise DimensionError("layer has no units")
        widths = {len(r) for r in self.weights}
        if len(widths) != 1:
            raise DimensionError("ragged weight matrix")

    @property
    def in_dim(self) -> int:
        return len(self.weights[0])

    @property
    def out_dim(self) -> int:
        return len(self.weights)

    def affine(self, x: Sequence[Fraction]) -> Vector:
        return tuple(v + c for v, c in zip(matvec(self.weights, x), self.bias))


@dataclass(frozen=True)
class AffineMap:
    """``x -> A x + b`` with exact coefficients."""

    A: Matrix
    b: Vector

    def __post_init__(self):
        object.__setattr__(self, "A", to_matrix(self.A))
        object.__setattr__(self, "b", to_vector(self.b))
        if len(self.A) != len(self.b):
            raise DimensionError("AffineMap: row count of A differs from length of b")

    def __call__(self, x: Sequence) -> Vector:
        x = to_vector(x)
        return tuple(v + c for v, c in zip(matvec(self.A, x), self.b))

    def to_json(self) -> dict:
        return {"A": [[str(v) for v in row] for row in self.A], "b": [str(v) for v in self.b]}


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box; ``None`` marks an unbounded side."""

    lower: Tuple[Optional[Fraction], ...]
    upper: Tuple[Optional[Fraction], ...]

    def __post_init__(self):
        lo = tuple(None if v is None else as_fraction(v) for v in self.lower)
        hi = tuple(None if v is None else as_fraction(v) for v in self.upper)
        if len(lo) != len(hi):
            raise DimensionError("BoxDomain: lower and upper have different lengths")
        for i, (a, b) in enumerate(zip(lo, hi)):
            if a is not None and b is not None and a > b:
                raise NetError(f"BoxDomain: lower[{i}]={a} exceeds upper[{i}]={b}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def unit(cls, dim: int) -> "BoxDomain":
        return cls((Fraction(0),) * dim, (Fraction(1),) * dim)

    @classmethod
    def interval(cls, lo, hi) -> "BoxDomain":
        return cls((lo,), (hi,))

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def bounded(self) -> bool:
        return all(v is not None for v in self.lower + self.upper)

    def has_interior(self) -> bool:
        return all(a is None or b is None or a < b for a, b in zip(self.lower, self.upper))

    def contains(self, x: Sequence[Fraction]) -> bool:
        return all((a is None or a <= v) and (b is None or v <= b)
                   for v, a, b in zip(x, self.lower, self.upper))

    def halfspaces(self):
        """Box faces as ``(a, b)`` rows meaning ``a . x <= b``."""
        d = self.dim
        rows = []
        for i in range(d):
            e = [Fraction(0)] * d
            if self.upper[i] is not None:
                e[i] = Fraction(1)
                rows.append((tuple(e), self.upper[i]))
            if self.lower[i] is not None:
                e = [Fraction(0)] * d
                e[i] = Fraction(-1)
                rows.append((tuple(e), -self.lower[i]))
        return rows

    def to_json(self) -> dict:
        fmt = lambda v: None if v is None else str(v)  # noqa: E731
        return {"lower": [fmt(v) for v in self.lower], "upper": [fmt(v) for v in self.upper]}


@dataclass(frozen=True)
class ReluNet:
    """Layered ReLU regression network ``f_L o g_{L-1} o f_{L-1} o ... o g_1 o f_1``.

    ``bias_budget`` only matters for the ternary weight class: when set,
    every bias must satisfy ``|b| <= bias_budget`` (a bias stands for a sum
    of that many +-1 edges from a constant node).
    """

    input_dim: int
    layers: Tuple[Layer, ...]
    weight_class: WeightClass = WeightClass.RATIONAL
    bias_budget: Optional[int] = None
    _relu_units: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "weight_class", WeightClass(self.weight_class))
        if self.input_dim < 1:
            raise DimensionError("input_dim must be positive")
        if not self.layers:
            raise DimensionError("network has no layers")
        prev = self.input_dim
        for idx, layer in enumerate(self.layers, start=1):
            if layer.in_dim != prev:
                raise DimensionError(f"expects {layer.in_dim} inputs, previous width is {prev}", idx)
            prev = layer.out_dim
        if self.layers[-1].activation is not Activation.IDENTITY:
            raise NetError("final layer of a regression net must use the identity activation")
        self._check_weight_class()
        object.__setattr__(self, "_relu_units", sum(
            l.out_dim for l in self.layers[:-1] if l.activation is Activation.RELU))

    def _check_weight_class(self):
        wc = self.weight_class
        if wc is WeightClass.RATIONAL:
            return
        for idx, layer in enumerate(self.layers, start=1):
            for row in layer.weights:
                for w in row:
                    if w.denominator != 1:
                        raise WeightClassError(f"layer {idx}: non-integer weight {w}")
                    if wc is WeightClass.TERNARY and w not in (-1, 0, 1):
                        raise WeightClassError(f"layer {idx}: weight {w} is not ternary")
            for b in layer.bias:
                if b.denominator != 1:
                    raise WeightClassError(f"layer {idx}: non-integer bias {b}")
                if (wc is WeightClass.TERNARY and self.bias_budget is not None
                        and abs(b) > self.bias_budget):
                    raise WeightClassError(
                        f"layer {idx}: bias {b} exceeds the declared budget {self.bias_budget}")

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def relu_units(self) -> int:
        return self._relu_units

    @property
    def widths(self) -> Tuple[int, ...]:
        return tuple(l.out_dim for l in self.layers)

    def with_layer(self, index: int, layer: Layer) -> "ReluNet":
        """Copy with layer ``index`` (0-based) replaced; re-validated."""
        layers = list(self.layers)
        layers[index] = layer
        return ReluNet(self.input_dim, tuple(layers), self.weight_class, self.bias_budget)

    def max_abs_weight(self) -> Fraction:
        return max(abs(w) for l in self.layers for row in l.weights for w in row)

    def __call__(self, x: Sequence) -> Vector:
        return evaluate(self, x)


def _check_input(net: ReluNet, x) -> Vector:
    x = to_vector(x)
    if len(x) != net.input_dim:
        raise DimensionError(f"input has length {len(x)}, net expects {net.input_dim}", 1)
    return x


def evaluate(net: ReluNet, x: Sequence) -> Vector:
    """Exact forward pass."""
    return eval_with_pattern(net, x)[0]


def eval_with_pattern(net: ReluNet, x: Sequence) -> Tuple[Vector, Pattern]:
    """Forward pass that also reads off the activation pattern.

    A pre-activation of exactly zero counts as inactive.
    """
    h = _check_input(net, x)
    bits = []
    for layer in net.layers:
        z = layer.affine(h)
        if layer.activation is Activation.RELU:
            on = [v > 0 for v in z]
            bits.extend(on)
            h = tuple(v if a else Fraction(0) for v, a in zip(z, on))
        else:
            h = z
    return h, tuple(bits)


def affine_map_for_pattern(net: ReluNet, pattern: Sequence[bool]) -> AffineMap:
    """Affine function the net computes wherever ``pattern`` holds."""
    pattern = tuple(bool(b) for b in pattern)
    if len(pattern) != net.relu_units:
        raise DimensionError(f"pattern has {len(pattern)} bits, net has {net.relu_units} ReLU units")
    d = net.input_dim
    A = tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))
    b = (Fraction(0),) * d
    pos = 0
    for layer in net.layers:
        A = matmul(layer.weights, A, layer.in_dim, d)
        b = layer.affine(b)
        if layer.activation is Activation.RELU:
            bits = pattern[pos:pos + layer.out_dim]
            pos += layer.out_dim
            zero = (Fraction(0),) * d
            A = tuple(row if on else zero for row, on in zip(A, bits))
            b = tuple(v if on else Fraction(0) for v, on in zip(b, bits))
    return AffineMap(A, b)


def compose(outer: ReluNet, inner: ReluNet) -> ReluNet:
    """Single net computing ``outer(inner(x))``.

    The final (identity) layer of ``inner`` is folded into the first layer
    of ``outer``, so depth is ``inner.depth + outer.depth - 1``.
    """
    if outer.input_dim != inner.output_dim:
        raise DimensionError(
            f"outer net takes {outer.input_dim} inputs, inner net produces {inner.output_dim}")
    last = inner.layers[-1]
    first = outer.layers[0]
    fused = Layer(
        matmul(first.weights, last.weights, first.in_dim, last.in_dim),
        first.affine(last.bias),
        first.activation,
    )
    layers = inner.layers[:-1] + (fused,) + outer.layers[1:]
    integral = all(
        v.denominator == 1
        for l in layers for row in l.weights + (l.bias,) for v in row)
    wc = WeightClass.INTEGER if integral else WeightClass.RATIONAL
    return ReluNet(inner.input_dim, layers, wc)


def identity_net(dim: int = 1) -> ReluNet:
    eye = [[int(i == j) for j in range(dim)] for i in range(dim)]
    return ReluNet(dim, (Layer(eye, [0] * dim, Activation.IDENTITY),), WeightClass.TERNARY)


def scalar_net(w) -> ReluNet:
    """1-input net computing ``w * x``."""
    w = as_fraction(w)
    wc = WeightClass.INTEGER if w.denominator == 1 else WeightClass.RATIONAL
    return ReluNet(1, (Layer([[w]], [0], Activation.IDENTITY),), wc)


def abs_net() -> ReluNet:
    """|x| = relu(x) + relu(-x)."""
    return ReluNet(1, (
        Layer([[1], [-1]], [0, 0], Activation.RELU),
        Layer([[1, 1]], [0], Activation.IDENTITY),
    ), WeightClass.TERNARY)
