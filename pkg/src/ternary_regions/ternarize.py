"""Compile bounded-integer-weight networks into ternary ones.

An edge of integer weight ``w`` with ``|w| <= M`` becomes ``M`` identity
copies of its source followed by ``|w|`` edges of weight ``sign(w)``.
Every original layer turns into a fan-out layer (identity activation)
plus a summing layer that keeps the original activation, so depth
doubles.  With sharing, each source node is copied only
``max |w|`` times over its outgoing edges and all edges draw on the same
copies.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .netcore import (
    Activation,
    BoxDomain,
    DimensionError,
    Layer,
    NetError,
    ReluNet,
    WeightClass,
    evaluate,
)


class TernarizeError(NetError):
    pass


def _sign(v) -> int:
    return (v > 0) - (v < 0)


@dataclass(frozen=True)
class IntegerNetProfile:
    M: int
    net: ReluNet

    def __post_init__(self):
        if self.M < 1:
            raise TernarizeError("weight bound M must be positive")
        for idx, layer in enumerate(self.net.layers, start=1):
            for row in layer.weights:
                for w in row:
                    if w.denominator != 1:
                        raise TernarizeError(f"layer {idx}: non-integer weight {w}")
                    if abs(w) > self.M:
                        raise TernarizeError(f"layer {idx}: weight {w} exceeds M={self.M}")
            for b in layer.bias:
                if b.denominator != 1:
                    raise TernarizeError(f"layer {idx}: non-integer bias {b}")

    @classmethod
    def tight(cls, net: ReluNet) -> "IntegerNetProfile":
        return cls(max(1, int(net.max_abs_weight())), net)


@dataclass(frozen=True)
class TernarizeStats:
    nodes_before: int
    nodes_after: int
    depth_before: int
    depth_after: int
    sharing_enabled: bool
    intermediate_widths: Tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {
            "nodes_before": self.nodes_before,
            "nodes_after": self.nodes_after,
            "depth_before": self.depth_before,
            "depth_after": self.depth_after,
            "sharing_enabled": self.sharing_enabled,
            "intermediate_widths": list(self.intermediate_widths),
        }


def expand_edge(w: int, M: int) -> ReluNet:
    """The 1 -> M -> 1 ternary net computing ``w * x``."""
    if Fraction(w).denominator != 1:
        raise TernarizeError(f"edge weight {w} is not an integer")
    w = int(w)
    if M < 1:
        raise TernarizeError("M must be positive")
    if abs(w) > M:
        raise TernarizeError(f"|w|={abs(w)} exceeds M={M}")
    fan = Layer([[1]] * M, [0] * M, Activation.IDENTITY)
    out = Layer([[_sign(w) if j < abs(w) else 0 for j in range(M)]], [0], Activation.IDENTITY)
    return ReluNet(1, (fan, out), WeightClass.TERNARY, bias_budget=0)


def _split_layer(layer: Layer, M: int, sharing: bool, strict_bias: bool):
    """Fan-out layer and summing layer equivalent to ``layer``."""
    W = [[int(w) for w in row] for row in layer.weights]
    n_out, n_in = len(W), len(W[0])
    fan_rows: List[List[int]] = []
    fan_bias: List[int] = []
    sum_rows = [[] for _ in range(n_out)]  # (column, coefficient) pairs

    if sharing:
        for j in range(n_in):
            c = max(abs(W[i][j]) for i in range(n_out))
            base = len(fan_rows)
            for _ in range(c):
                fan_rows.append([int(k == j) for k in range(n_in)])
                fan_bias.append(0)
            for i in range(n_out):
                s = _sign(W[i][j])
                sum_rows[i].extend((base + t, s) for t in range(abs(W[i][j])))
    else:
        for i in range(n_out):
            for j in range(n_in):
                w = W[i][j]
                if w == 0:
                    continue
                base = len(fan_rows)
                for _ in range(M):
                    fan_rows.append([int(k == j) for k in range(n_in)])
                    fan_bias.append(0)
                sum_rows[i].extend((base + t, _sign(w)) for t in range(abs(w)))

    bias = [int(b) for b in layer.bias]
    if strict_bias:
        c = max(abs(b) for b in bias)
        base = len(fan_rows)
        for _ in range(c):
            fan_rows.append([0] * n_in)
            fan_bias.append(1)
        for i, b in enumerate(bias):
            sum_rows[i].extend((base + t, _sign(b)) for t in range(abs(b)))
        bias = [0] * n_out

    if not fan_rows:
        # all-zero layer; keep one dead node so the layer is not empty
        fan_rows.append([0] * n_in)
        fan_bias.append(0)
    width = len(fan_rows)
    dense = []
    for pairs in sum_rows:
        row = [0] * width
        for col, coef in pairs:
            row[col] += coef
        dense.append(row)
    return (Layer(fan_rows, fan_bias, Activation.IDENTITY),
            Layer(dense, bias, layer.activation))


def ternarize_net(profile: IntegerNetProfile, sharing: bool = True,
                  strict_bias: bool = False) -> Tuple[ReluNet, TernarizeStats]:
    """Exactly equivalent ternary net and node accounting.

    Biases pass through to the summing layer unless ``strict_bias``, in
    which case they are rebuilt from +-1 edges out of constant-one nodes and
    the result has bias budget 1.
    """
    net = profile.net
    layers = []
    widths = []
    for layer in net.layers:
        fan, summing = _split_layer(layer, profile.M, sharing, strict_bias)
        layers += [fan, summing]
        widths.append(fan.out_dim)
    if strict_bias:
        budget = 1
    else:
        budget = max((abs(int(b)) for l in net.layers for b in l.bias), default=0)
    out = ReluNet(net.input_dim, tuple(layers), WeightClass.TERNARY, bias_budget=budget)
    stats = TernarizeStats(
        nodes_before=sum(net.widths),
        nodes_after=sum(out.widths),
        depth_before=net.depth,
        depth_after=out.depth,
        sharing_enabled=sharing,
        intermediate_widths=tuple(widths),
    )
    return out, stats


# ---------------------------------------------------------------------------
# equivalence by exact sampling

SAMPLE_DENOMINATOR = 9973
UNBOUNDED_HALF_WIDTH = 16


@dataclass(frozen=True)
class EquivVerdict:
    passed: bool
    samples: int
    counterexample: Optional[Tuple[Fraction, ...]] = None
    left: Optional[Tuple[Fraction, ...]] = None
    right: Optional[Tuple[Fraction, ...]] = None

    def to_json(self) -> dict:
        fmt = lambda v: None if v is None else [str(t) for t in v]  # noqa: E731
        return {"passed": self.passed, "samples": self.samples,
                "counterexample": fmt(self.counterexample),
                "left": fmt(self.left), "right": fmt(self.right)}


def sample_points(domain: BoxDomain, samples: int, seed: int) -> List[Tuple[Fraction, ...]]:
    """Rational points on a fixed-denominator lattice, chosen by ``seed``.

    Unbounded sides are clipped to a window of half-width
    ``UNBOUNDED_HALF_WIDTH`` around the finite end (or the origin).
    """
    rng = random.Random(seed)
    bounds = []
    for lo, hi in zip(domain.lower, domain.upper):
        if lo is None and hi is None:
            lo, hi = Fraction(-UNBOUNDED_HALF_WIDTH), Fraction(UNBOUNDED_HALF_WIDTH)
        elif lo is None:
            lo = hi - 2 * UNBOUNDED_HALF_WIDTH
        elif hi is None:
            hi = lo + 2 * UNBOUNDED_HALF_WIDTH
        bounds.append((lo, hi))
    pts = []
    for _ in range(samples):
        pts.append(tuple(lo + (hi - lo) * Fraction(rng.randint(0, SAMPLE_DENOMINATOR), SAMPLE_DENOMINATOR)
                         for lo, hi in bounds))
    return pts


def verify_equiv(a: ReluNet, b: ReluNet, domain: BoxDomain, samples: int = 200,
                 seed: int = 0) -> EquivVerdict:
    if a.input_dim != b.input_dim or a.output_dim != b.output_dim:
        raise DimensionError(
            f"nets differ in shape: {a.input_dim}->{a.output_dim} vs {b.input_dim}->{b.output_dim}")
    if domain.dim != a.input_dim:
        raise DimensionError(f"domain has dimension {domain.dim}, nets take {a.input_dim} inputs")
    if samples < 1:
        raise ValueError("samples must be positive")
    for x in sample_points(domain, samples, seed):
        ya, yb = evaluate(a, x), evaluate(b, x)
        if ya != yb:
            return EquivVerdict(False, samples, x, ya, yb)
    return EquivVerdict(True, samples)


def random_integer_net(rng: random.Random, input_dim: int, hidden: Sequence[int], M: int,
                       output_dim: int = 1, bias_range: int = 3) -> ReluNet:
    """Random integer net with weights in ``[-M, M]`` (ReLU hidden layers)."""
    dims = [input_dim, *hidden, output_dim]
    layers = []
    for k in range(1, len(dims)):
        W = [[rng.randint(-M, M) for _ in range(dims[k - 1])] for _ in range(dims[k])]
        b = [rng.randint(-bias_range, bias_range) for _ in range(dims[k])]
        act = Activation.IDENTITY if k == len(dims) - 1 else Activation.RELU
        layers.append(Layer(W, b, act))
    return ReluNet(input_dim, tuple(layers), WeightClass.INTEGER)
