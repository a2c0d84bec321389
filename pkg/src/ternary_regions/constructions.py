"""Witness networks and the closed-form lower bounds they attain.

``build_montufar`` realises ``p**(n0*(L-1))`` linear regions on the unit
cube with ``p = n // n0``.  ``build_ternary`` does the same with weights in
{-1, 0, +1}, using pairs of layers (identity fan-out, then a ReLU summing
layer) for every zigzag stage, and reaches ``q**(n0*(L'-1)/2)`` with
``q = n // (2*(n0+1))`` and ``L'`` the largest odd number ``<= L``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from .netcore import Activation, Layer, NetError, ReluNet, WeightClass

RELU = Activation.RELU
IDENTITY = Activation.IDENTITY


class ConstructionError(NetError):
    pass


@dataclass(frozen=True)
class MontufarParams:
    n0: int
    n: int
    L: int

    def __post_init__(self):
        if self.n0 < 1 or self.n < 1:
            raise ConstructionError("n0 and n must be positive")
        if self.L < 2:
            raise ConstructionError("depth L must be at least 2")
        if self.p < 1:
            raise ConstructionError(f"width below input dimension (n={self.n} < n0={self.n0})")

    @property
    def p(self) -> int:
        return self.n // self.n0


@dataclass(frozen=True)
class TernaryParams:
    n0: int
    n: int
    L: int

    def __post_init__(self):
        if self.n0 < 1 or self.n < 1:
            raise ConstructionError("n0 and n must be positive")
        if self.L < 2:
            raise ConstructionError("depth L must be at least 2")
        if self.q < 1:
            raise ConstructionError(f"width below 2(n0+1) (n={self.n} < {2 * (self.n0 + 1)})")

    @property
    def q(self) -> int:
        return self.n // (2 * (self.n0 + 1))

    @property
    def L_prime(self) -> int:
        return self.L if self.L % 2 else self.L - 1

    @property
    def stages(self) -> int:
        return (self.L_prime - 1) // 2


def _zeros(rows: int, cols: int) -> List[List[int]]:
    return [[0] * cols for _ in range(rows)]


def _alternating_readout(n0: int, p: int, width: int, n_out: int) -> Layer:
    # sum_j sum_k (-1)^(k-1) x_{(k-1)n0+j}
    row = [0] * width
    for j in range(n0):
        for k in range(p):
            row[k * n0 + j] = (-1) ** k
    return Layer([row[:] for _ in range(n_out)], [0] * n_out, IDENTITY)


def build_montufar(n0: int, n: int, L: int, n_out: int = 1) -> ReluNet:
    """Integer-weight net with ``p**(n0*(L-1))`` regions on ``[0,1]**n0``.

    Hidden unit ``(i-1)*n0 + j`` of layer 1 computes ``p*x_j`` (``i = 1``) or
    ``2p*x_j - 2(i-1)``; later hidden layers apply the same ramps to the
    alternating sum of the previous group outputs for coordinate ``j``.
    Units past ``p*n0`` are dead.
    """
    params = MontufarParams(n0, n, L)
    p = params.p
    layers = []

    W = _zeros(n, n0)
    b = [0] * n
    for i in range(1, p + 1):
        for j in range(n0):
            r = (i - 1) * n0 + j
            W[r][j] = p if i == 1 else 2 * p
            b[r] = -2 * (i - 1)
    layers.append(Layer(W, b, RELU))

    for _ in range(2, L):
        W = _zeros(n, n)
        b = [0] * n
        for i in range(1, p + 1):
            c = p if i == 1 else 2 * p
            for j in range(n0):
                r = (i - 1) * n0 + j
                for k in range(p):
                    W[r][k * n0 + j] = c * (-1) ** k
                b[r] = -2 * (i - 1)
        layers.append(Layer(W, b, RELU))

    layers.append(_alternating_readout(n0, p, n, n_out))
    return ReluNet(n0, tuple(layers), WeightClass.INTEGER)


def build_sawtooth(p: int) -> ReluNet:
    """``h(x) = sum_{i=1}^p (-1)^(i-1) relu(c_i x - 2(i-1))`` with ``c_1 = p``, else ``2p``.

    On ``[0, 1]`` every piece ``[t/p, (t+1)/p]`` is mapped onto ``[0, 1]``.
    """
    if p < 1:
        raise ConstructionError("sawtooth needs p >= 1")
    W = [[p if i == 1 else 2 * p] for i in range(1, p + 1)]
    b = [-2 * (i - 1) for i in range(1, p + 1)]
    out = [[(-1) ** (i - 1) for i in range(1, p + 1)]]
    return ReluNet(1, (Layer(W, b, RELU), Layer(out, [0], IDENTITY)), WeightClass.INTEGER)


def build_ternary(n0: int, n: int, L: int, n_out: int = 1) -> ReluNet:
    """Ternary net whose function is ``build_montufar(n0, q*n0, (L'+1)/2)``.

    Odd layers (identity activation) fan each coordinate out to ``2q``
    copies and append ``2q`` constant-one nodes; even layers (ReLU) rebuild
    the ramps ``q*x_j`` and ``2q*x_j - 2(i-1)`` by summing copies, drawing
    ``-1`` edges from the constant nodes for the offset.  A trailing
    identity layer is added when ``L`` is even.
    """
    params = TernaryParams(n0, n, L)
    q = params.q
    fan = 2 * q
    const0 = fan * n0  # first constant node of an odd layer
    layers = []
    prev_width = n0

    for stage in range(1, params.stages + 1):
        # odd layer: fan-out + constants
        W = _zeros(n, prev_width)
        b = [0] * n
        for j in range(n0):
            for k in range(fan):
                r = fan * j + k
                if stage == 1:
                    W[r][j] = 1
                else:
                    for m in range(q):
                        W[r][m * n0 + j] = (-1) ** m
        for k in range(fan):
            b[const0 + k] = 1
        layers.append(Layer(W, b, IDENTITY))

        # even layer: ramps
        W = _zeros(n, n)
        b = [0] * n
        for i in range(1, q + 1):
            copies = q if i == 1 else fan
            for j in range(n0):
                r = (i - 1) * n0 + j
                for k in range(copies):
                    W[r][fan * j + k] = 1
                for k in range(2 * (i - 1)):
                    W[r][const0 + k] = -1
        layers.append(Layer(W, b, RELU))
        prev_width = n

    if params.stages:
        layers.append(_alternating_readout(n0, q, n, n_out))
    else:
        # L' = 1: no zigzag stage, read the input straight out
        layers.append(Layer([[1] * n0 for _ in range(n_out)], [0] * n_out, IDENTITY))
    if L % 2 == 0:
        eye = [[int(i == j) for j in range(n_out)] for i in range(n_out)]
        layers.append(Layer(eye, [0] * n_out, IDENTITY))
    return ReluNet(n0, tuple(layers), WeightClass.TERNARY, bias_budget=1)


build_ternary_theorem1 = build_ternary


def montufar_equivalent(n0: int, n: int, L: int) -> ReluNet:
    """The standard net that ``build_ternary(n0, n, L)`` reproduces."""
    params = TernaryParams(n0, n, L)
    return build_montufar(n0, params.q * n0, params.stages + 1)


def lower_bound_montufar(n0: int, n: int, L: int) -> int:
    params = MontufarParams(n0, n, L)
    return params.p ** (n0 * (L - 1))


def lower_bound_ternary(n0: int, n: int, L: int) -> int:
    params = TernaryParams(n0, n, L)
    # L' - 1 is even, so the exponent n0 * (L' - 1) / 2 is an integer
    return params.q ** (n0 * (params.L_prime - 1) // 2)


@dataclass(frozen=True)
class BoundTradeoff:
    n0: int
    n: int
    L: int
    montufar: int
    ternary_width: int
    ternary_depth: int
    ternary_double_depth: int
    ternary_same_depth: Optional[int]

    @property
    def double_depth_suffices(self) -> bool:
        return self.ternary_double_depth >= self.montufar

    def to_json(self) -> dict:
        return {
            "n0": self.n0, "n": self.n, "L": self.L,
            "montufar": self.montufar,
            "ternary_width": self.ternary_width,
            "ternary_depth": self.ternary_depth,
            "ternary_double_depth": self.ternary_double_depth,
            "ternary_same_depth": self.ternary_same_depth,
            "double_depth_suffices": self.double_depth_suffices,
        }


def bound_tradeoff_report(n0: int, n: int, L: int) -> BoundTradeoff:
    """Compare the standard bound with a ternary net of depth ``2L - 1``.

    The ternary width is the smallest ``n'`` with ``n' // (2(n0+1)) == p``;
    ``ternary_same_depth`` is ``None`` when ``n`` is too narrow for any
    ternary construction.
    """
    p = MontufarParams(n0, n, L).p
    width = 2 * (n0 + 1) * p
    depth = 2 * L - 1
    same = lower_bound_ternary(n0, n, L) if n // (2 * (n0 + 1)) >= 1 else None
    return BoundTradeoff(n0, n, L, lower_bound_montufar(n0, n, L), width, depth,
                         lower_bound_ternary(n0, width, depth), same)
