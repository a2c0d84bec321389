"""Network JSON format.

Numbers are strings holding an integer literal or an exact ``"p/q"``
fraction. Bare JSON integers are tolerated; anything float-like is
rejected.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Union

from .netcore import Activation, Layer, NetError, ReluNet, WeightClass

_EXACT = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class NetFormatError(NetError):
    def __init__(self, message: str, line: int = None, column: int = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


def parse_rational(token) -> Fraction:
    if isinstance(token, bool):
        raise NetFormatError(f"boolean {token!r} is not a number")
    if isinstance(token, int):
        return Fraction(token)
    if not isinstance(token, str):
        raise NetFormatError(f"expected an exact numeric string, got {token!r}")
    m = _EXACT.match(token)
    if not m:
        raise NetFormatError(f"{token!r} is not an integer or p/q fraction")
    num, den = m.groups()
    if den is not None and int(den) == 0:
        raise NetFormatError(f"{token!r} has a zero denominator")
    return Fraction(int(num), int(den) if den else 1)


def _reject_float(text):
    raise NetFormatError(f"float literal {text} is not allowed; use \"p/q\"")


def loads_json(text: str):
    try:
        return json.loads(text, parse_float=_reject_float)
    except json.JSONDecodeError as exc:
        raise NetFormatError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from None


def net_to_dict(net: ReluNet) -> dict:
    out = {
        "input_dim": net.input_dim,
        "weight_class": net.weight_class.value,
        "layers": [
            {
                "weights": [[str(w) for w in row] for row in layer.weights],
                "bias": [str(b) for b in layer.bias],
                "activation": layer.activation.value,
            }
            for layer in net.layers
        ],
    }
    if net.bias_budget is not None:
        out["bias_budget"] = net.bias_budget
    return out


def net_from_dict(data: dict) -> ReluNet:
    if not isinstance(data, dict):
        raise NetFormatError("network JSON must be an object")
    try:
        input_dim = data["input_dim"]
        raw_layers = data["layers"]
    except KeyError as exc:
        raise NetFormatError(f"missing key {exc.args[0]!r}") from None
    if not isinstance(input_dim, int) or isinstance(input_dim, bool):
        raise NetFormatError("input_dim must be an integer")
    layers = []
    for idx, raw in enumerate(raw_layers, start=1):
        try:
            act = Activation(raw.get("activation", "relu"))
        except ValueError:
            raise NetFormatError(f"layer {idx}: unknown activation {raw.get('activation')!r}") from None
        weights = [[parse_rational(t) for t in row] for row in raw["weights"]]
        bias = [parse_rational(t) for t in raw["bias"]]
        layers.append(Layer(weights, bias, act))
    try:
        wc = WeightClass(data.get("weight_class", "rational"))
    except ValueError:
        raise NetFormatError(f"unknown weight_class {data.get('weight_class')!r}") from None
    return ReluNet(input_dim, tuple(layers), wc, data.get("bias_budget"))


def dumps_net(net: ReluNet, indent: int = 2) -> str:
    return json.dumps(net_to_dict(net), indent=indent)


def loads_net(text: str) -> ReluNet:
    return net_from_dict(loads_json(text))


def load_net(path: Union[str, Path]) -> ReluNet:
    return loads_net(Path(path).read_text())


def save_net(net: ReluNet, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_net(net) + "\n")
