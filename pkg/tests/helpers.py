"""Shared fixtures-as-functions for the test suite."""

import random
from fractions import Fraction

from ternary_regions.netcore import Activation, BoxDomain, Layer, ReluNet, WeightClass
from ternary_regions.ternarize import random_integer_net


def rational_points(rng, domain, count, denominator=257):
    pts = []
    for _ in range(count):
        pts.append(tuple(lo + (hi - lo) * Fraction(rng.randint(0, denominator), denominator)
                         for lo, hi in zip(domain.lower, domain.upper)))
    return pts


def random_rational_net(rng, input_dim, hidden, output_dim=1):
    """Small-denominator rational weights; keeps LPs cheap."""
    dims = [input_dim, *hidden, output_dim]
    layers = []
    for k in range(1, len(dims)):
        W = [[Fraction(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(dims[k - 1])]
             for _ in range(dims[k])]
        b = [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(dims[k])]
        act = Activation.IDENTITY if k == len(dims) - 1 else Activation.RELU
        layers.append(Layer(W, b, act))
    return ReluNet(input_dim, tuple(layers), WeightClass.RATIONAL)


def random_net_corpus(seed, count, max_dim=2, max_layers=3, max_width=4):
    rng = random.Random(seed)
    nets = []
    for k in range(count):
        d = rng.randint(1, max_dim)
        hidden = [rng.randint(1, max_width) for _ in range(rng.randint(1, max_layers))]
        if k % 2:
            nets.append(random_integer_net(rng, d, hidden, 5))
        else:
            nets.append(random_rational_net(rng, d, hidden))
    return nets


def slope_changes_on_lattice(net, denominator):
    """Brute-force piece count of a 1-D net on [0, 1].

    Correct whenever every breakpoint is a multiple of ``1/denominator``:
    consecutive lattice slopes are then constant on each piece.
    """
    xs = [Fraction(k, denominator) for k in range(denominator + 1)]
    ys = [net([x])[0] for x in xs]
    slopes = [(ys[k + 1] - ys[k]) * denominator for k in range(denominator)]
    return 1 + sum(1 for a, b in zip(slopes, slopes[1:]) if a != b)


def unit(dim):
    return BoxDomain.unit(dim)
