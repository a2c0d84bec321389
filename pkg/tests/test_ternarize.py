import random
from fractions import Fraction as F

import pytest

from ternary_regions.netcore import Activation, BoxDomain, Layer, ReluNet, WeightClass, evaluate, scalar_net
from ternary_regions.regions import count_regions_1d
from ternary_regions.ternarize import (
    IntegerNetProfile,
    TernarizeError,
    expand_edge,
    random_integer_net,
    sample_points,
    ternarize_net,
    verify_equiv,
)


def _is_ternary(net):
    return all(w in (-1, 0, 1) for l in net.layers for row in l.weights for w in row)


def test_expand_edge_weight_three():
    net = expand_edge(3, 5)
    assert net.widths == (5, 1)
    assert net.layers[1].weights == ((1, 1, 1, 0, 0),)
    assert evaluate(net, [2]) == (6,)
    assert _is_ternary(net)


def test_expand_edge_zero():
    net = expand_edge(0, 5)
    assert net.layers[1].weights == ((0,) * 5,)
    assert all(evaluate(net, [x]) == (0,) for x in (-3, F(1, 7), 9))


def test_expand_edge_negative_full():
    net = expand_edge(-5, 5)
    assert net.layers[1].weights == ((-1,) * 5,)
    assert evaluate(net, [1]) == (-5,)


def test_expand_edge_bound():
    with pytest.raises(TernarizeError):
        expand_edge(6, 5)


def two_input_net():
    # 2 inputs -> 1 hidden ReLU -> 1 output, weights within [-5, 5]
    return ReluNet(2, (
        Layer([[3, -2]], [1], Activation.RELU),
        Layer([[4]], [-1], Activation.IDENTITY),
    ), WeightClass.INTEGER)


def test_two_input_net_both_modes():
    src = two_input_net()
    profile = IntegerNetProfile(5, src)
    plain, s_plain = ternarize_net(profile, sharing=False)
    shared, s_shared = ternarize_net(profile, sharing=True)
    box = BoxDomain((-3, -3), (3, 3))
    for out in (plain, shared):
        assert _is_ternary(out)
        assert verify_equiv(src, out, box, samples=100, seed=1).passed
    assert sum(s_shared.intermediate_widths) < sum(s_plain.intermediate_widths)
    assert s_plain.intermediate_widths == (10, 5)
    assert s_shared.intermediate_widths == (5, 4)
    assert s_plain.depth_after == 2 * s_plain.depth_before == 4


def test_identity_integer_net():
    src = ReluNet(2, (
        Layer([[1, 1], [1, 1]], [0, 0], Activation.RELU),
        Layer([[1, 1]], [0], Activation.IDENTITY),
    ), WeightClass.INTEGER)
    out, stats = ternarize_net(IntegerNetProfile(1, src), sharing=False)
    fan = out.layers[0]
    # one copy per edge, each copy just forwards its source
    assert fan.weights == ((1, 0), (0, 1), (1, 0), (0, 1))
    assert stats.intermediate_widths == (4, 2)
    assert verify_equiv(src, out, BoxDomain((-2, -2), (2, 2)), samples=50).passed


def test_random_net_point():
    src = random_integer_net(random.Random(17), 2, [3, 3], 5)
    x = [F(7, 3), F(-2, 5)]
    for sharing in (False, True):
        out, _ = ternarize_net(IntegerNetProfile(5, src), sharing=sharing)
        assert evaluate(out, x) == evaluate(src, x)


@pytest.mark.parametrize("seed", range(15))
def test_node_accounting(seed):
    rng = random.Random(seed)
    src = random_integer_net(rng, rng.randint(1, 3), [rng.randint(1, 4) for _ in range(2)], 5)
    profile = IntegerNetProfile(5, src)
    _, plain = ternarize_net(profile, sharing=False)
    _, shared = ternarize_net(profile, sharing=True)
    for layer, w_plain, w_shared in zip(src.layers, plain.intermediate_widths, shared.intermediate_widths):
        edges = sum(1 for row in layer.weights for w in row if w)
        copies = sum(max(abs(layer.weights[i][j]) for i in range(layer.out_dim))
                     for j in range(layer.in_dim))
        assert w_plain == max(1, 5 * edges)
        assert w_shared == max(1, copies)
    assert shared.nodes_after <= plain.nodes_after


@pytest.mark.parametrize("seed", range(10))
def test_strict_bias(seed):
    rng = random.Random(100 + seed)
    src = random_integer_net(rng, 2, [3, 2], 5, bias_range=6)
    out, _ = ternarize_net(IntegerNetProfile(5, src), sharing=True, strict_bias=True)
    assert out.bias_budget == 1
    assert all(abs(b) <= 1 for l in out.layers for b in l.bias)
    assert _is_ternary(out)
    assert verify_equiv(src, out, BoxDomain((-4, -4), (4, 4)), samples=100, seed=seed).passed


@pytest.mark.parametrize("seed", range(10))
def test_one_dimensional_region_preservation(seed):
    rng = random.Random(200 + seed)
    src = random_integer_net(rng, 1, [rng.randint(1, 4) for _ in range(rng.randint(1, 3))], 5)
    box = BoxDomain((-3,), (3,))
    want = count_regions_1d(src, box).region_count
    for sharing in (False, True):
        out, _ = ternarize_net(IntegerNetProfile(5, src), sharing=sharing)
        assert count_regions_1d(out, box).region_count == want


def test_rejects_non_integer_and_overflow():
    frac = ReluNet(1, (Layer([[F(1, 2)]], [0], Activation.IDENTITY),))
    with pytest.raises(TernarizeError):
        IntegerNetProfile(5, frac)
    big = ReluNet(1, (Layer([[7]], [0], Activation.IDENTITY),), WeightClass.INTEGER)
    with pytest.raises(TernarizeError):
        IntegerNetProfile(5, big)


def test_verify_equiv_reflexive():
    net = random_integer_net(random.Random(0), 2, [3], 5)
    assert verify_equiv(net, net, BoxDomain.unit(2), samples=30).passed


def test_verify_equiv_scalar():
    box = BoxDomain((None,), (None,))
    assert verify_equiv(expand_edge(3, 5), scalar_net(3), box, samples=50, seed=4).passed


def test_verify_equiv_counterexample_is_first_nonzero_sample():
    box = BoxDomain((-1,), (1,))
    verdict = verify_equiv(expand_edge(3, 5), scalar_net(4), box, samples=50, seed=9)
    assert not verdict.passed
    first_nonzero = next(p for p in sample_points(box, 50, 9) if p[0] != 0)
    assert verdict.counterexample == first_nonzero
    assert verdict.left == (3 * first_nonzero[0],) and verdict.right == (4 * first_nonzero[0],)


def test_sampling_is_deterministic():
    box = BoxDomain((0, -1), (1, None))
    assert sample_points(box, 20, 3) == sample_points(box, 20, 3)
    assert all(box.contains(p) for p in sample_points(box, 20, 3))
