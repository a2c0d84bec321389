import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_rational_net
from ternary_regions.constructions import build_montufar, build_sawtooth
from ternary_regions.netcore import (
    Activation,
    AffineMap,
    BoxDomain,
    DimensionError,
    Layer,
    NetError,
    ReluNet,
    WeightClass,
    WeightClassError,
    abs_net,
    affine_map_for_pattern,
    compose,
    eval_with_pattern,
    evaluate,
    identity_net,
)
from ternary_regions.ternarize import random_integer_net

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=50)


def test_abs_net_eval():
    assert evaluate(abs_net(), [-2]) == (F(2),)


@pytest.mark.parametrize("x, expected", [(F(1, 4), F(1, 2)), (F(1), F(0))])
def test_sawtooth_p2_eval(x, expected):
    # max{0, 2x} - max{0, 4x - 2} by hand
    by_hand = max(0, 2 * x) - max(0, 4 * x - 2)
    assert by_hand == expected
    assert evaluate(build_sawtooth(2), [x]) == (expected,)


def test_eval_rejects_wrong_length():
    with pytest.raises(DimensionError, match="layer 1"):
        evaluate(abs_net(), [1, 2])


def test_eval_rejects_floats():
    with pytest.raises(TypeError):
        evaluate(abs_net(), [0.5])


def test_layer_chain_mismatch_names_layer():
    with pytest.raises(DimensionError, match="layer 2"):
        ReluNet(1, (Layer([[1], [1]], [0, 0]), Layer([[1, 1, 1]], [0], "identity")))


def test_final_layer_must_be_identity():
    with pytest.raises(NetError):
        ReluNet(1, (Layer([[1]], [0], Activation.RELU),))


def test_zero_preactivation_reads_inactive():
    _, bits = eval_with_pattern(abs_net(), [0])
    assert bits == (False, False)


@pytest.mark.parametrize("pattern, A, b", [
    ((True, False), [[1]], [0]),
    ((False, True), [[-1]], [0]),
])
def test_affine_map_abs(pattern, A, b):
    assert affine_map_for_pattern(abs_net(), pattern) == AffineMap(A, b)


def test_affine_map_sawtooth_both_active():
    # 2x - (4x - 2) = -2x + 2
    assert affine_map_for_pattern(build_sawtooth(2), (True, True)) == AffineMap([[-2]], [2])


def test_affine_map_pattern_length_checked():
    with pytest.raises(DimensionError):
        affine_map_for_pattern(abs_net(), (True,))


def test_compose_identity_outer():
    rng = random.Random(3)
    net = random_rational_net(rng, 1, [3, 2])
    composed = compose(identity_net(1), net)
    for _ in range(20):
        x = [F(rng.randint(-50, 50), rng.randint(1, 9))]
        assert evaluate(composed, x) == evaluate(net, x)


def test_compose_sawtooths():
    h = build_sawtooth(2)
    assert evaluate(compose(h, h), [F(1, 8)]) == (F(1, 2),)


def test_block_chain_equals_montufar():
    # sum-readout o h o h with n0 = 1, p = 2
    h = build_sawtooth(2)
    readout = ReluNet(1, (Layer([[1]], [0], Activation.IDENTITY),))
    chain = compose(readout, compose(h, h))
    target = build_montufar(1, 2, 3)
    rng = random.Random(11)
    for _ in range(50):
        x = [F(rng.randint(0, 997), 997)]
        assert evaluate(chain, x) == evaluate(target, x)


def test_compose_dimension_mismatch():
    two_in = ReluNet(2, (Layer([[1, 1]], [0], "identity"),))
    with pytest.raises(DimensionError):
        compose(two_in, abs_net())


def test_ternary_closure_rejects_mutation():
    net = abs_net()
    assert net.weight_class is WeightClass.TERNARY
    with pytest.raises(WeightClassError):
        net.with_layer(0, Layer([[2], [-1]], [0, 0], Activation.RELU))
    with pytest.raises(Exception):
        net.layers = ()


def test_integer_class_rejects_fractions():
    with pytest.raises(WeightClassError):
        ReluNet(1, (Layer([[F(1, 2)]], [0], "identity"),), WeightClass.INTEGER)


def test_bias_budget_enforced():
    layer = Layer([[1]], [3], "identity")
    ReluNet(1, (layer,), WeightClass.TERNARY, bias_budget=3)
    with pytest.raises(WeightClassError):
        ReluNet(1, (layer,), WeightClass.TERNARY, bias_budget=2)


def test_box_domain_validation():
    with pytest.raises(NetError):
        BoxDomain((1,), (0,))
    box = BoxDomain((None, 0), (1, None))
    assert not box.bounded
    assert len(box.halfspaces()) == 2


@settings(max_examples=60, deadline=None)
@given(x=st.lists(st.integers(-30, 30), min_size=2, max_size=2), seed=st.integers(0, 10**6))
def test_integer_net_on_integer_input_stays_integral(x, seed):
    net = random_integer_net(random.Random(seed), 2, [3, 2], 5)
    assert all(v.denominator == 1 for v in evaluate(net, x))


@settings(max_examples=60, deadline=None)
@given(x=st.lists(rationals, min_size=2, max_size=2), seed=st.integers(0, 10**6))
def test_pattern_map_matches_eval(x, seed):
    net = random_rational_net(random.Random(seed), 2, [3, 3])
    y, bits = eval_with_pattern(net, x)
    assert affine_map_for_pattern(net, bits)(x) == y


@settings(max_examples=60, deadline=None)
@given(x=rationals, seed=st.integers(0, 10**6))
def test_compose_soundness(x, seed):
    rng = random.Random(seed)
    inner = random_rational_net(rng, 1, [2, 3], output_dim=2)
    outer = random_rational_net(rng, 2, [3])
    assert evaluate(compose(outer, inner), [x]) == evaluate(outer, evaluate(inner, [x]))
