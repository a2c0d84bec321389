import random
import re
from fractions import Fraction as F

import pytest

from helpers import random_rational_net
from ternary_regions.constructions import build_montufar
from ternary_regions.netcore import Activation, BoxDomain, DimensionError, Layer, ReluNet, abs_net
from ternary_regions.plot import cell_polygon, plot_regions_svg, polygon, polygon_area
from ternary_regions.regions import count_regions_exact, enumerate_cells


def _paths(svg):
    return re.findall(r'<path class="region"[^>]*>', svg)


def abs_x1():
    return ReluNet(2, (
        Layer([[1, 0], [-1, 0]], [0, 0], Activation.RELU),
        Layer([[1, 1]], [0], Activation.IDENTITY),
    ))


def test_montufar_2d_sixteen_paths():
    net = build_montufar(2, 4, 3)
    svg = plot_regions_svg(enumerate_cells(net, BoxDomain.unit(2)), BoxDomain.unit(2))
    assert svg.startswith("<svg")
    assert len(_paths(svg)) == 16 == count_regions_exact(net, BoxDomain.unit(2)).region_count


def test_single_affine_net_is_the_box():
    net = ReluNet(2, (Layer([[1, 2]], [3], Activation.IDENTITY),))
    box = BoxDomain((0, 0), (2, 1))
    (cell,) = enumerate_cells(net, box)
    assert set(cell_polygon(cell, box)) == {(0, 0), (2, 0), (2, 1), (0, 1)}
    assert len(_paths(plot_regions_svg([cell], box))) == 1


def test_abs_of_first_coordinate_splits_at_zero():
    box = BoxDomain((-1, -1), (1, 1))
    cells = enumerate_cells(abs_x1(), box)
    assert len(_paths(plot_regions_svg(cells, box))) == 2
    polys = [set(cell_polygon(c, box)) for c in cells]
    assert {(0, -1), (0, 1)} <= polys[0] and {(0, -1), (0, 1)} <= polys[1]


@pytest.mark.parametrize("seed", range(6))
def test_cell_areas_tile_the_box(seed):
    net = random_rational_net(random.Random(seed), 2, [3, 2])
    box = BoxDomain((-2, -1), (2, 3))
    cells = enumerate_cells(net, box)
    total = sum(polygon_area(cell_polygon(c, box)) for c in cells)
    assert total == 16
    assert all(polygon_area(cell_polygon(c, box)) > 0 for c in cells)


def test_polygon_counter_clockwise_square():
    rows = [((F(-1), F(0)), F(0)), ((F(1), F(0)), F(1)), ((F(0), F(-1)), F(0)), ((F(0), F(1)), F(1))]
    poly = polygon(rows)
    assert len(poly) == 4 and polygon_area(poly) == 1
    # shoelace sum is positive for counter-clockwise order
    n = len(poly)
    assert sum(poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1] for i in range(n)) > 0


def test_precision_controls_digits():
    # kink at x1 = 1 lands at pixel 100/3
    net = ReluNet(2, (Layer([[1, 0]], [-1], Activation.RELU), Layer([[1]], [0], Activation.IDENTITY)))
    box = BoxDomain((0, 0), (3, 3))
    cells = enumerate_cells(net, box)
    svg = plot_regions_svg(cells, box, size=100, precision=3)
    assert "33.3" in svg and "33.33" not in svg


def test_colour_keyed_by_affine_map():
    box = BoxDomain((-1, -1), (1, 1))
    cells = enumerate_cells(abs_x1(), box)
    colours = re.findall(r'fill="(#[0-9a-f]{6})"', plot_regions_svg(cells, box))
    assert len(set(colours)) == 2
    again = re.findall(r'fill="(#[0-9a-f]{6})"', plot_regions_svg(cells, box))
    assert colours == again


def test_rejects_wrong_dimension():
    with pytest.raises(DimensionError):
        plot_regions_svg(enumerate_cells(abs_net(), BoxDomain.interval(-1, 1)), BoxDomain.interval(-1, 1))
