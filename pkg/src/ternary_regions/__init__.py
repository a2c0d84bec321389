"""Exact linear-region toolkit for standard and ternary ReLU regression networks."""

from .constructions import (
    bound_tradeoff_report,
    build_montufar,
    build_sawtooth,
    build_ternary,
    build_ternary_theorem1,
    lower_bound_montufar,
    lower_bound_ternary,
    montufar_equivalent,
)
from .netcore import (
    Activation,
    AffineMap,
    BoxDomain,
    Layer,
    ReluNet,
    WeightClass,
    affine_map_for_pattern,
    compose,
    eval_with_pattern,
    evaluate,
)
from .regions import (
    check_composition_lemma,
    count_regions_1d,
    count_regions_exact,
    enumerate_cells,
    estimate_regions_grid,
)
from .ternarize import IntegerNetProfile, expand_edge, ternarize_net, verify_equiv

__version__ = "0.1.0"
