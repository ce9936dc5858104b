"""Metrically private measures and differentially private synthetic data."""

__version__ = "0.1.0"

from .errors import ArgumentError, InputError, ResourceError
from .haar import HaarSystem, build_haar, decompose, potential_gap, sample_noise
from .measures import (
    FiniteMetricSpace,
    Net,
    WeightedMeasure,
    build_net,
    cube_space,
    line_space,
    quantize,
    tv_distance,
    wasserstein1_exact,
    wasserstein1_line,
)
from .interval import private_measure_interval, project_to_probability
from .folding import chaining_tree, minimum_spanning_tree, tour_order, tsp_integral_bound
from .metric import choose_delta, private_measure_metric
from .synth import choose_m, dp_synthetic_data, weights_to_empirical
