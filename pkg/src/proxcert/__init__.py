"""Proximal gradient method with per-run certification of its worst-case rates."""

from .certify import (CertificationReport, CheckResult, certify_trace, random_suite,
                      tightness_measurement, worst_case_instance)
from .functions import (QuadraticSpec, SmoothOracle, make_least_squares, make_logistic,
                        make_quadratic)
from .pg import CompositeProblem, Trace, phi_value, prox_grad_map, run_pg
from .prox import (BoxIndicator, ElasticNet, L1Norm, NonsmoothOracle, ZeroFunction,
                   subdiff_distance, zero_oracle)
from .rates import pl_gap_bound, refined_descent_slack, rho

__version__ = "0.1.0"
