from pathlib import Path

import numpy as np
import pytest

from proxcert.functions import QuadraticSpec, make_least_squares, make_logistic, make_quadratic

CONFIG_PATH = Path(__file__).resolve().parents[1] / "configs" / "quadratic_l1.json"


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


def catalog_oracles():
    """One representative oracle per catalog family, with fixed seeds."""
    r = np.random.default_rng(3)
    a = r.standard_normal((10, 3))
    labels = np.where(r.standard_normal(10) > 0, 1.0, -1.0)
    return {
        "quadratic": make_quadratic(QuadraticSpec(np.array([1.0, 2.5, 10.0]),
                                                  np.array([0.5, -1.0, 2.0]))),
        "least_squares": make_least_squares(r.standard_normal((6, 4)), r.standard_normal(6)),
        "least_squares_rank_deficient": make_least_squares(
            np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]]), np.array([1.0, -1.0])),
        "logistic": make_logistic(a, labels, 0.0),
        "logistic_l2": make_logistic(a, labels, 0.3),
    }


@pytest.fixture(params=sorted(catalog_oracles()))
def catalog_oracle(request):
    return catalog_oracles()[request.param]
