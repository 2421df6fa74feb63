import functools

import numpy as np
import pytest

from pinchlab import GridSpec, make_shape, sample_shape


@functools.lru_cache(maxsize=None)
def _sampled(name, params, nodes, level):
    shape = make_shape(name, **{k: (list(v) if isinstance(v, tuple) else v) for k, v in params})
    return sample_shape(shape, GridSpec(nodes=nodes, level=level))


def sampled(name, nodes=64, level=0, **params):
    """Cached sampling keyed by shape name and parameters."""
    key = tuple(sorted((k, tuple(v) if isinstance(v, (list, np.ndarray)) else v) for k, v in params.items()))
    return _sampled(name, key, nodes, level)


# Representative members of every catalog entry, used by "every shape" checks.
CATALOG_CASES = [
    ("round_sphere", {"radius": 1.0}),
    ("round_sphere", {"radius": 2.0, "center": [0.3, -0.2, 0.5]}),
    ("ellipsoid", {"semiaxes": [2.0, 1.0, 1.0]}),
    ("ellipsoid", {"semiaxes": [1.5, 1.2, 0.8]}),
    ("perturbed_sphere", {"amplitude": 0.2}),
    ("perturbed_sphere", {"amplitude": 0.1, "profile": "sectoral"}),
    ("perturbed_sphere", {"amplitude": 0.35}),
    ("geodesic_sphere", {"radius": np.pi / 4}),
    ("geodesic_sphere", {"radius": 0.5, "delta": 4.0}),
    ("perturbed_geodesic_sphere", {"amplitude": 0.1}),
    ("perturbed_geodesic_sphere", {"amplitude": 0.15, "profile": "sectoral", "radius": 0.6}),
]

CATALOG_CASES_3D = [
    ("round_sphere", {"n": 3}),
    ("ellipsoid", {"semiaxes": [2.0, 1.0, 1.0, 1.0]}),
    ("perturbed_sphere", {"amplitude": 0.1, "n": 3}),
    ("geodesic_sphere", {"radius": 0.6, "n": 3}),
    ("perturbed_geodesic_sphere", {"amplitude": 0.1, "n": 3}),
]


def case_id(case):
    name, params = case
    return name + "-" + "-".join(f"{k}={v}" for k, v in params.items() if k != "center")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
