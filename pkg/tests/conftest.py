import json
import math

import numpy as np
import pytest
from hypothesis import strategies as st

from qclab.models.schemas import Convention, SpacetimePoint, StateKind, StateSpec
from qclab.services.correlation.conservation import CoherenceTensors
from qclab.services.correlation.correlators import FixedSlotProducts
from qclab.services.quantum.fock import build_fock_space, make_state
from qclab.services.quantum.modes import build_mode_set

BOX = 2 * math.pi

finite = st.floats(min_value=0.0, max_value=BOX, allow_nan=False, allow_infinity=False)
point_strategy = st.builds(
    lambda x, y, z, t: SpacetimePoint(r=(x, y, z), t=t), finite, finite, finite, finite
)
amplitude_strategy = st.tuples(
    st.floats(min_value=-0.4, max_value=0.4, allow_nan=False),
    st.floats(min_value=-0.4, max_value=0.4, allow_nan=False),
)


def coherent(*amplitudes) -> StateSpec:
    return StateSpec(kind=StateKind.COHERENT, amplitudes=[list(a) for a in amplitudes])


def random_points(count: int, seed: int = 7, period: float = BOX):
    rng = np.random.default_rng(seed)
    return [
        SpacetimePoint(r=tuple(float(v) for v in rng.uniform(0, BOX, 3)), t=float(rng.uniform(0, period)))
        for _ in range(count)
    ]


@pytest.fixture
def mode_set():
    """Two modes along different axes with different frequencies"""
    return build_mode_set(BOX, [((1, 0, 0), 1), ((0, 1, 1), 2)])


@pytest.fixture
def mode_set_c2():
    return build_mode_set(BOX, [((1, 0, 0), 1), ((0, 1, 1), 2)], c=2.0)


@pytest.fixture
def space():
    return build_fock_space(2, [5, 5])


@pytest.fixture
def fixed_points():
    return [
        SpacetimePoint(r=(0.3, 1.1, 2.0), t=0.2),
        SpacetimePoint(r=(1.7, 0.4, 0.9), t=0.5),
        SpacetimePoint(r=(2.5, 2.2, 0.6), t=0.9),
    ]


@pytest.fixture
def sample_points():
    return random_points(8)


@pytest.fixture
def coherent_rho(space):
    return make_state(space, coherent((0.3, 0.0), (0.2, 0.25)))


@pytest.fixture
def vacuum_rho(space):
    return make_state(space, StateSpec(kind=StateKind.VACUUM))


@pytest.fixture
def fock1_rho(space):
    return make_state(space, StateSpec(kind=StateKind.FOCK, occupations=[1, 0]))


@pytest.fixture
def mixture_rho(space):
    spec = StateSpec(
        kind=StateKind.MIXTURE,
        weights=[0.5, 0.5],
        components=[coherent((0.3, 0.0), (0.2, 0.25)), StateSpec(kind=StateKind.VACUUM)],
    )
    return make_state(space, spec)


@pytest.fixture
def scenario_data():
    """A small two-mode scenario as raw JSON data"""
    return {
        "name": "small",
        "mode_set": {
            "box_length": BOX,
            "modes": [{"n": [1, 0, 0], "pol_index": 1}, {"n": [0, 1, 1], "pol_index": 2}],
        },
        "cutoffs": [4, 4],
        "states": [
            {"name": "vacuum", "spec": {"kind": "vacuum"}},
            {"name": "coherent", "spec": {"kind": "coherent", "amplitudes": [[0.2, 0.0], [0.1, 0.1]]}},
        ],
        "fixed_points": [
            {"r": [0.3, 1.1, 2.0], "t": 0.2},
            {"r": [1.7, 0.4, 0.9], "t": 0.5},
            {"r": [2.5, 2.2, 0.6], "t": 0.9},
        ],
        "sampling": {"seed": 3, "count": 4},
        "identities": ["eq2_5", "eq7", "eq11", "eq23", "eq24", "oracle_dense", "oracle_wick"],
        "conventions": "both",
    }


@pytest.fixture
def scenario_file(tmp_path, scenario_data):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(scenario_data), encoding="utf-8")
    return path


@pytest.fixture
def tensor_factory(space, mode_set, fixed_points):
    """Build CoherenceTensors for a state and convention on the shared fixtures"""
    products = FixedSlotProducts(space, mode_set)

    def build(rho, convention=Convention.DERIVATION_13, ms=None, points=None):
        ms = ms or mode_set
        return CoherenceTensors.build(
            convention,
            rho,
            space,
            ms,
            points or fixed_points,
            products if ms is mode_set and points is None else None,
        )

    return build
