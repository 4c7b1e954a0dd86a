import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from vslice_xrl.config import NetworkConfig
from vslice_xrl.env import InvalidActionError, RelaxedAction, project_action
from vslice_xrl.env import kernels

CFG = NetworkConfig()
N, M, W = CFG.num_vehicles, CFG.num_gnbs, CFG.prbs_per_gnb


def assert_feasible(alloc, active=None):
    active = np.ones(N, bool) if active is None else active
    q, B = alloc.q, alloc.prbs
    assert set(np.unique(q)) <= {0, 1}
    assert np.all(q[active].sum(axis=1) == 1)
    assert np.all(q[~active] == 0)
    assert np.all(B >= 0)
    assert np.all(B.sum(axis=0) <= W)
    assert np.all((B == 0) | (q == 1))


def _action(q_rows, b_rows):
    q = np.zeros((N, M))
    b = np.zeros((N, M))
    q[: len(q_rows)] = q_rows
    b[: len(b_rows)] = b_rows
    return RelaxedAction(q, b)


def test_argmax_association():
    alloc = project_action(_action([[0.2, 0.5, 0.3]], [[0.0, 0.5, 0.0]]), CFG)
    assert alloc.association[0] == 1
    assert alloc.q[0].tolist() == [0, 1, 0]


def test_ties_go_to_lowest_index():
    alloc = project_action(_action([[0.4, 0.4, 0.2]], [[0.1, 0.1, 0.1]]), CFG)
    assert alloc.association[0] == 0


def test_proportional_scaling_example():
    # two vehicles on gNB 1 ask for 200 and 150 PRBs: floor(200*273/350), floor(150*273/350)
    q = np.zeros((N, M))
    q[:, 2] = 1.0
    q[0:2] = [1.0, 0.0, 0.0]
    b = np.zeros((N, M))
    b[0, 0] = 200 / 273
    b[1, 0] = 150 / 273
    alloc = project_action(RelaxedAction(q, b), CFG)
    assert alloc.prbs[0, 0] == 156
    assert alloc.prbs[1, 0] == 117
    assert alloc.prbs[:, 0].sum() == 273


def test_request_rounding_half_up():
    b = np.zeros((N, M))
    b[0, 0] = 0.5 / 273  # 0.5 PRB
    q = np.zeros((N, M))
    q[:, 1] = 1
    q[0] = [1, 0, 0]
    alloc = project_action(RelaxedAction(q, b), CFG)
    assert alloc.prbs[0, 0] == 1


def test_nan_rejected():
    q = np.full((N, M), 0.5)
    q[2, 1] = np.nan
    with pytest.raises(InvalidActionError, match="NaN"):
        project_action(RelaxedAction(q, np.zeros((N, M))), CFG)


def test_out_of_range_rejected():
    with pytest.raises(InvalidActionError):
        project_action(RelaxedAction(np.full((N, M), 1.5), np.zeros((N, M))), CFG)


def test_flat_vector_layout():
    vec = np.arange(2 * N * M) / (2 * N * M)
    ra = RelaxedAction.from_vector(vec, N, M)
    assert ra.q[0, 0] == vec[0] and ra.b[0, 0] == vec[N * M]
    np.testing.assert_array_equal(ra.to_vector(), vec)


def test_inactive_vehicle_unassociated():
    active = np.array([True, False, True, True, True])
    alloc = project_action(RelaxedAction(np.full((N, M), 0.5), np.ones((N, M))), CFG, active=active)
    assert_feasible(alloc, active)
    assert alloc.association[1] == -1


@settings(max_examples=300, deadline=None)
@given(
    arrays(np.float64, (N, M), elements=st.floats(0, 1)),
    arrays(np.float64, (N, M), elements=st.floats(0, 1)),
)
def test_projection_feasible_property(q, b):
    assert_feasible(project_action(RelaxedAction(q, b), CFG))


def test_feasible_on_random_actions(rng):
    for _ in range(2000):
        assert_feasible(project_action(RelaxedAction(rng.random((N, M)), rng.random((N, M))), CFG))


def test_numba_and_numpy_projection_agree(rng):
    q = rng.random((500, N, M))
    q[::7, :, 1] = q[::7, :, 0]  # force ties
    b = rng.random((500, N, M))
    active = rng.random((500, N)) < 0.9
    cap = np.full(M, W, dtype=np.int64)
    a1, p1 = kernels.project_loop(q, b, active, cap)
    a2, p2 = kernels.project_numpy(q, b, active, cap)
    np.testing.assert_array_equal(a1, a2)
    np.testing.assert_array_equal(p1, p2)
