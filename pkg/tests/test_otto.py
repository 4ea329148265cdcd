import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_otto.channel import AffineMap, affine_tomography, with_residual
from casimir_otto.errors import InvalidState, StructureViolation
from casimir_otto.evolve import converged_stroke, stroke_propagator
from casimir_otto.model import SimParams, swap_time
from casimir_otto.otto import (
    convergence_check,
    cycles_to_reach,
    fixed_point,
    iterate,
    iterate_channel,
    iterate_until_converged,
    population_inverted,
    temperature,
    xy_transient_constant,
)

FIG2_STATES = {
    "ground": (0, 0, 1),
    "mixed": (0, 0, 0),
    "thermal": (0, 0, 0.2),
    "plus": (1, 0, 0),
}


@pytest.fixture(scope="module")
def rabi_half():
    return converged_stroke(SimParams(g=0.5, tau=math.pi))


@pytest.fixture(scope="module")
def rabi_half_map(rabi_half):
    return affine_tomography(rabi_half)


def test_iterate_zero_cycles():
    traj = iterate((0.1, 0.2, 0.3), AffineMap(np.eye(3), np.zeros(3)), 0)
    assert len(traj) == 1
    np.testing.assert_array_equal(traj.bloch[0], [0.1, 0.2, 0.3])


def test_iterate_rejects_outside_ball():
    with pytest.raises(InvalidState):
        iterate((1, 1, 0), AffineMap(np.eye(3), np.zeros(3)), 3)


def test_rwa_single_cycle_cooling():
    u = stroke_propagator(SimParams(g=0.5, tau=math.pi, rwa=True, n_max=8))
    traj = iterate((0, 0, -1), affine_tomography(u), 5)
    for r in traj.bloch[1:]:
        np.testing.assert_allclose(r, [0, 0, 1], atol=1e-9)


def test_affine_and_channel_iteration_agree(rabi_half, rabi_half_map):
    for r0 in FIG2_STATES.values():
        a = iterate(r0, rabi_half_map, 60).bloch
        b = iterate_channel(r0, rabi_half, 60).bloch
        assert np.max(np.abs(a - b)) < 1e-10


def test_fig2_states_share_fixed_point(rabi_half_map):
    rep = fixed_point(rabi_half_map)
    tracks = {k: iterate(r0, rabi_half_map, 200).bloch for k, r0 in FIG2_STATES.items()}
    for t in tracks.values():
        assert abs(t[-1, 2] - rep.z_inf) < 1e-8
    assert np.max(np.abs(tracks["plus"][:, 2] - tracks["mixed"][:, 2])) < 1e-12


def test_diagonal_states_stay_diagonal(rabi_half):
    traj = iterate_channel((0, 0, 0.3), rabi_half, 40)
    assert np.max(np.abs(traj.bloch[:, :2])) < 1e-15


def test_fixed_point_examples():
    rep = fixed_point(AffineMap(np.diag([0.0, 0.0, 0.0]), np.array([0, 0, 1.0])))
    assert rep.z_inf == 1 and not rep.degenerate
    ident = fixed_point(AffineMap(np.eye(3), np.zeros(3)))
    assert ident.degenerate and ident.z_inf is None
    rep = fixed_point(AffineMap(np.diag([0.1, 0.1, 0.5]), np.array([0, 0, 0.25])))
    assert rep.z_inf == pytest.approx(0.5)
    assert rep.xy_decay_modulus == pytest.approx(0.1)


def test_fixed_point_identity_from_zero_coupling():
    u = stroke_propagator(SimParams(g=0.0, tau=2.0, n_max=4))
    assert fixed_point(affine_tomography(u)).degenerate


def test_fixed_point_rejects_unstructured_map():
    m = np.diag([0.5, 0.5, 0.5])
    m[2, 0] = 0.1
    with pytest.raises(StructureViolation):
        fixed_point(with_residual(m, [0, 0, 0.2]))


def test_fixed_point_identity(rabi_half_map):
    rep = fixed_point(rabi_half_map)
    assert abs(rep.z_inf * (1 - rep.m_zz) - rep.a_z) < 1e-12


def test_temperature():
    assert temperature(1.0) == 0
    assert temperature(0.0) == math.inf
    assert temperature(0.2, 1.0) == pytest.approx(1 / math.log(1.5), rel=1e-15)
    assert temperature(0.2, 1.0) == pytest.approx(2.4663034623764317)
    assert temperature(0.2, 2.0) == pytest.approx(2 * 2.4663034623764317)
    assert temperature(-0.2) < 0 and population_inverted(-0.2)
    with pytest.raises(InvalidState):
        temperature(1.5)


def test_geometric_law_on_affine_trajectory(rabi_half_map):
    rep = fixed_point(rabi_half_map)
    for r0 in FIG2_STATES.values():
        traj = iterate(r0, rabi_half_map, 80)
        assert convergence_check(traj, rep, rabi_half_map.xy_block) < 1e-10


def test_xy_block_is_not_normal(rabi_half_map):
    """The bare spectral-radius bound fails at the first cycle; the transient constant fixes it."""
    rep = fixed_point(rabi_half_map)
    traj = iterate((1, 0, 0), rabi_half_map, 80)
    assert convergence_check(traj, rep) > 1e-3
    assert xy_transient_constant(rabi_half_map.xy_block) > 1


def test_xy_decay_is_exponential(rabi_half_map):
    rep = fixed_point(rabi_half_map)
    traj = iterate((1, 0, 0), rabi_half_map, 36)
    xy = np.hypot(traj.bloch[:, 0], traj.bloch[:, 1])
    # late enough for the subdominant eigenvalue to fade, early enough to stay
    # above the ~1e-20 floor set by roundoff in a_x, a_y
    rate = np.polyfit(np.arange(20, 37), np.log(xy[20:37]), 1)[0]
    assert rate == pytest.approx(math.log(rep.xy_decay_modulus), abs=5e-3)


def test_slow_convergence_near_unit_m_zz():
    amap = AffineMap(np.diag([0.5, 0.5, 0.99]), np.array([0, 0, 0.005]))
    rep = fixed_point(amap)
    n = cycles_to_reach(rep, 1.0, 1e-3)
    bound = math.log(1e-3 / abs(1.0 - rep.z_inf)) / math.log(0.99)
    assert n > 400 and n > bound
    z = iterate((0, 0, 1), amap, n).bloch[:, 2]
    assert abs(z[-1] - rep.z_inf) < 1e-3 <= abs(z[-2] - rep.z_inf)


def test_iterate_until_converged(rabi_half_map):
    rep = fixed_point(rabi_half_map)
    r, k = iterate_until_converged((0, 0, 1), rabi_half_map)
    assert abs(r[2] - rep.z_inf) < 1e-13 and k < 100


@settings(max_examples=30, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_initial_state_independence(x, y, z):
    r0 = np.array([x, y, z])
    if np.linalg.norm(r0) > 1:
        r0 /= np.linalg.norm(r0)
    amap = _MAP
    rep = fixed_point(amap)
    end = iterate(r0, amap, 400).bloch[-1]
    np.testing.assert_allclose(end, [0, 0, rep.z_inf], atol=1e-8)


_MAP = affine_tomography(converged_stroke(SimParams(g=0.5, tau=math.pi)))
