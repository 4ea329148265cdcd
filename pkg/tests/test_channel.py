import math

import numpy as np
import pytest

from casimir_otto.channel import (
    AffineMap,
    affine_tomography,
    apply_cycle,
    choi_of,
    choi_output_trace,
    embed_vacuum,
    is_cptp,
    structure_residual,
    tomography_of,
    with_residual,
)
from casimir_otto.errors import InvalidOperator
from casimir_otto.evolve import converged_stroke, stroke_propagator
from casimir_otto.model import SimParams, swap_time
from casimir_otto.operators import bloch_of, density_of, partial_trace_osc


@pytest.fixture(scope="module")
def rabi_half():
    return converged_stroke(SimParams(g=0.5, tau=math.pi))


def random_ball(rng, n):
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    return v * rng.uniform(0, 1, size=(n, 1)) ** (1 / 3)


def test_identity_propagator_leaves_qubit_unchanged():
    u = np.eye(10)
    rho = density_of(np.array([0.3, -0.2, 0.5]))
    np.testing.assert_allclose(apply_cycle(rho, u), rho, atol=1e-15)
    amap = affine_tomography(u)
    np.testing.assert_allclose(amap.m, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(amap.a, 0, atol=1e-15)


def test_rwa_swap_resets_excited_qubit():
    u = stroke_propagator(SimParams(g=0.5, tau=swap_time(0.5), rwa=True, n_max=8))
    out = apply_cycle(np.diag([0, 1]).astype(complex), u)
    np.testing.assert_allclose(out, np.diag([1, 0]), atol=1e-10)


def test_full_rabi_heats_ground_qubit(rabi_half):
    out = apply_cycle(np.diag([1, 0]).astype(complex), rabi_half)
    assert bloch_of(out).z < 1


def test_apply_cycle_matches_literal_embedding(rabi_half):
    rho_q = density_of(np.array([0.1, 0.4, -0.6]))
    joint = embed_vacuum(rho_q, rabi_half.n_max)
    u = rabi_half.u
    literal = partial_trace_osc(u @ joint.rho @ u.conj().T, rabi_half.n_max)
    np.testing.assert_allclose(apply_cycle(rho_q, rabi_half), literal, atol=1e-14)


def test_apply_cycle_dimension_errors():
    with pytest.raises(InvalidOperator):
        apply_cycle(np.eye(3) / 3, np.eye(10))
    with pytest.raises(InvalidOperator):
        apply_cycle(np.eye(2) / 2, np.eye(7))


def test_affine_map_reproduces_channel(rabi_half):
    amap = affine_tomography(rabi_half)
    for r in random_ball(np.random.default_rng(7), 50):
        direct = bloch_of(apply_cycle(density_of(r), rabi_half)).as_array()
        assert np.max(np.abs(direct - amap(r))) < 1e-10


def test_rwa_swap_map():
    amap = affine_tomography(stroke_propagator(SimParams(g=0.5, tau=math.pi, rwa=True, n_max=8)))
    assert abs(amap.m_zz) < 1e-9 and abs(amap.a_z - 1) < 1e-9


def test_structure_residual():
    assert structure_residual(AffineMap(np.eye(3), np.zeros(3))) == 0
    m = np.eye(3)
    m[0, 2] = 0.3
    assert structure_residual(AffineMap(m, np.zeros(3))) == pytest.approx(0.3)
    assert with_residual(np.eye(3), [0, -0.2, 0]).residual == pytest.approx(0.2)


def test_tomography_structure(rabi_half):
    assert affine_tomography(rabi_half).residual < 1e-9


def test_choi_identity_and_depolarizing():
    phi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    ident = choi_of(AffineMap(np.eye(3), np.zeros(3)))
    np.testing.assert_allclose(ident, 2 * np.outer(phi, phi), atol=1e-15)
    depol = choi_of(AffineMap(np.zeros((3, 3)), np.zeros(3)))
    np.testing.assert_allclose(depol, np.eye(4) / 2, atol=1e-15)


def test_choi_of_cycle_is_cptp(rabi_half):
    amap = affine_tomography(rabi_half)
    choi = choi_of(amap)
    assert np.max(np.abs(choi - choi.conj().T)) < 1e-14
    assert abs(np.trace(choi) - 2) < 1e-12
    assert np.linalg.eigvalsh(choi).min() > -1e-8
    np.testing.assert_allclose(choi_output_trace(choi), np.eye(2), atol=1e-9)
    assert is_cptp(amap)


def test_non_cp_map_detected():
    # a transpose-like map is positive but not completely positive
    assert not is_cptp(AffineMap(np.diag([1.0, -1.0, 1.0]), np.zeros(3)))


def test_image_of_ball_stays_in_ball(rabi_half):
    amap = affine_tomography(rabi_half)
    for r in random_ball(np.random.default_rng(8), 200):
        assert np.linalg.norm(amap(r)) <= 1 + 1e-9


@pytest.mark.parametrize("window", ["rect", "hamming"])
def test_two_cycles_compose(window):
    p = SimParams(g=0.7, tau=0.8 * swap_time(0.7), window=window, alpha=2.0, n_max=16)
    u = stroke_propagator(p)
    once = affine_tomography(u)
    twice = tomography_of(lambda rho: apply_cycle(apply_cycle(rho, u), u))
    composed = once.compose(once)
    assert np.max(np.abs(twice.m - composed.m)) < 1e-9
    assert np.max(np.abs(twice.a - composed.a)) < 1e-9


def test_kraus_form_matches_cycle():
    from casimir_otto.channel import apply_cycle, kraus_operators
    from casimir_otto.evolve import stroke_propagator
    from casimir_otto.model import SimParams
    from casimir_otto.operators import density_of

    prop = stroke_propagator(SimParams(g=0.4, tau=2.0, n_max=10))
    kraus = kraus_operators(prop)
    completeness = sum(k.conj().T @ k for k in kraus)
    assert np.allclose(completeness, np.eye(2), atol=1e-12)
    rho = density_of(np.array([0.3, -0.2, 0.5]))
    via_kraus = sum(k @ rho @ k.conj().T for k in kraus)
    assert np.allclose(via_kraus, apply_cycle(rho, prop), atol=1e-14)
