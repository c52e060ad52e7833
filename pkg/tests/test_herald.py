import numpy as np
import pytest

from spinqubit.herald import (
    HeraldConfig,
    JONES_H,
    JONES_SIGMA_MINUS,
    JONES_SIGMA_PLUS,
    JONES_V,
    ProjectionError,
    atom_photon_state,
    herald_record,
    herald_sampler,
    herald_spinwave,
    misaligned_polarization,
    project_idler,
    readout_map,
    target_idler_polarization,
)
from spinqubit.linalg import (
    KET_DOWN,
    KET_UP,
    projector,
    pure_state,
    state_fidelity,
    stokes_from_rho,
)


def test_atom_photon_amplitudes():
    joint = atom_photon_state()
    assert np.linalg.norm(joint) == pytest.approx(1.0, abs=1e-15)
    assert joint[0] == pytest.approx(np.sqrt(2 / 5))
    assert joint[3] == pytest.approx(-np.sqrt(3 / 5))
    assert joint[1] == joint[2] == 0


def test_target_polarization_special_cases():
    pol = target_idler_polarization(0.0, 0.0)
    expect = np.array([1, 1j]) / np.sqrt(2)
    assert abs(abs(np.vdot(pol, expect)) - 1.0) < 1e-12

    pol = target_idler_polarization(np.pi / 2, 0.0)
    expect = np.array([-1, 1j]) / np.sqrt(2)
    assert abs(abs(np.vdot(pol, expect)) - 1.0) < 1e-12

    # theta = pi/4, phi = 0: unnormalized (sqrt(3/5)-sqrt(2/5))/sqrt(2) on H
    pol = target_idler_polarization(np.pi / 4, 0.0)
    raw = np.array([(np.sqrt(3 / 5) - np.sqrt(2 / 5)) / np.sqrt(2),
                    1j * (np.sqrt(3 / 5) + np.sqrt(2 / 5)) / np.sqrt(2)])
    raw = raw / np.linalg.norm(raw)
    assert np.allclose(pol, raw)


def test_sigma_projections_herald_poles():
    joint = atom_photon_state()
    psi, p = project_idler(joint, JONES_SIGMA_PLUS)
    assert p == pytest.approx(2 / 5, abs=1e-12)
    assert abs(abs(np.vdot(psi, KET_DOWN)) - 1.0) < 1e-12
    psi, p = project_idler(joint, JONES_SIGMA_MINUS)
    assert p == pytest.approx(3 / 5, abs=1e-12)
    assert abs(abs(np.vdot(psi, KET_UP)) - 1.0) < 1e-12


def test_roundtrip_grid():
    # 17x17 grid over (theta, phi): heralded state matches the target
    joint = atom_photon_state()
    for theta in np.linspace(0, np.pi, 17):
        for phi in np.linspace(0, 2 * np.pi, 17, endpoint=False):
            pol = target_idler_polarization(theta, phi)
            psi, _ = project_idler(joint, pol)
            target = pure_state(theta, phi)
            fid = abs(np.vdot(psi, target)) ** 2
            assert fid > 1 - 1e-10, (theta, phi)


def test_projection_completeness():
    joint = atom_photon_state()
    rng = np.random.default_rng(4)
    for _ in range(50):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        orth = np.array([-np.conj(v[1]), np.conj(v[0])])
        total = 0.0
        for pol in (v, orth):
            try:
                _, p = project_idler(joint, pol)
            except ProjectionError:
                p = 0.0
            total += p
        assert total == pytest.approx(1.0, abs=1e-12)


def test_incompatible_projection_raises():
    # a joint state holding only |down, sig+>: the orthogonal idler never clicks
    joint = np.array([1.0, 0, 0, 0], dtype=complex)
    with pytest.raises(ProjectionError):
        project_idler(joint, JONES_SIGMA_MINUS)


def test_misalignment_scans_fidelity():
    psi0, _ = herald_spinwave(np.pi / 4, 0.0)
    psi, _ = herald_spinwave(np.pi / 4, 0.0, misalignment=0.1)
    assert abs(np.vdot(psi0, psi)) ** 2 < 1.0
    pol = target_idler_polarization(0.3, 1.0)
    rotated = misaligned_polarization(pol, 0.2)
    assert abs(np.vdot(pol, rotated)) == pytest.approx(np.cos(0.2), abs=1e-12)


def test_herald_sampler_edges_and_stats():
    assert herald_sampler(HeraldConfig(0.0, 1000, seed=1))[0] == 0
    count, idx = herald_sampler(HeraldConfig(1.0, 1000, seed=1))
    assert count == 1000 and np.array_equal(idx, np.arange(1000))
    # paper heralding probability: mean over seeds within 5 sigma of binomial
    p, n = 3e-3, 10**6
    counts = [herald_sampler(HeraldConfig(p, n, seed=s))[0] for s in range(100)]
    std = np.sqrt(n * p * (1 - p))
    assert abs(np.mean(counts) - n * p) < 5 * std / np.sqrt(100)
    again = [herald_sampler(HeraldConfig(p, n, seed=s))[0] for s in range(100)]
    assert counts == again


def test_readout_map_pure_down():
    rho_sig, frac = readout_map(projector(KET_DOWN))
    assert frac == 1.0
    # first basis vector of the output is the sig- polarization
    assert np.allclose(rho_sig, np.diag([1.0, 0.0]))


def test_readout_map_aux_loss():
    rho3 = np.diag([0.45, 0.45, 0.10]).astype(complex)
    rho_sig, frac = readout_map(rho3)
    assert frac == pytest.approx(0.9, abs=1e-12)
    assert np.allclose(rho_sig, np.diag([0.5, 0.5]))
    with pytest.raises(ValueError):
        readout_map(np.diag([0.0, 0.0, 1.0]).astype(complex))


def test_readout_preserves_bloch_direction():
    rng = np.random.default_rng(12)
    for _ in range(50):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        rho = projector(v)
        rho_sig, _ = readout_map(rho)
        assert state_fidelity(rho, rho_sig) > 1 - 1e-12
        assert np.allclose(stokes_from_rho(rho), stokes_from_rho(rho_sig))


def test_h_projection_is_near_a_state():
    psi, _ = project_idler(atom_photon_state(), JONES_H)
    a_state = np.array([1, -1]) / np.sqrt(2)
    assert abs(np.vdot(psi, a_state)) ** 2 == pytest.approx(0.99, abs=0.005)


def test_herald_record_schema():
    rec = herald_record(0.7, 1.1)
    assert set(rec) == {"theta", "phi", "jones", "success_probability"}
    assert np.isclose(sum(re**2 + im**2 for re, im in rec["jones"]), 1.0)
