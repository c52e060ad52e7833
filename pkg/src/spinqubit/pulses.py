"""Rotation gates, pulse compilation and three-level time evolution.

Two elemental operations drive the stored qubit:

* a Larmor hold, during which the qubit precesses about z and the gate is
  exactly ``diag(e^{i w_L t}, 1)``;
* a resonant Raman pulse, which rotates about an equatorial axis set by
  the relative beam phase phi_R, with gate
  ``[[cos(Wt/2), -i e^{i phi_R} sin(Wt/2)], [-i e^{-i phi_R} sin(Wt/2), cos(Wt/2)]]``.

Arbitrary rotations are compiled into Larmor/Raman sequences through a
Z-Y-Z Euler decomposition.  The three-level model adds the auxiliary
ground sublevel that the Raman beams couple off-resonantly; population
there is invisible to readout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .linalg import (
    LinalgError,
    SIGMA_X,
    SIGMA_Y,
    hermitian_eig,
    matrix_exp_i,
    substream,
)

LARMOR_HOLD = "larmor_hold"
RAMAN_PULSE = "raman_pulse"

#: Basis order of all three-level objects: (|down>, |up>, |aux>).
DIM3 = 3


@dataclass(frozen=True)
class PulseSpec:
    """One control segment: a Larmor hold or a Raman pulse.

    duration in seconds; rabi, larmor and aux_detuning in rad/s; phase in
    rad.  rabi/phase apply to Raman pulses only, larmor to holds only;
    aux_detuning is the |up>-|aux> splitting seen during Raman pulses.
    """

    kind: str
    duration: float
    rabi: float = 0.0
    phase: float = 0.0
    larmor: float = 0.0
    aux_detuning: float = 0.0

    def __post_init__(self):
        if self.kind not in (LARMOR_HOLD, RAMAN_PULSE):
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.duration < 0:
            raise ValueError("pulse duration must be >= 0")
        if self.rabi < 0:
            raise ValueError("Rabi frequency must be >= 0")

    def to_json(self):
        return {
            "kind": self.kind,
            "duration_s": self.duration,
            "rabi_rad_s": self.rabi,
            "phase_rad": self.phase,
            "larmor_rad_s": self.larmor,
            "aux_detuning_rad_s": self.aux_detuning,
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            kind=d["kind"],
            duration=d["duration_s"],
            rabi=d["rabi_rad_s"],
            phase=d["phase_rad"],
            larmor=d["larmor_rad_s"],
            aux_detuning=d["aux_detuning_rad_s"],
        )


@dataclass(frozen=True)
class RotationSpec:
    """Target rotation exp(-i angle n.sigma) about the unit axis n."""

    axis: tuple
    angle: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise ValueError("rotation axis must be unit norm")
        object.__setattr__(self, "axis", tuple(axis))

    def unitary(self):
        n = np.asarray(self.axis)
        n_sigma = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * np.diag([1.0, -1.0])
        return matrix_exp_i(n_sigma.astype(complex), self.angle)


@dataclass(frozen=True)
class NoiseModel:
    """Shot-to-shot control noise and uncorrelated background counts.

    rabi_fractional_sigma: Gaussian fractional error of the Raman Rabi
    frequency, one draw per shot.  larmor_sigma (rad/s): Gaussian jitter
    of the Larmor frequency per shot; during Raman pulses it appears as a
    residual two-photon detuning.  background_rate: expected uncorrelated
    counts per shot and detector, see tomography.simulate_counts.
    idler_misalignment (rad): systematic rotation of the idler projection
    polarization away from its target.
    """

    rabi_fractional_sigma: float = 0.0
    larmor_sigma: float = 0.0
    background_rate: float = 0.0
    idler_misalignment: float = 0.0

    def __post_init__(self):
        for name in ("rabi_fractional_sigma", "larmor_sigma", "background_rate",
                     "idler_misalignment"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def zero(cls):
        return cls()


class EulerAngles(NamedTuple):
    """Angles of u = e^{i delta} L(alpha) R_y(beta) L(gamma), with L the
    Larmor matrix diag(e^{i a}, 1) and R_y the phi_R = -pi/2 Raman gate."""

    alpha: float
    beta: float
    gamma: float
    delta: float


def r_z(t_l, omega_l):
    """Larmor gate diag(e^{i omega_l t_l}, 1)."""
    if t_l < 0:
        raise ValueError("Larmor duration must be >= 0")
    return np.diag([np.exp(1j * omega_l * t_l), 1.0]).astype(complex)


def r_n(t_r, omega_r, phi_r):
    """Raman gate for pulse area omega_r * t_r about the equatorial axis
    (cos phi_r, -sin phi_r, 0)."""
    if t_r < 0:
        raise ValueError("Raman duration must be >= 0")
    half = omega_r * t_r / 2
    c, s = np.cos(half), np.sin(half)
    return np.array(
        [[c, -1j * np.exp(1j * phi_r) * s],
         [-1j * np.exp(-1j * phi_r) * s, c]]
    )


def _larmor_y(beta):
    # R_y(beta) as realized by a phi_R = -pi/2 Raman pulse of area beta
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def zyz_decompose(u, tol=1e-9):
    """Euler angles (alpha, beta, gamma, delta) with
    u = e^{i delta} L(alpha) R_y(beta) L(gamma) and beta in [0, pi].

    L is the Larmor z-gate diag(e^{i a}, 1).  For the identity the
    canonical all-zero angles are returned; whenever a z-angle is
    underdetermined (beta = 0 or pi) gamma is set to 0.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise LinalgError("zyz_decompose expects a 2x2 unitary")
    if np.max(np.abs(u.conj().T @ u - np.eye(2))) > tol:
        raise LinalgError("zyz_decompose requires a unitary matrix")

    beta = 2 * np.arctan2(abs(u[1, 0]), abs(u[1, 1]))
    tiny = 1e-15
    if abs(u[1, 1]) > tiny:
        delta = float(np.angle(u[1, 1]))
        gamma = float(np.angle(u[1, 0]) - delta) if abs(u[1, 0]) > tiny else 0.0
        alpha = float(np.angle(-u[0, 1]) - delta) if abs(u[0, 1]) > tiny else float(
            np.angle(u[0, 0]) - gamma - delta)
    else:
        # beta = pi: the lower-right entry carries no phase information
        delta = float(np.angle(u[1, 0]))
        gamma = 0.0
        alpha = float(np.angle(-u[0, 1]) - delta)
    return EulerAngles(alpha, float(beta), gamma, delta)


def euler_unitary(angles):
    """Reconstruct the unitary from zyz_decompose output."""
    a = angles
    return np.exp(1j * a.delta) * (
        np.diag([np.exp(1j * a.alpha), 1.0]) @ _larmor_y(a.beta)
        @ np.diag([np.exp(1j * a.gamma), 1.0])
    )


def _larmor_hold(phase, omega_l, aux_detuning=0.0):
    # minimal non-negative duration realizing the requested z phase
    duration = float(np.mod(phase, 2 * np.pi) / omega_l)
    return PulseSpec(LARMOR_HOLD, duration, larmor=omega_l,
                     aux_detuning=aux_detuning)


def compile_rotation(spec, omega_r, omega_l, aux_detuning=0.0):
    """Compile exp(-i angle n.sigma) into a Larmor/Raman pulse sequence.

    Pure z rotations become a single Larmor hold, equatorial rotations a
    single Raman pulse, anything else the three-pulse Z-Y-Z sequence from
    zyz_decompose (global phase dropped).  Returned durations are minimal
    non-negative representatives; Larmor phases are reduced mod 2 pi.
    """
    if omega_r <= 0 or omega_l <= 0:
        raise ValueError("compile_rotation needs positive control frequencies")
    n = np.asarray(spec.axis, dtype=float)
    bloch_angle = 2 * spec.angle

    if abs(n[0]) < 1e-14 and abs(n[1]) < 1e-14:
        # z axis: Larmor phase -bloch_angle for n_z = +1 (matrix form
        # diag(e^{i a},1) rotates the Bloch vector by -a about z)
        return [_larmor_hold(-np.sign(n[2]) * bloch_angle, omega_l, aux_detuning)]

    if abs(n[2]) < 1e-14:
        phi_r = float(-np.arctan2(n[1], n[0]))
        area = float(np.mod(bloch_angle, 4 * np.pi))
        return [PulseSpec(RAMAN_PULSE, area / omega_r, rabi=omega_r,
                          phase=phi_r, larmor=omega_l, aux_detuning=aux_detuning)]

    angles = zyz_decompose(spec.unitary())
    return [
        _larmor_hold(angles.gamma, omega_l, aux_detuning),
        PulseSpec(RAMAN_PULSE, angles.beta / omega_r, rabi=omega_r,
                  phase=-np.pi / 2, larmor=omega_l, aux_detuning=aux_detuning),
        _larmor_hold(angles.alpha, omega_l, aux_detuning),
    ]


def pulse_unitary_2level(pulse):
    """Ideal two-level gate of one pulse (aux level ignored)."""
    if pulse.kind == LARMOR_HOLD:
        return r_z(pulse.duration, pulse.larmor)
    return r_n(pulse.duration, pulse.rabi, pulse.phase)


def sequence_unitary_2level(pulses):
    u = np.eye(2, dtype=complex)
    for p in pulses:
        u = pulse_unitary_2level(p) @ u
    return u


def qutrit_hamiltonian(pulse, rabi_scale=1.0, larmor_offset=0.0):
    """Rotating-frame Hamiltonian of a Raman pulse on (|down>, |up>, |aux>).

    The qubit block is resonant (the light shift cancels the qubit Zeeman
    splitting) and couples at the pulse Rabi frequency with phase phi_R;
    the |up> <-> |aux> coupling has equal Rabi frequency but opposite
    helicity order, hence phase -phi_R, and sits at detuning aux_detuning.
    rabi_scale and larmor_offset fold in per-shot noise draws: a field
    offset d shifts |down> by +d and |aux> (opposite Zeeman slope) by -d.
    """
    if pulse.kind != RAMAN_PULSE:
        raise ValueError("qutrit_hamiltonian is defined for Raman pulses only")
    omega = pulse.rabi * rabi_scale
    h = np.zeros((3, 3), dtype=complex)
    h[0, 1] = omega / 2 * np.exp(1j * pulse.phase)
    h[1, 0] = np.conj(h[0, 1])
    h[2, 1] = omega / 2 * np.exp(-1j * pulse.phase)
    h[1, 2] = np.conj(h[2, 1])
    h[0, 0] = larmor_offset
    h[2, 2] = pulse.aux_detuning - larmor_offset
    return h


def _larmor_unitary_3level(pulse, larmor_offset=0.0):
    # phase +wt on |down> per the printed z gate; |aux> (m_F of opposite
    # sign) accumulates the opposite phase, |up> (zero moment) none
    phase = (pulse.larmor + larmor_offset) * pulse.duration
    return np.diag([np.exp(1j * phase), 1.0, np.exp(-1j * phase)]).astype(complex)


def pulse_unitary_3level(pulse, rabi_scale=1.0, larmor_offset=0.0):
    if pulse.kind == LARMOR_HOLD:
        return _larmor_unitary_3level(pulse, larmor_offset)
    h = qutrit_hamiltonian(pulse, rabi_scale, larmor_offset)
    return matrix_exp_i(h, pulse.duration)


def embed_qubit(rho2):
    """Embed a qubit density matrix into the three-level space (aux empty)."""
    rho3 = np.zeros((3, 3), dtype=complex)
    rho3[:2, :2] = rho2
    return rho3


def evolve(state, pulses, noise, shots=1, seed=0):
    """Monte Carlo average of the pulse sequence applied to a three-level state.

    Each shot draws one Rabi scale factor and one Larmor offset from the
    noise model (quasi-static: constant within the shot) and propagates the
    state through every pulse.  With zero noise the result is the exact
    unitary propagation for any shot count.  Deterministic per seed; shot
    substreams are derived as substream(seed, shot), so the average does
    not depend on evaluation order.
    """
    state = np.asarray(state, dtype=complex)
    if state.shape != (3, 3):
        raise ValueError("evolve expects a 3x3 density matrix")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not pulses:
        return state.copy()

    quiet = noise.rabi_fractional_sigma == 0 and noise.larmor_sigma == 0
    if quiet:
        u = np.eye(3, dtype=complex)
        for p in pulses:
            u = pulse_unitary_3level(p) @ u
        return u @ state @ u.conj().T

    acc = np.zeros((3, 3), dtype=complex)
    for shot in range(shots):
        rng = substream(seed, shot)
        scale = 1.0 + noise.rabi_fractional_sigma * rng.normal()
        offset = noise.larmor_sigma * rng.normal()
        u = np.eye(3, dtype=complex)
        for p in pulses:
            u = pulse_unitary_3level(p, rabi_scale=scale, larmor_offset=offset) @ u
        acc += u @ state @ u.conj().T
    return acc / shots


def peak_aux_population(omega, delta, n_steps=4001):
    """Peak population lost to |aux> during Rabi flopping, from |up>.

    Numerically integrates the |up> <-> |aux> leakage channel of the
    qutrit Hamiltonian (coupling omega, detuning delta) over two
    generalized Rabi periods and returns the maximum |aux> population.
    Equals the off-resonant two-level result omega^2/(omega^2 + delta^2).
    """
    h = np.array([[0.0, omega / 2], [omega / 2, delta]], dtype=complex)
    w, v = hermitian_eig(h)
    coeff = v.conj().T @ np.array([1.0, 0.0])
    t_max = 4 * np.pi / np.sqrt(omega**2 + delta**2)
    ts = np.linspace(0.0, t_max, n_steps)
    amps = (v[1, :][None, :] * np.exp(-1j * np.outer(ts, w))) @ coeff
    return float(np.max(np.abs(amps) ** 2))
