"""Atom-photon entanglement, idler projection and signal readout.

The write process leaves the memory and the scattered idler photon in

    |Psi_AP> = sqrt(2/5) |down>|sig+> - sqrt(3/5) |up>|sig->,

so measuring the idler in a chosen polarization heralds a pure spinwave
state.  Circular basis convention: |sig+> = (|H> + i|V>)/sqrt(2) and
|sig-> = (|H> - i|V>)/sqrt(2); with this choice the projection formula
below heralds exactly cos(theta)|down> + sin(theta) e^{i phi}|up>, which
the round-trip tests pin down.

Readout converts |down> to a sig- and |up> to a sig+ signal photon; the
auxiliary level is dark and only shows up as loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import substream

AMP_DOWN = np.sqrt(2 / 5)
AMP_UP = -np.sqrt(3 / 5)

JONES_H = np.array([1, 0], dtype=complex)
JONES_V = np.array([0, 1], dtype=complex)
JONES_SIGMA_PLUS = np.array([1, 1j], dtype=complex) / np.sqrt(2)
JONES_SIGMA_MINUS = np.array([1, -1j], dtype=complex) / np.sqrt(2)


class ProjectionError(ValueError):
    """Idler projection with (numerically) vanishing success probability."""


@dataclass(frozen=True)
class HeraldConfig:
    """Bernoulli heralding: per-trial probability, trial count, RNG seed."""

    herald_probability: float
    trials: int
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.herald_probability <= 1.0:
            raise ValueError("herald probability must lie in [0, 1]")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")


def normalize_jones(v):
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm < 1e-15:
        raise ProjectionError("degenerate (zero) Jones vector")
    return v / norm


def atom_photon_state():
    """Joint amplitudes over (|down,sig+>, |down,sig->, |up,sig+>, |up,sig->)."""
    return np.array([AMP_DOWN, 0.0, 0.0, AMP_UP], dtype=complex)


def target_idler_polarization(theta, phi):
    """Idler polarization whose detection heralds
    cos(theta)|down> + sin(theta) e^{i phi}|up>.

    Jones vector proportional to
    (sqrt(3/5) cos t - sqrt(2/5) sin t e^{-i p}) |H>
    + i (sqrt(3/5) cos t + sqrt(2/5) sin t e^{-i p}) |V>.
    """
    a = np.sqrt(3 / 5) * np.cos(theta)
    b = np.sqrt(2 / 5) * np.sin(theta) * np.exp(-1j * phi)
    return normalize_jones(np.array([a - b, 1j * (a + b)]))


def misaligned_polarization(pol, angle):
    """Rotate a Jones vector by `angle` toward its orthogonal complement,
    modeling systematic waveplate misset in the idler projection."""
    pol = normalize_jones(pol)
    orth = np.array([-np.conj(pol[1]), np.conj(pol[0])])
    return np.cos(angle) * pol + np.sin(angle) * orth


def project_idler(joint, pol):
    """Project the idler onto a polarization; returns the heralded spinwave
    and the success probability.

    The photon factor is expressed in the circular basis, so the Jones
    vector (H/V components) is converted before taking the partial inner
    product.  Probabilities over any orthonormal polarization basis sum
    to one.
    """
    joint = np.asarray(joint, dtype=complex).reshape(2, 2)
    pol = normalize_jones(pol)
    # photon amplitudes of |pol> in the (sig+, sig-) basis
    pol_circ = np.array([JONES_SIGMA_PLUS.conj() @ pol, JONES_SIGMA_MINUS.conj() @ pol])
    spinwave = joint @ pol_circ.conj()
    prob = float(np.linalg.norm(spinwave) ** 2)
    if prob < 1e-15:
        raise ProjectionError("incompatible projection: success probability ~ 0")
    return spinwave / np.sqrt(prob), prob


def herald_spinwave(theta, phi, misalignment=0.0):
    """Heralded preparation of cos(theta)|down> + sin(theta)e^{i phi}|up>,
    optionally with a misaligned idler projection."""
    pol = target_idler_polarization(theta, phi)
    if misalignment:
        pol = misaligned_polarization(pol, misalignment)
    return project_idler(atom_photon_state(), pol)


def herald_sampler(cfg):
    """Bernoulli heralding over cfg.trials write attempts.

    Returns (count, indices) with the trial indices that heralded;
    deterministic per seed.
    """
    rng = substream(cfg.seed)
    if cfg.trials == 0:
        return 0, np.empty(0, dtype=np.int64)
    hits = rng.random(cfg.trials) < cfg.herald_probability
    idx = np.nonzero(hits)[0]
    return int(idx.size), idx


def readout_map(rho):
    """Read the spinwave onto the signal-photon polarization qubit.

    |down> maps to |sig->, |up> to |sig+>; the output is written in the
    (sig-, sig+) basis in that order, so the qubit block carries over
    numerically unchanged.  For a three-level input the |aux> population
    is dropped: it cannot be converted to a signal photon and is reported
    through the detected fraction, with the output renormalized on the
    detected subspace.

    Returns (rho_signal, detected_fraction).
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape == (2, 2):
        return rho.copy(), 1.0
    if rho.shape != (3, 3):
        raise ValueError("readout_map expects a 2x2 or 3x3 density matrix")
    detected = float(np.trace(rho[:2, :2]).real)
    if detected < 1e-12:
        raise ValueError("no retrievable population (all weight on |aux>)")
    return rho[:2, :2] / detected, detected


def herald_record(theta, phi):
    """JSON record of one heralded preparation setting."""
    pol = target_idler_polarization(theta, phi)
    _, prob = project_idler(atom_photon_state(), pol)
    return {
        "theta": float(theta),
        "phi": float(phi),
        "jones": [[float(pol[0].real), float(pol[0].imag)],
                  [float(pol[1].real), float(pol[1].imag)]],
        "success_probability": prob,
    }
