"""Effective control parameters from beam, field and atomic-structure data.

Computes the two-photon Rabi frequencies, per-level AC Stark shifts and
Zeeman splittings that the pulse model consumes.  Atomic constants (reduced
dipole moment, hyperfine splittings, transition-amplitude table) live in a
JSON data file with source citations; nothing physical is hardcoded here.

The Raman laser sits midway between the two excited hyperfine levels, so
the two Raman paths interfere constructively while the per-level light
shifts partially cancel between them.  Level scheme: |down> = (F=2, m=-2),
|up> = (F=2, m=0), |aux> = (F=2, m=+2); the |down>/|aux> Zeeman shifts are
equal and opposite, and the light shift is arranged to cancel the qubit
Zeeman splitting while pushing |aux> further off resonance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np
import scipy.constants as const

LEVELS = ("down", "up", "aux")
POLARIZATIONS = ("sigma_plus", "pi", "sigma_minus")
EXCITED_F = ("1", "2")

GAUSS_PER_TESLA = 1e4


class ResonantBeamError(ValueError):
    """Beam tuned onto an excited level: a Stark/Raman denominator vanishes."""


@dataclass(frozen=True)
class BeamParams:
    """Raman beam: total power (W), 1/e^2 waist radius (m), detuning from
    the midpoint of the excited hyperfine doublet (rad/s), and the two
    circular polarization amplitudes with their relative phase."""

    power: float
    waist: float
    detuning: float = 0.0
    pol_plus_amp: float = np.sqrt(1 / 7)
    pol_minus_amp: float = np.sqrt(6 / 7)
    pol_rel_phase: float = 0.0

    def __post_init__(self):
        if self.power < 0 or self.waist <= 0:
            raise ValueError("power must be >= 0 and waist > 0")
        if abs(self.pol_plus_amp**2 + self.pol_minus_amp**2 - 1.0) > 1e-12:
            raise ValueError("polarization amplitudes must be normalized")

    @classmethod
    def paper_defaults(cls):
        """7 mW total, 1.9 mm waist, midpoint tuning, sqrt(1/7):sqrt(6/7)."""
        return cls(power=7e-3, waist=1.9e-3)

    def peak_intensity(self):
        """Gaussian-beam peak intensity 2P/(pi w^2); the ensemble is much
        smaller than the waist and sits at beam center."""
        return 2 * self.power / (np.pi * self.waist**2)


@dataclass(frozen=True)
class AtomicData:
    """Atomic constants loaded from the versioned JSON data file."""

    line: str
    dipole_cm: float
    excited_splitting: float  # rad/s
    ground_splitting: float  # rad/s
    cg_table: dict
    gamma_hz_per_g: float
    cg_row_norm: float

    def __post_init__(self):
        for level in LEVELS:
            total = sum(self.cg_table[level][pol][f] ** 2
                        for pol in POLARIZATIONS for f in EXCITED_F)
            if abs(total - self.cg_row_norm) > 1e-9:
                raise ValueError(
                    f"CG sum rule violated for {level}: {total} != {self.cg_row_norm}")

    def cg(self, level, polarization, excited_f):
        try:
            return self.cg_table[level][polarization][str(excited_f)]
        except KeyError:
            raise KeyError(
                f"unknown transition {level!r}/{polarization!r}/F'={excited_f!r}") from None

    @classmethod
    def from_json(cls, data):
        return cls(
            line=data["line"],
            dipole_cm=data["dipole_Cm"],
            excited_splitting=2 * np.pi * data["hyperfine_splittings_Hz"]["excited"],
            ground_splitting=2 * np.pi * data["hyperfine_splittings_Hz"]["ground"],
            cg_table=data["cg_table"],
            gamma_hz_per_g=data["gamma_Hz_per_G"],
            cg_row_norm=data["cg_row_norm"],
        )

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    @classmethod
    def rb87_d1(cls):
        ref = resources.files("spinqubit.data").joinpath("rb87_d1.json")
        return cls.from_json(json.loads(ref.read_text()))


@dataclass(frozen=True)
class EffectiveParams:
    """Control constants handed to the pulse model (all rad/s).

    aux_splitting = zeeman_down_up + (stark_aux - stark_up) holds by
    construction; qubit_detuning is the residual two-photon detuning of
    the qubit transition after the light shift cancels the Zeeman term.
    """

    rabi_qubit: float
    rabi_aux: float
    stark_down: float
    stark_up: float
    stark_aux: float
    zeeman_down_up: float

    @property
    def aux_splitting(self):
        return self.zeeman_down_up + self.stark_aux - self.stark_up

    @property
    def qubit_detuning(self):
        return self.zeeman_down_up + self.stark_up - self.stark_down

    def to_json(self):
        return {
            "rabi_qubit_rad_s": self.rabi_qubit,
            "rabi_aux_rad_s": self.rabi_aux,
            "stark_down_rad_s": self.stark_down,
            "stark_up_rad_s": self.stark_up,
            "stark_aux_rad_s": self.stark_aux,
            "zeeman_down_up_rad_s": self.zeeman_down_up,
            "aux_splitting_rad_s": self.aux_splitting,
            "qubit_detuning_rad_s": self.qubit_detuning,
        }


def zeeman_splitting(b0, atoms):
    """Qubit Zeeman splitting (rad/s) at field b0 (tesla): linear with the
    working coefficient gamma (Hz/G), 2 pi x 1.4 MHz/G for this system."""
    if b0 < 0:
        raise ValueError("field must be >= 0")
    return 2 * np.pi * atoms.gamma_hz_per_g * b0 * GAUSS_PER_TESLA


def _field_amplitudes(beam):
    e0 = np.sqrt(2 * beam.peak_intensity() / (const.epsilon_0 * const.c))
    return {"sigma_plus": e0 * beam.pol_plus_amp,
            "sigma_minus": e0 * beam.pol_minus_amp}


def _detunings(beam, atoms):
    """Signed detunings (laser minus transition) for F'=1 (below midpoint)
    and F'=2 (above)."""
    half = atoms.excited_splitting / 2
    d = {"1": beam.detuning + half, "2": beam.detuning - half}
    for f, val in d.items():
        if abs(val) < 2 * np.pi * 1e3:
            raise ResonantBeamError(f"beam resonant with F'={f}")
    return d


def single_beam_rabi(beam, atoms, level, polarization, excited_f):
    """Single-photon Rabi frequency (rad/s) of one Zeeman transition:
    d_reduced x CG x E_pol / hbar."""
    if polarization not in ("sigma_plus", "sigma_minus"):
        raise KeyError(f"beam carries no {polarization!r} component")
    amp = _field_amplitudes(beam)[polarization]
    return atoms.dipole_cm * atoms.cg(level, polarization, excited_f) * amp / const.hbar


def two_photon_rabi(beam, atoms):
    """Effective two-photon Rabi frequencies (rabi_qubit, rabi_aux), rad/s.

    Each sums the paths through F'=1 and F'=2, whose detunings have
    opposite signs at the midpoint; the transition-amplitude signs make
    the paths add there and cancel far to one side.  The magnitudes are
    returned; the qubit path uses sigma- up / sigma+ down, the aux path
    the opposite helicity order.
    """
    d = _detunings(beam, atoms)
    rabi_qubit = sum(
        single_beam_rabi(beam, atoms, "up", "sigma_minus", f)
        * single_beam_rabi(beam, atoms, "down", "sigma_plus", f) / (2 * d[f])
        for f in EXCITED_F)
    rabi_aux = sum(
        single_beam_rabi(beam, atoms, "up", "sigma_plus", f)
        * single_beam_rabi(beam, atoms, "aux", "sigma_minus", f) / (2 * d[f])
        for f in EXCITED_F)
    return abs(rabi_qubit), abs(rabi_aux)


def ac_stark_shifts(beam, atoms):
    """Light shifts (stark_down, stark_up, stark_aux) in rad/s, each summed
    over both beam polarization components and both excited levels with
    signed detuning denominators: shift = sum |Omega|^2 / (4 Delta)."""
    d = _detunings(beam, atoms)
    shifts = []
    for level in LEVELS:
        s = sum(
            single_beam_rabi(beam, atoms, level, pol, f) ** 2 / (4 * d[f])
            for pol in ("sigma_plus", "sigma_minus") for f in EXCITED_F)
        shifts.append(s)
    return tuple(shifts)


def effective_params(beam, atoms, b0):
    """Assemble the EffectiveParams record for a beam and bias field."""
    rabi_qubit, rabi_aux = two_photon_rabi(beam, atoms)
    stark_down, stark_up, stark_aux = ac_stark_shifts(beam, atoms)
    return EffectiveParams(
        rabi_qubit=rabi_qubit,
        rabi_aux=rabi_aux,
        stark_down=stark_down,
        stark_up=stark_up,
        stark_aux=stark_aux,
        zeeman_down_up=zeeman_splitting(b0, atoms),
    )
