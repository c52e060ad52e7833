"""Simulator and analysis toolkit for a heralded spinwave qubit stored in
an atomic-ensemble memory: heralded state preparation, Larmor/Raman
rotations with leakage and noise, photon-counting readout, and
maximum-likelihood state/process tomography."""

__version__ = "0.1.0"

from . import cli, herald, levels, linalg, pulses, tomography

__all__ = ["cli", "herald", "levels", "linalg", "pulses", "tomography"]
