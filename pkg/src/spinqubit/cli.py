"""Experiment recipes and the command-line interface.

Each recipe reproduces one of the headline measurements end to end:
heralded preparation of the six cardinal states, rotation sweeps about
x/y/z and the oblique (1,1,1)/sqrt(3) axis, process tomography of the
Pauli and Hadamard gates, coincidence fringes, and the physical-parameter
report with its anchor checks.

Reports are plain JSON (complex matrices as nested [re, im] pairs) plus
CSV sweep curves, and are byte-identical across reruns of the same
config: all randomness flows from the config seed through deterministic
substreams, and no timing information enters the report files.

Exit codes: 0 success, 1 config error, 2 numerical non-convergence,
3 anchor failure in the stark report.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .herald import (
    JONES_H,
    atom_photon_state,
    herald_spinwave,
    misaligned_polarization,
    normalize_jones,
    project_idler,
    readout_map,
)
from .levels import AtomicData, BeamParams, effective_params
from .linalg import (
    CARDINAL_STATES,
    matrix_to_json,
    projector,
    state_fidelity,
    stokes_from_rho,
    substream,
)
from .pulses import (
    NoiseModel,
    PulseSpec,
    RAMAN_PULSE,
    RotationSpec,
    compile_rotation,
    embed_qubit,
    evolve,
    peak_aux_population,
)
from .tomography import (
    BASES,
    ConvergenceError,
    INPUT_LABELS,
    ProcessTomographySet,
    _lsq_chi_start,
    bootstrap_state_error,
    chi_from_unitary,
    fringe_analysis,
    measure_state,
    mle_state,
    monte_carlo_average_fidelity,
    process_fidelity,
    average_fidelity_from_process,
    qpt_mle,
)

RECIPES = ("prepare_six", "rotation_sweep", "arbitrary_axis", "qpt_gates",
           "fringe", "stark_report")

SCHEMA_VERSION = 1

# paper operating point: measured Raman Rabi and Larmor frequencies and the
# shifted |up>-|aux> splitting (rad/s)
DEFAULT_OMEGA_RABI = 2 * np.pi * 190e3
DEFAULT_OMEGA_LARMOR = 2 * np.pi * 180e3
DEFAULT_AUX_DETUNING = 2 * np.pi * 560e3
DEFAULT_B0_TESLA = 180e3 / 1.4e6 / 1e4  # field reproducing the 180 kHz splitting

SWEEP_AXES = {
    "x": (1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
    "z": (0.0, 0.0, 1.0),
    "n": (1 / math.sqrt(3), 1 / math.sqrt(3), 1 / math.sqrt(3)),
}

GATE_SPECS = {
    "sigma_x": ((1.0, 0.0, 0.0), np.pi / 2),
    "sigma_y": ((0.0, 1.0, 0.0), np.pi / 2),
    "sigma_z": ((0.0, 0.0, 1.0), np.pi / 2),
    "hadamard": ((1 / math.sqrt(2), 0.0, 1 / math.sqrt(2)), np.pi / 2),
}

GATE_MATRICES = {
    "sigma_x": np.array([[0, 1], [1, 0]], dtype=complex),
    "sigma_y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "sigma_z": np.array([[1, 0], [0, -1]], dtype=complex),
    "hadamard": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
}

#: Default rotation-angle grid, phi = 0, pi/12, ..., 11 pi/12, in the
#: exp(-i phi n.sigma) convention.
DEFAULT_ANGLE_GRID = [k * np.pi / 12 for k in range(12)]

#: Default Raman pulse-area grid for fringes: one full period.
DEFAULT_FRINGE_GRID = [k * np.pi / 6 for k in range(13)]

STARK_ANCHOR_TOL = 0.25


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved configuration of one recipe run."""

    recipe: str
    seed: int = 12345
    shots_per_basis: int = 2000
    mc_samples: int = 300
    bootstrap_resamples: int = 200
    haar_samples: int = 20000
    noise: NoiseModel = field(default_factory=NoiseModel.zero)
    axis: str = "x"
    angle_grid: tuple = ()
    beam: BeamParams = field(default_factory=BeamParams.paper_defaults)
    b0_tesla: float = DEFAULT_B0_TESLA
    omega_rabi: float = DEFAULT_OMEGA_RABI
    omega_larmor: float = DEFAULT_OMEGA_LARMOR
    aux_detuning: float = DEFAULT_AUX_DETUNING
    output_path: str = "."

    def __post_init__(self):
        if self.recipe not in RECIPES:
            raise ConfigError(f"unknown recipe {self.recipe!r}")
        if self.shots_per_basis < 1:
            raise ConfigError("shots_per_basis must be >= 1")
        if self.mc_samples < 1:
            raise ConfigError("mc_samples must be >= 1")
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"axis must be one of {sorted(SWEEP_AXES)}")
        if self.recipe in ("rotation_sweep", "arbitrary_axis", "fringe") and self.angle_grid:
            if len(self.angle_grid) == 0:
                raise ConfigError("angle_grid must be non-empty for sweep recipes")

    def grid(self):
        if self.angle_grid:
            return list(self.angle_grid)
        if self.recipe == "fringe":
            return list(DEFAULT_FRINGE_GRID)
        return list(DEFAULT_ANGLE_GRID)

    def echo(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "recipe": self.recipe,
            "seed": self.seed,
            "shots_per_basis": self.shots_per_basis,
            "mc_samples": self.mc_samples,
            "bootstrap_resamples": self.bootstrap_resamples,
            "haar_samples": self.haar_samples,
            "axis": self.axis,
            "angle_grid": [float(a) for a in self.grid()],
            "noise": {
                "rabi_fractional_sigma": self.noise.rabi_fractional_sigma,
                "larmor_sigma": self.noise.larmor_sigma,
                "background_rate": self.noise.background_rate,
                "idler_misalignment": self.noise.idler_misalignment,
            },
            "beam": {
                "power_W": self.beam.power,
                "waist_m": self.beam.waist,
                "detuning_rad_s": self.beam.detuning,
                "pol_plus_amp": self.beam.pol_plus_amp,
                "pol_minus_amp": self.beam.pol_minus_amp,
                "pol_rel_phase": self.beam.pol_rel_phase,
            },
            "b0_tesla": self.b0_tesla,
            "omega_rabi_rad_s": self.omega_rabi,
            "omega_larmor_rad_s": self.omega_larmor,
            "aux_detuning_rad_s": self.aux_detuning,
            "output_path": self.output_path,
        }


def load_noise_preset(name):
    """Named noise preset; 'paper-noise' is the frozen calibration that
    brackets the published averages, 'none' is noiseless."""
    if name == "none":
        return NoiseModel.zero()
    if name == "paper-noise":
        ref = resources.files("spinqubit.data").joinpath("paper_noise.json")
        data = json.loads(ref.read_text())
        return NoiseModel(
            rabi_fractional_sigma=data["rabi_fractional_sigma"],
            larmor_sigma=data["larmor_sigma"],
            background_rate=data["background_rate"],
            idler_misalignment=data["idler_misalignment"],
        )
    raise ConfigError(f"unknown noise preset {name!r}")


def config_from_dict(data, recipe=None):
    data = dict(data)
    version = data.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"config schema_version must be {SCHEMA_VERSION}")
    if recipe is not None:
        data["recipe"] = recipe
    if "recipe" not in data:
        raise ConfigError("config is missing 'recipe'")
    noise = data.pop("noise", None)
    if isinstance(noise, str):
        noise_model = load_noise_preset(noise)
    elif isinstance(noise, dict):
        try:
            noise_model = NoiseModel(**noise)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad noise block: {exc}") from exc
    elif noise is None:
        noise_model = NoiseModel.zero()
    else:
        raise ConfigError("noise must be a preset name or a parameter block")
    beam_block = data.pop("beam", None)
    if beam_block is not None:
        try:
            beam = BeamParams(
                power=beam_block["power_W"],
                waist=beam_block["waist_m"],
                detuning=beam_block.get("detuning_rad_s", 0.0),
                pol_plus_amp=beam_block.get("pol_plus_amp", math.sqrt(1 / 7)),
                pol_minus_amp=beam_block.get("pol_minus_amp", math.sqrt(6 / 7)),
                pol_rel_phase=beam_block.get("pol_rel_phase", 0.0),
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad beam block: {exc}") from exc
        data["beam"] = beam
    if "angle_grid" in data and data["angle_grid"] is not None:
        data["angle_grid"] = tuple(float(a) for a in data["angle_grid"])
    renames = {"omega_rabi_rad_s": "omega_rabi",
               "omega_larmor_rad_s": "omega_larmor",
               "aux_detuning_rad_s": "aux_detuning"}
    for old, new in renames.items():
        if old in data:
            data[new] = data.pop(old)
    try:
        return ExperimentConfig(noise=noise_model, **data)
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from exc


def _task_seed(root, *path):
    """Derived 62-bit integer seed for one sub-task, stable per path."""
    return int(substream(root, *path).integers(0, 2**62))


def _herald_true_state(label_or_angles, misalignment):
    """True heralded spinwave for a cardinal label or (theta, phi) pair."""
    if isinstance(label_or_angles, str):
        _, theta, phi = CARDINAL_STATES[label_or_angles]
    else:
        theta, phi = label_or_angles
    psi, prob = herald_spinwave(theta, phi, misalignment=misalignment)
    return psi, prob


def _measure_mle(rho_signal, config, seed):
    data = measure_state(rho_signal, config.shots_per_basis,
                         noise_background=config.noise.background_rate, seed=seed)
    return data, mle_state(data)


def _assert_finite(obj, path="report"):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _assert_finite(v, f"{path}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _assert_finite(v, f"{path}[{i}]")
    elif isinstance(obj, float) and not math.isfinite(obj):
        raise ValueError(f"non-finite value at {path}")


def _provenance(config):
    return {
        "seed": config.seed,
        "package_version": __version__,
        "numpy_version": np.__version__,
    }


# ---------------------------------------------------------------------------
# recipes


def run_prepare_six(config):
    """Herald, read out and tomograph the six cardinal states."""
    states = []
    for idx, label in enumerate(INPUT_LABELS):
        psi, prob = _herald_true_state(label, config.noise.idler_misalignment)
        rho_signal, _ = readout_map(projector(psi))
        data, rho_hat = _measure_mle(rho_signal, config, _task_seed(config.seed, 0, idx))
        target = projector(CARDINAL_STATES[label][0])
        fid = state_fidelity(rho_hat, target)
        std = bootstrap_state_error(data, resamples=config.bootstrap_resamples,
                                    seed=_task_seed(config.seed, 1, idx),
                                    reference=target)
        states.append({
            "label": label,
            "theta": float(CARDINAL_STATES[label][1]),
            "phi": float(CARDINAL_STATES[label][2]),
            "success_probability": prob,
            "fidelity": fid,
            "fidelity_std": std,
            "rho": matrix_to_json(rho_hat),
        })
    mean_fid = float(np.mean([s["fidelity"] for s in states]))
    return {
        "config": config.echo(),
        "provenance": _provenance(config),
        "states": states,
        "mean_fidelity": mean_fid,
    }


def _sweep_initial_state(axis, misalignment):
    """Initial state of a rotation sweep: |down> for x/y, the |H>-projected
    state for z, and cos(3pi/8)|down> + sin(3pi/8)|up> for the oblique axis."""
    if axis in ("x", "y"):
        return _herald_true_state("down", misalignment)
    if axis == "z":
        pol = normalize_jones(JONES_H)
        if misalignment:
            pol = misaligned_polarization(pol, misalignment)
        return project_idler(atom_photon_state(), pol)
    return _herald_true_state((3 * np.pi / 8, 0.0), misalignment)


def run_rotation_sweep(config, axis=None):
    """Rotation sweep about one axis: per-angle tomography, Stokes triplets
    and fidelity against the ideal rotation applied to the measured initial
    state (so preparation imperfections do not count against the gate)."""
    axis = config.axis if axis is None else axis
    axis_vec = np.array(SWEEP_AXES[axis])
    psi0, _ = _sweep_initial_state(axis, config.noise.idler_misalignment)
    rho0_signal, _ = readout_map(projector(psi0))
    data0, rho_in_hat = _measure_mle(rho0_signal, config, _task_seed(config.seed, 2))

    points = []
    for idx, angle in enumerate(config.grid()):
        spec = RotationSpec(tuple(axis_vec), float(angle))
        pulses = compile_rotation(spec, config.omega_rabi, config.omega_larmor,
                                  aux_detuning=config.aux_detuning)
        rho3 = evolve(embed_qubit(projector(psi0)), pulses, config.noise,
                      shots=config.mc_samples, seed=_task_seed(config.seed, 3, idx))
        rho_signal, detected = readout_map(rho3)
        data, rho_hat = _measure_mle(rho_signal, config, _task_seed(config.seed, 4, idx))
        u_ideal = spec.unitary()
        reference = u_ideal @ rho_in_hat @ u_ideal.conj().T
        fid = state_fidelity(rho_hat, reference)
        std = bootstrap_state_error(data, resamples=config.bootstrap_resamples,
                                    seed=_task_seed(config.seed, 5, idx),
                                    reference=reference)
        s = stokes_from_rho(rho_hat)
        s_ideal = stokes_from_rho(reference)
        points.append({
            "angle_rad": float(angle),
            "s_x": float(s[0]), "s_y": float(s[1]), "s_z": float(s[2]),
            "s_x_ideal": float(s_ideal[0]), "s_y_ideal": float(s_ideal[1]),
            "s_z_ideal": float(s_ideal[2]),
            "detected_fraction": float(detected),
            "fidelity": fid,
            "fidelity_std": std,
        })
    return {
        "config": config.echo(),
        "provenance": _provenance(config),
        "axis": axis,
        "initial_state": matrix_to_json(rho_in_hat),
        "points": points,
        "average_fidelity": float(np.mean([p["fidelity"] for p in points])),
    }


def _measured_inputs(config):
    """Tomograph the six heralded inputs once (shared across gates)."""
    measured = {}
    for idx, label in enumerate(INPUT_LABELS):
        psi, _ = _herald_true_state(label, config.noise.idler_misalignment)
        rho_signal, _ = readout_map(projector(psi))
        data, rho_hat = _measure_mle(rho_signal, config, _task_seed(config.seed, 6, idx))
        measured[label] = (psi, rho_hat)
    return measured


def run_qpt_gates(config):
    """Process tomography of the Pauli gates and the Hadamard."""
    inputs = _measured_inputs(config)
    gates = []
    for g_idx, (name, (axis, angle)) in enumerate(sorted(GATE_SPECS.items())):
        spec = RotationSpec(axis, angle)
        pulses = compile_rotation(spec, config.omega_rabi, config.omega_larmor,
                                  aux_detuning=config.aux_detuning)
        u_ideal = GATE_MATRICES[name]
        datasets = {}
        per_input_fids = []
        for i_idx, label in enumerate(INPUT_LABELS):
            psi, rho_in_hat = inputs[label]
            rho3 = evolve(embed_qubit(projector(psi)), pulses, config.noise,
                          shots=config.mc_samples,
                          seed=_task_seed(config.seed, 7, g_idx, i_idx))
            rho_signal, _ = readout_map(rho3)
            data, rho_out_hat = _measure_mle(
                rho_signal, config, _task_seed(config.seed, 8, g_idx, i_idx))
            datasets[label] = data
            ref = u_ideal @ rho_in_hat @ u_ideal.conj().T
            per_input_fids.append(state_fidelity(rho_out_hat, ref))
        chi_fit = qpt_mle(ProcessTomographySet(datasets))
        chi_ideal = chi_from_unitary(u_ideal)
        f_proc = process_fidelity(chi_fit.chi, chi_ideal)
        f_ave_formula = average_fidelity_from_process(f_proc)
        mc = monte_carlo_average_fidelity(chi_fit.chi, u_ideal,
                                          samples=config.haar_samples,
                                          seed=_task_seed(config.seed, 9, g_idx))
        f_ave_measured = float(np.mean(per_input_fids))
        stderr = float(np.std(per_input_fids, ddof=1) / np.sqrt(len(per_input_fids)))
        # unconstrained (possibly non-CP) least-squares fit, to expose the
        # fidelity reduction caused by the CP constraint
        counts = np.zeros((6, 3, 2))
        for k, label in enumerate(INPUT_LABELS):
            for b, basis in enumerate(BASES):
                rec = datasets[label].record(basis)
                counts[k, b] = rec.n_plus, rec.n_minus
        chi_lsq = _lsq_chi_start(counts,
                                 [projector(CARDINAL_STATES[k][0]) for k in INPUT_LABELS])
        chi_lsq = chi_lsq / np.trace(chi_lsq).real
        f_proc_unconstrained = float(np.trace(chi_lsq @ chi_ideal).real)
        gates.append({
            "gate": name,
            "pulses": [p.to_json() for p in pulses],
            "chi": matrix_to_json(chi_fit.chi),
            "tp_residual": chi_fit.tp_residual,
            "optimizer": chi_fit.diagnostics,
            "process_fidelity": f_proc,
            "process_fidelity_unconstrained": f_proc_unconstrained,
            "average_fidelity_formula": f_ave_formula,
            "average_fidelity_monte_carlo": mc.haar_mean,
            "average_fidelity_cardinal": mc.cardinal_mean,
            "average_fidelity_measured": f_ave_measured,
            "average_fidelity_measured_stderr": stderr,
            "measured_at_least_formula": bool(
                f_ave_measured >= f_ave_formula - 3 * max(stderr, 1e-12)),
        })
    return {
        "config": config.echo(),
        "provenance": _provenance(config),
        "gates": gates,
        "mean_process_fidelity": float(np.mean([g["process_fidelity"] for g in gates])),
    }


def _fringe_setting(name, config):
    if name == "down":
        psi, _ = _herald_true_state("down", config.noise.idler_misalignment)
        phi_r = 0.0
        analyzer = np.array([0.0, 0.0, 1.0])
    else:  # idler projected on |H>: initial approximately on the A state
        pol = normalize_jones(JONES_H)
        psi_ideal, _ = project_idler(atom_photon_state(), pol)
        analyzer = stokes_from_rho(projector(psi_ideal))
        analyzer = analyzer / np.linalg.norm(analyzer)
        if config.noise.idler_misalignment:
            pol = misaligned_polarization(pol, config.noise.idler_misalignment)
        psi, _ = project_idler(atom_photon_state(), pol)
        phi_r = -np.pi / 2
    return psi, phi_r, analyzer


def run_fringe(config):
    """Coincidence fringes while sweeping the Raman pulse area, for the
    |down> initial state and the approximately-A state heralded by an |H>
    idler; the analyzer is aligned with the ideal initial state so the
    noiseless fringe has unit visibility."""
    settings = []
    for s_idx, name in enumerate(("down", "H_projected")):
        psi, phi_r, analyzer = _fringe_setting(name, config)
        proj_plus = 0.5 * (np.eye(2, dtype=complex)
                           + analyzer[0] * np.array([[0, 1], [1, 0]])
                           + analyzer[1] * np.array([[0, -1j], [1j, 0]])
                           + analyzer[2] * np.array([[1, 0], [0, -1]]))
        sweep = []
        raw = []
        for a_idx, area in enumerate(config.grid()):
            pulse = PulseSpec(RAMAN_PULSE, float(area) / config.omega_rabi,
                              rabi=config.omega_rabi, phase=phi_r,
                              larmor=config.omega_larmor,
                              aux_detuning=config.aux_detuning)
            rho3 = evolve(embed_qubit(projector(psi)), [pulse], config.noise,
                          shots=config.mc_samples,
                          seed=_task_seed(config.seed, 10, s_idx, a_idx))
            rho_signal, detected = readout_map(rho3)
            p_plus = float(np.trace(rho_signal @ proj_plus).real) * detected
            p_minus = detected - p_plus
            rng = substream(_task_seed(config.seed, 11, s_idx, a_idx))
            shots = config.shots_per_basis
            r = config.noise.background_rate
            n_a = int(rng.poisson(shots * (p_plus + r)))
            n_b = int(rng.poisson(shots * (p_minus + r)))
            sweep.append((float(area), (n_a, n_b)))
            raw.append({"angle_rad": float(area), "n_plus": n_a, "n_minus": n_b})
        fit = fringe_analysis(sweep)
        settings.append({
            "setting": name,
            "raman_phase": phi_r,
            "points": raw,
            "visibilities": [o.visibility for o in fit.outcomes],
            "max_min_ratios": [o.max_min_ratio for o in fit.outcomes],
            "ratio_capped": [o.ratio_capped for o in fit.outcomes],
            "warnings": [o.warning for o in fit.outcomes],
        })
    return {
        "config": config.echo(),
        "provenance": _provenance(config),
        "settings": settings,
        "min_max_min_ratio": float(min(min(s["max_min_ratios"]) for s in settings)),
        "min_visibility": float(min(min(s["visibilities"]) for s in settings)),
    }


PAPER_ANCHORS_KHZ = {
    "stark_down": 40.0,
    "stark_up": -140.0,
    "stark_aux": 240.0,
    "stark_differential": -180.0,
    "aux_splitting": 560.0,
    "rabi_qubit": 240.0,
    "rabi_aux": 240.0,
}


def run_stark_report(config, atoms=None):
    """Effective physical parameters with pass/fail anchor checks against
    the published values (+-25%), plus the leakage estimate."""
    atoms = AtomicData.rb87_d1() if atoms is None else atoms
    eff = effective_params(config.beam, atoms, config.b0_tesla)
    khz = 2 * np.pi * 1e3
    computed = {
        "stark_down": eff.stark_down / khz,
        "stark_up": eff.stark_up / khz,
        "stark_aux": eff.stark_aux / khz,
        "stark_differential": (eff.stark_up - eff.stark_down) / khz,
        "aux_splitting": eff.aux_splitting / khz,
        "rabi_qubit": eff.rabi_qubit / khz,
        "rabi_aux": eff.rabi_aux / khz,
    }
    anchors = []
    for name, target in PAPER_ANCHORS_KHZ.items():
        value = computed[name]
        ok = abs(value - target) <= STARK_ANCHOR_TOL * abs(target)
        anchors.append({"name": name, "computed_kHz": float(value),
                        "paper_kHz": target, "tolerance": STARK_ANCHOR_TOL,
                        "pass": bool(ok)})
    ratio = 2 * np.pi * 190e3 / eff.rabi_qubit
    anchors.append({"name": "measured_vs_theory_rabi_ratio",
                    "computed_kHz": float(ratio), "paper_kHz": 190.0 / 240.0,
                    "tolerance": "ratio in [0.6, 1.1]",
                    "pass": bool(0.6 <= ratio <= 1.1)})
    detuning_khz = abs(eff.qubit_detuning) / khz
    anchors.append({"name": "qubit_detuning_cancellation",
                    "computed_kHz": float(detuning_khz), "paper_kHz": 0.0,
                    "tolerance": "|detuning| < 45 kHz",
                    "pass": bool(detuning_khz < 45.0)})
    # leakage at the published operating point and at the computed one
    leak_paper = peak_aux_population(2 * np.pi * 240e3, 2 * np.pi * 560e3)
    leak_computed = peak_aux_population(eff.rabi_aux, eff.aux_splitting)
    return {
        "config": config.echo(),
        "provenance": _provenance(config),
        "effective_params": eff.to_json(),
        "anchors": anchors,
        "all_anchors_pass": bool(all(a["pass"] for a in anchors)),
        "leakage": {
            "peak_aux_population_paper_point": float(leak_paper),
            "peak_aux_population_computed": float(leak_computed),
            "paper_estimate": 0.01,
            "discrepancy_flag": bool(abs(leak_paper - 0.01) > 0.01),
        },
    }


# ---------------------------------------------------------------------------
# report output and command line


def report_json(report):
    _assert_finite(report)
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_sweep_csv(report, path):
    """CSV sweep curve: angle_rad, s_x, s_y, s_z, fidelity, fidelity_std."""
    lines = ["angle_rad,s_x,s_y,s_z,fidelity,fidelity_std"]
    for p in report["points"]:
        lines.append(",".join(repr(float(p[k])) for k in
                              ("angle_rad", "s_x", "s_y", "s_z",
                               "fidelity", "fidelity_std")))
    Path(path).write_text("\n".join(lines) + "\n")


def write_theory_csv(report, path):
    lines = ["angle_rad,s_x,s_y,s_z"]
    for p in report["points"]:
        lines.append(",".join(repr(float(p[k])) for k in
                              ("angle_rad", "s_x_ideal", "s_y_ideal", "s_z_ideal")))
    Path(path).write_text("\n".join(lines) + "\n")


def run_recipe(config):
    if config.recipe == "prepare_six":
        return run_prepare_six(config)
    if config.recipe == "rotation_sweep":
        return run_rotation_sweep(config)
    if config.recipe == "arbitrary_axis":
        return run_rotation_sweep(replace(config, axis="n"), axis="n")
    if config.recipe == "qpt_gates":
        return run_qpt_gates(config)
    if config.recipe == "fringe":
        return run_fringe(config)
    if config.recipe == "stark_report":
        return run_stark_report(config)
    raise ConfigError(f"unknown recipe {config.recipe!r}")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="spinqubit",
        description="Spinwave-qubit experiment recipes: simulate, reconstruct, report.")
    sub = parser.add_subparsers(dest="recipe", required=True)
    for name in RECIPES:
        p = sub.add_parser(name, help=f"run the {name} recipe")
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file (schema_version %d)" % SCHEMA_VERSION)
        p.add_argument("--seed", type=int, default=None, help="root RNG seed")
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--preset", type=str, default=None,
                       choices=("paper-noise", "none"),
                       help="noise preset overriding the config noise block")
        if name == "rotation_sweep":
            p.add_argument("--axis", type=str, default="x",
                           choices=sorted(SWEEP_AXES))
        p.add_argument("--shots", type=int, default=None,
                       help="shots per analysis basis")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.config:
            with open(args.config) as fh:
                raw = json.load(fh)
            config = config_from_dict(raw, recipe=args.recipe)
        else:
            config = ExperimentConfig(recipe=args.recipe)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.preset is not None:
            config = replace(config, noise=load_noise_preset(args.preset))
        if getattr(args, "axis", None) is not None and args.recipe == "rotation_sweep":
            config = replace(config, axis=args.axis)
        if args.shots is not None:
            config = replace(config, shots_per_basis=args.shots)
        if args.out is not None:
            config = replace(config, output_path=args.out)
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 1

    try:
        report = run_recipe(config)
    except ConvergenceError as exc:
        print(json.dumps({"error": "non-convergence", "message": str(exc)}),
              file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(json.dumps({"error": "numerical", "message": str(exc)}), file=sys.stderr)
        return 2

    outdir = Path(config.output_path)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = config.recipe if config.recipe != "rotation_sweep" else \
        f"rotation_sweep_{config.axis}"
    (outdir / f"{stem}_report.json").write_text(report_json(report))
    if "points" in report and config.recipe in ("rotation_sweep", "arbitrary_axis"):
        write_sweep_csv(report, outdir / f"{stem}_curve.csv")
        write_theory_csv(report, outdir / f"{stem}_theory.csv")
    if config.recipe == "stark_report" and not report["all_anchors_pass"]:
        print(json.dumps({"error": "anchor-failure",
                          "failed": [a["name"] for a in report["anchors"]
                                     if not a["pass"]]}), file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
