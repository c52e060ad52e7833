"""Photon-counting simulation, state and process tomography, fidelity metrics.

State reconstruction follows the standard two-step recipe: a linear
inversion of the three measured Stokes components for diagnostics, and a
maximum-likelihood fit over the Cholesky-style parameterization
rho = T^dag T / tr(T^dag T), which is physical by construction.  Counts in
each basis are modeled as binomial with fixed totals; the bootstrap
resamples counts as Poisson variables, mirroring how the error bars of the
experiment are produced.

Process tomography fits a 4x4 Pauli-basis chi matrix (order I, x, y, z)
through the same parameterization, with complete positivity built in and
trace preservation available as an optional constraint.  Measured data is
post-selected on a detected photon, so the default fit is CP-only and the
trace-preservation residual is reported instead of enforced.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .linalg import (
    CARDINAL_STATES,
    PAULIS,
    projector,
    state_fidelity,
    stokes_from_rho,
    substream,
    haar_random_states,
    haar_random_unitary,
)

BASES = ("X", "Y", "Z")
_BASIS_INDEX = {"X": 1, "Y": 2, "Z": 3}

#: Probabilities inside log-likelihoods are floored by this epsilon so
#: degenerate data (all counts in one outcome) keeps the objective finite.
LIKELIHOOD_EPS = 1e-9

INPUT_LABELS = ("down", "up", "D", "A", "R", "L")


class ConvergenceError(RuntimeError):
    """Optimizer failed to meet its convergence contract.

    Carries the best parameters seen so far in .best and the scipy result
    object in .diagnostics.
    """

    def __init__(self, message, best=None, diagnostics=None):
        super().__init__(message)
        self.best = best
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome counts (n_plus, n_minus) of one analysis basis.

    Counts are non-negative; they are integers for sampled data but may be
    fractional when exact probabilities are fed in for oracle checks.
    """

    basis: str
    n_plus: float
    n_minus: float

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.n_plus < 0 or self.n_minus < 0:
            raise ValueError("counts must be non-negative")

    @property
    def total(self):
        return self.n_plus + self.n_minus


@dataclass(frozen=True)
class TomographyInput:
    """One record per basis X, Y, Z, each with at least one count."""

    records: tuple

    def __post_init__(self):
        by_basis = {r.basis: r for r in self.records}
        if sorted(by_basis) != sorted(BASES):
            raise ValueError("tomography input needs exactly the bases X, Y, Z")
        for r in self.records:
            if r.total <= 0:
                raise ValueError(f"basis {r.basis} has zero total counts")
        object.__setattr__(self, "records",
                           tuple(by_basis[b] for b in BASES))

    def record(self, basis):
        return self.records[BASES.index(basis)]


@dataclass(frozen=True)
class ProcessMatrix:
    """Pauli-basis chi matrix with its physicality diagnostics."""

    chi: np.ndarray
    tp_enforced: bool = False
    tp_residual: float = 0.0
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ProcessTomographySet:
    """Measured output tomography for each of the six cardinal inputs."""

    inputs: dict

    def __post_init__(self):
        if sorted(self.inputs) != sorted(INPUT_LABELS):
            raise ValueError(f"process tomography needs inputs {INPUT_LABELS}")


class AverageFidelity(NamedTuple):
    haar_mean: float
    cardinal_mean: float
    haar_std_err: float


def simulate_counts(rho, basis, n_total, noise_background=0.0, seed=0):
    """Binomial photon counting of a qubit state in one Pauli basis.

    The +1-outcome probability is p = (1 + tr(rho sigma_basis))/2; an
    uncorrelated background rate r (counts per shot per detector) mixes it
    to (p + r)/(1 + 2r).  Deterministic per seed.
    """
    if n_total < 1:
        raise ValueError("n_total must be >= 1")
    sigma = PAULIS[_BASIS_INDEX[basis]]
    p = (1.0 + np.trace(np.asarray(rho) @ sigma).real) / 2.0
    r = noise_background
    p_eff = float(np.clip((p + r) / (1.0 + 2.0 * r), 0.0, 1.0))
    rng = substream(seed)
    n_plus = int(rng.binomial(int(n_total), p_eff))
    return MeasurementRecord(basis, n_plus, int(n_total) - n_plus)


def measure_state(rho, n_total, noise_background=0.0, seed=0):
    """Counts in all three bases; substreams keyed by basis index."""
    records = []
    for i, b in enumerate(BASES):
        rng = substream(seed, i)
        sigma = PAULIS[_BASIS_INDEX[b]]
        p = (1.0 + np.trace(np.asarray(rho) @ sigma).real) / 2.0
        r = noise_background
        p_eff = float(np.clip((p + r) / (1.0 + 2.0 * r), 0.0, 1.0))
        n_plus = int(rng.binomial(int(n_total), p_eff))
        records.append(MeasurementRecord(b, n_plus, int(n_total) - n_plus))
    return TomographyInput(tuple(records))


def exact_counts(rho, n_total=1.0):
    """Noise-free fractional counts n_total * p, the large-N oracle input."""
    records = []
    for b in BASES:
        sigma = PAULIS[_BASIS_INDEX[b]]
        p = (1.0 + np.trace(np.asarray(rho) @ sigma).real) / 2.0
        p = float(np.clip(p, 0.0, 1.0))
        records.append(MeasurementRecord(b, n_total * p, n_total * (1.0 - p)))
    return TomographyInput(tuple(records))


def linear_inversion(data):
    """Direct Stokes inversion rho = (I + sum_i s_i sigma_i)/2.

    The estimate has unit trace and is Hermitian by construction but may
    have a negative eigenvalue for noisy counts; that case is flagged with
    a warning, not rejected.
    """
    s = np.zeros(3)
    for i, b in enumerate(BASES):
        rec = data.record(b)
        s[i] = (rec.n_plus - rec.n_minus) / rec.total
    rho = 0.5 * (np.eye(2, dtype=complex)
                 + s[0] * PAULIS[1] + s[1] * PAULIS[2] + s[2] * PAULIS[3])
    w = np.linalg.eigvalsh(rho)
    if w[0] < 0:
        warnings.warn(f"linear inversion is non-physical (min eigenvalue {w[0]:.3e})")
    return rho


def _t_from_params(x):
    return np.array([[x[0], 0.0], [x[2] + 1j * x[3], x[1]]], dtype=complex)


def _params_from_rho(rho, jitter=1e-6):
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, jitter, None)
    rho_pd = (v * w) @ v.conj().T
    rho_pd /= np.trace(rho_pd).real
    t = np.linalg.cholesky(rho_pd)
    return np.array([t[0, 0].real, t[1, 1].real, t[1, 0].real, t[1, 0].imag])


def _rho_from_params(x):
    # rho = T T^dag / tr(T T^dag), matching the Cholesky factor layout
    t = _t_from_params(x)
    tt = t @ t.conj().T
    return tt / np.trace(tt).real


# nonzero entry (row, col, value) of dT/dx_k for the 4 state parameters
_STATE_PARAM_ENTRIES = ((0, 0, 1.0), (1, 1, 1.0), (1, 0, 1.0), (1, 0, 1j))


def _state_objective(x, counts, sigmas):
    """Per-count negative log-likelihood and its analytic gradient.

    counts is a (3, 2) array of (n_plus, n_minus) rows matching sigmas.
    With rho = T T^dag / tau, d tr(rho A)/dx_k = [2 Re tr(T^dag A E_k)
    - tr(rho A) 2 Re tr(T^dag E_k)] / tau, and tr(X E_k) reduces to a read
    of X at the single nonzero entry of E_k = dT/dx_k.
    """
    t = _t_from_params(x)
    td = t.conj().T
    tt = t @ td
    tau = np.trace(tt).real
    rho = tt / tau
    n_total = counts.sum()

    tr_id = np.array([v * td[c, r] for r, c, v in _STATE_PARAM_ENTRIES])
    f = 0.0
    grad = np.zeros(4)
    for (n_plus, n_minus), sigma in zip(counts, sigmas):
        s = np.trace(rho @ sigma).real
        p = (1.0 + s) / 2.0
        f -= n_plus * np.log(p + LIKELIHOOD_EPS) + n_minus * np.log(1.0 - p + LIKELIHOOD_EPS)
        w = n_plus / (p + LIKELIHOOD_EPS) - n_minus / (1.0 - p + LIKELIHOOD_EPS)
        g_sigma = td @ sigma
        tr_sig = np.array([v * g_sigma[c, r] for r, c, v in _STATE_PARAM_ENTRIES])
        ds = (2.0 * tr_sig.real - s * 2.0 * tr_id.real) / tau
        grad -= w * ds / 2.0
    return f / n_total, grad / n_total


def mle_state(data, start=None, max_iter=2000, gtol=1e-8, restarts=0, seed=0):
    """Maximum-likelihood density matrix for binomial counts in X, Y, Z.

    The physical state rho = T^dag T / tr(T^dag T) maximizing the binomial
    likelihood (per-count normalized) is found with L-BFGS-B using the
    analytic gradient; termination at projected-gradient max-norm < gtol
    or when the likelihood stops improving.  `restarts` extra random
    starting points may be requested; the best optimum is returned.
    Raises ConvergenceError (carrying the best-so-far state) if the
    optimizer exhausts max_iter.
    """
    counts = np.array([[data.record(b).n_plus, data.record(b).n_minus]
                       for b in BASES], dtype=float)
    sigmas = [PAULIS[_BASIS_INDEX[b]] for b in BASES]

    if start is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            start = linear_inversion(data)
    x0s = [_params_from_rho(np.asarray(start))]
    if restarts:
        rng = substream(seed, 977)
        for _ in range(restarts):
            x0s.append(rng.normal(size=4))

    best = None
    for x0 in x0s:
        res = minimize(_state_objective, x0, args=(counts, sigmas),
                       jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iter, "gtol": gtol, "ftol": 1e-14})
        if not res.success and "ITERATIONS" in str(res.message).upper():
            raise ConvergenceError(
                f"state MLE did not converge in {max_iter} iterations",
                best=_rho_from_params(res.x), diagnostics=res)
        if best is None or res.fun < best.fun:
            best = res
    rho = _rho_from_params(best.x)
    return 0.5 * (rho + rho.conj().T)


def mle_diagnostics(data):
    """Optimizer diagnostics (iterations, final gradient norm, likelihood)."""
    counts = np.array([[data.record(b).n_plus, data.record(b).n_minus]
                       for b in BASES], dtype=float)
    sigmas = [PAULIS[_BASIS_INDEX[b]] for b in BASES]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        x0 = _params_from_rho(linear_inversion(data))
    res = minimize(_state_objective, x0, args=(counts, sigmas), jac=True,
                   method="L-BFGS-B",
                   options={"maxiter": 2000, "gtol": 1e-8, "ftol": 1e-14})
    return {"iterations": int(res.nit),
            "grad_norm": float(np.max(np.abs(res.jac))),
            "neg_log_likelihood_per_count": float(res.fun)}


def log_likelihood(data, rho):
    """Per-count binomial log-likelihood of counts given a state."""
    total = 0.0
    n_total = 0.0
    for b in BASES:
        rec = data.record(b)
        sigma = PAULIS[_BASIS_INDEX[b]]
        p = (1.0 + np.trace(np.asarray(rho) @ sigma).real) / 2.0
        total += rec.n_plus * np.log(p + LIKELIHOOD_EPS)
        total += rec.n_minus * np.log(1.0 - p + LIKELIHOOD_EPS)
        n_total += rec.total
    return total / n_total


def bootstrap_state_error(data, resamples=200, seed=0, reference=None):
    """Standard deviation of the state fidelity under Poisson resampling.

    Each count is resampled as Poisson with mean equal to the observed
    count; the MLE is re-run and the fidelity to the point estimate (or a
    supplied reference state) recorded.  Returns the standard deviation
    over `resamples` repetitions, deterministic per seed.
    """
    point = mle_state(data)
    ref = point if reference is None else reference
    fids = np.empty(resamples)
    for i in range(resamples):
        rng = substream(seed, i)
        records = []
        for b in BASES:
            rec = data.record(b)
            n_p = rng.poisson(max(rec.n_plus, 0.0))
            n_m = rng.poisson(max(rec.n_minus, 0.0))
            if n_p + n_m == 0:
                n_p = 1
            records.append(MeasurementRecord(b, n_p, n_m))
        rho_i = mle_state(TomographyInput(tuple(records)), start=point)
        fids[i] = state_fidelity(rho_i, ref)
    return float(np.std(fids))


# ---------------------------------------------------------------------------
# process (chi-matrix) tomography


def chi_from_unitary(u):
    """Rank-1 chi matrix of a unitary gate (normalized, tr chi = 1)."""
    c = np.array([np.trace(p.conj().T @ u) / 2.0 for p in PAULIS])
    return np.outer(c, c.conj())


def chi_from_kraus(kraus_ops):
    chi = np.zeros((4, 4), dtype=complex)
    for k in kraus_ops:
        c = np.array([np.trace(p.conj().T @ k) / 2.0 for p in PAULIS])
        chi += np.outer(c, c.conj())
    return chi


def depolarizing_chi(p, u=None):
    """Unitary gate followed by depolarizing noise of strength p:
    rho -> (1 - p) U rho U^dag + p I/2."""
    chi_u = chi_from_unitary(np.eye(2) if u is None else u)
    return (1.0 - p) * chi_u + p * np.eye(4) / 4.0


def apply_chi(chi, rho):
    """Channel output sum_ij chi_ij sigma_i rho sigma_j (single state)."""
    return np.einsum("ij,iab,bc,jcd->ad", chi, PAULIS, np.asarray(rho, complex), PAULIS)


def _apply_chi_batch(chi, rhos):
    return np.einsum("ij,iab,nbc,jcd->nad", chi, PAULIS, rhos, PAULIS)


def tp_residual_matrix(chi):
    """sum_ij chi_ij sigma_j sigma_i - I; zero for trace-preserving maps."""
    k = np.einsum("ij,jab,ibc->ac", chi, PAULIS, PAULIS)
    return k - np.eye(2)


def random_cptp_chi(rng, kraus_rank=2):
    """Random CPTP channel: Kraus operators from a Haar-random isometry."""
    u = haar_random_unitary(2 * kraus_rank, rng)
    v = u[:, :2]
    kraus = [v[2 * i:2 * i + 2, :] for i in range(kraus_rank)]
    return chi_from_kraus(kraus)


def _chi_array(chi):
    return chi.chi if isinstance(chi, ProcessMatrix) else np.asarray(chi, dtype=complex)


def process_fidelity(chi1, chi2, trace_tol=1e-6):
    """F_proc = tr(chi1 chi2) between normalized process matrices."""
    c1, c2 = _chi_array(chi1), _chi_array(chi2)
    for c in (c1, c2):
        if abs(np.trace(c).real - 1.0) > trace_tol:
            raise ValueError("process_fidelity requires tr(chi) = 1")
    f = np.trace(c1 @ c2)
    if abs(f.imag) > 1e-10:
        raise ValueError(f"process fidelity has imaginary part {f.imag:.3e}")
    return float(np.clip(f.real, 0.0, 1.0))


def average_fidelity_from_process(f_proc):
    """F_ave = (d F_proc + 1)/(d + 1) at qubit dimension d = 2."""
    if not 0.0 <= f_proc <= 1.0:
        raise ValueError("process fidelity must lie in [0, 1]")
    return (2.0 * f_proc + 1.0) / 3.0


def monte_carlo_average_fidelity(chi, ideal, samples, seed=0):
    """Mean state fidelity between U|psi> and the channel output over
    Haar-random pure inputs, with the six-cardinal-point mean alongside.

    Sampling is stratified over Haar-random orthonormal frames: inputs are
    drawn as rotated cardinal six-tuples (each point is Haar-distributed),
    which removes the variance of the spherical-harmonic components that
    average out exactly and leaves only genuine deviation, e.g. from the
    output renormalization of lossy (CP-only) channels, whose outputs are
    renormalized on their trace.  haar_std_err is estimated over frames.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    chi = _chi_array(chi)
    rng = substream(seed)
    cards = np.stack([CARDINAL_STATES[k][0] for k in INPUT_LABELS])
    n_frames = max(samples // 6, 1)
    frame_means = np.empty(n_frames)
    for i in range(n_frames):
        v = haar_random_unitary(2, rng)
        frame_means[i], _ = _mean_output_fidelity(chi, ideal, cards @ v.T)
    haar_mean = float(frame_means.mean())
    haar_err = float(frame_means.std(ddof=1) / np.sqrt(n_frames)) if n_frames > 1 else 0.0
    cardinal_mean, _ = _mean_output_fidelity(chi, ideal, cards)
    return AverageFidelity(haar_mean, cardinal_mean, haar_err)


def _mean_output_fidelity(chi, ideal, psis):
    rhos = np.einsum("na,nb->nab", psis, psis.conj())
    outs = _apply_chi_batch(chi, rhos)
    traces = np.einsum("naa->n", outs).real
    targets = psis @ np.asarray(ideal, complex).T
    f = np.einsum("na,nab,nb->n", targets.conj(), outs, targets).real / traces
    f = np.clip(f, 0.0, 1.0)
    return float(f.mean()), float(f.std(ddof=1) / np.sqrt(len(f))) if len(f) > 1 else 0.0


def _chi_t_from_params(x):
    t = np.zeros((4, 4), dtype=complex)
    t[np.diag_indices(4)] = x[:4]
    rows, cols = np.tril_indices(4, -1)
    t[rows, cols] = x[4:10] + 1j * x[10:16]
    return t


def _chi_params_from_chi(chi, jitter=1e-7):
    w, v = np.linalg.eigh(chi)
    w = np.clip(w, jitter, None)
    c = (v * w) @ v.conj().T
    c /= np.trace(c).real
    t = np.linalg.cholesky(c)
    rows, cols = np.tril_indices(4, -1)
    return np.concatenate([np.diagonal(t).real, t[rows, cols].real, t[rows, cols].imag])


def _chi_from_params(x):
    t = _chi_t_from_params(x)
    tt = t @ t.conj().T
    return tt / np.trace(tt).real


def _trace_with_grad(t, mats):
    """tr(chi A) and d tr(chi A)/dx for chi = T T^dag/tau and each A in mats.

    Uses d tr(chi A)/dx_k = [tr(T^dag A E_k) + conj(tr(T^dag A^dag E_k))
    - tr(chi A) tr(T^dag E_k + E_k^dag T)] / tau with E_k = dT/dx_k; each
    tr(X E_k) is a read of X at the nonzero entry of E_k.
    """
    td = t.conj().T
    tt = t @ td
    tau = np.trace(tt).real
    rows, cols = np.tril_indices(4, -1)
    # entry (r, c) touched by each of the 16 parameters, with its unit value
    ent_r = np.concatenate([np.arange(4), rows, rows])
    ent_c = np.concatenate([np.arange(4), cols, cols])
    ent_v = np.concatenate([np.ones(4), np.ones(6), 1j * np.ones(6)])

    tr_id = ent_v * td[ent_c, ent_r]
    dtau = 2.0 * tr_id.real

    values, grads = [], []
    for a in mats:
        val = np.trace(tt @ a) / tau
        g_a = td @ a
        tr_a = ent_v * g_a[ent_c, ent_r]
        herm = np.max(np.abs(a - a.conj().T)) < 1e-12
        if herm:
            dnum = 2.0 * tr_a.real
            dval = (dnum - val.real * dtau) / tau
            values.append(val.real)
        else:
            g_ad = td @ a.conj().T
            tr_ad = ent_v * g_ad[ent_c, ent_r]
            dnum = tr_a + np.conj(tr_ad)
            dval = (dnum - val * dtau) / tau
            values.append(val)
        grads.append(dval)
    return values, grads, tau


def _qpt_matrices(rho_inputs):
    """Hermitian matrices M_kb, N_k with tr(chi M) = tr(E(rho_k) sigma_b)
    and tr(chi N) = tr(E(rho_k))."""
    ms, ns = [], []
    for rho in rho_inputs:
        n = np.einsum("iab,bc,jca->ji", PAULIS, rho, PAULIS)
        ns.append(n)
        row = []
        for b in BASES:
            sigma = PAULIS[_BASIS_INDEX[b]]
            m = np.einsum("iab,bc,jcd,da->ji", PAULIS, rho, PAULIS, sigma)
            row.append(m)
        ms.append(row)
    return ms, ns


def _qpt_objective(x, counts, ms, ns):
    t = _chi_t_from_params(x)
    flat = [m for row in ms for m in row] + list(ns)
    values, grads, _ = _trace_with_grad(t, flat)
    n_inputs = len(ns)
    m_vals = np.array(values[:3 * n_inputs]).reshape(n_inputs, 3)
    m_grads = np.array(grads[:3 * n_inputs]).reshape(n_inputs, 3, 16)
    n_vals = np.array(values[3 * n_inputs:])
    n_grads = np.array(grads[3 * n_inputs:])

    f = 0.0
    grad = np.zeros(16)
    n_total = counts.sum()
    for k in range(n_inputs):
        for b in range(3):
            s = m_vals[k, b] / n_vals[k]
            ds = (m_grads[k, b] - s * n_grads[k]) / n_vals[k]
            p = (1.0 + s) / 2.0
            n_p, n_m = counts[k, b]
            f -= n_p * np.log(p + LIKELIHOOD_EPS) + n_m * np.log(1.0 - p + LIKELIHOOD_EPS)
            w = n_p / (p + LIKELIHOOD_EPS) - n_m / (1.0 - p + LIKELIHOOD_EPS)
            grad -= w * ds / 2.0
    return f / n_total, grad / n_total


_TP_COMPONENTS = None


def _tp_component_matrices():
    """Matrices W with tr(chi W) giving the entries of sum chi_ij sigma_j sigma_i."""
    global _TP_COMPONENTS
    if _TP_COMPONENTS is None:
        comps = []
        for a in range(2):
            for b in range(2):
                w = np.einsum("jab,ibc->jiac", PAULIS, PAULIS)[:, :, a, b]
                comps.append(w)
        _TP_COMPONENTS = comps
    return _TP_COMPONENTS


def _tp_constraints():
    # tr(chi) = 1 already forces K00 + K11 = 2, so only three of the four
    # real trace-preservation conditions are independent
    comps = _tp_component_matrices()
    w00, w01 = comps[0], comps[1]

    def fun(x):
        t = _chi_t_from_params(x)
        values, _, _ = _trace_with_grad(t, [w00, w01])
        k00, k01 = values
        return np.array([np.real(k00) - 1.0, np.real(k01), np.imag(k01)])

    def jac(x):
        t = _chi_t_from_params(x)
        _, grads, _ = _trace_with_grad(t, [w00, w01])
        g00, g01 = grads
        return np.vstack([np.real(g00), np.real(g01), np.imag(g01)])

    return {"type": "eq", "fun": fun, "jac": jac}


def _lsq_chi_start(counts, rho_inputs):
    """Least-squares chi estimate from measured Bloch vectors (warm start)."""
    # design matrix: vec(E(rho_k)) is linear in vec(chi)
    a_rows, b_vals = [], []
    for k, rho_in in enumerate(rho_inputs):
        s = np.array([(counts[k, b, 0] - counts[k, b, 1]) / counts[k, b].sum()
                      for b in range(3)])
        rho_out = 0.5 * (np.eye(2) + s[0] * PAULIS[1] + s[1] * PAULIS[2] + s[2] * PAULIS[3])
        # coefficient of chi_ij in E(rho)[a,b] is (sigma_i rho sigma_j)[a,b]
        coeff = np.einsum("iac,cd,jdb->abij", PAULIS, rho_in, PAULIS)
        for a in range(2):
            for b in range(2):
                a_rows.append(coeff[a, b].reshape(16))
                b_vals.append(rho_out[a, b])
    sol, *_ = np.linalg.lstsq(np.array(a_rows), np.array(b_vals), rcond=None)
    chi = sol.reshape(4, 4)
    return 0.5 * (chi + chi.conj().T)


def qpt_mle(data, enforce_tp=False, max_iter=3000, seed=0):
    """Maximum-likelihood process matrix from six-input tomography counts.

    The inputs are taken to be the ideal cardinal states matching the data
    labels; outputs are compared through the post-selected probabilities
    p = (1 + tr(E(rho) sigma)/tr(E(rho)))/2, so the overall channel scale
    is not observable and chi is normalized to unit trace.  CP holds by
    construction; with enforce_tp the four trace-preservation equalities
    are imposed (SLSQP) to residual <= 1e-6.

    Returns a ProcessMatrix carrying the trace-preservation residual and
    optimizer diagnostics.
    """
    rho_inputs = [projector(CARDINAL_STATES[k][0]) for k in INPUT_LABELS]
    counts = np.zeros((6, 3, 2))
    for k, label in enumerate(INPUT_LABELS):
        tom = data.inputs[label]
        for b, basis in enumerate(BASES):
            rec = tom.record(basis)
            counts[k, b] = rec.n_plus, rec.n_minus
    for k in range(6):
        for kk in range(k + 1, 6):
            if np.allclose(counts[k], counts[kk]):
                warnings.warn("duplicate tomography inputs: chi fit may be "
                              "poorly conditioned")

    ms, ns = _qpt_matrices(rho_inputs)
    x0 = _chi_params_from_chi(_lsq_chi_start(counts, rho_inputs))

    if enforce_tp:
        res = minimize(_qpt_objective, x0, args=(counts, ms, ns), jac=True,
                       method="SLSQP", constraints=[_tp_constraints()],
                       options={"maxiter": max_iter, "ftol": 1e-14})
        if not res.success:
            raise ConvergenceError(f"TP-constrained fit failed: {res.message}",
                                   best=_chi_from_params(res.x), diagnostics=res)
    else:
        res = minimize(_qpt_objective, x0, args=(counts, ms, ns), jac=True,
                       method="L-BFGS-B",
                       options={"maxiter": max_iter, "gtol": 1e-9, "ftol": 1e-15})
        if not res.success and np.max(np.abs(res.jac)) > 1e-5:
            raise ConvergenceError(f"process MLE did not converge: {res.message}",
                                   best=_chi_from_params(res.x), diagnostics=res)
    chi = _chi_from_params(res.x)
    chi = 0.5 * (chi + chi.conj().T)
    residual = float(np.max(np.abs(tp_residual_matrix(chi))))
    if enforce_tp and residual > 1e-6:
        raise ConvergenceError(
            f"TP-constrained fit left residual {residual:.2e} > 1e-6",
            best=chi, diagnostics=res)
    diag = {"iterations": int(res.nit),
            "neg_log_likelihood_per_count": float(res.fun),
            "grad_norm": float(np.max(np.abs(res.jac))) if res.jac is not None else None}
    return ProcessMatrix(chi=chi, tp_enforced=enforce_tp,
                         tp_residual=residual, diagnostics=diag)


# ---------------------------------------------------------------------------
# fringe analysis


@dataclass(frozen=True)
class FringeFit:
    visibility: float
    max_min_ratio: float
    ratio_capped: bool
    rms_residual: float
    warning: str | None


@dataclass(frozen=True)
class FringeResult:
    """Per-outcome sinusoidal fits of a coincidence fringe."""

    outcomes: tuple

    @property
    def visibility(self):
        return min(o.visibility for o in self.outcomes)

    @property
    def max_min_ratio(self):
        return min(o.max_min_ratio for o in self.outcomes)


RATIO_CAP = 1e6


def fringe_analysis(sweep, residual_threshold=0.05):
    """Least-squares sinusoid fit (period 2 pi) of coincidence counts.

    sweep is a sequence of (angle_rad, (counts_a, counts_b)); at least four
    points spanning one full period are required.  For each outcome the
    model a + b cos(x) + c sin(x) gives visibility (max - min)/(max + min)
    and the max/min ratio; a non-positive fitted minimum caps the ratio at
    1e6 with a flag.  A relative rms residual above residual_threshold
    attaches a "non-sinusoidal data" warning to the fit.
    """
    angles = np.array([p[0] for p in sweep], dtype=float)
    counts = np.array([p[1] for p in sweep], dtype=float)
    if len(angles) < 4:
        raise ValueError("fringe fit needs at least 4 sweep points")
    if angles.max() - angles.min() < 2 * np.pi - 1e-6:
        raise ValueError("fringe sweep must span at least one period (2 pi)")
    design = np.column_stack([np.ones_like(angles), np.cos(angles), np.sin(angles)])
    fits = []
    for col in range(counts.shape[1]):
        y = counts[:, col]
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        a, b, c = coef
        amp = float(np.hypot(b, c))
        hi, lo = a + amp, a - amp
        vis = amp / a if a > 0 else 0.0
        capped = lo <= hi / RATIO_CAP
        ratio = float(hi / lo) if not capped else RATIO_CAP
        resid = y - design @ coef
        rms = float(np.sqrt(np.mean(resid**2)) / max(hi, 1e-30))
        warning = "non-sinusoidal data" if rms > residual_threshold else None
        fits.append(FringeFit(float(vis), ratio, bool(capped), rms, warning))
    return FringeResult(tuple(fits))


# ---------------------------------------------------------------------------
# count-data interchange (CSV)


def counts_to_csv(datasets):
    """CSV text with columns input_label, basis, n_plus, n_minus."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["input_label", "basis", "n_plus", "n_minus"])
    for label in sorted(datasets):
        tom = datasets[label]
        for b in BASES:
            rec = tom.record(b)
            writer.writerow([label, b, repr(rec.n_plus), repr(rec.n_minus)])
    return buf.getvalue()


def counts_from_csv(text):
    by_label = {}
    reader = csv.DictReader(io.StringIO(text))
    for row in reader:
        rec = MeasurementRecord(row["basis"], float(row["n_plus"]), float(row["n_minus"]))
        by_label.setdefault(row["input_label"], []).append(rec)
    return {label: TomographyInput(tuple(records))
            for label, records in by_label.items()}
