"""Complex linear algebra and qubit-state primitives shared by all modules.

All states and operators are plain numpy arrays: pure states are complex
vectors of unit norm, density matrices are Hermitian positive-semidefinite
complex matrices with unit trace.  Matrix functions (exponential, square
root) of Hermitian matrices go through a single eigendecomposition backend,
which is exact at the dimensions used here (2, 3, 4).

Bloch-sphere convention: ``|down> = (1, 0)`` sits at the +z pole and
``|up> = (0, 1)`` at -z; the diagonal/antidiagonal pair ``D/A`` sits on
+/-x and the circular pair ``R/L`` on +/-y.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
PSD_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

#: Pauli basis (I, sigma_x, sigma_y, sigma_z) used for Stokes vectors and
#: process matrices throughout.
PAULIS = np.array([IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z])

KET_DOWN = np.array([1, 0], dtype=complex)
KET_UP = np.array([0, 1], dtype=complex)
KET_D = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_A = np.array([1, -1], dtype=complex) / np.sqrt(2)
KET_R = np.array([1, 1j], dtype=complex) / np.sqrt(2)
KET_L = np.array([1, -1j], dtype=complex) / np.sqrt(2)

#: The six cardinal states, keyed by label, with their (theta, phi) angles in
#: the parameterization cos(theta)|down> + sin(theta) e^{i phi}|up>.
CARDINAL_STATES = {
    "down": (KET_DOWN, 0.0, 0.0),
    "up": (KET_UP, np.pi / 2, 0.0),
    "D": (KET_D, np.pi / 4, 0.0),
    "A": (KET_A, np.pi / 4, np.pi),
    "R": (KET_R, np.pi / 4, np.pi / 2),
    "L": (KET_L, np.pi / 4, 3 * np.pi / 2),
}


class LinalgError(ValueError):
    """Raised when an operand violates an operation's contract."""


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m, dtype=complex)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def is_unitary(m, tol=UNITARY_TOL):
    m = np.asarray(m, dtype=complex)
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def is_psd(m, tol=PSD_TOL):
    """Hermitian with all eigenvalues >= -tol."""
    if not is_hermitian(m, tol):
        return False
    return bool(np.min(np.linalg.eigvalsh(m)) >= -tol)


def is_density_matrix(rho, tol=HERMITIAN_TOL):
    rho = np.asarray(rho, dtype=complex)
    if not is_hermitian(rho, tol):
        return False
    if abs(np.trace(rho).real - 1.0) > tol:
        return False
    return bool(np.min(np.linalg.eigvalsh(rho)) >= -tol)


def assert_density_matrix(rho, tol=HERMITIAN_TOL, what="state"):
    if not is_density_matrix(rho, tol):
        raise LinalgError(f"{what} is not a valid density matrix (tol={tol})")


def pure_state(theta, phi):
    """cos(theta)|down> + sin(theta) e^{i phi}|up>."""
    return np.array([np.cos(theta), np.sin(theta) * np.exp(1j * phi)])


def projector(psi):
    """Density matrix |psi><psi| of a normalized pure state."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def hermitian_eig(m, tol=HERMITIAN_TOL):
    """Eigendecomposition m = V diag(w) V^dag of a Hermitian matrix.

    Returns (w, V) with eigenvalues ascending and V unitary.  Raises
    LinalgError if m is not Hermitian within tol.
    """
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, tol):
        raise LinalgError("hermitian_eig requires a Hermitian matrix")
    w, v = np.linalg.eigh(m)
    return w, v


def matrix_exp_i(h, t):
    """Unitary propagator exp(-i h t) for Hermitian h (rad/s) and time t (s)."""
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def matrix_sqrt_psd(m, tol=1e-8):
    """Positive-semidefinite square root of a PSD matrix.

    Eigenvalues in [-tol, 0) are clipped to zero, as are roundoff-scale
    positive ones (below 1e-14 of the largest), which keeps sqrt exact on
    rank-deficient inputs; an eigenvalue below -tol raises LinalgError.
    """
    w, v = hermitian_eig(m)
    if np.min(w) < -tol:
        raise LinalgError(f"matrix_sqrt_psd: negative eigenvalue {np.min(w):.3e}")
    w = np.where(w < 1e-14 * max(np.max(w), 0.0), 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T


def state_fidelity(rho1, rho2):
    """Uhlmann fidelity F = (tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2.

    Symmetric in its arguments and equal to |<psi1|psi2>|^2 when both
    states are pure.  The result is clipped to [0, 1] against roundoff.
    """
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    if rho1.shape != rho2.shape:
        raise LinalgError("state_fidelity: dimension mismatch")
    s1 = matrix_sqrt_psd(rho1)
    inner = matrix_sqrt_psd(s1 @ rho2 @ s1)
    f = np.trace(inner).real ** 2
    return float(np.clip(f, 0.0, 1.0))


def stokes_from_rho(rho):
    """Stokes vector (s_x, s_y, s_z) = tr(rho sigma_i) of a qubit state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise LinalgError("stokes_from_rho expects a 2x2 density matrix")
    s = np.array([np.trace(rho @ p).real for p in PAULIS[1:]])
    if s @ s > 1.0 + 1e-9:
        raise LinalgError(f"Stokes vector norm {np.sqrt(s @ s):.6f} exceeds 1")
    return s


def rho_from_stokes(s):
    """Qubit density matrix (I + s . sigma)/2 from a Stokes vector."""
    s = np.asarray(s, dtype=float)
    return (IDENTITY_2 + s[0] * SIGMA_X + s[1] * SIGMA_Y + s[2] * SIGMA_Z) / 2


def substream(root_seed, *path):
    """Deterministic RNG substream: root seed plus an index path.

    Independent streams for any distinct path, independent of the order
    in which they are drawn; this is the seed-splitting contract used by
    every sampler in the package.
    """
    ss = np.random.SeedSequence(entropy=int(root_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.default_rng(ss)


def haar_random_states(dim, n, rng):
    """n Haar-distributed pure states, rows of an (n, dim) array."""
    z = rng.normal(size=(n, dim)) + 1j * rng.normal(size=(n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_random_state(dim, seed):
    """One Haar-random pure state of dimension dim, deterministic per seed."""
    if dim < 2:
        raise LinalgError("haar_random_state requires dim >= 2")
    return haar_random_states(dim, 1, substream(seed))[0]


def haar_random_unitary(dim, rng):
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def phase_invariant_error(u, v):
    """max-norm distance between unitaries after aligning global phase."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    inner = np.trace(u.conj().T @ v)
    if abs(inner) < 1e-300:
        return float(np.max(np.abs(u - v)))
    return float(np.max(np.abs(u * inner / abs(inner) - v)))


def gate_overlap(u, v):
    """|tr(U^dag V)| / d; equals 1 iff U = V up to a global phase."""
    u = np.asarray(u, dtype=complex)
    return float(abs(np.trace(u.conj().T @ v)) / u.shape[0])


def matrix_to_json(m):
    """Nested row-major [re, im] pairs, the interchange format for complex
    matrices shared by every module."""
    m = np.asarray(m, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def matrix_from_json(data):
    return np.array([[complex(re, im) for re, im in row] for row in data])
