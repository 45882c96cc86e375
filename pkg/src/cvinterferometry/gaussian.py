"""Gaussian states in the interleaved quadrature ordering (q1, p1, q2, p2, ...).

Vacuum variance is 1/2 per quadrature, with q = (a + a^dag)/sqrt(2) and
p = (a - a^dag)/(i sqrt(2)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SYMMETRY_TOL = 1e-12
PHYSICAL_TOL = 1e-10


class UnphysicalStateError(ValueError):
    """Raised when parameters or matrices violate the uncertainty relation."""


@dataclass(frozen=True)
class CoherenceParams:
    """Source strength and complex coherence g = g_abs * exp(i theta)."""

    epsilon: float
    g_abs: float
    theta: float = 0.0

    def validate(self) -> CoherenceParams:
        if not np.isfinite(self.epsilon) or self.epsilon < 0:
            raise UnphysicalStateError(f"epsilon must be >= 0, got {self.epsilon}")
        if not 0.0 <= self.g_abs <= 1.0:
            raise UnphysicalStateError(f"|g| must lie in [0, 1], got {self.g_abs}")
        return self

    @property
    def g(self) -> complex:
        return self.g_abs * np.exp(1j * self.theta)

    def replace(self, **changes) -> CoherenceParams:
        return CoherenceParams(**{**self.__dict__, **changes})


def symplectic_form(n_modes: int) -> np.ndarray:
    """Real symplectic form for interleaved ordering, [q_k, p_k] = i."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class GaussianState:
    """Immutable zero-or-displaced Gaussian state.

    ``mean`` has length ``2 * n_modes`` and ``cov`` is the symmetrized
    covariance ``V_ij = <{dx_i, dx_j}>/2``.
    """

    mean: np.ndarray
    cov: np.ndarray
    n_modes: int = field(init=False)

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise ValueError(f"covariance must be square with even size, got {cov.shape}")
        if mean.shape != (cov.shape[0],):
            raise ValueError(f"mean shape {mean.shape} does not match covariance {cov.shape}")
        if np.max(np.abs(cov - cov.T), initial=0.0) > SYMMETRY_TOL:
            raise ValueError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "n_modes", cov.shape[0] // 2)

    @classmethod
    def vacuum(cls, n_modes: int) -> GaussianState:
        return cls(np.zeros(2 * n_modes), 0.5 * np.eye(2 * n_modes))

    @classmethod
    def from_cov(cls, cov) -> GaussianState:
        cov = np.asarray(cov, dtype=float)
        return cls(np.zeros(cov.shape[0]), cov)

    def is_physical(self, tol: float = PHYSICAL_TOL) -> bool:
        """Uncertainty relation V + i Omega / 2 >= 0, checked on the Hermitian form."""
        return uncertainty_gap(self) >= -tol

    def mean_photon_number(self) -> float:
        """Total <sum_k a_k^dag a_k>, including the displacement contribution."""
        return float(0.5 * (np.trace(self.cov) + self.mean @ self.mean) - 0.5 * self.n_modes)

    def reduced(self, modes) -> GaussianState:
        """Marginal state on ``modes`` (kept in the given order)."""
        idx = _quad_indices(modes, self.n_modes)
        return GaussianState(self.mean[idx], self.cov[np.ix_(idx, idx)])


def tensor(*states: GaussianState) -> GaussianState:
    """Direct product, modes concatenated in argument order."""
    mean = np.concatenate([s.mean for s in states])
    size = mean.size
    cov = np.zeros((size, size))
    start = 0
    for s in states:
        stop = start + 2 * s.n_modes
        cov[start:stop, start:stop] = s.cov
        start = stop
    return GaussianState(mean, cov)


def _quad_indices(modes, n_modes: int) -> list[int]:
    idx = []
    for m in modes:
        _check_mode(m, n_modes)
        idx += [2 * m, 2 * m + 1]
    return idx


def _check_mode(mode: int, n_modes: int) -> None:
    if not 0 <= mode < n_modes:
        raise IndexError(f"mode {mode} out of range for {n_modes}-mode state")


def uncertainty_gap(state: GaussianState) -> float:
    """Smallest eigenvalue of V + i Omega / 2 (zero for pure states).

    Unlike the symplectic eigenvalues this is well conditioned for strongly
    squeezed states, whose symplectic spectrum the rounded entries only fix
    to about eps * |V| * e^{2r}.
    """
    omega = symplectic_form(state.n_modes)
    return float(np.linalg.eigvalsh(state.cov + 0.5j * omega)[0])


def symplectic_eigenvalues(state: GaussianState) -> np.ndarray:
    """Sorted symplectic eigenvalues, one per mode."""
    omega = symplectic_form(state.n_modes)
    ev = np.abs(np.linalg.eigvals(1j * omega @ state.cov))
    # eigenvalues come in +/- pairs; take each modulus once
    return np.sort(ev)[::2]


def transform(state: GaussianState, S: np.ndarray, modes=None) -> GaussianState:
    """Apply a symplectic map ``S`` on the quadratures of ``modes``."""
    n = state.n_modes
    if modes is None:
        modes = range(n)
    idx = _quad_indices(modes, n)
    S = np.asarray(S, dtype=float)
    om = symplectic_form(len(idx) // 2)
    if S.shape != (len(idx), len(idx)) or np.max(np.abs(S @ om @ S.T - om)) > 1e-10:
        raise ValueError("transform matrix is not symplectic for the selected modes")
    full = np.eye(2 * n)
    full[np.ix_(idx, idx)] = S
    return GaussianState(full @ state.mean, full @ state.cov @ full.T)


# --------------------------------------------------------------------- states


def stellar_covariance(epsilon: float, g_abs: float, theta: float) -> np.ndarray:
    """Two-mode thermal covariance with mutual coherence g = |g| e^{i theta}.

    Each mode carries epsilon/2 photons on average.
    """
    c = epsilon * g_abs * np.cos(theta)
    s = epsilon * g_abs * np.sin(theta)
    d = 1.0 + epsilon
    return 0.5 * np.array(
        [
            [d, 0.0, c, -s],
            [0.0, d, s, c],
            [c, s, d, 0.0],
            [-s, c, 0.0, d],
        ]
    )


def stellar_state(params) -> GaussianState:
    """Thermal light received by the two telescopes, modes (a1, a2)."""
    params.validate()
    return GaussianState.from_cov(stellar_covariance(params.epsilon, params.g_abs, params.theta))


def _check_link(r: float, T: float) -> None:
    if r < 0:
        raise ValueError(f"squeezing parameter must be >= 0, got {r}")
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"amplitude transmissivity must lie in [0, 1], got {T}")


def tms_state(r: float) -> GaussianState:
    """Ideal two-mode squeezed vacuum: q anti-correlated, p correlated."""
    if r < 0:
        raise ValueError(f"squeezing parameter must be >= 0, got {r}")
    c = 0.5 * np.cosh(2 * r)
    s = 0.5 * np.sinh(2 * r)
    cov = np.array(
        [
            [c, 0.0, -s, 0.0],
            [0.0, c, 0.0, s],
            [-s, 0.0, c, 0.0],
            [0.0, s, 0.0, c],
        ]
    )
    return GaussianState.from_cov(cov)


def wigner_form_tms(r: float, T: float) -> np.ndarray:
    """Quadratic form Q of the lossy TMS Wigner exponent, W ~ exp(-x^T Q x).

    The exponent is C(q3^2 + p3^2 + q4^2 + p4^2) + 2S(q3 q4 - p3 p4).
    """
    _check_link(r, T)
    t2 = T * T
    N = 1.0 - 4.0 * t2 * (t2 - 1.0) * np.sinh(r) ** 2
    C = (1.0 + t2 * (np.cosh(2 * r) - 1.0)) / N
    S = t2 * np.sinh(2 * r) / N
    return np.array(
        [
            [C, 0.0, S, 0.0],
            [0.0, C, 0.0, -S],
            [S, 0.0, C, 0.0],
            [0.0, -S, 0.0, C],
        ]
    )


def lossy_tms_state(r: float, T: float) -> GaussianState:
    """TMS vacuum after two pure-loss channels of amplitude transmissivity T.

    The covariance is half the inverse of the Wigner quadratic form. Each
    2x2 block [[C, S], [S, C]] inverts to [[C, -S], [-S, C]] / (C^2 - S^2)
    and C^2 - S^2 = 1/N exactly, so the inverse is written out in closed
    form to stay accurate at large r.
    """
    _check_link(r, T)
    t2 = T * T
    diag = 0.5 * (1.0 + 2.0 * t2 * np.sinh(r) ** 2)
    off = 0.5 * t2 * np.sinh(2 * r)
    cov = np.array(
        [
            [diag, 0.0, -off, 0.0],
            [0.0, diag, 0.0, off],
            [-off, 0.0, diag, 0.0],
            [0.0, off, 0.0, diag],
        ]
    )
    return GaussianState.from_cov(cov)


# ----------------------------------------------------------------- operations


def beamsplitter_matrix(transmittance: float, phase: float = 0.0) -> np.ndarray:
    """Symplectic block for a_i -> t a_i + r e^{i phi} a_j, a_j -> t a_j - r e^{-i phi} a_i."""
    t = transmittance
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmittance must lie in [0, 1], got {t}")
    rr = np.sqrt(1.0 - t * t)
    c, s = np.cos(phase), np.sin(phase)
    R = rr * np.array([[c, -s], [s, c]])
    return np.block([[t * np.eye(2), R], [-R.T, t * np.eye(2)]])


def apply_beamsplitter(
    state: GaussianState, mode_i: int, mode_j: int, transmittance: float = np.sqrt(0.5), phase: float = 0.0
) -> GaussianState:
    if mode_i == mode_j:
        raise ValueError("beamsplitter needs two distinct modes")
    return transform(state, beamsplitter_matrix(transmittance, phase), [mode_i, mode_j])


def rotation_matrix(delta: float) -> np.ndarray:
    """Quadrature rotation for a -> e^{i delta} a."""
    c, s = np.cos(delta), np.sin(delta)
    return np.array([[c, -s], [s, c]])


def apply_phase(state: GaussianState, mode: int, delta: float) -> GaussianState:
    return transform(state, rotation_matrix(delta), [mode])


def apply_displacement(state: GaussianState, mode: int, dq: float, dp: float) -> GaussianState:
    _check_mode(mode, state.n_modes)
    mean = state.mean.copy()
    mean[2 * mode] += dq
    mean[2 * mode + 1] += dp
    return GaussianState(mean, state.cov)


def apply_loss(state: GaussianState, mode: int, eta: float) -> GaussianState:
    """Pure-loss channel with power transmissivity ``eta`` on one mode."""
    _check_mode(mode, state.n_modes)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"power transmissivity must lie in [0, 1], got {eta}")
    n = state.n_modes
    X = np.eye(2 * n)
    X[2 * mode, 2 * mode] = X[2 * mode + 1, 2 * mode + 1] = np.sqrt(eta)
    Y = np.zeros((2 * n, 2 * n))
    Y[2 * mode, 2 * mode] = Y[2 * mode + 1, 2 * mode + 1] = 0.5 * (1.0 - eta)
    return GaussianState(X @ state.mean, X @ state.cov @ X.T + Y)


@dataclass(frozen=True)
class HomodyneMarginal:
    """Gaussian marginal of a single measured quadrature."""

    mean: float
    variance: float

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * (x - self.mean) ** 2 / self.variance) / np.sqrt(2 * np.pi * self.variance)


def condition_on_homodyne(
    state: GaussianState, mode: int, quadrature: str, outcome: float
) -> tuple[GaussianState, HomodyneMarginal]:
    """Condition on a homodyne outcome of ``quadrature`` ('q' or 'p') of ``mode``.

    The measured mode is removed from the returned posterior.
    """
    _check_mode(mode, state.n_modes)
    if quadrature not in ("q", "p"):
        raise ValueError(f"quadrature must be 'q' or 'p', got {quadrature!r}")
    k = 2 * mode + (0 if quadrature == "q" else 1)
    keep = [i for i in range(2 * state.n_modes) if i // 2 != mode]
    var = state.cov[k, k]
    marginal = HomodyneMarginal(float(state.mean[k]), float(var))
    if not keep:
        return None, marginal
    cross = state.cov[keep, k]
    mean = state.mean[keep] + cross * (outcome - state.mean[k]) / var
    cov = state.cov[np.ix_(keep, keep)] - np.outer(cross, cross) / var
    return GaussianState(mean, cov), marginal


# ------------------------------------------------------------ ladder basis


def _ladder_transform(n_modes: int) -> np.ndarray:
    """U with (a, a^dag) = U (q, p) per mode."""
    u = np.array([[1.0, 1j], [1.0, -1j]]) / np.sqrt(2.0)
    return np.kron(np.eye(n_modes), u)


@dataclass(frozen=True)
class LadderCovariance:
    """Sigma_ij = <{a_i, a_j}>/2 in ordering (a1, a1^dag, a2, a2^dag, ...)."""

    sigma: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.sigma.shape[0] // 2

    @property
    def omega(self) -> np.ndarray:
        """Commutator matrix [a_i, a_j] = Omega_ij."""
        return symplectic_form(self.n_modes)


def quad_to_ladder(state: GaussianState) -> LadderCovariance:
    U = _ladder_transform(state.n_modes)
    # centred second moments; ladder operators are not Hermitian so U^T, not U^dag
    return LadderCovariance(U @ state.cov @ U.T)


def ladder_to_quad(ladder: LadderCovariance) -> GaussianState:
    Uinv = np.linalg.inv(_ladder_transform(ladder.n_modes))
    cov = Uinv @ ladder.sigma @ Uinv.T
    if np.max(np.abs(cov.imag)) > 1e-12:
        raise ValueError("ladder covariance does not correspond to a real quadrature covariance")
    return GaussianState.from_cov(cov.real)


def ladder_matrix(cov: np.ndarray) -> np.ndarray:
    """Ladder-basis transform of an arbitrary quadrature matrix (e.g. a derivative)."""
    U = _ladder_transform(cov.shape[0] // 2)
    return U @ cov @ U.T
