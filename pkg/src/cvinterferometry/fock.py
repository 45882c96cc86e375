"""Truncated Fock-basis oracle for two-mode Gaussian states.

Density matrices are built from the Glauber P-function: for a zero-mean
state with ``cov - I/2 >= 0`` the P-function is a (possibly degenerate)
Gaussian, and every matrix element ``<m,n|rho|m',n'>`` is a Gaussian moment
of coherent-state overlaps. Those moments come from an Isserlis recursion
(:mod:`._kernels`), so no numerical integration is involved.

Basis index of ``|m, n>`` is ``m * (cutoff + 1) + n``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .estimation import FisherKind, FisherMatrix, SldCoefficients, qfi_closed_form, sld_coefficients
from .gaussian import (
    CoherenceParams,
    GaussianState,
    UnphysicalStateError,
    apply_beamsplitter,
    apply_phase,
    stellar_state,
    symplectic_eigenvalues,
)
from .teleportation import teleported_state

DEFAULT_TAIL_TARGET = 1e-8
DEFAULT_TAIL_BUDGET = 1e-6
MAX_CUTOFF = 16
P_FLOOR = 1e-15
FD_STEP = 1e-5


class TruncationError(RuntimeError):
    """Probability outside the truncated basis exceeds the allowed budget."""


@dataclass(frozen=True)
class FockOperator:
    cutoff: int
    matrix: np.ndarray
    tail_mass: float = 0.0

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    def probabilities(self) -> np.ndarray:
        """Diagonal as a (cutoff+1, cutoff+1) array p[m, n]."""
        return np.clip(np.diag(self.matrix).real, 0.0, None).reshape(self.dim, self.dim)

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ op))


@dataclass(frozen=True)
class PnrDistribution:
    probs: np.ndarray
    delta: float
    params: CoherenceParams
    y: float
    tail_mass: float = 0.0

    def items(self):
        m, n = np.indices(self.probs.shape)
        return zip(m.ravel().tolist(), n.ravel().tolist(), self.probs.ravel().tolist())

    def moment(self, f) -> float:
        m, n = np.indices(self.probs.shape)
        return float(np.sum(self.probs * f(m, n)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "n", "probability"])
        for m, n, p in self.items():
            w.writerow([m, n, repr(p)])
        return buf.getvalue()


# ------------------------------------------------------------ truncation


def thermal_tail_bound(nbar: float, cutoff: int, n_modes: int = 2) -> float:
    """P(total photons > cutoff) for ``n_modes`` thermal modes of mean ``nbar``.

    For a state that is a passive transform of thermal modes, taking every
    mode at the largest occupation bounds the probability lost by a per-mode
    cutoff.
    """
    if nbar <= 0:
        return 0.0
    x = nbar / (1.0 + nbar)
    k = np.arange(cutoff + 1)
    # negative binomial pmf: C(k + n - 1, n - 1) x^k (1 - x)^n
    logc = gammaln(k + n_modes) - gammaln(k + 1) - gammaln(n_modes)
    kept = np.sum(np.exp(logc + k * np.log(x) + n_modes * np.log1p(-x)))
    return float(max(0.0, 1.0 - kept))


def state_tail_bound(state: GaussianState, cutoff: int) -> float:
    nbar = float(symplectic_eigenvalues(state)[-1]) - 0.5
    return thermal_tail_bound(max(nbar, 0.0), cutoff, state.n_modes)


def default_cutoff(state: GaussianState, target: float = DEFAULT_TAIL_TARGET) -> int:
    """Smallest cutoff whose tail bound is at most ``target`` (capped at 16)."""
    for c in range(1, MAX_CUTOFF + 1):
        if state_tail_bound(state, c) <= target:
            return c
    return MAX_CUTOFF


# ------------------------------------------------------------ conversion


def _p_function_moments(state: GaussianState):
    """Normalization and complex second moments of the tilted P-function.

    Returns ``(Z, Q)`` with ``Z = E_P[exp(-|alpha|^2 - |beta|^2)]`` and
    ``Q[i, j] = E'[z_i z_j]`` for z = (alpha, beta, alpha*, beta*) under
    the P-function reweighted by ``exp(-|alpha|^2 - |beta|^2) / Z``.
    """
    if state.n_modes != 2:
        raise ValueError("the Fock oracle handles two-mode states only")
    if np.max(np.abs(state.mean)) > 1e-14:
        raise ValueError("the Fock oracle handles zero-mean states only")
    # x = (Re alpha, Im alpha, Re beta, Im beta) = (q1, p1, q2, p2) / sqrt(2)
    K = 0.5 * (state.cov - 0.5 * np.eye(4))
    if np.linalg.eigvalsh(K)[0] < -1e-12:
        raise UnphysicalStateError("cov - I/2 is not positive semidefinite; no Gaussian P-function")
    A = np.eye(4) + 2.0 * K
    Z = 1.0 / np.sqrt(np.linalg.det(A))
    Kt = np.linalg.solve(A.T, K.T).T  # K (I + 2K)^-1
    Kt = 0.5 * (Kt + Kt.T)
    W = np.array(
        [
            [1.0, 1j, 0.0, 0.0],
            [0.0, 0.0, 1.0, 1j],
            [1.0, -1j, 0.0, 0.0],
            [0.0, 0.0, 1.0, -1j],
        ]
    )
    return Z, W @ Kt @ W.T


def gaussian_to_fock(state: GaussianState, cutoff: int | None = None) -> FockOperator:
    """Density matrix of a zero-mean two-mode Gaussian state in the truncated Fock basis."""
    if cutoff is None:
        cutoff = default_cutoff(state)
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    Z, Q = _p_function_moments(state)
    M = _kernels.gaussian_moments(np.ascontiguousarray(Q, dtype=np.complex128), cutoff)
    n = cutoff + 1
    inv_sqrt_fact = np.exp(-0.5 * gammaln(np.arange(n) + 1.0))
    scale = np.einsum("a,b,c,d->abcd", inv_sqrt_fact, inv_sqrt_fact, inv_sqrt_fact, inv_sqrt_fact)
    rho = (Z * M * scale).reshape(n * n, n * n)
    rho = 0.5 * (rho + rho.conj().T)
    tail = float(1.0 - np.trace(rho).real)
    return FockOperator(cutoff, rho, tail)


# ------------------------------------------------------------ operators


def ladder_ops(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Annihilators (a_first, a_second) on the truncated two-mode space."""
    n = cutoff + 1
    a = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)
    eye = np.eye(n)
    return np.kron(a, eye), np.kron(eye, a)


def total_number_projector(cutoff: int, max_total: int | None = None) -> np.ndarray:
    """Projector on |m, n> with m + n <= max_total (default: cutoff)."""
    n = cutoff + 1
    max_total = cutoff if max_total is None else max_total
    m, k = np.indices((n, n))
    return np.diag(((m + k) <= max_total).ravel().astype(float))


# ------------------------------------------------------------ PNR statistics


def pnr_state(params: CoherenceParams, y: float, delta: float) -> GaussianState:
    """Teleported state after the delay on a2 and the balanced beamsplitter.

    Slot 0 is d1 = (a4 + e^{i delta} a2)/sqrt(2) and slot 1 is
    -d2 = (e^{i delta} a2 - a4)/sqrt(2); the sign does not affect counts.
    """
    s = apply_phase(teleported_state(params, y), 1, delta)
    return apply_beamsplitter(s, 0, 1)


def pnr_distribution(params: CoherenceParams, y: float, delta: float, cutoff: int | None = None) -> PnrDistribution:
    rho = gaussian_to_fock(pnr_state(params, y, delta), cutoff)
    return PnrDistribution(rho.probabilities(), delta, params, y, rho.tail_mass)


def _shifted(params: CoherenceParams, index: int, h: float) -> CoherenceParams:
    if index == 0:
        return params.replace(theta=params.theta + h)
    return params.replace(g_abs=params.g_abs + h)


def _fd_gradient(func, params: CoherenceParams, index: int, h: float):
    """Richardson-extrapolated derivative of ``func`` along theta or |g|.

    Central differences in the interior; for |g| near 0 or 1 a one-sided
    three-point stencil keeps every evaluation inside [0, 1].
    """
    x = params.theta if index == 0 else params.g_abs
    lo_ok = index == 0 or x - 2 * h >= 0.0
    hi_ok = index == 0 or x + 2 * h <= 1.0

    def deriv(step):
        if lo_ok and hi_ok:
            return (func(_shifted(params, index, step)) - func(_shifted(params, index, -step))) / (2 * step)
        sgn = 1.0 if hi_ok else -1.0
        f0 = func(params)
        f1 = func(_shifted(params, index, sgn * step))
        f2 = func(_shifted(params, index, 2 * sgn * step))
        return sgn * (-3 * f0 + 4 * f1 - f2) / (2 * step)

    d1, d2 = deriv(h), deriv(h / 2)
    return (4 * d2 - d1) / 3, np.max(np.abs(d2 - d1))


def classical_fi_pnr(
    params: CoherenceParams,
    y: float,
    delta: float,
    cutoff: int | None = None,
    fd_step: float = FD_STEP,
    p_floor: float = P_FLOOR,
    tail_budget: float = DEFAULT_TAIL_BUDGET,
) -> FisherMatrix:
    """Exact-in-truncation FI of photon counting on the delayed outputs."""
    params.validate()
    if cutoff is None:
        cutoff = default_cutoff(pnr_state(params, y, delta))
    base = pnr_distribution(params, y, delta, cutoff)
    if base.tail_mass > tail_budget:
        raise TruncationError(f"tail mass {base.tail_mass:.3e} exceeds budget {tail_budget:.1e} at cutoff {cutoff}")

    def probs(p):
        return pnr_distribution(p, y, delta, cutoff).probs

    grads = [_fd_gradient(probs, params, i, fd_step)[0] for i in range(2)]
    keep = base.probs > p_floor
    p = base.probs[keep]
    g = [gr[keep] for gr in grads]
    F = np.array([[np.sum(g[i] * g[j] / p) for j in range(2)] for i in range(2)])
    return FisherMatrix.from_array(F, FisherKind.PNR)


# ------------------------------------------------------------ SLD check


@dataclass(frozen=True)
class SldReport:
    which: str
    residual: float
    fisher_trace: float
    fisher_closed_form: float
    mean_sld: float
    tail_mass: float

    @property
    def fisher_relative_error(self) -> float:
        return abs(self.fisher_trace / self.fisher_closed_form - 1.0)


def sld_operator(coeffs: SldCoefficients, which: str, cutoff: int) -> np.ndarray:
    """SLD on modes (a4, a2) built from its closed-form coefficients."""
    a4, a2 = ladder_ops(cutoff)
    eye = np.eye(a4.shape[0])
    hop = a4 @ a2.conj().T  # a4 a2^dag
    if which == "theta":
        p = coeffs.p
        return 2 * np.conj(p) * hop + 2 * p * hop.conj().T
    if which == "g":
        c = coeffs
        n4 = a4.conj().T @ a4
        n2 = a2.conj().T @ a2
        return (
            c.a / c.d * (2 * n4 + eye)
            + c.c / c.d * (2 * n2 + eye)
            + 2 * c.b / c.d * hop
            + 2 * np.conj(c.b) / c.d * hop.conj().T
            + c.e * eye
        )
    raise ValueError(f"which must be 'theta' or 'g', got {which!r}")


def verify_sld(
    params: CoherenceParams,
    y: float,
    cutoff: int,
    which: str,
    fd_step: float = FD_STEP,
    tail_budget: float = DEFAULT_TAIL_BUDGET,
) -> SldReport:
    """Check d_i rho = (L rho + rho L)/2 and tr(rho L^2) = F_ii in the truncated basis."""
    params.validate()
    index = {"theta": 0, "g": 1}[which]
    rho = gaussian_to_fock(teleported_state(params, y), cutoff)
    if rho.tail_mass > tail_budget:
        raise TruncationError(f"tail mass {rho.tail_mass:.3e} exceeds budget {tail_budget:.1e}")

    def dens(p):
        return gaussian_to_fock(teleported_state(p, y), cutoff).matrix

    drho, _ = _fd_gradient(dens, params, index, fd_step)
    L = sld_operator(sld_coefficients(params, y), which, cutoff)
    lhs = 0.5 * (L @ rho.matrix + rho.matrix @ L)
    residual = np.linalg.norm(drho - lhs) / np.linalg.norm(drho)
    f_trace = float(np.trace(rho.matrix @ L @ L).real)
    closed = qfi_closed_form(params, y)
    f_closed = closed.theta_theta if which == "theta" else closed.g_g
    return SldReport(which, float(residual), f_trace, float(f_closed), float(np.trace(rho.matrix @ L).real), rho.tail_mass)


def output_number_operators(delta: float, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """n_d1 and n_d2 for d_{1,2} = (a4 +- e^{i delta} a2)/sqrt(2)."""
    a4, a2 = ladder_ops(cutoff)
    d1 = (a4 + np.exp(1j * delta) * a2) / np.sqrt(2)
    d2 = (a4 - np.exp(1j * delta) * a2) / np.sqrt(2)
    return d1.conj().T @ d1, d2.conj().T @ d2


# ------------------------------------------------------------ DV baseline


BELL_SUCCESS = 0.5


def dv_outcome_probs(params: CoherenceParams, delta: float, eta: float = 1.0) -> np.ndarray:
    """Outcome distribution (click +, click -, no information) of the DV scheme.

    Only the single-photon sector of the stellar state is used. A shared
    photon with relative phase delta and survival probability ``eta`` enables
    a linear-optics Bell measurement that succeeds with probability 1/2 and
    reveals which of (|10> +- e^{i delta}|01>)/sqrt(2) was projected onto.
    Vacuum, multiphoton events and failures fall in the last outcome.
    """
    rho = gaussian_to_fock(stellar_state(params), cutoff=1).matrix
    # basis |m, n>: |00> = 0, |01> = 1, |10> = 2, |11> = 3
    p10, p01, coh = rho[2, 2].real, rho[1, 1].real, rho[2, 1]
    interference = 2.0 * (np.exp(-1j * delta) * coh).real
    scale = eta * BELL_SUCCESS * 0.5
    plus = scale * (p10 + p01 + interference)
    minus = scale * (p10 + p01 - interference)
    return np.array([plus, minus, 1.0 - plus - minus])


def dv_scheme_fi(params: CoherenceParams, delta: float | None = None, eta: float = 1.0, fd_step: float = FD_STEP) -> FisherMatrix:
    """Brute-force FI of the DV baseline; ``delta`` defaults to theta + pi/2."""
    params.validate()
    if delta is None:
        delta = params.theta + np.pi / 2

    def probs(p):
        return dv_outcome_probs(p, delta, eta)

    base = probs(params)
    grads = [_fd_gradient(probs, params, i, fd_step)[0] for i in range(2)]
    keep = base > P_FLOOR
    F = np.array([[np.sum(grads[i][keep] * grads[j][keep] / base[keep]) for j in range(2)] for i in range(2)])
    return FisherMatrix.from_array(F, FisherKind.DV)
