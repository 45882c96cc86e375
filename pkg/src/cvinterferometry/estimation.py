"""Fisher information for estimating the coherence function (theta, |g|).

The parameter vector is always ordered (theta, |g|). Quantities are per
temporal mode.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .gaussian import CoherenceParams, LadderCovariance, ladder_matrix, symplectic_form
from .teleportation import teleported_covariance

PINV_RCOND = 1e-12
SUPPORT_RESIDUAL_TOL = 1e-8


class FisherKind(str, enum.Enum):
    QUANTUM = "quantum"
    PNR = "pnr_measurement"
    HETERODYNE = "heterodyne"
    DV = "dv_scheme"
    INTENSITY_DIFFERENCE = "intensity_difference"


@dataclass(frozen=True)
class FisherMatrix:
    theta_theta: float
    g_g: float
    theta_g: float
    kind: FisherKind

    def as_array(self) -> np.ndarray:
        return np.array([[self.theta_theta, self.theta_g], [self.theta_g, self.g_g]])

    @classmethod
    def from_array(cls, F, kind: FisherKind) -> FisherMatrix:
        F = np.asarray(F, dtype=float)
        F = 0.5 * (F + F.T)
        return cls(float(F[0, 0]), float(F[1, 1]), float(F[0, 1]), FisherKind(kind))


class SingularDerivativeError(ArithmeticError):
    """The derivative of the covariance leaves the support of the QFI kernel."""


# ------------------------------------------------------------ derivatives


def stellar_cov_derivatives(epsilon: float, g_abs: float, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Analytic d/dtheta and d/d|g| of the stellar quadrature covariance.

    The teleportation noise does not depend on (theta, |g|), so the same
    derivatives hold for the teleported state.
    """
    c, s = np.cos(theta), np.sin(theta)
    e = 0.5 * epsilon

    def block(x, z):
        # cross block of the two-mode covariance for x = eps|g|cos, z = eps|g|sin, scaled
        return np.array(
            [
                [0.0, 0.0, x, -z],
                [0.0, 0.0, z, x],
                [x, z, 0.0, 0.0],
                [-z, x, 0.0, 0.0],
            ]
        )

    d_theta = block(-e * g_abs * s, e * g_abs * c)
    d_g = block(e * c, e * s)
    return d_theta, d_g


# ---------------------------------------------------------------- QFI


def qfi_kernel(sigma: np.ndarray) -> np.ndarray:
    """16x16 (for two modes) map Sigma (x) Sigma + Omega (x) Omega / 4."""
    omega = symplectic_form(sigma.shape[0] // 2)
    return np.kron(sigma, sigma) + 0.25 * np.kron(omega, omega)


def qfi_general(sigma, d_sigma_theta: np.ndarray, d_sigma_g: np.ndarray, rcond: float = PINV_RCOND) -> FisherMatrix:
    """Gaussian QFI of a zero-mean state from its ladder covariance and derivatives.

    F_ij = 1/2 vec(d_j Sigma)^T M^+ vec(d_i Sigma) with the kernel M of
    :func:`qfi_kernel`. M is singular only along pure (symplectic eigenvalue
    1/2) directions; the pseudo-inverse is used there after checking that the
    derivatives have no component outside the support.
    """
    if isinstance(sigma, LadderCovariance):
        sigma = sigma.sigma
    M = qfi_kernel(sigma)
    Mp = np.linalg.pinv(M, rcond=rcond)
    vecs = [np.asarray(d, dtype=complex).reshape(-1) for d in (d_sigma_theta, d_sigma_g)]
    proj = M @ Mp
    for v in vecs:
        norm = np.linalg.norm(v)
        if norm and np.linalg.norm(v - proj @ v) > SUPPORT_RESIDUAL_TOL * norm:
            raise SingularDerivativeError("covariance derivative has a component in the null space of the QFI kernel")
    F = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            F[i, j] = 0.5 * (vecs[j] @ Mp @ vecs[i]).real
    return FisherMatrix.from_array(F, FisherKind.QUANTUM)


def qfi_teleported(params: CoherenceParams, y: float) -> FisherMatrix:
    """QFI of the teleported state through :func:`qfi_general`."""
    params.validate()
    cov = teleported_covariance(params.epsilon, params.g_abs, params.theta, y)
    d_theta, d_g = stellar_cov_derivatives(params.epsilon, params.g_abs, params.theta)
    return qfi_general(ladder_matrix(cov), ladder_matrix(d_theta), ladder_matrix(d_g))


def qfi_closed_form(params: CoherenceParams, y: float) -> FisherMatrix:
    """Closed-form QFI of the teleported state with noise parameter y."""
    if y < 0:
        raise ValueError(f"noise parameter must be >= 0, got {y}")
    params.validate()
    eps, g = params.epsilon, params.g_abs
    g2 = g * g
    if eps == 0:
        return FisherMatrix(0.0, 0.0, 0.0, FisherKind.QUANTUM)
    f_tt = 2 * eps**2 * g2 / (2 * y + eps * (2 + eps - eps * g2 + 2 * y))
    num = 2 * eps**2 * (-eps * (2 + eps) ** 2 + eps**3 * g2**2 - 4 * (1 + eps) * (2 + eps) * y - 4 * (2 + eps) * y**2)
    den = (
        (eps * (-1 + g2) - 2 * y)
        * (eps * (-2 - eps + eps * g2) - 2 * (1 + eps) * y)
        * (eps**2 * (-1 + g2) - 4 * (1 + y) - 2 * eps * (2 + y))
    )
    f_gg = num / den if den != 0 else np.inf
    return FisherMatrix(f_tt, f_gg, 0.0, FisherKind.QUANTUM)


def qfi_weak_limit(params: CoherenceParams) -> tuple[float, float]:
    """(F_theta_theta, F_gg) for y << epsilon << 1."""
    params.validate()
    eps, g = params.epsilon, params.g_abs
    if g >= 1.0:
        raise ZeroDivisionError("F_gg diverges at |g| = 1")
    return eps * g * g, eps / (1.0 - g * g)


# ---------------------------------------------------------------- SLD


@dataclass(frozen=True)
class SldCoefficients:
    """Coefficients of the symmetric logarithmic derivatives on modes (a4, a2).

    L_|g| = (a/d)(2 n4 + 1) + (c/d)(2 n2 + 1) + (2b/d) a4 a2^dag + (2b*/d) a4^dag a2 + e
    L_theta = 2 p* a4 a2^dag + 2 p a4^dag a2
    """

    a: float
    b: complex
    c: float
    d: float
    e: float
    p: complex
    delta_opt_g: float
    delta_opt_theta: float

    def g_coupling(self, delta: float) -> complex:
        """d1^dag d2 coefficient of L_|g| in the delayed output basis."""
        u = self.b * np.exp(1j * delta)
        return (self.a - self.c + u - np.conj(u)) / self.d

    def theta_coupling(self, delta: float) -> complex:
        """d1^dag d2 coefficient of L_theta in the delayed output basis."""
        return np.conj(self.p) * np.exp(1j * delta) - self.p * np.exp(-1j * delta)


def wrap_phase(x: float) -> float:
    """Map to (-pi, pi]."""
    w = -((-x + np.pi) % (2 * np.pi)) + np.pi
    return float(w)


def sld_coefficients(params: CoherenceParams, y: float) -> SldCoefficients:
    params.validate()
    eps, g, th = params.epsilon, params.g_abs, params.theta
    g2 = g * g
    a = 2 * eps**2 * g * (-(1 + eps) * (-2 + eps * (-1 + g2)) + 2 * (2 + eps) * y)
    b = eps * np.exp(-1j * th) * (
        -eps * (2 + eps) ** 2 + eps**3 * g2**2 - 4 * (1 + eps) * (2 + eps) * y - 4 * (2 + eps) * y**2
    )
    c = 2 * eps * g * (
        -eps * (1 + eps) * (-2 + eps * (-1 + g2)) + 2 * y * (2 + eps * (4 - eps * (-2 + g2))) + 4 * (1 + eps) * y**2
    )
    f1 = eps * (-2 + eps * (-1 + g2)) - 2 * (1 + eps) * y
    f2 = eps**2 * (-1 + g2) - 4 * (1 + y) - 2 * eps * (2 + y)
    f3 = eps * (-1 + g2) - 2 * y
    d = f1 * f2 * f3
    if d == 0:
        raise ZeroDivisionError("degenerate SLD denominator (epsilon = 0 with y = 0, or |g| = 1 with y = 0)")
    e = -eps * g * (1 / f3 + eps / f2)
    p = 1j * eps * params.g / (-eps * (-2 + eps * (-1 + g2)) + 2 * (1 + eps) * y)
    return SldCoefficients(
        a=float(a),
        b=complex(b),
        c=float(c),
        d=float(d),
        e=float(e),
        p=complex(p),
        delta_opt_g=wrap_phase(th),
        delta_opt_theta=wrap_phase(th + np.pi / 2),
    )


def sld_g_coupling_small_noise(params: CoherenceParams, delta: float) -> complex:
    """y -> 0 limit of :meth:`SldCoefficients.g_coupling`."""
    eps, g2 = params.epsilon, params.g_abs**2
    return 2j * np.sin(delta - params.theta) * (2 + eps + eps * g2) / ((-1 + g2) * (-4 - 4 * eps + eps**2 * (-1 + g2)))


# ------------------------------------------------------- measurement FI


def fi_pnr_leading_order(params: CoherenceParams, delta: float) -> FisherMatrix:
    """FI of delayed-beamsplitter photon counting, leading order in epsilon."""
    params.validate()
    eps, g = params.epsilon, params.g_abs
    s, c = np.sin(params.theta - delta), np.cos(params.theta - delta)
    den = 1.0 - g * g * c * c
    if den <= 0:
        raise ZeroDivisionError("|g cos(theta - delta)| = 1 makes the FI singular")
    return FisherMatrix(
        eps * g * g * s * s / den,
        eps * c * c / den,
        -eps * g * s * c / den,
        FisherKind.PNR,
    )


def intensity_difference_stats(params: CoherenceParams, delta: float, y: float) -> tuple[float, float]:
    """Mean and variance of O = (n_d1 - n_d2)/epsilon on the teleported state."""
    params.validate()
    eps, g = params.epsilon, params.g_abs
    if eps == 0:
        raise ZeroDivisionError("intensity-difference estimator is undefined for epsilon = 0")
    c = np.cos(params.theta - delta)
    mean = g * c
    var = (eps + y + eps * (eps / 2 + y) - eps**2 * g * g / 2 + eps**2 * g * g * c * c) / eps**2
    return float(mean), float(var)


def intensity_difference_fi(params: CoherenceParams, delta: float, y: float) -> FisherMatrix:
    """Error-propagation information (d<O>/dz)^2 / Var(O) per parameter."""
    mean, var = intensity_difference_stats(params, delta, y)
    g, s, c = params.g_abs, np.sin(params.theta - delta), np.cos(params.theta - delta)
    grad = np.array([-g * s, c])
    return FisherMatrix.from_array(np.outer(grad, grad) / var, FisherKind.INTENSITY_DIFFERENCE)


def gaussian_fi(cov: np.ndarray, d_covs) -> np.ndarray:
    """Classical FI of zero-mean Gaussian data, 1/2 tr(C^-1 dC_i C^-1 dC_j)."""
    Ci = np.linalg.inv(cov)
    k = len(d_covs)
    F = np.empty((k, k))
    for i in range(k):
        for j in range(k):
            F[i, j] = 0.5 * np.trace(Ci @ d_covs[i] @ Ci @ d_covs[j])
    return F


def heterodyne_fi(params: CoherenceParams) -> FisherMatrix:
    """FI of local heterodyne at both telescopes, no shared entanglement."""
    params.validate()
    cov = teleported_covariance(params.epsilon, params.g_abs, params.theta, 0.0) + 0.5 * np.eye(4)
    d = stellar_cov_derivatives(params.epsilon, params.g_abs, params.theta)
    return FisherMatrix.from_array(gaussian_fi(cov, d), FisherKind.HETERODYNE)
