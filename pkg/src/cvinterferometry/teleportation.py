"""Continuous-variable teleportation of one telescope's stellar mode.

Two routes are provided: the closed-form teleported covariance (stellar
covariance plus isotropic noise ``y`` on the teleported mode) and a sampled
run of the beamsplitter / homodyne / feedforward protocol in phase space.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .gaussian import (
    CoherenceParams,
    GaussianState,
    apply_beamsplitter,
    lossy_tms_state,
    stellar_covariance,
    stellar_state,
    tensor,
)

FEEDFORWARD_GAIN = np.sqrt(2.0)
CHUNK_SIZE = 1 << 16


@dataclass(frozen=True)
class LinkParams:
    """Entanglement link: source squeezing ``r``, amplitude transmissivity ``T``.

    ``r_eff`` satisfies exp(-2 r_eff) = 1 - T^2 + exp(-2 r) T^2 and
    ``y = 2 exp(-2 r_eff)`` is the noise added to the teleported mode.
    """

    r: float
    T: float
    r_eff: float
    y: float


def effective_squeezing(r: float, T: float) -> LinkParams:
    if not r >= 0:
        raise ValueError(f"squeezing parameter must be >= 0, got {r}")
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"amplitude transmissivity must lie in [0, 1], got {T}")
    t2 = T * T
    residual = (1.0 - t2) + np.exp(-2.0 * r) * t2
    if residual == 0.0:
        return LinkParams(r, T, np.inf, 0.0)
    return LinkParams(r, T, -0.5 * np.log(residual), 2.0 * residual)


def link_from_noise(y: float) -> LinkParams:
    """Lossless link whose noise parameter equals ``y``."""
    if not 0.0 <= y <= 2.0:
        raise ValueError(f"noise parameter must lie in [0, 2], got {y}")
    r = np.inf if y == 0 else -0.5 * np.log(y / 2.0)
    return LinkParams(r, 1.0, r, y)


def teleported_covariance(epsilon: float, g_abs: float, theta: float, y: float) -> np.ndarray:
    if y < 0:
        raise ValueError(f"noise parameter must be >= 0, got {y}")
    return stellar_covariance(epsilon, g_abs, theta) + np.diag([y, y, 0.0, 0.0])


def teleported_state(params: CoherenceParams, link: LinkParams | float) -> GaussianState:
    """State at telescope B after teleportation, modes (teleported a4, stationary a2).

    ``link`` is a :class:`LinkParams` or directly the noise parameter y.
    """
    params.validate()
    y = link.y if isinstance(link, LinkParams) else float(link)
    return GaussianState.from_cov(teleported_covariance(params.epsilon, params.g_abs, params.theta, y))


# ------------------------------------------------------------------ protocol


def _joint_state(params: CoherenceParams, r: float, T: float) -> GaussianState:
    """Modes (a5, a2, a6, a4) after the telescope-A beamsplitter.

    a5 = (a1 + a3)/sqrt(2) replaces a1 and a6 = (a3 - a1)/sqrt(2) replaces a3.
    """
    joint = tensor(stellar_state(params), lossy_tms_state(r, T))
    return apply_beamsplitter(joint, 0, 2)


def _feedforward_map() -> np.ndarray:
    """Linear map from the 8 post-beamsplitter quadratures to (q4', p4', q2, p2).

    The TMS has q3 ~ -q4 and p3 ~ p4, so the displacement that cancels the
    resource contribution is q4 + g q5, p4 - g p6 with unity gain g = sqrt(2).
    """
    A = np.zeros((4, 8))
    A[0, 6] = 1.0
    A[0, 0] = FEEDFORWARD_GAIN  # q5
    A[1, 7] = 1.0
    A[1, 5] = -FEEDFORWARD_GAIN  # p6
    A[2, 2] = 1.0
    A[3, 3] = 1.0
    return A


def protocol_covariance(params: CoherenceParams, r: float, T: float) -> np.ndarray:
    """Exact covariance produced by the protocol, by linear propagation."""
    A = _feedforward_map()
    return A @ _joint_state(params, r, T).cov @ A.T


@dataclass(frozen=True)
class TeleportSampleReport:
    n_samples: int
    seed: int
    empirical_mean: np.ndarray
    empirical_cov: np.ndarray
    target_cov: np.ndarray
    stderr: np.ndarray
    mean_stderr: np.ndarray

    @property
    def deviation(self) -> np.ndarray:
        return self.empirical_cov - self.target_cov

    @property
    def max_abs_deviation(self) -> float:
        return float(np.max(np.abs(self.deviation)))

    @property
    def max_z(self) -> float:
        """Largest |deviation| in units of its standard error."""
        return float(np.max(np.abs(self.deviation) / self.stderr))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["entry", "target", "empirical", "stderr"])
        for i in range(4):
            for j in range(4):
                w.writerow([f"V[{i},{j}]", repr(float(self.target_cov[i, j])),
                            repr(float(self.empirical_cov[i, j])), repr(float(self.stderr[i, j]))])
        for i in range(4):
            w.writerow([f"x[{i}]", "0.0", repr(float(self.empirical_mean[i])), repr(float(self.mean_stderr[i]))])
        return buf.getvalue()


def _sqrt_cov(cov: np.ndarray) -> np.ndarray:
    w, Q = np.linalg.eigh(cov)
    if w[0] < -1e-9 * max(1.0, w[-1]):
        raise ValueError("sampling covariance is not positive semidefinite")
    return Q * np.sqrt(np.clip(w, 0.0, None))


def _chunk_moments(seq: np.random.SeedSequence, size: int, L: np.ndarray, A: np.ndarray):
    rng = np.random.default_rng(seq)
    z = rng.standard_normal((size, L.shape[1]))
    out = (z @ L.T) @ A.T
    s1 = out.sum(axis=0)
    s2 = out.T @ out
    prod = out[:, :, None] * out[:, None, :]
    s4 = np.einsum("nij,nij->ij", prod, prod)
    return s1, s2, s4


def simulate_teleportation(
    params: CoherenceParams,
    r: float,
    T: float,
    n_samples: int,
    seed: int = 0,
    workers: int = 1,
) -> TeleportSampleReport:
    """Sample the teleportation protocol and compare with the closed-form covariance.

    Phase-space points of stellar x lossy-TMS are drawn from the joint
    Wigner function, mixed on the telescope-A beamsplitter, and the homodyne
    readings q5, p6 are fed forward onto mode a4. Samples are split into
    fixed-size chunks, each with its own child of ``SeedSequence(seed)``, so
    results do not depend on ``workers``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    joint = _joint_state(params, r, T)
    L = _sqrt_cov(joint.cov)
    A = _feedforward_map()

    sizes = [CHUNK_SIZE] * (n_samples // CHUNK_SIZE)
    if n_samples % CHUNK_SIZE:
        sizes.append(n_samples % CHUNK_SIZE)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda a: _chunk_moments(a[0], a[1], L, A), zip(seqs, sizes)))
    else:
        parts = [_chunk_moments(s, n, L, A) for s, n in zip(seqs, sizes)]
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    s4 = sum(p[2] for p in parts)

    n = n_samples
    mean = s1 / n
    # the pipeline is zero-mean by construction, so second moments about zero
    # are unbiased covariance estimates
    cov = s2 / n
    var_prod = np.clip(s4 / n - cov**2, 0.0, None)
    stderr = np.sqrt(var_prod / n)
    mean_stderr = np.sqrt(np.diag(cov) / n)

    link = effective_squeezing(r, T)
    target = teleported_covariance(params.epsilon, params.g_abs, params.theta, link.y)
    return TeleportSampleReport(n, seed, mean, cov, target, stderr, mean_stderr)
