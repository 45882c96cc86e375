"""Observation and network models: source strength, mode rate, fibre loss, rate decay."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .estimation import qfi_closed_form
from .fock import dv_scheme_fi
from .gaussian import CoherenceParams
from .teleportation import effective_squeezing

SPEED_OF_LIGHT = 299_792_458.0

# reference point: magnitude -5 gives 0.4 photons per temporal mode on 6 m
# apertures at 800 nm
REFERENCE_MAGNITUDE = -5.0
REFERENCE_EPSILON = 0.4
REFERENCE_DIAMETER = 6.0
REFERENCE_WAVELENGTH = 800e-9
REFERENCE_BANDWIDTH = 0.1e-9
PAPER_MODE_RATE = 150e9


@dataclass(frozen=True)
class ObservationParams:
    wavelength: float = REFERENCE_WAVELENGTH
    bandwidth: float = REFERENCE_BANDWIDTH
    telescope_diameter: float = REFERENCE_DIAMETER
    magnitude: float = REFERENCE_MAGNITUDE

    def __post_init__(self):
        for name in ("wavelength", "bandwidth", "telescope_diameter"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


class SourceTopology(str, enum.Enum):
    MIDPOINT = "midpoint"
    AT_TELESCOPE_A = "at_telescope_A"


@dataclass(frozen=True)
class NetworkParams:
    loss_db_per_km: float = 0.2
    baseline_km: float = 0.0
    source_topology: SourceTopology = SourceTopology.MIDPOINT
    base_rate_hz: float = PAPER_MODE_RATE
    reference_km: float = 10.0
    poly_order: float = 2.0

    def __post_init__(self):
        if self.loss_db_per_km < 0 or self.baseline_km < 0 or self.poly_order < 0:
            raise ValueError("loss, baseline and poly_order must be non-negative")
        object.__setattr__(self, "source_topology", SourceTopology(self.source_topology))

    def with_baseline(self, baseline_km: float) -> NetworkParams:
        return NetworkParams(**{**self.__dict__, "baseline_km": baseline_km})


def epsilon_from_magnitude(obs: ObservationParams) -> float:
    """Mean photons per temporal mode, scaled from the reference star.

    A temporal mode lasts ~1/bandwidth, so the occupation is set by the
    spectral flux density and the collecting area; bandwidth cancels.
    """
    area = (obs.telescope_diameter / REFERENCE_DIAMETER) ** 2
    return REFERENCE_EPSILON * 10.0 ** (-(obs.magnitude - REFERENCE_MAGNITUDE) / 2.5) * area


def temporal_mode_rate(obs: ObservationParams, calibration: float = 1.0) -> float:
    """Temporal modes per second, c * bandwidth / wavelength^2 times ``calibration``."""
    return calibration * SPEED_OF_LIGHT * obs.bandwidth / obs.wavelength**2


def paper_rate_calibration(obs: ObservationParams | None = None) -> float:
    """Calibration factor that turns the reference band into 150 GHz."""
    return PAPER_MODE_RATE / temporal_mode_rate(obs or ObservationParams())


def threshold_squeezing(epsilon: float) -> tuple[float, float]:
    """Effective squeezing (r', dB) at which the noise parameter equals epsilon."""
    if not 0 < epsilon <= 2:
        raise ValueError(f"threshold needs 0 < epsilon <= 2, got {epsilon}")
    return 0.5 * np.log(2.0 / epsilon), 10.0 * np.log10(2.0 / epsilon)


def power_transmissivity(loss_db_per_km: float, length_km: float) -> float:
    return 10.0 ** (-loss_db_per_km * length_km / 10.0)


def transmissivity_from_baseline(net: NetworkParams) -> float:
    """Amplitude transmissivity T of one entanglement-distribution arm."""
    if net.source_topology is SourceTopology.MIDPOINT:
        arm = net.baseline_km / 2.0
    else:
        arm = net.baseline_km
    return float(np.sqrt(power_transmissivity(net.loss_db_per_km, arm)))


def repetition_rate(net: NetworkParams, length_km: float) -> float:
    """Repeater rate: constant up to ``reference_km``, then polynomial decay."""
    if length_km <= net.reference_km:
        return net.base_rate_hz
    return net.base_rate_hz * (net.reference_km / length_km) ** net.poly_order


def duty_factor(net: NetworkParams, length_km: float, mode_rate: float) -> float:
    return min(1.0, repetition_rate(net, length_km) / mode_rate)


# ------------------------------------------------------------------ curves


class Scheme(str, enum.Enum):
    CV = "cv_no_repeater"
    DV = "dv_no_repeater"


def fi_vs_baseline_curve(params: CoherenceParams, r: float, net: NetworkParams, scheme, baselines) -> np.ndarray:
    """Rows (L_km, F_theta_theta) without repeaters.

    CV: the fibre sets T, hence r' and y, then the closed-form QFI. DV: the
    brute-force DV FI with the shared photon surviving the full baseline.
    """
    scheme = Scheme(scheme)
    rows = []
    for L in np.asarray(baselines, dtype=float):
        if scheme is Scheme.CV:
            T = transmissivity_from_baseline(net.with_baseline(L))
            f = qfi_closed_form(params, effective_squeezing(r, T).y).theta_theta
        else:
            eta = power_transmissivity(net.loss_db_per_km, L)
            f = dv_scheme_fi(params, eta=eta).theta_theta
        rows.append((L, f))
    return np.array(rows)


def effective_squeezing_curve(r: float, net: NetworkParams, baselines) -> np.ndarray:
    """Rows (L_km, r')."""
    rows = []
    for L in np.asarray(baselines, dtype=float):
        rows.append((L, effective_squeezing(r, transmissivity_from_baseline(net.with_baseline(L))).r_eff))
    return np.array(rows)


def fi_ratio_vs_distance(
    params: CoherenceParams, r_eff: float, net: NetworkParams, mode_rate: float, baselines
) -> np.ndarray:
    """Rows (L_km, ratio_direct, ratio_cv) relative to the lossless ideal.

    Direct detection brings both beams to the midpoint, which maps
    epsilon -> eta epsilon at fixed g. The repeater scheme keeps r' fixed
    and loses only coverage of temporal modes when its rate falls short.
    """
    ideal = qfi_closed_form(params, 0.0).theta_theta
    y = 2.0 * np.exp(-2.0 * r_eff)
    cv_static = qfi_closed_form(params, y).theta_theta / ideal
    rows = []
    for L in np.asarray(baselines, dtype=float):
        eta = power_transmissivity(net.loss_db_per_km, L / 2.0)
        direct = qfi_closed_form(params.replace(epsilon=params.epsilon * eta), 0.0).theta_theta / ideal
        rows.append((L, direct, cv_static * duty_factor(net, L, mode_rate)))
    return np.array(rows)


def crossover_distance(rows: np.ndarray) -> float | None:
    """First grid distance beyond which ratio_cv stays above ratio_direct."""
    above = rows[:, 2] > rows[:, 1]
    if not above[-1]:
        return None
    idx = len(above) - 1
    while idx > 0 and above[idx - 1]:
        idx -= 1
    return float(rows[idx, 0])
