"""Biphoton source model: temporal modes, their cross-correlation, and the
joint spectral intensity of a frequency-entangled photon pair.

All quantities are SI: wavelengths in meters, times in seconds, angular
frequencies in rad/s. The difference-frequency axis ``omega`` is centered
on zero for degenerate signal/idler center wavelengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

SPEED_OF_LIGHT = 299792458.0  # m/s, exact

# Temporal width parameter is sqrt(2) times the spectral RMS width: this is
# the unique calibration under which the correlation main peak
# exp(-delta^2 T^2) and the spectral envelope exp(-omega^2 / 8 sigma^2)
# are a transform pair.
DELTA_PER_SIGMA = math.sqrt(2.0)


def bandwidth_nm_to_rads(delta_lambda: float, center_lambda: float) -> float:
    """Convert a wavelength bandwidth to an angular-frequency bandwidth.

    Parameters
    ----------
    delta_lambda : float
        Wavelength bandwidth in meters (e.g. 10e-9 for 10 nm).
    center_lambda : float
        Center wavelength in meters.

    Returns
    -------
    float
        RMS angular-frequency bandwidth in rad/s,
        ``2 pi c delta_lambda / center_lambda**2``.
    """
    if delta_lambda <= 0.0 or center_lambda <= 0.0:
        raise ValueError("bandwidth and center wavelength must be positive")
    return 2.0 * math.pi * SPEED_OF_LIGHT * delta_lambda / center_lambda**2


@dataclass(frozen=True)
class BiphotonSource:
    """Down-conversion source parameters.

    ``sigma_spectral`` is the RMS spectral width of a single down-converted
    photon (rad/s); ``delta_temporal`` is derived from it at construction.
    Center wavelengths must satisfy energy conservation with the pump.
    """

    sigma_spectral: float
    center_wavelength_signal: float = 810e-9
    center_wavelength_idler: float = 810e-9
    pump_wavelength: float = 405e-9
    delta_temporal: float = field(init=False)

    def __post_init__(self):
        if self.sigma_spectral <= 0.0:
            raise ConfigurationError("sigma_spectral must be positive")
        for name in ("center_wavelength_signal", "center_wavelength_idler", "pump_wavelength"):
            if getattr(self, name) <= 0.0:
                raise ConfigurationError(f"{name} must be positive")
        lhs = 1.0 / self.center_wavelength_signal + 1.0 / self.center_wavelength_idler
        rhs = 1.0 / self.pump_wavelength
        if abs(lhs - rhs) > 1e-6 * rhs:
            raise ConfigurationError(
                "center wavelengths violate energy conservation: "
                f"1/{self.center_wavelength_signal} + 1/{self.center_wavelength_idler} != "
                f"1/{self.pump_wavelength}"
            )
        object.__setattr__(self, "delta_temporal", DELTA_PER_SIGMA * self.sigma_spectral)

    @classmethod
    def from_bandwidth(
        cls,
        delta_lambda: float,
        center_lambda: float = 810e-9,
        pump_wavelength: float = 405e-9,
    ) -> "BiphotonSource":
        """Build a degenerate source from a wavelength bandwidth (meters)."""
        sigma = bandwidth_nm_to_rads(delta_lambda, center_lambda)
        return cls(
            sigma_spectral=sigma,
            center_wavelength_signal=center_lambda,
            center_wavelength_idler=center_lambda,
            pump_wavelength=pump_wavelength,
        )


@dataclass(frozen=True)
class DelayProfile:
    """Ordered interfaces of a layered sample: (delay_s, weight) pairs.

    Delays are nonnegative and strictly increasing; weights are positive and
    sum to one.
    """

    layers: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.layers:
            raise ConfigurationError("profile needs at least one layer")
        taus = [t for t, _ in self.layers]
        weights = [a for _, a in self.layers]
        if any(t < 0.0 for t in taus):
            raise ConfigurationError("delays must be nonnegative")
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ConfigurationError("delays must be strictly increasing")
        if any(a <= 0.0 for a in weights):
            raise ConfigurationError("weights must be positive")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ConfigurationError("weights must sum to 1 within 1e-12")
        object.__setattr__(self, "layers", tuple((float(t), float(a)) for t, a in self.layers))

    @classmethod
    def single(cls, tau: float) -> "DelayProfile":
        return cls(layers=((tau, 1.0),))

    @classmethod
    def normalized(cls, pairs) -> "DelayProfile":
        """Build a profile from (delay, raw_weight) pairs, normalizing weights."""
        pairs = sorted((float(t), float(a)) for t, a in pairs)
        total = sum(a for _, a in pairs)
        if total <= 0.0:
            raise ConfigurationError("weights must have positive total")
        return cls(layers=tuple((t, a / total) for t, a in pairs))

    @property
    def delays(self) -> np.ndarray:
        return np.array([t for t, _ in self.layers])

    @property
    def weights(self) -> np.ndarray:
        return np.array([a for _, a in self.layers])


@dataclass(frozen=True)
class ForwardModelConfig:
    """Fringe convention of the spectral forward model.

    ``phi`` is a constant interferometric phase offset; ``fringe_sign``
    selects the sign of the modulation relative to each model's canonical
    form (+1 keeps the printed form, -1 flips the fringe).
    """

    phi: float = 0.0
    fringe_sign: int = +1

    def __post_init__(self):
        if self.fringe_sign not in (+1, -1):
            raise ConfigurationError("fringe_sign must be +1 or -1")


def temporal_modes(source: BiphotonSource, profile: DelayProfile, t: np.ndarray):
    """Signal and idler temporal mode envelopes on a time grid.

    The signal mode is a single Gaussian ``exp(-delta^2 t^2 / 2)``; the idler
    mode adds one delayed replica per layer, weighted by the layer weight.

    Returns ``(f_signal, f_idler)`` as float arrays of the shape of ``t``.
    """
    t = np.asarray(t, dtype=float)
    d2 = source.delta_temporal**2
    f_signal = np.exp(-0.5 * d2 * t**2)
    f_idler = np.exp(-0.5 * d2 * t**2)
    for tau, weight in profile.layers:
        f_idler = f_idler + weight * np.exp(-0.5 * d2 * (t + tau) ** 2)
    return f_signal, f_idler


def cross_correlation(source: BiphotonSource, profile: DelayProfile, t_values: np.ndarray) -> np.ndarray:
    """Two-photon cross-correlation function, main peak normalized to 1.

    Closed form: a unit Gaussian peak at T = 0 plus, per layer, a pair of
    half-weight Gaussian side peaks at T = +/- tau_i:

        R(T) = exp(-delta^2 T^2)
             + sum_i (a_i / 2) [exp(-delta^2 (T + tau_i)^2)
                                + exp(-delta^2 (T - tau_i)^2)]

    R is even in T (exactly, including floating point).
    """
    t_values = np.asarray(t_values, dtype=float)
    d2 = source.delta_temporal**2
    r = np.exp(-d2 * t_values**2)
    for tau, weight in profile.layers:
        r = r + 0.5 * weight * (
            np.exp(-d2 * (t_values + tau) ** 2) + np.exp(-d2 * (t_values - tau) ** 2)
        )
    return r


def envelope_density(omega: np.ndarray, sigma: float) -> np.ndarray:
    """Difference-frequency envelope as a unit-mass Gaussian density.

    Normal density with RMS width ``2 sigma``:
    ``exp(-omega^2 / 8 sigma^2) / sqrt(2 pi (2 sigma)^2)``.
    """
    omega = np.asarray(omega, dtype=float)
    two_sigma = 2.0 * sigma
    return np.exp(-(omega**2) / (8.0 * sigma**2)) / math.sqrt(2.0 * math.pi * two_sigma**2)


def envelope_peak_normalized(omega: np.ndarray, sigma: float) -> np.ndarray:
    """Same envelope with peak value 1 (dimensionless)."""
    omega = np.asarray(omega, dtype=float)
    return np.exp(-(omega**2) / (8.0 * sigma**2))


def fringe_factor(
    profile: DelayProfile, cfg: ForwardModelConfig, omega: np.ndarray
) -> np.ndarray:
    """Weighted interference term ``sum_i a_i cos(omega tau_i + phi)``."""
    omega = np.asarray(omega, dtype=float)
    out = np.zeros_like(omega)
    for tau, weight in profile.layers:
        out = out + weight * np.cos(omega * tau + cfg.phi)
    return out


def joint_spectral_intensity(
    source: BiphotonSource,
    profile: DelayProfile,
    omega: np.ndarray,
    cfg: ForwardModelConfig = ForwardModelConfig(),
) -> np.ndarray:
    """Joint spectral intensity over the difference frequency.

    ``F(omega) = envelope_density(omega) *
    [1 - fringe_sign * sum_i a_i cos(omega tau_i + phi)] / 2``.

    Nonnegative everywhere because the layer weights sum to one; tiny
    negative rounding residues at fringe zeros are clipped to 0.
    """
    omega = np.asarray(omega, dtype=float)
    bracket = 1.0 - cfg.fringe_sign * fringe_factor(profile, cfg, omega)
    return envelope_density(omega, source.sigma_spectral) * np.maximum(bracket, 0.0) / 2.0
