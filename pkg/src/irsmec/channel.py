"""Fading channels, the reflecting-panel composite link, SNRs, and rates.

All gains are complex amplitudes normalized so that the mean power equals
``ref_loss * distance**-exponent``.  Line-of-sight components are unit
modulus with geometry phase ``exp(-j 2 pi d / wavelength)``; scattered
components are zero-mean unit-variance complex Gaussian.  Channels are
redrawn independently each slot (block fading) and OFDMA removes
inter-vehicle interference, so every link is a scalar.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "IrsChannelSet",
    "rician_gain",
    "rayleigh_gain",
    "composite_bs_snr",
    "rate",
    "align_phases_oracle",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class IrsChannelSet:
    """Per-panel incident/outgoing element gains plus their phase settings.

    ``incident`` and ``outgoing`` are (K, L) complex arrays; ``phases`` is a
    (K, L) float array with every entry in [0, 2pi).  The reflection
    amplitude is unity.
    """

    incident: np.ndarray
    outgoing: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        if self.incident.shape != self.outgoing.shape or \
                self.incident.shape != self.phases.shape:
            raise ValueError("incident/outgoing/phases shapes must match")
        if not (np.all(self.phases >= 0.0) and np.all(self.phases < TWO_PI)):
            raise ValueError("phases must lie in [0, 2pi)")
        if not (np.all(np.isfinite(self.incident.view(float)))
                and np.all(np.isfinite(self.outgoing.view(float)))):
            raise ValueError("channel gains must be finite")


def _complex_normal(rng: np.random.Generator, size=None) -> np.ndarray:
    """CN(0, 1) draws: independent N(0, 1/2) real and imaginary parts."""
    re = rng.normal(0.0, np.sqrt(0.5), size=size)
    im = rng.normal(0.0, np.sqrt(0.5), size=size)
    return re + 1j * im


def rician_gain(distance_m: float, exponent: float, rician_factor: float,
                los_phase_rad: float, ref_loss: float,
                rng: np.random.Generator, size=None) -> np.ndarray | complex:
    """Rician fading gain(s) at the given distance.

    ``rician_factor`` is the linear LoS/NLoS power ratio; ``inf`` gives the
    deterministic LoS-only limit and 0 collapses to Rayleigh.  ``size``
    draws that many element gains sharing the same LoS term.
    """
    if distance_m <= 0:
        raise ValueError(f"degenerate geometry: distance {distance_m} <= 0")
    scale = np.sqrt(ref_loss * distance_m ** (-exponent))
    los = np.exp(1j * los_phase_rad)
    if np.isinf(rician_factor):
        gain = los if size is None else np.full(size, los, dtype=complex)
        return scale * gain
    w_los = np.sqrt(rician_factor / (1.0 + rician_factor))
    w_nlos = np.sqrt(1.0 / (1.0 + rician_factor))
    return scale * (w_los * los + w_nlos * _complex_normal(rng, size=size))


def rayleigh_gain(distance_m: float, exponent: float, ref_loss: float,
                  rng: np.random.Generator, size=None) -> np.ndarray | complex:
    """Rayleigh fading gain(s): pure scattered component."""
    if distance_m <= 0:
        raise ValueError(f"degenerate geometry: distance {distance_m} <= 0")
    scale = np.sqrt(ref_loss * distance_m ** (-exponent))
    return scale * _complex_normal(rng, size=size)


def composite_amplitude(direct: complex, irs: IrsChannelSet) -> complex:
    """Direct path plus the phase-steered cascade over every panel element."""
    cascade = np.sum(irs.incident * np.exp(1j * irs.phases) * irs.outgoing)
    return direct + cascade


def composite_bs_snr(direct: complex, irs: IrsChannelSet,
                     tx_power_w: float, noise_w: float) -> float:
    """SNR of the reflected uplink: p |h_direct + sum cascades|^2 / noise."""
    amp = composite_amplitude(direct, irs)
    return tx_power_w * float(np.abs(amp) ** 2) / noise_w


def rate(bandwidth_hz: float, snr: float) -> float:
    """Shannon rate B log2(1 + snr) in bits/s."""
    if snr < 0:
        raise ValueError(f"snr must be nonnegative, got {snr}")
    return bandwidth_hz * np.log2(1.0 + snr)


def align_phases_oracle(irs: IrsChannelSet, direct: complex) -> np.ndarray:
    """Per-element phases that co-phase every cascaded term with the direct
    path, maximizing the composite power for independently steered elements.

    With no direct path the cascade terms are co-phased to zero angle.
    Returns a (K, L) array in [0, 2pi).
    """
    target = np.angle(direct) if direct != 0 else 0.0
    phases = (target - np.angle(irs.incident * irs.outgoing)) % TWO_PI
    # guard against 2pi appearing through rounding
    phases[phases >= TWO_PI] = 0.0
    return phases
