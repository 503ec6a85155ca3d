"""Deterministic RF propagation: two-ray ground path loss, SINR, channel-state
thresholds, and shadowing-based link delivery probability / ETX.

All power quantities are linear watts; distances are meters.  The shadowing
standard deviation is in dB because log-normal shadowing is Gaussian in the
log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

# Distances below this are clamped before evaluating the d^-4 law, which is
# singular at zero.  Deployments never place distinct nodes this close.
MIN_DISTANCE_M = 1.0


class UnusableLinkError(ValueError):
    """A link whose delivery probability is zero cannot carry traffic."""


@dataclass(frozen=True)
class RadioConfig:
    """Physical-layer constants from which all geometry classification derives.

    Defaults reproduce a 250 m decode range and a 550 m carrier-sense range
    under the two-ray model (the classic simulator constants for that pairing).
    The capture threshold and noise floor are conventional values; both are
    overridable.  ``shadowing_sigma`` feeds only the link-quality model used
    for routing; packet-level simulation uses deterministic mean power.
    """

    tx_power: float = 0.28183815          # W
    antenna_height_tx: float = 1.5        # m
    antenna_height_rx: float = 1.5        # m
    antenna_gain_tx: float = 1.0
    antenna_gain_rx: float = 1.0
    rx_threshold: float = 3.652e-10       # W, decode sensitivity (-> 250 m)
    cs_threshold: float = 1.559e-11       # W, carrier sense floor (-> 550 m)
    capture_sinr: float = 10.0            # power ratio required to decode
    noise_floor: float = 1.0e-13          # W
    shadowing_sigma: float = 4.0          # dB
    # Minimum power that can seize a receiver's correlator: a signal at least
    # this strong, arriving first, locks the radio and deafens it to later
    # frames.  Preamble detection works one capture ratio below the payload
    # sensitivity, hence the default rx_threshold / capture_sinr.
    preamble_threshold: float | None = None

    def __post_init__(self):
        if self.tx_power <= 0:
            raise ValueError("tx_power must be positive")
        if not (self.rx_threshold > self.cs_threshold > 0):
            raise ValueError("thresholds must satisfy rx_threshold > cs_threshold > 0")
        if self.capture_sinr <= 1:
            raise ValueError("capture_sinr must exceed 1")
        if self.noise_floor < 0:
            raise ValueError("noise_floor must be non-negative")
        if self.shadowing_sigma < 0:
            raise ValueError("shadowing_sigma must be non-negative")
        if self.antenna_height_tx <= 0 or self.antenna_height_rx <= 0:
            raise ValueError("antenna heights must be positive")
        if self.antenna_gain_tx <= 0 or self.antenna_gain_rx <= 0:
            raise ValueError("antenna gains must be positive")
        if self.preamble_threshold is None:
            object.__setattr__(self, "preamble_threshold",
                               self.rx_threshold / self.capture_sinr)
        if not 0 < self.preamble_threshold <= self.rx_threshold:
            raise ValueError("preamble_threshold must lie in (0, rx_threshold]")

    @property
    def power_numerator(self) -> float:
        """Pt*Gt*Gr*ht^2*hr^2, the distance-independent part of the two-ray law."""
        return (self.tx_power * self.antenna_gain_tx * self.antenna_gain_rx
                * self.antenna_height_tx ** 2 * self.antenna_height_rx ** 2)


class ChannelState(Enum):
    """State of the channel for an ordered transmitter -> listener pair."""

    RECEPTION = "reception"          # mean power >= decode sensitivity
    CARRIER_SENSE = "carrier_sense"  # detectable, defers CSMA, not decodable
    NEGLIGIBLE = "negligible"        # below the carrier-sense floor


def two_ray_rx_power(distance: float, cfg: RadioConfig) -> float:
    """Mean received power (W) at ``distance`` under the two-ray ground model.

    Pure d^-4 far-field law: Pt*Gt*Gr*ht^2*hr^2 / d^4, no shadowing.
    """
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    return cfg.power_numerator / distance ** 4


def distance_for_power(power: float, cfg: RadioConfig) -> float:
    """Distance at which mean two-ray power equals ``power`` (inverse of the d^-4 law)."""
    if power <= 0:
        raise ValueError("power must be positive")
    return (cfg.power_numerator / power) ** 0.25


def transmission_range(cfg: RadioConfig) -> float:
    """Distance where mean power crosses the decode sensitivity."""
    return distance_for_power(cfg.rx_threshold, cfg)


def carrier_sense_range(cfg: RadioConfig) -> float:
    """Distance where mean power crosses the carrier-sense floor."""
    return distance_for_power(cfg.cs_threshold, cfg)


def _distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def channel_state(tx_pos: tuple[float, float], rx_pos: tuple[float, float],
                  cfg: RadioConfig) -> ChannelState:
    """Classify the tx -> rx channel by mean power against the two thresholds.

    Coincident (or near-coincident) positions are treated as 1 m apart.
    """
    if not all(math.isfinite(c) for c in (*tx_pos, *rx_pos)):
        raise ValueError("positions must be finite")
    d = max(_distance(tx_pos, rx_pos), MIN_DISTANCE_M)
    power = two_ray_rx_power(d, cfg)
    if power >= cfg.rx_threshold:
        return ChannelState.RECEPTION
    if power >= cfg.cs_threshold:
        return ChannelState.CARRIER_SENSE
    return ChannelState.NEGLIGIBLE


def sinr(intended_power: float, interferer_powers: list[float] | tuple[float, ...],
         noise: float) -> float:
    """Signal to interference-plus-noise power ratio.

    Returns 0 for a zero signal and +inf when the denominator is zero.
    """
    if intended_power < 0:
        raise ValueError("intended_power must be non-negative")
    if noise < 0:
        raise ValueError("noise must be non-negative")
    total = noise
    for p in interferer_powers:
        if p < 0:
            raise ValueError("interferer powers must be non-negative")
        total += p
    if intended_power == 0.0:
        return 0.0
    if total == 0.0:
        return math.inf
    return intended_power / total


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def delivery_probability(distance: float, cfg: RadioConfig) -> float:
    """Probability that the log-normal-shadowed received power decodes.

    The fade margin is the mean power over the decode sensitivity in dB;
    delivery succeeds when the Gaussian dB shadowing term does not eat the
    margin, i.e. Phi(margin_db / sigma).  Monotone non-increasing in distance.
    """
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    if cfg.shadowing_sigma <= 0:
        raise ValueError("delivery_probability requires shadowing_sigma > 0")
    mean_power = two_ray_rx_power(distance, cfg)
    margin_db = 10.0 * math.log10(mean_power / cfg.rx_threshold)
    return _norm_cdf(margin_db / cfg.shadowing_sigma)


def etx(p_forward: float, p_reverse: float) -> float:
    """Expected transmissions to deliver over a lossy link: 1/(p_f * p_r)."""
    for p in (p_forward, p_reverse):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability out of range: {p}")
    if p_forward == 0.0 or p_reverse == 0.0:
        raise UnusableLinkError("link has zero delivery probability in one direction")
    return 1.0 / (p_forward * p_reverse)
