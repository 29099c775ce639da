"""THz link budget: antenna gain, transfer function, multi-RIS received
power, SNR/SNIR and Shannon capacity."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .validation import NeverDetectable, check_angle, check_finite, check_nonnegative, check_positive

SPEED_OF_LIGHT = 299_792_458.0
BOLTZMANN = 1.380649e-23

# Bisection bracket (m) for threshold distances.
MIN_DISTANCE = 1e-3
MAX_DISTANCE = 1e4


@dataclass(frozen=True)
class PhyParams:
    """Physical-layer parameters; defaults are the simulation table values."""

    f: float = 1e12
    W: float = 3e9
    k_abs: float = 0.0016
    T_kelvin: float = 300.0
    P_tx: float = 1.0
    alpha: float = math.radians(15.0)
    boltzmann: float = BOLTZMANN
    snr_threshold_db: float = 10.0

    def __post_init__(self):
        for name in ("f", "W", "T_kelvin", "P_tx", "boltzmann"):
            check_positive(getattr(self, name), name)
        check_nonnegative(self.k_abs, "k_abs")
        check_angle(self.alpha, "alpha")
        check_finite(self.snr_threshold_db, "snr_threshold_db")

    @property
    def noise_power(self) -> float:
        return noise_power(self.T_kelvin, self.W, self.boltzmann)

    @property
    def snr_threshold(self) -> float:
        return from_db(self.snr_threshold_db)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f

    def with_(self, **changes) -> PhyParams:
        return replace(self, **changes)


@dataclass(frozen=True)
class LinkBudget:
    p_eu: float
    g_be: float
    g_eu: float
    snr: float
    capacity: float


def to_db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0 else -math.inf


def from_db(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def antenna_gain(alpha: float) -> float:
    """Gain of an antenna with full beamwidth ``alpha`` (rad)."""
    check_angle(alpha, "alpha", upper=2 * math.pi)
    return 2.0 / (1.0 - math.cos(alpha / 2.0))


def transfer_function(d: float, params: PhyParams) -> float:
    """Free-space spreading times molecular absorption over ``d`` metres."""
    check_positive(d, "d")
    return SPEED_OF_LIGHT / (4.0 * math.pi * params.f * d) * math.exp(-0.5 * params.k_abs * d)


def received_power(p_tx: float, distances, element_counts, params: PhyParams) -> float:
    """Power at the receiver before antenna gains.

    ``distances`` holds one entry per hop and ``element_counts`` one entry
    per RIS on the chain (so ``len(distances) == len(element_counts) + 1``).
    With optimal phase alignment every RIS multiplies the amplitude by its
    illuminated element count, so the grouped multi-RIS product collapses to
    ``p_tx * (prod H)^2 * (prod N')^2``.
    """
    distances = list(distances)
    element_counts = list(element_counts)
    if not distances:
        raise ValueError("a link needs at least one hop")
    if len(distances) != len(element_counts) + 1:
        raise ValueError("need exactly one element count per RIS between hops")
    if any(n < 0 for n in element_counts):
        raise ValueError("element counts must be >= 0")
    amplitude = math.prod(transfer_function(d, params) for d in distances)
    amplitude *= math.prod(float(n) for n in element_counts)
    return p_tx * amplitude * amplitude


def noise_power(T_kelvin: float, W: float, boltzmann: float = BOLTZMANN) -> float:
    return boltzmann * T_kelvin * W


def snr(p_eu: float, g_be: float, g_eu: float, params: PhyParams) -> float:
    return p_eu * g_be * g_eu / params.noise_power


def snir(p_eu: float, g_be: float, g_eu: float, params: PhyParams, interference_sum: float = 0.0) -> float:
    if interference_sum < 0:
        raise ValueError("interference_sum must be >= 0")
    return p_eu * g_be * g_eu / (params.noise_power + interference_sum)


def interference_power(delta_eu: float, g_be_prime: float, g_eu: float) -> float:
    """Interference at a receiver from a beam delivering ``delta_eu`` watts."""
    if delta_eu < 0 or g_be_prime < 0 or g_eu < 0:
        raise ValueError("interference inputs must be >= 0")
    return delta_eu * g_be_prime * g_eu


def capacity(params: PhyParams, snr_value: float) -> float:
    if snr_value < 0:
        raise ValueError("snr must be >= 0")
    return params.W * math.log2(1.0 + snr_value)


def link_budget(distances, element_counts, params: PhyParams, alpha: float | None = None) -> LinkBudget:
    alpha = params.alpha if alpha is None else alpha
    g = antenna_gain(alpha)
    p_eu = received_power(params.P_tx, distances, element_counts, params)
    s = snr(p_eu, g, g, params)
    return LinkBudget(p_eu, g, g, s, capacity(params, s))


def threshold_distance(
    params: PhyParams,
    element_counts=(),
    prior_hops=(),
    alpha: float | None = None,
    tol: float = 1e-6,
) -> float:
    """Final-hop length at which the SNR drops to the detection threshold.

    With no RISs this is the plain threshold distance of a direct link.
    The result is capped at the top of the search bracket.
    """
    alpha = params.alpha if alpha is None else alpha
    g = antenna_gain(alpha)
    target = params.snr_threshold
    prior = list(prior_hops)
    counts = list(element_counts)

    def margin(d):
        return snr(received_power(params.P_tx, prior + [d], counts, params), g, g, params) - target

    lo, hi = MIN_DISTANCE, MAX_DISTANCE
    if margin(lo) < 0:
        raise NeverDetectable(f"SNR below threshold already at {lo} m")
    if margin(hi) >= 0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if margin(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
