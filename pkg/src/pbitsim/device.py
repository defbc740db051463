"""Compact p-bit device model.

A p-bit output is ``sgn[y + alpha * rnd(-1, +1)] * vdd / 2`` where ``y`` is a
(possibly distorted) tanh of the input voltage.  Barrier heights enter only
through the Arrhenius retention time and the per-sweep update probability
derived from it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants

MU0 = constants.mu_0
KB = constants.k

# largest argument exp() can take in float64 without overflow
_EXP_MAX = math.log(np.finfo(np.float64).max)


@dataclass(frozen=True)
class PBitParams:
    """Device parameters shared by every p-bit in a network.

    ``alpha`` is the noise amplitude, ``beta`` the transfer gain (1/V),
    ``kappa`` the coupling coefficient (inverse pseudo-temperature) and
    ``vdd`` the supply swing in volts.
    """

    alpha: float = 1.0
    beta: float = 1.0
    kappa: float = 0.8
    vdd: float = 2.0

    def __post_init__(self):
        for name in ("alpha", "beta", "kappa", "vdd"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")

    @property
    def half_swing(self) -> float:
        return self.vdd / 2.0


@dataclass(frozen=True)
class DistortionProfile:
    """Per-device deformation of the tanh characteristic.

    ``h_shift`` is an input offset in volts, ``v_shift`` an offset of the
    activation, and the two scales multiply the gain and the amplitude.
    """

    h_shift: float = 0.0
    v_shift: float = 0.0
    h_scale: float = 1.0
    v_scale: float = 1.0

    def __post_init__(self):
        if not (self.h_scale > 0 and self.v_scale > 0):
            raise ValueError("h_scale and v_scale must be positive")
        for name in ("h_shift", "v_shift", "h_scale", "v_scale"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def is_identity(self) -> bool:
        return self == IDENTITY

    def distorted_fields(self) -> tuple[str, ...]:
        """Names of the fields that differ from the identity profile."""
        return tuple(
            name
            for name in ("h_shift", "v_shift", "h_scale", "v_scale")
            if getattr(self, name) != getattr(IDENTITY, name)
        )


IDENTITY = DistortionProfile()


@dataclass(frozen=True)
class BarrierSpec:
    """Energy barrier in units of k_B T and the attempt time in seconds."""

    u_over_kbt: float = 0.0
    tau0: float = 1e-9

    def __post_init__(self):
        if not self.u_over_kbt >= 0:
            raise ValueError(f"u_over_kbt must be >= 0, got {self.u_over_kbt!r}")
        if not self.tau0 > 0:
            raise ValueError(f"tau0 must be > 0, got {self.tau0!r}")


def activation(v_in, params: PBitParams, d: DistortionProfile = IDENTITY):
    """Distorted tanh characteristic.

    ``y = v_scale * tanh(h_scale * beta * (v_in - h_shift)) + v_shift``.
    Accepts scalars or arrays; non-finite inputs raise ``ValueError``.
    """
    v = np.asarray(v_in, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("activation input must be finite")
    y = d.v_scale * np.tanh(d.h_scale * params.beta * (v - d.h_shift)) + d.v_shift
    return float(y) if y.ndim == 0 else y


def plus_probability(y, alpha: float):
    """Exact probability that the thresholded output is ``+vdd/2``."""
    return np.clip((1.0 + np.asarray(y, dtype=float) / alpha) / 2.0, 0.0, 1.0)


def threshold(y, u, alpha: float):
    """Map activation ``y`` and uniform noise ``u`` in (-1, 1) to +-1.

    An exact zero resolves to +1.
    """
    return np.where(np.asarray(y) + alpha * np.asarray(u) >= 0.0, 1, -1)


def sample_output(y, params: PBitParams, rng: np.random.Generator, size=None):
    """Draw p-bit output voltage(s) in ``{-vdd/2, +vdd/2}``, one per element of ``y``."""
    if size is None:
        size = np.shape(y) or None
    u = 2.0 * rng.random(size) - 1.0
    return threshold(y, u, params.alpha) * params.half_swing


def input_voltage(i: int, net, outputs, params: PBitParams, kappa: float | None = None) -> float:
    """Input voltage of device ``i`` given the output voltages of all devices."""
    if not 0 <= i < net.n:
        raise IndexError(f"device index {i} out of range for n={net.n}")
    outputs = np.asarray(outputs, dtype=float)
    if outputs.shape != (net.n,):
        raise ValueError(f"expected {net.n} outputs, got shape {outputs.shape}")
    k = params.kappa if kappa is None else kappa
    m = outputs / params.half_swing
    return float(k * (net.h[i] + net.j[i] @ m))


def retention_time(b: BarrierSpec) -> tuple[float, bool]:
    """Arrhenius retention time ``tau0 * exp(U / k_B T)``.

    Returns ``(tau, saturated)``; on overflow ``tau`` is the largest finite
    float and ``saturated`` is True.
    """
    log_tau = math.log(b.tau0) + b.u_over_kbt
    if log_tau > _EXP_MAX:
        return float(np.finfo(np.float64).max), True
    return b.tau0 * math.exp(b.u_over_kbt), False


def update_probability(b: BarrierSpec) -> float:
    """Per-sweep probability that a device re-samples its state."""
    return math.exp(-b.u_over_kbt)


def barrier_from_material(ms: float, hk: float, volume: float, temperature: float) -> float:
    """Energy barrier ``mu0 * Ms * Hk * volume / 2`` in units of k_B T.

    ``ms`` and ``hk`` in A/m, ``volume`` in m^3, ``temperature`` in K.
    """
    for name, value in (("ms", ms), ("hk", hk), ("volume", volume), ("temperature", temperature)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}")
    return MU0 * ms * hk * volume / (2.0 * KB * temperature)
