"""Per-device non-ideality ensembles."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .device import IDENTITY, BarrierSpec, DistortionProfile, update_probability


class SweepKind(str, enum.Enum):
    HSHIFT = "hshift"
    VSHIFT = "vshift"
    HSCALE = "hscale"
    VSCALE = "vscale"
    BARRIER = "barrier"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class DistortionSweep:
    """One kind of non-ideality at a given maximum level.

    Levels are volts for HSHIFT, k_B T for BARRIER and dimensionless otherwise.
    """

    kind: SweepKind
    max_level: float

    def __post_init__(self):
        object.__setattr__(self, "kind", SweepKind(self.kind))
        if not self.max_level >= 0:
            raise ValueError(f"max_level must be >= 0, got {self.max_level!r}")
        if self.kind in (SweepKind.HSCALE, SweepKind.VSCALE) and self.max_level >= 1:
            raise ValueError(f"{self.kind} max_level must be < 1 (zero-gain device), got {self.max_level}")


@dataclass(frozen=True)
class DeviceEnsemble:
    profiles: tuple[DistortionProfile, ...]
    barriers: tuple[BarrierSpec, ...]

    def __post_init__(self):
        if len(self.profiles) != len(self.barriers):
            raise ValueError("profiles and barriers must have equal length")

    @property
    def n(self) -> int:
        return len(self.profiles)

    def arrays(self) -> dict[str, np.ndarray]:
        """Column arrays consumed by the sampling kernel."""
        return {
            "h_shift": np.array([p.h_shift for p in self.profiles], dtype=float),
            "v_shift": np.array([p.v_shift for p in self.profiles], dtype=float),
            "h_scale": np.array([p.h_scale for p in self.profiles], dtype=float),
            "v_scale": np.array([p.v_scale for p in self.profiles], dtype=float),
            "p_update": np.array([update_probability(b) for b in self.barriers], dtype=float),
        }


def ideal_ensemble(n: int) -> DeviceEnsemble:
    return DeviceEnsemble((IDENTITY,) * n, (BarrierSpec(),) * n)


def sample_ensemble(n: int, sweep: DistortionSweep, rng: np.random.Generator, symmetric: bool = False) -> DeviceEnsemble:
    """Draw one level per device, uniform in [0, max_level], for a single non-ideality.

    With ``symmetric=True`` levels are drawn from [-max_level, max_level]
    instead (not allowed for barriers).
    """
    low = -sweep.max_level if symmetric else 0.0
    if symmetric and sweep.kind is SweepKind.BARRIER:
        raise ValueError("barrier levels cannot be negative; symmetric draws unsupported")
    levels = rng.uniform(low, sweep.max_level, size=n)
    profiles, barriers = [], []
    for u in levels.tolist():
        profile, barrier = IDENTITY, BarrierSpec()
        match sweep.kind:
            case SweepKind.HSHIFT:
                profile = DistortionProfile(h_shift=u)
            case SweepKind.VSHIFT:
                profile = DistortionProfile(v_shift=u)
            case SweepKind.HSCALE:
                profile = DistortionProfile(h_scale=1.0 - u)
            case SweepKind.VSCALE:
                profile = DistortionProfile(v_scale=1.0 - u)
            case SweepKind.BARRIER:
                barrier = BarrierSpec(u_over_kbt=u)
        profiles.append(profile)
        barriers.append(barrier)
    return DeviceEnsemble(tuple(profiles), tuple(barriers))
